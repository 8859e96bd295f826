#pragma once

// Frequency-space linear theory: the upper-bidiagonal mode system
//   d/dt g(k) = -a_k g(k) + b_k g(k+1),   a_k = k(k^2 - 1 + delta_1(k)),
//   b_k = i (1 - A_mu) A_rhosigma k,      k >= 1,
// its explicit triangular diagonalizers S, S^-1 by partial products, the
// semigroup e^{-tA}, and the Duhamel propagator used by the exponential
// integrator.
//
// Two diagonalizer variants exist. The partial-product formulas with row one
// zeroed out (its first row set to the unit vector) leave a residual
// b_1 * S_{2,j} in row one whenever the coupling is on; extending the same
// products to all rows k >= 1 gives the exact eigenvector matrix of the
// bidiagonal system (back-substitution), which is what production uses.

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "muskat/errors.hpp"
#include "muskat/geometry.hpp"
#include "muskat/spectral.hpp"

namespace muskat {

inline double eigenvalue_a(int k) {
  if (k < 1) throw std::invalid_argument("eigenvalue_a: k must be >= 1");
  return double(k) * (double(k) * double(k) - 1.0 + (k == 1 ? 1.0 : 0.0));
}

struct BidiagonalSystem {
  int n = 0;
  std::vector<double> a;    // a[k-1], k = 1..n, strictly increasing, a_1 = 1
  std::vector<Complex> b;   // b[k-1], purely imaginary

  double coupling() const { return n > 0 ? std::abs(b[0]) : 0.0; }
};

inline BidiagonalSystem build_system(int n, const PhysicalParams& params) {
  if (n < 2) throw std::invalid_argument("build_system: n must be >= 2");
  params.validate();
  BidiagonalSystem sys;
  sys.n = n;
  sys.a.resize(static_cast<std::size_t>(n));
  sys.b.resize(static_cast<std::size_t>(n));
  const double coupling = (1.0 - params.A_mu) * params.A_rhosigma;
  for (int k = 1; k <= n; ++k) {
    sys.a[static_cast<std::size_t>(k - 1)] = eigenvalue_a(k);
    sys.b[static_cast<std::size_t>(k - 1)] = Complex{0.0, coupling * double(k)};
  }
  return sys;
}

enum class DiagonalizerVariant { first_row_identity, repaired };

// Upper-triangular S (eigenvectors) and S^-1 with unit diagonals, dense
// row-major storage. Entries are assembled by cumulative partial products in
// extended precision to control cancellation in the a_k - a_j ratios.
struct DiagonalizerPair {
  BidiagonalSystem sys;
  DiagonalizerVariant variant = DiagonalizerVariant::repaired;
  std::vector<Complex> s_mat;   // S[i*n + j]
  std::vector<Complex> s_inv;   // S^-1[i*n + j]

  int n() const noexcept { return sys.n; }
  Complex S(int i, int j) const { return s_mat[idx(i, j)]; }
  Complex Sinv(int i, int j) const { return s_inv[idx(i, j)]; }

  std::vector<Complex> apply_s(std::span<const Complex> z) const { return apply(s_mat, z); }
  std::vector<Complex> apply_s_inv(std::span<const Complex> z) const { return apply(s_inv, z); }

  // l1 -> l1 operator norm: max column sum of absolute values.
  double s_norm_l1() const { return column_norm(s_mat); }
  double s_inv_norm_l1() const { return column_norm(s_inv); }

  // Norm in the weighted l1 with weight w(k) = e^{nu k t} k^s; never exceeds
  // the unweighted norm for nondecreasing weights (upper-triangular support).
  double weighted_norm(const std::vector<Complex>& mat, double s, double nu, double t) const {
    const int nn = sys.n;
    double worst = 0.0;
    for (int j = 0; j < nn; ++j) {
      const double wj = std::exp(nu * (j + 1) * t) * std::pow(double(j + 1), s);
      double col = 0.0;
      for (int i = 0; i <= j; ++i) {
        const double wi = std::exp(nu * (i + 1) * t) * std::pow(double(i + 1), s);
        col += wi * std::abs(mat[idx(i, j)]);
      }
      worst = std::max(worst, col / wj);
    }
    return worst;
  }

 private:
  std::size_t idx(int i, int j) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(sys.n) +
           static_cast<std::size_t>(j);
  }

  std::vector<Complex> apply(const std::vector<Complex>& mat, std::span<const Complex> z) const {
    const int nn = sys.n;
    if (static_cast<int>(z.size()) != nn) {
      throw std::invalid_argument("DiagonalizerPair: dimension mismatch");
    }
    std::vector<Complex> out(static_cast<std::size_t>(nn));
    for (int i = 0; i < nn; ++i) {
      Complex acc{0.0, 0.0};
      for (int j = i; j < nn; ++j) acc += mat[idx(i, j)] * z[static_cast<std::size_t>(j)];
      out[static_cast<std::size_t>(i)] = acc;
    }
    return out;
  }

  double column_norm(const std::vector<Complex>& mat) const {
    const int nn = sys.n;
    double worst = 0.0;
    for (int j = 0; j < nn; ++j) {
      double col = 0.0;
      for (int i = 0; i <= j; ++i) col += std::abs(mat[idx(i, j)]);
      worst = std::max(worst, col);
    }
    return worst;
  }
};

inline DiagonalizerPair build_diagonalizer(const BidiagonalSystem& sys,
                                           DiagonalizerVariant variant = DiagonalizerVariant::repaired) {
  using LComplex = std::complex<long double>;
  const int n = sys.n;
  DiagonalizerPair pair;
  pair.sys = sys;
  pair.variant = variant;
  pair.s_mat.assign(static_cast<std::size_t>(n) * n, Complex{0.0, 0.0});
  pair.s_inv.assign(static_cast<std::size_t>(n) * n, Complex{0.0, 0.0});
  auto at = [n](int i, int j) {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j);
  };

  // S^-1 rows: entry(k, j+1) = entry(k, j) * (-b_j) / (a_k - a_j+1).
  for (int k = 1; k <= n; ++k) {
    LComplex prod{1.0L, 0.0L};
    pair.s_inv[at(k - 1, k - 1)] = Complex{1.0, 0.0};
    for (int j = k + 1; j <= n; ++j) {
      const LComplex bj{static_cast<long double>(sys.b[static_cast<std::size_t>(j - 2)].real()),
                        static_cast<long double>(sys.b[static_cast<std::size_t>(j - 2)].imag())};
      const long double gap = static_cast<long double>(sys.a[static_cast<std::size_t>(k - 1)]) -
                              static_cast<long double>(sys.a[static_cast<std::size_t>(j - 1)]);
      if (gap == 0.0L) throw SolverError("build_diagonalizer: eigenvalue collision");
      prod *= -bj / gap;
      pair.s_inv[at(k - 1, j - 1)] =
          Complex{static_cast<double>(prod.real()), static_cast<double>(prod.imag())};
    }
  }

  // S columns by eigenvector back-substitution: S(k, j) = S(k+1, j) * b_k / (a_k - a_j).
  for (int j = 1; j <= n; ++j) {
    LComplex prod{1.0L, 0.0L};
    pair.s_mat[at(j - 1, j - 1)] = Complex{1.0, 0.0};
    for (int k = j - 1; k >= 1; --k) {
      const LComplex bk{static_cast<long double>(sys.b[static_cast<std::size_t>(k - 1)].real()),
                        static_cast<long double>(sys.b[static_cast<std::size_t>(k - 1)].imag())};
      const long double gap = static_cast<long double>(sys.a[static_cast<std::size_t>(k - 1)]) -
                              static_cast<long double>(sys.a[static_cast<std::size_t>(j - 1)]);
      if (gap == 0.0L) throw SolverError("build_diagonalizer: eigenvalue collision");
      prod *= bk / gap;
      pair.s_mat[at(k - 1, j - 1)] =
          Complex{static_cast<double>(prod.real()), static_cast<double>(prod.imag())};
    }
  }

  if (variant == DiagonalizerVariant::first_row_identity) {
    for (int j = 2; j <= n; ++j) {
      pair.s_mat[at(0, j - 1)] = Complex{0.0, 0.0};
      pair.s_inv[at(0, j - 1)] = Complex{0.0, 0.0};
    }
  }
  return pair;
}

// Max-abs entry of S^-1 M S - diag(-a) over rows >= first_row (1-based).
// Products are accumulated in extended precision; M is the upper-bidiagonal
// matrix M(k,k) = -a_k, M(k,k+1) = b_k.
inline double diagonalization_residual(const BidiagonalSystem& sys, const DiagonalizerPair& pair,
                                       int first_row = 1) {
  using LComplex = std::complex<long double>;
  const int n = sys.n;
  if (pair.n() != n) throw std::invalid_argument("diagonalization_residual: dimension mismatch");
  // T = M S (upper triangular)
  std::vector<LComplex> T(static_cast<std::size_t>(n) * n, LComplex{0.0L, 0.0L});
  auto at = [n](int i, int j) {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j);
  };
  for (int l = 1; l <= n; ++l) {
    for (int j = l; j <= n; ++j) {
      LComplex acc = -LComplex{static_cast<long double>(sys.a[static_cast<std::size_t>(l - 1)]), 0.0L} *
                     LComplex{static_cast<long double>(pair.S(l - 1, j - 1).real()),
                              static_cast<long double>(pair.S(l - 1, j - 1).imag())};
      if (l < n && j >= l + 1) {
        const Complex bl = sys.b[static_cast<std::size_t>(l - 1)];
        const Complex s = pair.S(l, j - 1);
        acc += LComplex{static_cast<long double>(bl.real()), static_cast<long double>(bl.imag())} *
               LComplex{static_cast<long double>(s.real()), static_cast<long double>(s.imag())};
      }
      T[at(l - 1, j - 1)] = acc;
    }
  }
  long double worst = 0.0L;
  for (int k = first_row; k <= n; ++k) {
    for (int j = k; j <= n; ++j) {
      LComplex acc{0.0L, 0.0L};
      for (int l = k; l <= j; ++l) {
        const Complex si = pair.Sinv(k - 1, l - 1);
        acc += LComplex{static_cast<long double>(si.real()), static_cast<long double>(si.imag())} *
               T[at(l - 1, j - 1)];
      }
      if (k == j) acc += LComplex{static_cast<long double>(sys.a[static_cast<std::size_t>(k - 1)]), 0.0L};
      worst = std::max(worst, std::abs(acc));
    }
  }
  return static_cast<double>(worst);
}

// Max-abs entry of S S^-1 - I.
inline double identity_residual(const DiagonalizerPair& pair) {
  using LComplex = std::complex<long double>;
  const int n = pair.n();
  long double worst = 0.0L;
  for (int i = 1; i <= n; ++i) {
    for (int j = i; j <= n; ++j) {
      LComplex acc{0.0L, 0.0L};
      for (int l = i; l <= j; ++l) {
        const Complex a = pair.S(i - 1, l - 1);
        const Complex b = pair.Sinv(l - 1, j - 1);
        acc += LComplex{static_cast<long double>(a.real()), static_cast<long double>(a.imag())} *
               LComplex{static_cast<long double>(b.real()), static_cast<long double>(b.imag())};
      }
      if (i == j) acc -= 1.0L;
      worst = std::max(worst, std::abs(acc));
    }
  }
  return static_cast<double>(worst);
}

// Mode-wise decay e^{-a_k dt} for k >= 1, mirrored to k <= -1; the zero mode
// passes through unchanged (the semigroup acts on mean-zero functions).
inline SpectralFunction semigroup_apply(const SpectralFunction& g, double dt) {
  if (!(dt >= 0.0)) throw std::invalid_argument("semigroup_apply: dt must be >= 0");
  SpectralFunction out = g;
  for (int k = 1; k <= g.n_max(); ++k) {
    out.set_coef(k, g.coef(k) * std::exp(-eigenvalue_a(k) * dt));
  }
  return out;
}

// phi1(z) = (e^z - 1)/z, phi2(z) = (e^z - 1 - z)/z^2, stable near z = 0.
inline double phi1(double z) {
  if (std::abs(z) < 1e-5) return 1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0;
  return std::expm1(z) / z;
}
inline double phi2(double z) {
  if (std::abs(z) < 1e-4) return 0.5 + z / 6.0 + z * z / 24.0 + z * z * z / 120.0;
  return (std::expm1(z) - z) / (z * z);
}

// One Duhamel update of the mean-zero modes in the diagonalized frame:
//   history empty : S e^{-A dt} S^-1 pf
//   {G0}          : + dt phi1 * S^-1-frame G0              (exponential Euler)
//   {G0, G1}      : + dt (phi1 G0 + phi2 (G1 - G0))        (two-stage weights)
// Negative modes follow by conjugation.
inline SpectralFunction duhamel_propagate(const SpectralFunction& pf,
                                          std::span<const SpectralFunction> nonlinear_history,
                                          double dt, const DiagonalizerPair& pair) {
  if (!(dt >= 0.0)) throw std::invalid_argument("duhamel_propagate: dt must be >= 0");
  if (nonlinear_history.size() > 2) {
    throw std::invalid_argument("duhamel_propagate: unsupported history length");
  }
  const int n = pair.n();
  if (pf.n_max() > n) throw std::invalid_argument("duhamel_propagate: dimension mismatch");
  if (std::abs(pf.coef(0)) > 1e-12) {
    throw std::invalid_argument("duhamel_propagate: input must be mean-zero");
  }

  auto modes_of = [n](const SpectralFunction& g) {
    if (g.n_max() > n) throw std::invalid_argument("duhamel_propagate: dimension mismatch");
    std::vector<Complex> z(static_cast<std::size_t>(n), Complex{0.0, 0.0});
    for (int k = 1; k <= g.n_max(); ++k) z[static_cast<std::size_t>(k - 1)] = g.coef(k);
    return z;
  };

  std::vector<Complex> y = pair.apply_s_inv(modes_of(pf));
  std::vector<Complex> g0, g1;
  if (!nonlinear_history.empty()) g0 = pair.apply_s_inv(modes_of(nonlinear_history[0]));
  if (nonlinear_history.size() == 2) g1 = pair.apply_s_inv(modes_of(nonlinear_history[1]));

  for (int k = 1; k <= n; ++k) {
    const double z = -pair.sys.a[static_cast<std::size_t>(k - 1)] * dt;
    Complex v = y[static_cast<std::size_t>(k - 1)] * std::exp(z);
    if (!g0.empty()) v += dt * phi1(z) * g0[static_cast<std::size_t>(k - 1)];
    if (!g1.empty()) {
      v += dt * phi2(z) * (g1[static_cast<std::size_t>(k - 1)] - g0[static_cast<std::size_t>(k - 1)]);
    }
    y[static_cast<std::size_t>(k - 1)] = v;
  }

  const std::vector<Complex> z_new = pair.apply_s(y);
  SpectralFunction out(pf.n_max());
  for (int k = 1; k <= pf.n_max(); ++k) out.set_coef(k, z_new[static_cast<std::size_t>(k - 1)]);
  return out;
}

}  // namespace muskat

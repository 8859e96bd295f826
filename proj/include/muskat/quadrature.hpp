#pragma once

// Principal-value quadrature on the torus and the closed-form oracle family
//
//   I1(k, k_1..k_n) = ∫_T sin(k b/2)/(2 sin(b/2)) Π_j sin(k_j b/2)/(k_j sin(b/2)) db
//   I2(k, k_1..k_n) = same with kernel cos(b/2) sin(k b/2)/(2 sin(b/2))
//
// used as golden values for the singular integrals in the contour solver.
//
// Quadrature nodes are uniform and shifted off the singularity by half a
// cell, b_j = 2π(j+1/2)/m − π; they are symmetric about 0, so odd-kernel
// principal values cancel exactly and smooth 2π-periodic integrands are
// integrated spectrally. Index combinations with an odd number of even
// integers among {k, k_j} make the integrand only 4π-periodic (a derivative
// jump at ±π as a 2π-periodic function); for those the plain rule is O(m^-2)
// and refined_midpoint (Richardson over m, 2m, 4m) is the right comparator.

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdlib>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "muskat/errors.hpp"
#include "muskat/spectral.hpp"

namespace muskat {

struct QuadratureRule {
  std::size_t m = 0;
  std::vector<double> nodes;  // b_j = 2π(j+1/2)/m − π, no node at 0
  double weight = 0.0;        // uniform 2π/m

  static QuadratureRule midpoint(std::size_t m) {
    if (m < 2 || m % 2 != 0) {
      throw std::invalid_argument("QuadratureRule: node count must be even and >= 2");
    }
    QuadratureRule rule;
    rule.m = m;
    rule.weight = kTwoPi / double(m);
    rule.nodes.resize(m);
    for (std::size_t j = 0; j < m; ++j) {
      rule.nodes[j] = kTwoPi * (double(j) + 0.5) / double(m) - kPi;
    }
    return rule;
  }
};

// Offset of the shifted sample grid: alpha_i − b_j lands on x0 + 2π l / m
// with l = (i − j) mod m when alpha_i = 2π i / m and b_j are midpoint nodes.
inline double shifted_grid_offset(std::size_t m) { return kPi * (double(m) - 1.0) / double(m); }

inline double pv_integral(std::span<const double> kernel_samples) {
  const std::size_t m = kernel_samples.size();
  if (m == 0) throw std::invalid_argument("pv_integral: empty sample vector");
  double acc = 0.0;
  for (double v : kernel_samples) {
    if (!std::isfinite(v)) throw SolverError("pv_integral: non-finite kernel sample");
    acc += v;
  }
  return acc * kTwoPi / double(m);
}

// Slope quotient Δ_b f(a) = (f(a−b) − f(a)) / (2 sin(b/2)).
inline double delta_beta(const SpectralFunction& f, double alpha, double beta) {
  const double s = std::sin(beta / 2.0);
  if (std::abs(s) < 1e-12) {
    throw std::invalid_argument("delta_beta: beta is at the kernel singularity");
  }
  return (f(alpha - beta) - f(alpha)) / (2.0 * s);
}

// ---------------------------------------------------------------------------
// Closed-form oracle values.
// ---------------------------------------------------------------------------

struct OracleIndex {
  int k = 0;
  std::vector<int> ks;  // nonzero integers, possibly empty

  void validate() const {
    for (int kj : ks) {
      if (kj == 0) throw std::invalid_argument("OracleIndex: product indices must be nonzero");
    }
  }
};

namespace detail {

// ∫_{-π}^{π} cos(q b/2) db = 2 sin(qπ/2) / (q/2) ... reduced to the half-angle
// form 2·sin(qπ/2)/q with the q = 0 limit π. Vanishes for even q != 0.
inline double half_angle_cos_integral(long long q) {
  if (q == 0) return kPi;
  if (q % 2 == 0) return 0.0;
  const long long r = ((q % 4) + 4) % 4;  // odd q: 1 -> +1, 3 -> -1
  return 2.0 * (r == 1 ? 1.0 : -1.0) / double(q);
}

// I1(k, A) = ∫_T sin(k b/2) cos(A b/2) / (2 sin(b/2)) db, exact.
// Odd in k, even in A. Reduction: I1(k, A) = I1(k+A, 0) − Σ_{n=0}^{A-1} h(A−k−2n−1)
// with h the half-angle integral above; base values I1(odd, 0) = π and
// I1(2l, 0) = 4 Σ_{j=1}^{l} (−1)^{j+1}/(2j−1).
inline double oracle_I1_pair(long long k, long long A) {
  if (k == 0) return 0.0;
  if (k < 0) return -oracle_I1_pair(-k, A);
  A = std::llabs(A);
  double corr = 0.0;
  for (long long n = 0; n < A; ++n) corr += half_angle_cos_integral(A - k - 2 * n - 1);
  const long long K = k + A;
  double base;
  if (K % 2 == 1) {
    base = kPi;
  } else {
    base = 0.0;
    for (long long j = 1; j <= K / 2; ++j) {
      base += 4.0 * ((j % 2 == 1) ? 1.0 : -1.0) / double(2 * j - 1);
    }
  }
  return base - corr;
}

// Product-to-sum in the kernel: cos(x) sin(kx) = (sin((k+1)x) + sin((k−1)x))/2.
inline double oracle_I2_pair(long long k, long long A) {
  if (k == 0) return 0.0;
  return 0.5 * (oracle_I1_pair(k + 1, A) + oracle_I1_pair(k - 1, A));
}

// Expands Π_j sin(k_j b/2)/(k_j sin(b/2)) into Σ_s cnt(s) e^{i(A0−2s)b/2} with
// A0 = Σ(|k_j|−1); cnt is the coefficient sequence of Π_j (1 + x + … + x^{|k_j|−1}).
struct ProductExpansion {
  std::vector<double> counts;
  long long a0 = 0;
  double denom = 1.0;
};

inline ProductExpansion expand_dirichlet_product(const OracleIndex& idx) {
  idx.validate();
  ProductExpansion ex;
  ex.counts = {1.0};
  for (int kj : idx.ks) {
    const long long a = std::llabs(static_cast<long long>(kj));
    ex.denom *= double(a);
    ex.a0 += a - 1;
    std::vector<double> next(ex.counts.size() + static_cast<std::size_t>(a) - 1, 0.0);
    for (std::size_t i = 0; i < ex.counts.size(); ++i) {
      for (long long q = 0; q < a; ++q) next[i + static_cast<std::size_t>(q)] += ex.counts[i];
    }
    ex.counts = std::move(next);
  }
  return ex;
}

template <class PairFn>
inline double oracle_reduce(const OracleIndex& idx, PairFn&& pair_value) {
  if (idx.k == 0) return 0.0;
  const ProductExpansion ex = expand_dirichlet_product(idx);
  double acc = 0.0;
  for (std::size_t s = 0; s < ex.counts.size(); ++s) {
    acc += ex.counts[s] * pair_value(static_cast<long long>(idx.k),
                                     ex.a0 - 2 * static_cast<long long>(s));
  }
  return acc / ex.denom;
}

}  // namespace detail

inline double oracle_I1_pair(long long k, long long A) { return detail::oracle_I1_pair(k, A); }
inline double oracle_I2_pair(long long k, long long A) { return detail::oracle_I2_pair(k, A); }

inline double oracle_I1(const OracleIndex& idx) {
  return detail::oracle_reduce(idx, detail::oracle_I1_pair);
}

inline double oracle_I2(const OracleIndex& idx) {
  return detail::oracle_reduce(idx, detail::oracle_I2_pair);
}

// Integrand factories for quadrature cross-checks. The Dirichlet ratios are
// evaluated directly; midpoint nodes never hit sin(b/2) = 0.
inline double oracle_integrand_I1(const OracleIndex& idx, double beta) {
  const double s = std::sin(beta / 2.0);
  double v = std::sin(idx.k * beta / 2.0) / (2.0 * s);
  for (int kj : idx.ks) v *= std::sin(kj * beta / 2.0) / (kj * s);
  return v;
}

inline double oracle_integrand_I2(const OracleIndex& idx, double beta) {
  return std::cos(beta / 2.0) * oracle_integrand_I1(idx, beta);
}

// Midpoint rule with `levels` Richardson extrapolation steps (error O(h^2)
// per level removed). Exact values on 2π-periodic trig polynomials are
// preserved since the extrapolation weights sum to one.
template <class F>
inline double refined_midpoint(F&& integrand, std::size_t m0, int levels = 2) {
  std::vector<double> row;  // Richardson tableau, one diagonal kept
  std::vector<double> prev;
  for (int l = 0; l <= levels; ++l) {
    const std::size_t m = m0 << l;
    const auto rule = QuadratureRule::midpoint(m);
    double acc = 0.0;
    for (double b : rule.nodes) acc += integrand(b);
    row.assign(1, acc * rule.weight);
    for (int j = 1; j <= l; ++j) {
      const double p = std::pow(4.0, j);
      row.push_back((p * row[static_cast<std::size_t>(j - 1)] - prev[static_cast<std::size_t>(j - 1)]) / (p - 1.0));
    }
    prev = row;
  }
  return prev.back();
}

// ---------------------------------------------------------------------------
// Numerical check of the convolution bound for the model nonlinear terms
//
//   I(a) = pv ∫ Π_{j<=l} f_j(a−b) Π_{j>l} Δ_b f_j(a) K(b) db,
//   K = 1/(2 sin(b/2))  or  1/(2 tan(b/2)),
//
// whose Fourier coefficients are bounded by C (Π|f_j|) * (Π |k||f_j|) with
// C = 4 (sin kernel) resp. 10/3 (tan kernel). Returns the weighted norm of I
// and the bound without the constant.
// ---------------------------------------------------------------------------

enum class SingularKernel { half_sin, half_tan };

struct NonlinearBoundCheck {
  double lhs = 0.0;  // ||I||_{F^{s,1}_nu}
  double rhs = 0.0;  // convolution bound, constant omitted
};

inline NonlinearBoundCheck nonlinear_term_bound_check(
    std::span<const SpectralFunction> fs, std::size_t l, double s, double nu, double t,
    SingularKernel kernel, std::size_t m_alpha = 0) {
  const std::size_t n = fs.size();
  if (l > n) throw std::invalid_argument("nonlinear_term_bound_check: split index l > n");
  if (!(0.0 <= s && s <= 1.0)) throw std::invalid_argument("nonlinear_term_bound_check: need 0 <= s <= 1");

  int band = 0;
  for (const auto& f : fs) band += f.n_max();
  if (m_alpha == 0) m_alpha = detail::fft_size(2 * static_cast<std::size_t>(band) + 2);
  if (m_alpha < 2 * static_cast<std::size_t>(band) + 1) {
    throw SolverError("nonlinear_term_bound_check: alpha grid too small for the product band");
  }

  // beta quadrature at three dyadic refinements of the alpha grid, combined
  // by Richardson extrapolation pointwise in alpha.
  constexpr int kLevels = 2;
  const std::size_t m_base = 4 * m_alpha;
  std::vector<std::vector<double>> level_values;  // [level][i]
  std::vector<std::vector<double>> f_int(n);
  for (std::size_t j = 0; j < n; ++j) f_int[j] = to_grid(fs[j], m_alpha);

  for (int lev = 0; lev <= kLevels; ++lev) {
    const std::size_t mb = m_base << lev;
    const std::size_t ratio = mb / m_alpha;
    const auto rule = QuadratureRule::midpoint(mb);
    const double x0 = shifted_grid_offset(mb);
    std::vector<std::vector<double>> f_shift(n);
    for (std::size_t j = 0; j < n; ++j) f_shift[j] = to_grid_offset(fs[j], mb, x0);

    std::vector<double> vals(m_alpha, 0.0);
    for (std::size_t i = 0; i < m_alpha; ++i) {
      double acc = 0.0;
      for (std::size_t q = 0; q < mb; ++q) {
        const double b = rule.nodes[q];
        const double sb = std::sin(b / 2.0);
        const std::size_t idx = (i * ratio + mb - q) % mb;
        double prod = 1.0;
        for (std::size_t j = 0; j < l; ++j) prod *= f_shift[j][idx];
        for (std::size_t j = l; j < n; ++j) {
          prod *= (f_shift[j][idx] - f_int[j][i]) / (2.0 * sb);
        }
        const double kern = (kernel == SingularKernel::half_sin)
                                ? 1.0 / (2.0 * sb)
                                : std::cos(b / 2.0) / (2.0 * sb);
        acc += prod * kern;
      }
      vals[i] = acc * rule.weight;
    }
    level_values.push_back(std::move(vals));
  }

  std::vector<double> samples(m_alpha);
  for (std::size_t i = 0; i < m_alpha; ++i) {
    double r0 = level_values[0][i], r1 = level_values[1][i], r2 = level_values[2][i];
    const double a1 = (4.0 * r1 - r0) / 3.0;
    const double a2 = (4.0 * r2 - r1) / 3.0;
    samples[i] = (16.0 * a2 - a1) / 15.0;
  }

  NonlinearBoundCheck out;
  const SpectralFunction result = from_grid(samples, band);
  // Homogeneous norm for s > 0, nonhomogeneous at s = 0 (where the zero mode
  // carries weight one on both sides of the bound).
  out.lhs = wiener_norm(result, {s, nu, t}, /*homogeneous=*/s > 0.0);

  // Convolution bound: sequences over k in [-band, band].
  const int width = band;
  std::vector<double> conv(2 * static_cast<std::size_t>(width) + 1, 0.0);
  conv[static_cast<std::size_t>(width)] = 1.0;  // delta at k = 0
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<double> g(2 * static_cast<std::size_t>(width) + 1, 0.0);
    for (int k = -fs[j].n_max(); k <= fs[j].n_max(); ++k) {
      const double mag = std::abs(fs[j].coef(k));
      g[static_cast<std::size_t>(k + width)] = (j < l) ? mag : std::abs(k) * mag;
    }
    std::vector<double> next(2 * static_cast<std::size_t>(width) + 1, 0.0);
    for (int k1 = -width; k1 <= width; ++k1) {
      const double a = conv[static_cast<std::size_t>(k1 + width)];
      if (a == 0.0) continue;
      for (int k2 = -width; k2 <= width; ++k2) {
        const int k = k1 + k2;
        if (std::abs(k) > width) continue;
        next[static_cast<std::size_t>(k + width)] += a * g[static_cast<std::size_t>(k2 + width)];
      }
    }
    conv = std::move(next);
  }
  for (int k = -width; k <= width; ++k) {
    const double w = std::exp(nu * std::abs(k) * t) * std::pow(double(std::abs(k)), s);
    out.rhs += w * conv[static_cast<std::size_t>(k + width)];
  }
  return out;
}

}  // namespace muskat

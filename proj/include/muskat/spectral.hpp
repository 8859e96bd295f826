#pragma once

// Real 2π-periodic functions represented by truncated Fourier series,
// weighted Wiener-norm calculus and the elementary Fourier-multiplier
// operators (Hilbert transform, |∂α|, ∂α^p, mean-zero projection) together
// with dealiased collocation-grid transforms.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "muskat/errors.hpp"
#include "muskat/fft.hpp"

namespace muskat {

inline constexpr double kPi = std::numbers::pi_v<double>;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi_v<double>;

using Complex = std::complex<double>;

// Truncated Fourier series of a real function on the torus. Coefficients are
// stored for k in [-n_max, n_max] with the Hermitian redundancy kept
// explicit; mutation goes through set_coef which mirrors the conjugate mode,
// so f(-k) == conj(f(k)) holds by construction.
class SpectralFunction {
 public:
  explicit SpectralFunction(int n_max) : n_max_(n_max) {
    if (n_max < 0) throw std::invalid_argument("SpectralFunction: n_max must be >= 0");
    coeffs_.assign(2 * static_cast<std::size_t>(n_max) + 1, Complex{0.0, 0.0});
  }

  int n_max() const noexcept { return n_max_; }

  Complex coef(int k) const noexcept {
    if (std::abs(k) > n_max_) return {0.0, 0.0};
    return coeffs_[static_cast<std::size_t>(k + n_max_)];
  }

  // Sets mode k and mirrors the conjugate into -k. The k = 0 mode of a real
  // function is real; any imaginary part is dropped.
  void set_coef(int k, Complex v) {
    if (std::abs(k) > n_max_) throw std::invalid_argument("set_coef: |k| > n_max");
    if (k == 0) {
      coeffs_[static_cast<std::size_t>(n_max_)] = Complex{v.real(), 0.0};
      return;
    }
    coeffs_[static_cast<std::size_t>(k + n_max_)] = v;
    coeffs_[static_cast<std::size_t>(-k + n_max_)] = std::conj(v);
  }

  void add_to_coef(int k, Complex v) { set_coef(k, coef(k) + v); }

  // Pointwise synthesis f(alpha) = c0 + 2 Re Σ_{k>=1} c_k e^{ik alpha}.
  double operator()(double alpha) const {
    if (n_max_ == 0) return coef(0).real();
    const Complex z = std::polar(1.0, alpha);
    Complex acc = coef(n_max_);
    for (int k = n_max_ - 1; k >= 1; --k) acc = acc * z + coef(k);
    acc *= z;
    return coef(0).real() + 2.0 * acc.real();
  }

  double max_abs_coef() const {
    double m = 0.0;
    for (const auto& c : coeffs_) m = std::max(m, std::abs(c));
    return m;
  }

  double hermitian_defect() const {
    double d = 0.0;
    for (int k = 0; k <= n_max_; ++k) {
      d = std::max(d, std::abs(coeffs_[static_cast<std::size_t>(n_max_ - k)] -
                               std::conj(coeffs_[static_cast<std::size_t>(n_max_ + k)])));
    }
    return d;
  }

  bool all_finite() const {
    for (const auto& c : coeffs_) {
      if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
    }
    return true;
  }

  // Copy with a new cutoff; shrinking truncates, growing zero-pads.
  SpectralFunction resized(int n_new) const {
    SpectralFunction out(n_new);
    const int n = std::min(n_new, n_max_);
    for (int k = 0; k <= n; ++k) out.set_coef(k, coef(k));
    return out;
  }

  SpectralFunction& operator+=(const SpectralFunction& o) {
    if (o.n_max_ > n_max_) throw std::invalid_argument("operator+=: band too wide");
    for (int k = 0; k <= o.n_max_; ++k) add_to_coef(k, o.coef(k));
    return *this;
  }

  SpectralFunction& operator*=(double s) {
    for (auto& c : coeffs_) c *= s;
    return *this;
  }

  friend SpectralFunction operator+(const SpectralFunction& a, const SpectralFunction& b) {
    SpectralFunction out = a.resized(std::max(a.n_max_, b.n_max_));
    out += b;
    return out;
  }
  friend SpectralFunction operator-(const SpectralFunction& a, const SpectralFunction& b) {
    SpectralFunction out = a.resized(std::max(a.n_max_, b.n_max_));
    for (int k = 0; k <= b.n_max_; ++k) out.add_to_coef(k, -b.coef(k));
    return out;
  }
  friend SpectralFunction operator*(double s, const SpectralFunction& f) {
    SpectralFunction out = f;
    out *= s;
    return out;
  }

 private:
  int n_max_;
  std::vector<Complex> coeffs_;  // index k + n_max
};

// Builds a*cos(k alpha) + b*sin(k alpha) at cutoff n (>= k).
inline SpectralFunction harmonic(int k, double cos_amp, double sin_amp, int n_max) {
  if (k < 0 || k > n_max) throw std::invalid_argument("harmonic: need 0 <= k <= n_max");
  SpectralFunction f(n_max);
  if (k == 0) {
    f.set_coef(0, Complex{cos_amp, 0.0});
  } else {
    f.set_coef(k, Complex{cos_amp / 2.0, -sin_amp / 2.0});
  }
  return f;
}

// Weight parameters of the Wiener norm Σ e^{nu |k| t} |k|^s |f(k)|.
struct NormSpec {
  double s = 0.0;   // regularity exponent
  double nu = 0.0;  // analyticity weight
  double t = 0.0;   // evaluation time of the e^{nu|k|t} weight

  void validate() const {
    if (!(s >= 0.0) || !(nu >= 0.0) || !(t >= 0.0)) {
      throw std::invalid_argument("NormSpec: s, nu, t must all be >= 0");
    }
  }
};

inline double wiener_norm(const SpectralFunction& f, const NormSpec& spec,
                          bool homogeneous = true) {
  spec.validate();
  double acc = homogeneous ? 0.0 : std::abs(f.coef(0));
  for (int k = 1; k <= f.n_max(); ++k) {
    const double a = std::abs(f.coef(k));
    if (a == 0.0) continue;
    acc += 2.0 * std::exp(spec.nu * k * spec.t) * std::pow(double(k), spec.s) * a;
  }
  return acc;
}

inline double norm_f01(const SpectralFunction& f) { return wiener_norm(f, {0.0, 0.0, 0.0}); }
inline double norm_f11(const SpectralFunction& f) { return wiener_norm(f, {1.0, 0.0, 0.0}); }

// ||Pf||_{L^2}^2 = 2π Σ_{k != 0} |f(k)|^2 (zero mode excluded).
inline double l2_sq_projected(const SpectralFunction& f) {
  double acc = 0.0;
  for (int k = 1; k <= f.n_max(); ++k) acc += std::norm(f.coef(k));
  return 2.0 * kTwoPi * acc;
}

// Hilbert transform: multiplier -i sgn(k), zero mode annihilated.
inline SpectralFunction hilbert(const SpectralFunction& f) {
  SpectralFunction out(f.n_max());
  for (int k = 1; k <= f.n_max(); ++k) out.set_coef(k, Complex{0.0, -1.0} * f.coef(k));
  return out;
}

// |∂α|^p: multiplier |k|^p (p = 1 is the Hilbert transform of ∂α f).
inline SpectralFunction lambda_pow(const SpectralFunction& f, int p) {
  if (p < 1) throw std::invalid_argument("lambda_pow: order must be >= 1");
  SpectralFunction out(f.n_max());
  for (int k = 1; k <= f.n_max(); ++k) {
    out.set_coef(k, std::pow(double(k), p) * f.coef(k));
  }
  return out;
}

inline SpectralFunction lambda_op(const SpectralFunction& f) { return lambda_pow(f, 1); }

// ∂α^order: multiplier (ik)^order.
inline SpectralFunction derivative(const SpectralFunction& f, int order = 1) {
  if (order < 1) throw std::invalid_argument("derivative: order must be >= 1");
  SpectralFunction out(f.n_max());
  for (int k = 1; k <= f.n_max(); ++k) {
    Complex mult{1.0, 0.0};
    const Complex ik{0.0, double(k)};
    for (int p = 0; p < order; ++p) mult *= ik;
    out.set_coef(k, mult * f.coef(k));
  }
  return out;
}

inline SpectralFunction project_mean_zero(const SpectralFunction& f) {
  SpectralFunction out = f;
  out.set_coef(0, Complex{0.0, 0.0});
  return out;
}

// Exact coefficient shifts for products with the first harmonics (band grows
// by one): (f sin)(k) = (f(k-1) - f(k+1)) / (2i), (f cos)(k) = (f(k-1) + f(k+1)) / 2.
inline SpectralFunction mul_by_sin(const SpectralFunction& f) {
  SpectralFunction out(f.n_max() + 1);
  const Complex half_over_i{0.0, -0.5};  // 1/(2i)
  for (int k = 0; k <= f.n_max() + 1; ++k) {
    out.set_coef(k, half_over_i * (f.coef(k - 1) - f.coef(k + 1)));
  }
  return out;
}

inline SpectralFunction mul_by_cos(const SpectralFunction& f) {
  SpectralFunction out(f.n_max() + 1);
  for (int k = 0; k <= f.n_max() + 1; ++k) {
    out.set_coef(k, 0.5 * (f.coef(k - 1) + f.coef(k + 1)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Collocation grid transforms.
//
// to_grid samples on the uniform grid alpha_j = x0 + 2π j / m. Synthesis with
// m < 2 n_max + 1 would alias and is rejected. from_grid inverts exactly when
// the sample count satisfies the same bound.
// ---------------------------------------------------------------------------

inline std::vector<double> to_grid_offset(const SpectralFunction& f, std::size_t m,
                                          double x0) {
  if (m < 2 * static_cast<std::size_t>(f.n_max()) + 1) {
    throw std::invalid_argument("to_grid: m < 2*n_max+1 would alias the synthesis");
  }
  std::vector<Complex> spec(m, Complex{0.0, 0.0});
  spec[0] = f.coef(0);
  for (int k = 1; k <= f.n_max(); ++k) {
    const Complex phase = std::polar(1.0, k * x0);
    spec[static_cast<std::size_t>(k)] = f.coef(k) * phase;
    spec[m - static_cast<std::size_t>(k)] = std::conj(f.coef(k) * phase);
  }
  detail::dft_inplace(spec.data(), m, FFTW_BACKWARD);
  std::vector<double> out(m);
  for (std::size_t j = 0; j < m; ++j) out[j] = spec[j].real();
  return out;
}

inline std::vector<double> to_grid(const SpectralFunction& f, std::size_t m) {
  return to_grid_offset(f, m, 0.0);
}

inline SpectralFunction from_grid(std::span<const double> samples, int n_max) {
  const std::size_t m = samples.size();
  if (m < 2 * static_cast<std::size_t>(n_max) + 1) {
    throw std::invalid_argument("from_grid: m < 2*n_max+1 cannot determine the modes");
  }
  std::vector<Complex> spec(m);
  for (std::size_t j = 0; j < m; ++j) spec[j] = Complex{samples[j], 0.0};
  detail::dft_inplace(spec.data(), m, FFTW_FORWARD);
  SpectralFunction out(n_max);
  const double inv_m = 1.0 / double(m);
  out.set_coef(0, spec[0] * inv_m);
  for (int k = 1; k <= n_max; ++k) {
    out.set_coef(k, spec[static_cast<std::size_t>(k)] * inv_m);
  }
  return out;
}

// Dealiased pointwise product. The default grid is lossless for the full
// product band n_a + n_b; callers may truncate the result via n_out.
inline SpectralFunction grid_product(const SpectralFunction& a, const SpectralFunction& b,
                                     int n_out = -1) {
  const int band = a.n_max() + b.n_max();
  if (n_out < 0) n_out = band;
  const std::size_t m = detail::fft_size(2 * static_cast<std::size_t>(band) + 2);
  const auto sa = to_grid(a, m);
  const auto sb = to_grid(b, m);
  std::vector<double> prod(m);
  for (std::size_t j = 0; j < m; ++j) prod[j] = sa[j] * sb[j];
  return from_grid(prod, std::min(n_out, band)).resized(n_out);
}

// Wiener interpolation: returns (||f||_{s,1} with s = θ s1 + (1-θ) s2,
// ||f||_{s1,1}^θ ||f||_{s2,1}^{1-θ}); the first is bounded by the second.
inline std::pair<double, double> interpolation_check(const SpectralFunction& f, double s1,
                                                     double s2, double theta,
                                                     double nu = 0.0, double t = 0.0) {
  if (!(0.0 <= s1 && s1 <= s2)) throw std::invalid_argument("interpolation_check: need 0 <= s1 <= s2");
  if (!(0.0 <= theta && theta <= 1.0)) throw std::invalid_argument("interpolation_check: need theta in [0,1]");
  const double s = theta * s1 + (1.0 - theta) * s2;
  const double lhs = wiener_norm(f, {s, nu, t});
  const double rhs = std::pow(wiener_norm(f, {s1, nu, t}), theta) *
                     std::pow(wiener_norm(f, {s2, nu, t}), 1.0 - theta);
  return {lhs, rhs};
}

}  // namespace muskat

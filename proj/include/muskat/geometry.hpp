#pragma once

// Geometry of the polar-parametrized bubble z(a) = (1 + f(a)) (cos a, sin a) + c:
// curvature, enclosed area, centroid moment, normalization of initial shapes
// to unit area and centered centroid, and curve reconstruction.
//
// Nondimensional frame throughout: unit equivalent radius and unit surface
// tension scale, so the pole prefactor is one and time is already rescaled.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "muskat/errors.hpp"
#include "muskat/spectral.hpp"

namespace muskat {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double norm() const { return std::hypot(x, y); }
};

// Dimensionless physics: viscosity contrast and the gravity/capillarity number.
struct PhysicalParams {
  double A_mu = 0.0;
  double A_rhosigma = 0.0;

  void validate() const {
    if (!(A_mu >= -1.0 && A_mu <= 1.0)) {
      throw std::invalid_argument("PhysicalParams: A_mu outside [-1,1]");
    }
    if (!std::isfinite(A_rhosigma)) {
      throw std::invalid_argument("PhysicalParams: A_rhosigma not finite");
    }
  }
};

// Radial perturbation, pole position and simulation time: the full state.
struct BubbleState {
  SpectralFunction f;
  Vec2 c{};
  double t = 0.0;
};

inline std::size_t default_grid(int n_max, int dealias_factor = 4) {
  const std::size_t need = static_cast<std::size_t>(std::max(2 * n_max + 2, dealias_factor * std::max(n_max, 1)));
  return detail::fft_size(need);
}

inline double min_radial(const SpectralFunction& f, std::size_t m = 0) {
  if (m == 0) m = default_grid(f.n_max());
  const auto s = to_grid(f, m);
  double mn = 1.0 + s[0];
  for (double v : s) mn = std::min(mn, 1.0 + v);
  return mn;
}

// Curvature of the curve r = 1 + f in polar form,
//   K = (-(1+f) f'' + 2 f'^2 + (1+f)^2) / (f'^2 + (1+f)^2)^{3/2},
// evaluated on a dealiased grid and transformed back at the input cutoff.
inline SpectralFunction curvature(const SpectralFunction& f, std::size_t m = 0) {
  if (m == 0) m = default_grid(f.n_max());
  const auto s0 = to_grid(f, m);
  const auto s1 = to_grid(derivative(f, 1), m);
  const auto s2 = to_grid(derivative(f, 2), m);
  std::vector<double> K(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double r = 1.0 + s0[j];
    if (r <= 0.0) throw SolverError("curvature: curve is not a graph over the pole (1+f <= 0)");
    const double q = s1[j] * s1[j] + r * r;
    if (q < 1e-12) throw SolverError("curvature: degenerate denominator");
    K[j] = (-r * s2[j] + 2.0 * s1[j] * s1[j] + r * r) / (q * std::sqrt(q));
  }
  return from_grid(K, f.n_max());
}

// Enclosed area (1/2)∫(1+f)^2 da via Parseval:
// π (1 + f(0))^2 + (1/2) ||Pf||_{L^2}^2.
inline double area(const SpectralFunction& f) {
  const double z = 1.0 + f.coef(0).real();
  return kPi * z * z + 0.5 * l2_sq_projected(f);
}

// First moment ∫(1+f)^3 (cos a, sin a) da, read off the k = 1 mode of (1+f)^3.
inline Vec2 centroid_moment(const SpectralFunction& f) {
  SpectralFunction one_plus(f.n_max());
  one_plus.set_coef(0, 1.0);
  one_plus += f;
  const SpectralFunction sq = grid_product(one_plus, one_plus);
  const SpectralFunction cube = grid_product(sq, one_plus, /*n_out=*/2);
  const Complex g1 = cube.coef(1);
  return {kTwoPi * g1.real(), -kTwoPi * g1.imag()};
}

// Zero mode forced by unit area: f(0) = -1 + sqrt(1 - ||Pf||^2_{L^2} / 2π).
inline double zero_mode_from_projection(const SpectralFunction& pf) {
  if (std::abs(pf.coef(0)) > 1e-12) {
    throw std::invalid_argument("zero_mode_from_projection: input must be mean-zero");
  }
  const double q = l2_sq_projected(pf) / kTwoPi;
  if (!(q < 1.0)) {
    throw SolverError("zero_mode_from_projection: ||Pf||^2/(2*pi) >= 1, constraint violated");
  }
  return -1.0 + std::sqrt(1.0 - q);
}

// Residual of the slaved zero mode; zero on constraint-satisfying states.
inline double zero_mode_residual(const SpectralFunction& f) {
  return std::abs(f.coef(0).real() - zero_mode_from_projection(project_mean_zero(f)));
}

// Pointwise synthesis, so any sample count works (plots may undersample).
inline std::vector<Vec2> reconstruct_curve(const BubbleState& state, std::size_t m) {
  std::vector<Vec2> pts(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double a = kTwoPi * double(j) / double(m);
    const double r = 1.0 + state.f(a);
    pts[j] = Vec2{r * std::cos(a), r * std::sin(a)} + state.c;
  }
  return pts;
}

namespace detail {

// Polar reparametrization of the curve (1+g(a))(cos a, sin a) about the pole
// p with radial rescale r: solves, for each target angle, the ray-curve
// intersection by Newton in the original parameter.
inline SpectralFunction reparametrize_about(const SpectralFunction& g, Vec2 p, double r,
                                            int n_out, std::size_t m) {
  const SpectralFunction gp = derivative(g, 1);
  std::vector<double> samples(m);
  double alpha = 0.0;  // warm start: roots advance with the target angle
  for (std::size_t j = 0; j < m; ++j) {
    const double theta = kTwoPi * double(j) / double(m);
    if (j == 0) alpha = theta;
    const double tx = -std::sin(theta), ty = std::cos(theta);
    const double nx = std::cos(theta), ny = std::sin(theta);
    bool converged = false;
    for (int it = 0; it < 60; ++it) {
      const double rad = 1.0 + g(alpha);
      const double ca = std::cos(alpha), sa = std::sin(alpha);
      const double zx = rad * ca - p.x, zy = rad * sa - p.y;
      const double h = zx * tx + zy * ty;
      const double dg = gp(alpha);
      // z'(a) = g' n(a) + (1+g) tau(a)
      const double dzx = dg * ca - rad * sa, dzy = dg * sa + rad * ca;
      const double dh = dzx * tx + dzy * ty;
      if (std::abs(dh) < 1e-14) break;
      const double step = h / dh;
      alpha -= step;
      if (std::abs(step) < 1e-15) {
        converged = true;
        break;
      }
    }
    {
      const double rad = 1.0 + g(alpha);
      const double zx = rad * std::cos(alpha) - p.x, zy = rad * std::sin(alpha) - p.y;
      const double h = zx * tx + zy * ty;
      const double rho = zx * nx + zy * ny;
      if ((!converged && std::abs(h) > 1e-10) || rho <= 0.0) {
        throw SolverError("reparametrize: intermediate curve is not star-shaped about the pole");
      }
      samples[j] = rho / r - 1.0;
    }
    alpha += kTwoPi / double(m);
  }
  return from_grid(samples, n_out);
}

}  // namespace detail

struct NormalizationResult {
  SpectralFunction f0;
  Vec2 shift{};   // pole displacement applied, in the input frame
  double scale = 1.0;
  int iterations = 0;
};

// Re-derives the polar parametrization about the centroid and rescales to
// unit area. The Newton system decouples: the enclosed area is independent
// of the pole and fixes r = sqrt(area/π) directly, while the centroid update
// is p += r * moment/(3*area) in the current local frame. Damped steps guard
// against overshoot on strongly deformed shapes.
inline NormalizationResult normalize_initial_data(const SpectralFunction& shape,
                                                  double tol = 1e-12, int max_iter = 50) {
  if (min_radial(shape) <= 0.1) {
    throw std::invalid_argument("normalize_initial_data: shape too degenerate (min(1+f) <= 0.1)");
  }
  const std::size_t m = default_grid(shape.n_max());
  Vec2 p{0.0, 0.0};
  double r = 1.0;
  Vec2 p_prev = p;
  double r_prev = r;
  double merit_prev = -1.0;

  for (int it = 1; it <= max_iter; ++it) {
    const SpectralFunction f =
        (it == 1) ? shape : detail::reparametrize_about(shape, p, r, shape.n_max(), m);
    const double a = area(f);
    const Vec2 cm = centroid_moment(f);
    const double merit = std::abs(a - kPi) + std::abs(cm.x) + std::abs(cm.y);
    if (merit < tol) {
      return {f, p, r, it};
    }
    if (min_radial(f) <= 0.1) {
      throw SolverError("normalize_initial_data: intermediate shape degenerated");
    }
    if (merit_prev >= 0.0 && merit > merit_prev) {
      // overshoot: backtrack halfway toward the previous accepted point
      p = p_prev + (p - p_prev) * 0.5;
      r = std::sqrt(r_prev * r);
      continue;
    }
    p_prev = p;
    r_prev = r;
    merit_prev = merit;
    // Newton step in closed form: the enclosed area fixes the scale and the
    // moment/(3*area) is the centroid in the current local frame.
    p = p + cm * (r / (3.0 * a));
    r *= std::sqrt(a / kPi);
  }
  throw SolverError("normalize_initial_data: no convergence within iteration budget");
}

}  // namespace muskat

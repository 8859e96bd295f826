#pragma once

// Full nonlinear normal velocity of the radial perturbation,
//   ∂t f = N(f) = I1 + I2 + I3,
// its linearization N1 around the translating circle, the quadratic-and-up
// remainder, and the pole velocity.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "muskat/errors.hpp"
#include "muskat/geometry.hpp"
#include "muskat/spectral.hpp"
#include "muskat/vorticity.hpp"

namespace muskat {

struct EvolutionRHS {
  SpectralFunction n_full;
  SpectralFunction n_linear;
  SpectralFunction n_remainder;
  Vec2 c_dot{};
};

// Pole velocity: c1' = (1/π)∫ f cos a da = 2 Re f(1),
//                c2' = A_rhosigma + (1/π)∫ f sin a da = A_rhosigma - 2 Im f(1).
inline Vec2 c_dot(const SpectralFunction& f, const PhysicalParams& params) {
  params.validate();
  const Complex f1 = f.coef(1);
  return {2.0 * f1.real(), params.A_rhosigma - 2.0 * f1.imag()};
}

namespace detail {

// I1 = (1+f)^{-1} ∂a((1+f) c'·tau(a)) with tau = (-sin a, cos a); the product
// is exact in coefficients, the division happens on the grid.
inline std::vector<double> i1_samples(const InterfaceKernels& K, Vec2 cdot) {
  const SpectralFunction& f = K.f();
  SpectralFunction g = (-cdot.x) * mul_by_sin(f) + cdot.y * mul_by_cos(f);
  g.add_to_coef(1, Complex{cdot.y / 2.0, cdot.x / 2.0});  // c'·tau for the circle part
  const auto dg = to_grid(derivative(g, 1), K.m());
  const auto& fs = K.f_samples();
  std::vector<double> out(K.m());
  for (std::size_t j = 0; j < K.m(); ++j) out[j] = dg[j] / (1.0 + fs[j]);
  return out;
}

}  // namespace detail

inline SpectralFunction evaluate_N(const InterfaceKernels& K, const VorticityField& omega,
                                   Vec2 cdot) {
  const auto i1 = detail::i1_samples(K, cdot);
  const auto vel = K.velocity_samples(omega.omega);
  std::vector<double> sum(K.m());
  for (std::size_t j = 0; j < K.m(); ++j) sum[j] = i1[j] + vel[j];
  return from_grid(sum, K.f().n_max());
}

inline SpectralFunction evaluate_N(const SpectralFunction& f, const VorticityField& omega,
                                   Vec2 cdot, std::size_t m = 0) {
  if (m == 0) m = default_grid(f.n_max());
  InterfaceKernels K(f, m);
  return evaluate_N(K, omega, cdot);
}

// Linear part around the circle:
//   N1(f) = A_rhosigma (1-A_mu) (|∂a|(f sin a) + ∂a(f cos a))
//           - (|∂a|^3 f - |∂a| f) - c1' cos a - (c2' - A_rhosigma) sin a.
inline SpectralFunction evaluate_N1(const SpectralFunction& f, Vec2 cdot,
                                    const PhysicalParams& params) {
  params.validate();
  SpectralFunction out =
      (params.A_rhosigma * (1.0 - params.A_mu)) *
      (lambda_op(mul_by_sin(f)) + derivative(mul_by_cos(f), 1));
  out = out - (lambda_pow(f, 3) - lambda_op(f));
  out = out - harmonic(1, cdot.x, cdot.y - params.A_rhosigma, 1);
  return out.resized(f.n_max());
}

inline SpectralFunction evaluate_N_remainder(const SpectralFunction& f,
                                             const VorticityField& omega, Vec2 cdot,
                                             const PhysicalParams& params, std::size_t m = 0) {
  return evaluate_N(f, omega, cdot, m) - evaluate_N1(f, cdot, params);
}

// ∫(1+f) N(f) da, the differential form of area conservation; vanishes for
// exact solutions of the system and is tracked as a quadrature residual.
inline double weighted_mean_residual(const SpectralFunction& f, const SpectralFunction& n_full) {
  double acc = (1.0 + f.coef(0).real()) * n_full.coef(0).real();
  const int n = std::min(f.n_max(), n_full.n_max());
  for (int k = 1; k <= n; ++k) {
    acc += 2.0 * (std::conj(f.coef(k)) * n_full.coef(k)).real();
  }
  return kTwoPi * acc;
}

struct FullRhs {
  EvolutionRHS rhs;
  VorticityField omega;
  double vorticity_residual = 0.0;
  int vorticity_iterations = 0;
};

// Assembles the complete right-hand side at a state: solves the vorticity
// equation, computes the pole velocity and splits N into linear + remainder.
// The evolved unknown is Pf; the zero mode is slaved to the area constraint.
inline FullRhs full_rhs(const BubbleState& state, const PhysicalParams& params,
                        const SolveOptions& opts = {}) {
  params.validate();
  if (zero_mode_residual(state.f) > 1e-8) {
    throw std::invalid_argument("full_rhs: state violates the zero-mode area constraint");
  }
  const std::size_t m = solver_grid(state.f, opts);
  InterfaceKernels K(state.f, m);
  VorticitySolution sol = solve_vorticity(K, params, opts);
  const Vec2 cd = c_dot(state.f, params);
  SpectralFunction n_full = evaluate_N(K, sol.omega, cd);
  SpectralFunction n_lin = evaluate_N1(state.f, cd, params);
  SpectralFunction n_rem = n_full - n_lin;
  return FullRhs{EvolutionRHS{std::move(n_full), std::move(n_lin), std::move(n_rem), cd},
                 std::move(sol.omega), sol.residual, sol.iterations};
}

}  // namespace muskat

#pragma once

// Time advancement of the bubble state. The production scheme is a two-stage
// exponential integrator in the diagonalized mode frame (the linear part is
// exact there); an explicit RK4 exists for cross-validation at small cutoffs.
// The zero mode is slaved to the area constraint after every update and the
// pole is integrated by the trapezoid rule alongside.

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "muskat/errors.hpp"
#include "muskat/evolution.hpp"
#include "muskat/geometry.hpp"
#include "muskat/linear_theory.hpp"
#include "muskat/spectral.hpp"
#include "muskat/vorticity.hpp"

namespace muskat {

enum class Scheme { etdrk2_diagonalized, rk4_explicit };

struct IntegratorConfig {
  Scheme scheme = Scheme::etdrk2_diagonalized;
  double dt = 1e-3;
  double t_end = 5.0;
  int n_max = 128;
  double tol_vorticity = 1e-12;
  double safety = 2.0;          // reject a step if ||f|| grows by this factor
  int dealias_factor = 4;
  double nu = 0.1;              // diagnostic analyticity weight
  double floor_norm = 1e-13;    // stop once ||f||_F11 falls below (0 disables)
  double area_tol = 1e-8;
  int max_halvings = 20;
  double cfl_const = 2.785;     // explicit-scheme stability constant

  void validate() const {
    if (!(dt > 0.0)) throw std::invalid_argument("IntegratorConfig: dt must be > 0");
    if (!(t_end >= 0.0)) throw std::invalid_argument("IntegratorConfig: t_end must be >= 0");
    if (n_max < 2) throw std::invalid_argument("IntegratorConfig: n_max must be >= 2");
    if (!(safety > 1.0)) throw std::invalid_argument("IntegratorConfig: safety must be > 1");
    if (dealias_factor < 3) throw std::invalid_argument("IntegratorConfig: dealias_factor must be >= 3");
    if (scheme == Scheme::rk4_explicit && dt * eigenvalue_a(n_max) > cfl_const) {
      throw std::invalid_argument(
          "IntegratorConfig: rk4-explicit is unstable at this dt (need dt <= cfl_const/n_max^3)");
    }
  }

  SolveOptions solve_options() const {
    SolveOptions opts;
    opts.tol = tol_vorticity;
    opts.m = detail::fft_size(static_cast<std::size_t>(
        std::max(dealias_factor * n_max, 2 * n_max + 2)));
    return opts;
  }
};

struct StepDiagnostics {
  double t = 0.0;
  double dt = 0.0;               // slice actually advanced by this record
  double norm_f01 = 0.0;
  double norm_f11 = 0.0;
  double norm_f11_nu = 0.0;      // e^{nu|k|t}-weighted, at the snapshot time
  double area_residual = 0.0;
  double omega_mean_abs = 0.0;
  double vorticity_residual = 0.0;
  int vorticity_iterations = 0;
  double weighted_mean_residual = 0.0;  // ∫(1+f) N(f) da at the step base
  Vec2 cdot{};
};

struct Trajectory {
  std::vector<BubbleState> snapshots;
  std::vector<StepDiagnostics> diagnostics;  // one per accepted slice
  PhysicalParams params{};
  double nu = 0.1;
  bool converged_to_circle = false;
};

namespace detail {

inline SpectralFunction with_slaved_zero_mode(const SpectralFunction& pf) {
  SpectralFunction f = pf;
  f.set_coef(0, Complex{0.0, 0.0});
  f.set_coef(0, Complex{zero_mode_from_projection(f), 0.0});
  return f;
}

struct StepAttempt {
  BubbleState state;
  StepDiagnostics diag;
};

inline StepAttempt etdrk2_attempt(const BubbleState& state, double h,
                                  const IntegratorConfig& cfg, const PhysicalParams& params,
                                  const DiagonalizerPair& pair) {
  const SolveOptions opts = cfg.solve_options();
  const FullRhs base = full_rhs(state, params, opts);
  const SpectralFunction pf = project_mean_zero(state.f);
  const SpectralFunction g0 = project_mean_zero(base.rhs.n_remainder);

  const SpectralFunction pf_pred = duhamel_propagate(pf, std::span(&g0, 1), h, pair);
  BubbleState stage{with_slaved_zero_mode(pf_pred), state.c, state.t + h};
  const FullRhs mid = full_rhs(stage, params, opts);
  const SpectralFunction g1 = project_mean_zero(mid.rhs.n_remainder);

  const SpectralFunction gs[2] = {g0, g1};
  const SpectralFunction pf_new = duhamel_propagate(pf, std::span(gs, 2), h, pair);

  StepAttempt out{BubbleState{with_slaved_zero_mode(pf_new),
                              state.c + (base.rhs.c_dot + mid.rhs.c_dot) * (h / 2.0),
                              state.t + h},
                  {}};
  out.diag.omega_mean_abs = std::abs(base.omega.omega.coef(0));
  out.diag.vorticity_residual = base.vorticity_residual;
  out.diag.vorticity_iterations = base.vorticity_iterations;
  out.diag.weighted_mean_residual = weighted_mean_residual(state.f, base.rhs.n_full);
  out.diag.cdot = base.rhs.c_dot;
  return out;
}

inline StepAttempt rk4_attempt(const BubbleState& state, double h, const IntegratorConfig& cfg,
                               const PhysicalParams& params) {
  const SolveOptions opts = cfg.solve_options();
  const SpectralFunction pf = project_mean_zero(state.f);

  auto eval = [&](const SpectralFunction& pf_stage, double t_stage) {
    BubbleState s{with_slaved_zero_mode(pf_stage), state.c, t_stage};
    return full_rhs(s, params, opts);
  };

  const FullRhs r1 = eval(pf, state.t);
  const SpectralFunction k1 = project_mean_zero(r1.rhs.n_full);
  const FullRhs r2 = eval(pf + (h / 2.0) * k1, state.t + h / 2.0);
  const SpectralFunction k2 = project_mean_zero(r2.rhs.n_full);
  const FullRhs r3 = eval(pf + (h / 2.0) * k2, state.t + h / 2.0);
  const SpectralFunction k3 = project_mean_zero(r3.rhs.n_full);
  const FullRhs r4 = eval(pf + h * k3, state.t + h);
  const SpectralFunction k4 = project_mean_zero(r4.rhs.n_full);

  SpectralFunction pf_new = pf + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  const Vec2 c_new = state.c + (r1.rhs.c_dot + r2.rhs.c_dot * 2.0 + r3.rhs.c_dot * 2.0 +
                                r4.rhs.c_dot) * (h / 6.0);

  StepAttempt out{BubbleState{with_slaved_zero_mode(pf_new), c_new, state.t + h}, {}};
  out.diag.omega_mean_abs = std::abs(r1.omega.omega.coef(0));
  out.diag.vorticity_residual = r1.vorticity_residual;
  out.diag.vorticity_iterations = r1.vorticity_iterations;
  out.diag.weighted_mean_residual = weighted_mean_residual(state.f, r1.rhs.n_full);
  out.diag.cdot = r1.rhs.c_dot;
  return out;
}

inline void fill_state_diag(StepDiagnostics& d, const BubbleState& s, double slice, double nu) {
  d.t = s.t;
  d.dt = slice;
  d.norm_f01 = norm_f01(s.f);
  d.norm_f11 = norm_f11(s.f);
  d.norm_f11_nu = wiener_norm(s.f, {1.0, nu, s.t});
  d.area_residual = std::abs(area(s.f) - kPi);
}

}  // namespace detail

// Advances the state by exactly cfg.dt, sub-stepping with halved slices when
// an attempt is rejected (norm blow-up, constraint failure, or a solver
// error). Throws after cfg.max_halvings rejections.
inline BubbleState step(const BubbleState& state, const IntegratorConfig& cfg,
                        const PhysicalParams& params, const DiagonalizerPair* pair_in = nullptr,
                        StepDiagnostics* diag_out = nullptr) {
  cfg.validate();
  params.validate();
  std::optional<DiagonalizerPair> local_pair;
  const DiagonalizerPair* pair = pair_in;
  if (cfg.scheme == Scheme::etdrk2_diagonalized && pair == nullptr) {
    local_pair = build_diagonalizer(build_system(cfg.n_max, params));
    pair = &*local_pair;
  }

  BubbleState cur = state;
  double remaining = cfg.dt;
  double h = cfg.dt;
  int halvings = 0;
  StepDiagnostics last{};
  const double t_target = state.t + cfg.dt;

  while (remaining > 1e-15 * cfg.dt) {
    h = std::min(h, remaining);
    std::optional<detail::StepAttempt> attempt;
    std::string reject_reason;
    try {
      attempt = (cfg.scheme == Scheme::etdrk2_diagonalized)
                    ? detail::etdrk2_attempt(cur, h, cfg, params, *pair)
                    : detail::rk4_attempt(cur, h, cfg, params);
      if (!attempt->state.f.all_finite()) {
        reject_reason = "non-finite state";
        attempt.reset();
      } else if (norm_f11(attempt->state.f) > cfg.safety * norm_f11(cur.f) + 1e-12) {
        reject_reason = "norm blow-up within a step";
        attempt.reset();
      } else if (std::abs(area(attempt->state.f) - kPi) > cfg.area_tol) {
        reject_reason = "area residual beyond tolerance";
        attempt.reset();
      }
    } catch (const SolverError& e) {
      reject_reason = e.what();
      attempt.reset();
    }
    if (attempt) {
      cur = attempt->state;
      remaining = t_target - cur.t;
      last = attempt->diag;
    } else {
      if (++halvings > cfg.max_halvings) {
        throw SolverError("step: halving budget exhausted (" + reject_reason + ")");
      }
      h /= 2.0;
    }
  }
  cur.t = t_target;  // guard accumulated roundoff in substeps
  if (diag_out != nullptr) {
    detail::fill_state_diag(last, cur, cfg.dt, cfg.nu);
    *diag_out = last;
  }
  return cur;
}

// Integrates to t_end (or until the perturbation norm falls below the floor)
// recording one snapshot per accepted slice of size cfg.dt.
inline Trajectory run(const BubbleState& initial, const IntegratorConfig& cfg,
                      const PhysicalParams& params) {
  cfg.validate();
  params.validate();
  if (zero_mode_residual(initial.f) > 1e-8) {
    throw std::invalid_argument("run: initial data is not normalized (zero-mode residual)");
  }

  std::optional<DiagonalizerPair> pair;
  if (cfg.scheme == Scheme::etdrk2_diagonalized) {
    pair = build_diagonalizer(build_system(cfg.n_max, params));
  }

  Trajectory traj;
  traj.params = params;
  traj.nu = cfg.nu;
  SpectralFunction f0 = initial.f.resized(cfg.n_max);
  if (initial.f.n_max() > cfg.n_max) {
    f0 = detail::with_slaved_zero_mode(project_mean_zero(f0));
  }
  BubbleState state{f0, initial.c, initial.t};
  traj.snapshots.push_back(state);

  while (state.t < cfg.t_end - 1e-12 * std::max(1.0, cfg.t_end)) {
    if (cfg.floor_norm > 0.0 && norm_f11(state.f) < cfg.floor_norm) {
      traj.converged_to_circle = true;
      break;
    }
    IntegratorConfig slice_cfg = cfg;
    slice_cfg.dt = std::min(cfg.dt, cfg.t_end - state.t);
    StepDiagnostics diag;
    state = step(state, slice_cfg, params, pair ? &*pair : nullptr, &diag);
    traj.snapshots.push_back(state);
    traj.diagnostics.push_back(diag);
  }
  return traj;
}

// ---------------------------------------------------------------------------
// Trajectory-level fixed-point (Picard) iteration of the mild formulation:
// iterate m+1 is the semigroup term plus the Duhamel integral of the
// remainder evaluated along iterate m (piecewise-linear exponential
// quadrature on the shared time grid).
// ---------------------------------------------------------------------------

inline std::vector<Trajectory> picard_iterate(const BubbleState& initial,
                                              const IntegratorConfig& cfg,
                                              const PhysicalParams& params, int k_iters) {
  cfg.validate();
  params.validate();
  if (k_iters < 1) throw std::invalid_argument("picard_iterate: need k_iters >= 1");
  if (cfg.t_end > 1.0 + 1e-12) {
    throw std::invalid_argument("picard_iterate: fixed horizon T <= 1 expected");
  }
  const int n = cfg.n_max;
  const std::size_t J = static_cast<std::size_t>(std::llround(cfg.t_end / cfg.dt));
  if (J < 1) throw std::invalid_argument("picard_iterate: horizon shorter than one step");
  const double h = cfg.t_end / double(J);
  const DiagonalizerPair pair = build_diagonalizer(build_system(n, params));
  const SolveOptions opts = cfg.solve_options();

  auto modes_of = [n](const SpectralFunction& g) {
    std::vector<Complex> z(static_cast<std::size_t>(n), Complex{0.0, 0.0});
    for (int k = 1; k <= std::min(n, g.n_max()); ++k) z[static_cast<std::size_t>(k - 1)] = g.coef(k);
    return z;
  };
  auto state_from_modes = [n](const std::vector<Complex>& z, Vec2 c, double t) {
    SpectralFunction pf(n);
    for (int k = 1; k <= n; ++k) pf.set_coef(k, z[static_cast<std::size_t>(k - 1)]);
    return BubbleState{detail::with_slaved_zero_mode(pf), c, t};
  };

  const std::vector<Complex> y0 = pair.apply_s_inv(modes_of(project_mean_zero(initial.f)));

  auto semigroup_states = [&](std::size_t j) {
    std::vector<Complex> y = y0;
    const double t = h * double(j);
    for (int k = 1; k <= n; ++k) {
      y[static_cast<std::size_t>(k - 1)] *= std::exp(-pair.sys.a[static_cast<std::size_t>(k - 1)] * t);
    }
    return pair.apply_s(y);
  };

  auto integrate_pole = [&](Trajectory& traj) {
    Vec2 c = initial.c;
    for (std::size_t j = 0; j < traj.snapshots.size(); ++j) {
      if (j > 0) {
        const Vec2 v0 = c_dot(traj.snapshots[j - 1].f, params);
        const Vec2 v1 = c_dot(traj.snapshots[j].f, params);
        c = c + (v0 + v1) * (h / 2.0);
      }
      traj.snapshots[j].c = c;
    }
  };

  std::vector<Trajectory> iterates;
  Trajectory u0;
  u0.params = params;
  u0.nu = cfg.nu;
  for (std::size_t j = 0; j <= J; ++j) {
    u0.snapshots.push_back(state_from_modes(semigroup_states(j), initial.c, initial.t + h * double(j)));
  }
  integrate_pole(u0);
  iterates.push_back(u0);

  const double ball_radius = 10.0 * std::max(norm_f11(initial.f), 1e-6);
  for (int it = 1; it <= k_iters; ++it) {
    const Trajectory& prev = iterates.back();
    // remainder along the previous iterate, in the diagonal frame
    std::vector<std::vector<Complex>> G(J + 1);
    for (std::size_t j = 0; j <= J; ++j) {
      const FullRhs r = full_rhs(prev.snapshots[j], params, opts);
      G[j] = pair.apply_s_inv(modes_of(project_mean_zero(r.rhs.n_remainder)));
    }
    Trajectory next;
    next.params = params;
    next.nu = cfg.nu;
    next.snapshots.push_back(prev.snapshots.front());
    std::vector<Complex> duh(static_cast<std::size_t>(n), Complex{0.0, 0.0});
    for (std::size_t j = 1; j <= J; ++j) {
      std::vector<Complex> y(static_cast<std::size_t>(n));
      for (int k = 1; k <= n; ++k) {
        const double ak = pair.sys.a[static_cast<std::size_t>(k - 1)];
        const double z = -ak * h;
        const std::size_t i = static_cast<std::size_t>(k - 1);
        duh[i] = duh[i] * std::exp(z) + h * (phi1(z) - phi2(z)) * G[j - 1][i] + h * phi2(z) * G[j][i];
        y[i] = y0[i] * std::exp(-ak * h * double(j)) + duh[i];
      }
      next.snapshots.push_back(state_from_modes(pair.apply_s(y), initial.c, initial.t + h * double(j)));
      if (norm_f11(next.snapshots.back().f) > ball_radius) {
        throw SolverError("picard_iterate: iterate escaped the admissibility ball");
      }
    }
    integrate_pole(next);
    iterates.push_back(std::move(next));
  }
  return iterates;
}

// Norm of the solution space: sup_t ||.||_{F^{0,1}_nu} + ∫ ||.||_{F^{4,1}_nu} dt,
// evaluated on the shared trajectory grid (trapezoid in time).
inline double x_norm_difference(const Trajectory& a, const Trajectory& b, double nu) {
  if (a.snapshots.size() != b.snapshots.size()) {
    throw std::invalid_argument("x_norm_difference: trajectories on different grids");
  }
  double sup01 = 0.0, int41 = 0.0;
  double prev_t = 0.0, prev41 = 0.0;
  for (std::size_t j = 0; j < a.snapshots.size(); ++j) {
    const double t = a.snapshots[j].t;
    if (std::abs(t - b.snapshots[j].t) > 1e-12) {
      throw std::invalid_argument("x_norm_difference: trajectories on different grids");
    }
    const SpectralFunction d = a.snapshots[j].f - b.snapshots[j].f;
    sup01 = std::max(sup01, wiener_norm(d, {0.0, nu, t}));
    const double n41 = wiener_norm(d, {4.0, nu, t});
    if (j > 0) int41 += 0.5 * (prev41 + n41) * (t - prev_t);
    prev_t = t;
    prev41 = n41;
  }
  return sup01 + int41;
}

}  // namespace muskat

#pragma once

// Post-processing of computed trajectories: exponential decay fits,
// Fourier-decay (analyticity band) fits, conservation residuals and the
// asymptotic drift velocity of the pole.

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "muskat/errors.hpp"
#include "muskat/geometry.hpp"
#include "muskat/integrator.hpp"
#include "muskat/spectral.hpp"

namespace muskat {

struct DecayFit {
  double rate = 0.0;       // fitted decay constant (positive = decaying)
  double r_squared = 0.0;
  double t_start = 0.0;
  double t_end = 0.0;
  std::size_t samples = 0;
};

namespace detail {

struct LineFit {
  double slope = 0.0, intercept = 0.0, r_squared = 1.0;
};

inline LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / double(n), my = sy / double(n);
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = (syy > 0.0) ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

}  // namespace detail

// Least-squares line through log||f(t)|| over [t_start, t_end].
inline DecayFit decay_fit(const Trajectory& traj, const NormSpec& spec, double t_start = 0.5,
                          double t_end = std::numeric_limits<double>::infinity()) {
  std::vector<double> ts, ys;
  for (const auto& snap : traj.snapshots) {
    if (snap.t < t_start || snap.t > t_end) continue;
    NormSpec at = spec;
    at.t = snap.t;
    const double n = wiener_norm(snap.f, at);
    if (!(n > 0.0)) throw SolverError("decay_fit: non-positive norm in the fit window");
    ts.push_back(snap.t);
    ys.push_back(std::log(n));
  }
  if (ts.size() < 10) throw SolverError("decay_fit: fewer than 10 samples in the window");
  const auto fit = detail::least_squares(ts, ys);
  DecayFit out;
  out.rate = -fit.slope;
  out.r_squared = fit.r_squared;
  out.t_start = ts.front();
  out.t_end = ts.back();
  out.samples = ts.size();
  return out;
}

struct AnalyticityPoint {
  double t = 0.0;
  double rho = 0.0;        // fitted Fourier decay slope per mode
  std::size_t modes = 0;   // active modes entering the fit
  bool valid = false;
};

// Per-snapshot fit of log|f(k)| ~ const - rho k over active modes k >= 2
// above the round-off floor; entries with fewer than 3 active modes are
// flagged and skipped.
inline std::vector<AnalyticityPoint> analyticity_fit(const Trajectory& traj,
                                                     double floor = 1e-13) {
  std::vector<AnalyticityPoint> out;
  out.reserve(traj.snapshots.size());
  for (const auto& snap : traj.snapshots) {
    AnalyticityPoint pt;
    pt.t = snap.t;
    std::vector<double> ks, ys;
    for (int k = 2; k <= snap.f.n_max(); ++k) {
      const double a = std::abs(snap.f.coef(k));
      if (a > floor) {
        ks.push_back(double(k));
        ys.push_back(std::log(a));
      }
    }
    pt.modes = ks.size();
    if (ks.size() >= 3) {
      pt.rho = -detail::least_squares(ks, ys).slope;
      pt.valid = true;
    }
    out.push_back(pt);
  }
  return out;
}

struct ConservationReport {
  double max_area_drift = 0.0;          // max |area - π|
  double max_omega_mean = 0.0;          // max |ŵ(0)|
  double max_zero_mode_residual = 0.0;  // slaved zero-mode constraint
  double max_weighted_mean_residual = 0.0;
  std::vector<double> pole_centroid_gap;  // |pole - bubble centroid| per snapshot
};

inline ConservationReport conservation_report(const Trajectory& traj) {
  ConservationReport rep;
  for (const auto& snap : traj.snapshots) {
    rep.max_area_drift = std::max(rep.max_area_drift, std::abs(area(snap.f) - kPi));
    rep.max_zero_mode_residual =
        std::max(rep.max_zero_mode_residual, zero_mode_residual(snap.f));
    const double a = area(snap.f);
    const Vec2 cm = centroid_moment(snap.f);
    rep.pole_centroid_gap.push_back((cm * (1.0 / (3.0 * a))).norm());
  }
  for (const auto& d : traj.diagnostics) {
    rep.max_omega_mean = std::max(rep.max_omega_mean, d.omega_mean_abs);
    rep.max_weighted_mean_residual =
        std::max(rep.max_weighted_mean_residual, std::abs(d.weighted_mean_residual));
  }
  return rep;
}

// Mean pole velocity over the trajectory tail where ||f||_F11 < tail_norm.
inline Vec2 drift_velocity(const Trajectory& traj, double tail_norm = 1e-6) {
  std::size_t first = traj.snapshots.size();
  for (std::size_t j = 0; j < traj.snapshots.size(); ++j) {
    if (norm_f11(traj.snapshots[j].f) < tail_norm) {
      first = j;
      break;
    }
  }
  if (first + 1 >= traj.snapshots.size()) {
    throw SolverError("drift_velocity: trajectory tail too short");
  }
  const BubbleState& s0 = traj.snapshots[first];
  const BubbleState& s1 = traj.snapshots.back();
  const double span = s1.t - s0.t;
  if (!(span > 0.0)) throw SolverError("drift_velocity: degenerate tail window");
  return (s1.c - s0.c) * (1.0 / span);
}

}  // namespace muskat

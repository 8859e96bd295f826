#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "muskat/diagnostics.hpp"

using namespace muskat;

namespace {

Trajectory synthetic_decay(double rate, double amp, int n_modes, double t_end, double dt) {
  Trajectory traj;
  for (double t = 0.0; t <= t_end + 1e-12; t += dt) {
    SpectralFunction f(n_modes);
    for (int k = 2; k <= n_modes; ++k) {
      f.set_coef(k, Complex{amp * std::exp(-rate * t) * std::exp(-0.5 * k), 0.0});
    }
    traj.snapshots.push_back({f, {0.0, 0.0}, t});
  }
  return traj;
}

}  // namespace

TEST_CASE("decay fit on an exact exponential") {
  const Trajectory traj = synthetic_decay(3.0, 1e-3, 8, 2.0, 0.01);
  const DecayFit fit = decay_fit(traj, {1.0, 0.0, 0.0}, 0.0, 2.0);
  CHECK(fit.rate == Catch::Approx(3.0).margin(1e-10));
  CHECK(fit.r_squared == Catch::Approx(1.0).margin(1e-12));
  CHECK(fit.samples >= 10);

  // too few samples
  CHECK_THROWS_AS(decay_fit(traj, {1.0, 0.0, 0.0}, 1.99, 2.0), SolverError);

  // non-positive norms in the window
  Trajectory flat;
  for (int j = 0; j < 20; ++j) {
    flat.snapshots.push_back({SpectralFunction(4), {0.0, 0.0}, 0.1 * j});
  }
  CHECK_THROWS_AS(decay_fit(flat, {1.0, 0.0, 0.0}, 0.0, 2.0), SolverError);
}

TEST_CASE("analyticity fit on exact geometric decay") {
  SpectralFunction f(24);
  for (int k = 1; k <= 24; ++k) f.set_coef(k, Complex{std::exp(-0.5 * k), 0.0});
  Trajectory traj;
  traj.snapshots.push_back({f, {0.0, 0.0}, 0.0});
  const auto pts = analyticity_fit(traj);
  REQUIRE(pts.size() == 1);
  CHECK(pts[0].valid);
  CHECK(pts[0].rho == Catch::Approx(0.5).margin(1e-8));

  // fewer than three active modes: flagged invalid
  SpectralFunction sparse(8);
  sparse.set_coef(2, Complex{1.0, 0.0});
  sparse.set_coef(3, Complex{0.5, 0.0});
  Trajectory thin;
  thin.snapshots.push_back({sparse, {0.0, 0.0}, 0.0});
  CHECK_FALSE(analyticity_fit(thin)[0].valid);
}

TEST_CASE("drift velocity") {
  Trajectory traj;
  for (int j = 0; j <= 100; ++j) {
    const double t = 0.01 * j;
    traj.snapshots.push_back({SpectralFunction(4), {0.0, 1.5 * t}, t});
  }
  const Vec2 v = drift_velocity(traj);
  CHECK(v.x == Catch::Approx(0.0).margin(1e-14));
  CHECK(v.y == Catch::Approx(1.5).margin(1e-12));

  Trajectory blob;  // no tail below the threshold
  SpectralFunction big(4);
  big.set_coef(2, Complex{0.1, 0.0});
  blob.snapshots.push_back({big, {0.0, 0.0}, 0.0});
  blob.snapshots.push_back({big, {0.0, 0.1}, 1.0});
  CHECK_THROWS_AS(drift_velocity(blob), SolverError);
}

TEST_CASE("conservation report on a synthetic trajectory") {
  Trajectory traj;
  for (int j = 0; j < 12; ++j) {
    SpectralFunction pf(8);
    pf.set_coef(2, Complex{1e-3 * std::exp(-0.1 * j), 0.0});
    SpectralFunction f = pf;
    f.set_coef(0, Complex{zero_mode_from_projection(pf), 0.0});
    traj.snapshots.push_back({f, {0.0, 0.0}, 0.1 * j});
    StepDiagnostics d;
    d.omega_mean_abs = 0.0;
    d.weighted_mean_residual = 1e-12;
    traj.diagnostics.push_back(d);
  }
  const ConservationReport rep = conservation_report(traj);
  CHECK(rep.max_area_drift < 1e-13);
  CHECK(rep.max_zero_mode_residual < 1e-13);
  CHECK(rep.max_omega_mean == 0.0);
  CHECK(rep.max_weighted_mean_residual == Catch::Approx(1e-12));
  REQUIRE(rep.pole_centroid_gap.size() == traj.snapshots.size());
  for (double gap : rep.pole_centroid_gap) CHECK(gap < 1e-5);
}

TEST_CASE("pure-mode linear decay rates from short runs") {
  // A_rs = 0: mode k decays at exactly a_k in the linear regime
  const PhysicalParams params{0.0, 0.0};
  const int n = 16;
  for (int k : {2, 3}) {
    SpectralFunction pf = harmonic(k, 1e-6, 0.0, n);
    SpectralFunction f = pf;
    f.set_coef(0, Complex{zero_mode_from_projection(pf), 0.0});
    IntegratorConfig cfg;
    cfg.n_max = n;
    cfg.dt = 1e-3;
    cfg.t_end = (k == 2) ? 0.8 : 0.25;
    cfg.floor_norm = 0.0;
    const Trajectory traj = run({f, {0.0, 0.0}, 0.0}, cfg, params);
    const DecayFit fit = decay_fit(traj, {1.0, 0.0, 0.0}, 0.02, cfg.t_end);
    const double expected = eigenvalue_a(k);
    CHECK(std::abs(fit.rate - expected) / expected < 0.02);
    CHECK(fit.r_squared > 0.999);
  }
}

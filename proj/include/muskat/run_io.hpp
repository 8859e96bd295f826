#pragma once

// Run orchestration and text outputs: norms time series, curve dumps,
// spectrum snapshot records, diagnostics summary and the run manifest.
// Tables carry 17-significant-digit decimals; snapshots are hex-float exact.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "muskat/config.hpp"
#include "muskat/diagnostics.hpp"
#include "muskat/errors.hpp"
#include "muskat/integrator.hpp"
#include "muskat/snapshot.hpp"
#include "muskat/version.hpp"

namespace muskat {

namespace detail {

inline std::string dec17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Output root override for batch environments.
inline std::filesystem::path output_directory(const OutputSpec& spec) {
  const char* root = std::getenv("MUSKAT_OUTPUT_ROOT");
  std::filesystem::path dir = spec.directory;
  if (root != nullptr && *root != '\0' && dir.is_relative()) {
    dir = std::filesystem::path(root) / dir;
  }
  return dir;
}

inline void write_norms(const std::filesystem::path& path, const Trajectory& traj) {
  std::ofstream out(path);
  out << "# t\tnorm_f01\tnorm_f11\tnorm_f11_nu\tarea_residual\tomega_mean_abs\tcdot_x\tcdot_y\n";
  for (const auto& d : traj.diagnostics) {
    out << dec17(d.t) << '\t' << dec17(d.norm_f01) << '\t' << dec17(d.norm_f11) << '\t'
        << dec17(d.norm_f11_nu) << '\t' << dec17(d.area_residual) << '\t'
        << dec17(d.omega_mean_abs) << '\t' << dec17(d.cdot.x) << '\t' << dec17(d.cdot.y) << '\n';
  }
}

inline void write_vorticity(const std::filesystem::path& path, const Trajectory& traj) {
  std::ofstream out(path);
  out << "# t\tresidual\titerations\tweighted_mean_residual\n";
  for (const auto& d : traj.diagnostics) {
    out << dec17(d.t) << '\t' << dec17(d.vorticity_residual) << '\t' << d.vorticity_iterations
        << '\t' << dec17(d.weighted_mean_residual) << '\n';
  }
}

inline void write_curve(const std::filesystem::path& path, const BubbleState& state,
                        int samples) {
  std::ofstream out(path);
  out << "# alpha\tx\ty\n";
  const auto pts = reconstruct_curve(state, static_cast<std::size_t>(samples));
  for (std::size_t j = 0; j < pts.size(); ++j) {
    const double a = kTwoPi * double(j) / double(pts.size());
    out << dec17(a) << '\t' << dec17(pts[j].x) << '\t' << dec17(pts[j].y) << '\n';
  }
}

inline std::string frame_tag(std::size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%06zu", index);
  return buf;
}

inline void write_diagnostics(const std::filesystem::path& path, const Trajectory& traj) {
  std::ofstream out(path);
  const ConservationReport rep = conservation_report(traj);
  out << "conservation:\n";
  out << "  max_area_drift: " << dec17(rep.max_area_drift) << '\n';
  out << "  max_omega_mean: " << dec17(rep.max_omega_mean) << '\n';
  out << "  max_zero_mode_residual: " << dec17(rep.max_zero_mode_residual) << '\n';
  out << "  max_weighted_mean_residual: " << dec17(rep.max_weighted_mean_residual) << '\n';

  const double t_last = traj.snapshots.back().t;
  out << "decay_fit:\n";
  try {
    const DecayFit fit = decay_fit(traj, {1.0, 0.0, 0.0}, 0.5, std::min(3.0, t_last));
    out << "  window: [" << dec17(fit.t_start) << ", " << dec17(fit.t_end) << "]\n";
    out << "  rate: " << dec17(fit.rate) << '\n';
    out << "  r_squared: " << dec17(fit.r_squared) << '\n';
  } catch (const SolverError& e) {
    out << "  unavailable: " << e.what() << '\n';
  }

  out << "drift_velocity:\n";
  try {
    const Vec2 v = drift_velocity(traj);
    out << "  value: [" << dec17(v.x) << ", " << dec17(v.y) << "]\n";
  } catch (const SolverError& e) {
    out << "  unavailable: " << e.what() << '\n';
  }

  out << "analyticity: # t rho modes\n";
  for (const auto& pt : analyticity_fit(traj)) {
    if (!pt.valid) continue;
    out << "  " << dec17(pt.t) << ' ' << dec17(pt.rho) << ' ' << pt.modes << '\n';
  }

  out << "pole_centroid_gap: # t gap\n";
  for (std::size_t j = 0; j < rep.pole_centroid_gap.size(); ++j) {
    out << "  " << dec17(traj.snapshots[j].t) << ' ' << dec17(rep.pole_centroid_gap[j]) << '\n';
  }
}

inline void write_manifest(const std::filesystem::path& path, const RunConfig& cfg,
                           const std::string& status, const std::string& abort_reason) {
  nlohmann::json j;
  j["muskat_version"] = kVersion;
  j["status"] = status;
  if (!abort_reason.empty()) j["abort_reason"] = abort_reason;
  j["config"] = resolved_config_json(cfg);
  std::ofstream out(path);
  out << j.dump(2) << '\n';
}

}  // namespace detail

struct RunOutcome {
  int exit_code = 1;
  std::filesystem::path output_dir;
  std::string abort_reason;
};

// Executes a configured run end to end: initial-data normalization (or
// snapshot restart), time integration and output emission. Never throws on
// solver aborts; the manifest records the reason and the exit code is 1.
inline RunOutcome run_command(const RunConfig& cfg, std::ostream& log = std::cout) {
  RunOutcome outcome;
  const std::filesystem::path dir = detail::output_directory(cfg.output);
  std::filesystem::create_directories(dir);
  outcome.output_dir = dir;

  try {
    BubbleState initial{SpectralFunction(cfg.integrator.n_max), {0.0, 0.0}, 0.0};
    if (cfg.initial.from_snapshot()) {
      initial = load_snapshot(cfg.initial.snapshot_path);
    } else {
      const SpectralFunction shape = shape_from_modes(cfg.initial, cfg.integrator.n_max);
      const NormalizationResult norm = normalize_initial_data(shape);
      initial.f = norm.f0;
      log << "normalized initial data: shift = (" << norm.shift.x << ", " << norm.shift.y
          << "), scale = " << norm.scale << ", iterations = " << norm.iterations << "\n";
    }

    const Trajectory traj = run(initial, cfg.integrator, cfg.params);

    if (cfg.output.emit.count("norms")) detail::write_norms(dir / "norms.tsv", traj);
    if (cfg.output.emit.count("vorticity")) detail::write_vorticity(dir / "vorticity.tsv", traj);
    const std::size_t last = traj.snapshots.size() - 1;
    if (cfg.output.emit.count("curves")) {
      for (std::size_t j = 0; j < last; j += static_cast<std::size_t>(cfg.output.curve_stride)) {
        detail::write_curve(dir / ("curve_" + detail::frame_tag(j) + ".tsv"), traj.snapshots[j],
                            cfg.output.curve_samples);
      }
      detail::write_curve(dir / "curve_final.tsv", traj.snapshots.back(), cfg.output.curve_samples);
    }
    if (cfg.output.emit.count("spectrum")) {
      std::ofstream spec(dir / "spectrum.txt");
      for (std::size_t j = 0; j < last; j += static_cast<std::size_t>(cfg.output.snapshot_stride)) {
        spec << SnapshotRecord::of(traj.snapshots[j]).serialize() << '\n';
      }
      spec << SnapshotRecord::of(traj.snapshots.back()).serialize() << '\n';
      for (std::size_t j = 0; j < last; j += static_cast<std::size_t>(cfg.output.snapshot_stride)) {
        save_snapshot(dir / ("snapshot_" + detail::frame_tag(j) + ".txt"), traj.snapshots[j]);
      }
      save_snapshot(dir / "snapshot_final.txt", traj.snapshots.back());
    }
    if (cfg.output.emit.count("diagnostics")) {
      detail::write_diagnostics(dir / "diagnostics.txt", traj);
    }
    detail::write_manifest(dir / "manifest.json", cfg, "completed", "");
    log << "run completed: " << traj.snapshots.size() - 1 << " steps to t = "
        << traj.snapshots.back().t
        << (traj.converged_to_circle ? " (converged to circle)" : "") << "\n";
    outcome.exit_code = 0;
  } catch (const std::exception& e) {
    outcome.abort_reason = e.what();
    detail::write_manifest(dir / "manifest.json", cfg, "aborted", e.what());
    log << "run aborted: " << e.what() << "\n";
    outcome.exit_code = 1;
  }
  return outcome;
}

// Restart: state comes from the snapshot, everything else from the config.
inline RunOutcome resume_command(const std::string& snapshot_path, RunConfig cfg,
                                 std::ostream& log = std::cout) {
  cfg.initial.modes.clear();
  cfg.initial.snapshot_path = snapshot_path;
  return run_command(cfg, log);
}

// Accepts either a plain config document or a manifest (which embeds one).
inline RunConfig load_config_or_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const nlohmann::json probe = detail::parse_strict_json(text);
  if (probe.is_object() && probe.contains("config")) {
    return parse_config(probe.at("config").dump());
  }
  return parse_config(text);
}

}  // namespace muskat

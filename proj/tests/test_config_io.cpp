#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "muskat/config.hpp"
#include "muskat/run_io.hpp"
#include "muskat/snapshot.hpp"
#include "muskat/verify.hpp"

using namespace muskat;

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::filesystem::path temp_dir(const std::string& tag) {
  const auto dir = std::filesystem::temp_directory_path() / ("muskat_test_" + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("minimal config gets defaults") {
  const auto cfg = parse_config(R"({
    "params": {"A_mu": 0, "A_rhosigma": 1},
    "initial": {"modes": [[2, 0.01, 0]]}
  })");
  CHECK(cfg.integrator.n_max == 128);
  CHECK(cfg.integrator.dt == Catch::Approx(1e-3));
  CHECK(cfg.integrator.t_end == Catch::Approx(5.0));
  CHECK(cfg.integrator.scheme == Scheme::etdrk2_diagonalized);
  CHECK(cfg.params.A_rhosigma == 1.0);
  REQUIRE(cfg.initial.modes.size() == 1);
  CHECK(cfg.initial.modes[0].k == 2);
  CHECK(cfg.output.emit.count("norms") == 1);
}

TEST_CASE("config validation errors") {
  // A_mu out of range
  CHECK_THROWS_WITH(parse_config(R"({
    "params": {"A_mu": 1.5, "A_rhosigma": 0},
    "initial": {"modes": [[2, 0.01]]}
  })"),
                    Catch::Matchers::ContainsSubstring("A_mu outside [-1,1]"));

  // unknown keys rejected
  CHECK_THROWS_WITH(parse_config(R"({
    "params": {"A_mu": 0, "A_rhosigma": 0, "extra": 1},
    "initial": {"modes": [[2, 0.01]]}
  })"),
                    Catch::Matchers::ContainsSubstring("unknown key"));

  // mode numbers start at one
  CHECK_THROWS_WITH(parse_config(R"({
    "params": {"A_mu": 0, "A_rhosigma": 0},
    "initial": {"modes": [[0, 0.01]]}
  })"),
                    Catch::Matchers::ContainsSubstring("mode numbers must be >= 1"));

  // missing initial
  CHECK_THROWS_AS(parse_config(R"({"params": {"A_mu": 0, "A_rhosigma": 0}})"), ConfigError);
}

TEST_CASE("duplicate keys are a parse error") {
  try {
    parse_config(R"({
      "params": {"A_mu": 0, "A_mu": 1, "A_rhosigma": 0},
      "initial": {"modes": [[2, 0.01]]}
    })");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("duplicate key") != std::string::npos);
    CHECK(e.line() == 2);
  }
}

TEST_CASE("syntax errors carry line and column") {
  try {
    parse_config("{\n  \"params\": {\n    \"A_mu\": ,\n  }\n}");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.line() == 3);
    CHECK(std::string(e.what()).find("parse error") != std::string::npos);
  }
}

TEST_CASE("initial section must name exactly one source") {
  CHECK_THROWS_WITH(parse_config(R"({
    "params": {"A_mu": 0, "A_rhosigma": 0},
    "initial": {"modes": [[2, 0.01]], "snapshot": "x.txt"}
  })"),
                    Catch::Matchers::ContainsSubstring("exactly one"));
  CHECK_THROWS_WITH(parse_config(R"({
    "params": {"A_mu": 0, "A_rhosigma": 0},
    "initial": {}
  })"),
                    Catch::Matchers::ContainsSubstring("exactly one"));
}

TEST_CASE("snapshot deserialization rejects malformed records") {
  const BubbleState state{harmonic(2, 0.01, 0.0, 4), {0.0, 0.0}, 1.0};
  const std::string line = SnapshotRecord::of(state).serialize();

  // missing field
  const auto no_c = line.substr(line.find("n_max="));
  CHECK_THROWS_WITH(SnapshotRecord::deserialize(no_c),
                    Catch::Matchers::ContainsSubstring("missing field"));

  // truncated coefficient list breaks the checksum before the count check
  std::string cut = line;
  const auto at = cut.find("coeffs=");
  cut.erase(at + 9, 5);
  CHECK_THROWS_AS(SnapshotRecord::deserialize(cut), SolverError);
}

TEST_CASE("quick verification level is green") {
  const auto results = run_verification(VerifyLevel::quick);
  for (const auto& r : results) {
    INFO(r.name << ": " << r.detail);
    CHECK(r.pass);
  }
}

TEST_CASE("snapshot records round trip losslessly") {
  std::mt19937 rng(77);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  SpectralFunction f(24);
  for (int k = 1; k <= 24; ++k) f.set_coef(k, 1e-3 * Complex{u(rng), u(rng)});
  f.set_coef(0, Complex{u(rng) * 1e-5, 0.0});
  const BubbleState state{f, {0.123456789012345678, -3.25}, 2.75};

  const std::string line = SnapshotRecord::of(state).serialize();
  const BubbleState back = SnapshotRecord::deserialize(line).to_state();
  CHECK(back.t == state.t);
  CHECK(back.c.x == state.c.x);
  CHECK(back.c.y == state.c.y);
  REQUIRE(back.f.n_max() == 24);
  for (int k = 0; k <= 24; ++k) {
    CHECK(back.f.coef(k) == state.f.coef(k));  // bit-exact via hex floats
  }

  // tampering breaks the checksum
  std::string corrupt = line;
  const auto pos = corrupt.find("coeffs=");
  corrupt[pos + 10] = corrupt[pos + 10] == '0' ? '1' : '0';
  CHECK_THROWS_WITH(SnapshotRecord::deserialize(corrupt),
                    Catch::Matchers::ContainsSubstring("checksum"));
}

TEST_CASE("run command emits outputs deterministically") {
  const auto dir = temp_dir("run");
  RunConfig cfg = parse_config(R"({
    "params": {"A_mu": 0.0, "A_rhosigma": 1.0},
    "integrator": {"dt": 0.001, "t_end": 0.02, "n_max": 12},
    "initial": {"modes": [[2, 0.01]]},
    "output": {"directory": "", "curve_stride": 10, "snapshot_stride": 10}
  })");
  cfg.output.directory = (dir / "a").string();
  std::ostringstream log;
  const RunOutcome first = run_command(cfg, log);
  REQUIRE(first.exit_code == 0);
  CHECK(std::filesystem::exists(dir / "a" / "norms.tsv"));
  CHECK(std::filesystem::exists(dir / "a" / "curve_final.tsv"));
  CHECK(std::filesystem::exists(dir / "a" / "spectrum.txt"));
  CHECK(std::filesystem::exists(dir / "a" / "vorticity.tsv"));
  CHECK(std::filesystem::exists(dir / "a" / "diagnostics.txt"));
  CHECK(std::filesystem::exists(dir / "a" / "manifest.json"));

  cfg.output.directory = (dir / "b").string();
  const RunOutcome second = run_command(cfg, log);
  REQUIRE(second.exit_code == 0);
  CHECK(read_file(dir / "a" / "norms.tsv") == read_file(dir / "b" / "norms.tsv"));
  CHECK(read_file(dir / "a" / "spectrum.txt") == read_file(dir / "b" / "spectrum.txt"));
}

TEST_CASE("manifest replays the run bit-identically") {
  const auto dir = temp_dir("manifest");
  RunConfig cfg = parse_config(R"({
    "params": {"A_mu": 0.5, "A_rhosigma": 1.0},
    "integrator": {"dt": 0.001, "t_end": 0.01, "n_max": 10},
    "initial": {"modes": [[2, 0.005]]},
    "output": {"directory": ""}
  })");
  cfg.output.directory = (dir / "orig").string();
  std::ostringstream log;
  REQUIRE(run_command(cfg, log).exit_code == 0);

  RunConfig replay = load_config_or_manifest((dir / "orig" / "manifest.json").string());
  replay.output.directory = (dir / "replay").string();
  REQUIRE(run_command(replay, log).exit_code == 0);
  CHECK(read_file(dir / "orig" / "norms.tsv") == read_file(dir / "replay" / "norms.tsv"));
}

TEST_CASE("restart from a snapshot continues the run") {
  const auto dir = temp_dir("restart");
  RunConfig cfg = parse_config(R"({
    "params": {"A_mu": 0.0, "A_rhosigma": 1.0},
    "integrator": {"dt": 0.001, "t_end": 0.02, "n_max": 12},
    "initial": {"modes": [[2, 0.01]]},
    "output": {"directory": "", "snapshot_stride": 10}
  })");
  std::ostringstream log;

  cfg.output.directory = (dir / "full").string();
  REQUIRE(run_command(cfg, log).exit_code == 0);

  // snapshot index 10 is t = 0.01
  const auto mid = dir / "full" / "snapshot_000010.txt";
  REQUIRE(std::filesystem::exists(mid));

  RunConfig tail = cfg;
  tail.output.directory = (dir / "tail").string();
  REQUIRE(resume_command(mid.string(), tail, log).exit_code == 0);

  const BubbleState full_final = load_snapshot((dir / "full" / "snapshot_final.txt").string());
  const BubbleState tail_final = load_snapshot((dir / "tail" / "snapshot_final.txt").string());
  CHECK(full_final.t == Catch::Approx(tail_final.t));
  double worst = 0.0;
  for (int k = 0; k <= 12; ++k) {
    worst = std::max(worst, std::abs(full_final.f.coef(k) - tail_final.f.coef(k)));
  }
  CHECK(worst < 1e-10);
  CHECK(std::abs(full_final.c.y - tail_final.c.y) < 1e-10);
}

TEST_CASE("solver abort is reported through the manifest") {
  const auto dir = temp_dir("abort");
  RunConfig cfg = parse_config(R"({
    "params": {"A_mu": 1.0, "A_rhosigma": 0.0},
    "integrator": {"dt": 0.001, "t_end": 0.01, "n_max": 12},
    "initial": {"modes": [[2, 0.4]]},
    "output": {"directory": ""}
  })");
  cfg.output.directory = (dir / "x").string();
  std::ostringstream log;
  const RunOutcome out = run_command(cfg, log);
  CHECK(out.exit_code == 1);
  const std::string manifest = read_file(dir / "x" / "manifest.json");
  CHECK(manifest.find("aborted") != std::string::npos);
  CHECK(manifest.find("abort_reason") != std::string::npos);
}

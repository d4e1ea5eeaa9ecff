#include "errsense/config.hpp"
#include "errsense/error.hpp"
#include "errsense/pipeline.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

using namespace errsense;
using nlohmann::json;

TEST_CASE("configs round-trip and hash stably") {
  RunConfig c;
  c.seed = 42;
  const auto j = c.to_json();
  const auto back = config_from_json(j);
  CHECK(back.to_json() == j);
  CHECK(back.hash() == c.hash());
  CHECK(c.hash().size() == 16);

  RunConfig d = c;
  d.synth.block.errp_amplitude_uv = 1.0;
  CHECK(d.hash() != c.hash());
}

TEST_CASE("unknown keys are rejected with their path") {
  try {
    (void)config_from_json(json{{"synth", {{"errp_amp", 3}}}});
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("synth.errp_amp") != std::string::npos);
  }
  CHECK_THROWS_AS(config_from_json(json{{"seed", "abc"}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(json{{"synth", {{"noise_sigma_uv", -1}}}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(json{{"pipeline", {{"modalities", {"emg"}}}}}), ConfigError);
}

TEST_CASE("the master seed is mandatory") {
  RunConfig c;
  CHECK_THROWS_AS(c.master_seed(), ConfigError);
  CHECK_THROWS_AS(c.experiment(), ConfigError);
  c.seed = 1;
  const auto e1 = c.experiment();
  c.seed = 2;
  const auto e2 = c.experiment();
  CHECK(e1.dataset.seed != e2.dataset.seed);
  CHECK(e1.eval.seed != e2.eval.seed);
}

TEST_CASE("exit codes by error category") {
  CHECK(exit_code_for(ConfigError("x")) == 2);
  CHECK(exit_code_for(ParameterError("x")) == 2);
  CHECK(exit_code_for(FormatError("x")) == 3);
  CHECK(exit_code_for(CapacityError("x")) == 3);
  CHECK(exit_code_for(InvariantError("x")) == 4);
  CHECK(exit_code_for(StageError("eval", 3, "boom")) == 3);
  CHECK(exit_code_for(std::runtime_error("x")) == 1);
}

TEST_CASE("session blocks cover the design") {
  RunConfig c;
  c.seed = 5;
  std::size_t blocks = 0;
  for (std::size_t p = 0; p < c.synth.participants; ++p) {
    for (Environment env : c.synth.environments) {
      const auto b = session_blocks(c, p, env);
      blocks += b.size();
      std::set<Difficulty> seen;
      for (const auto& x : b) seen.insert(x.difficulty);
      CHECK(seen.size() == 3);
      CHECK(b[0].eye_tracking == (p >= 2 && p <= 5));
    }
  }
  CHECK(blocks == 81);
  CHECK(session_blocks(c, 0, Environment::two_g)[0].motion_artifact_gain == 2.0);
}

TEST_CASE("synth with one participant writes three sessions") {
  testing::TempDir tmp("synth_one");
  RunConfig c;
  c.seed = 3;
  c.synth.participants = 1;
  c.synth.block.block_duration_s = 20.0;
  const auto names = cmd_synth(c, tmp.path);
  CHECK(names.size() == 3);
  CHECK(std::filesystem::exists(tmp.path / "cohort.json"));
  CHECK(std::filesystem::exists(tmp.path / "P1_baseline" / "manifest.json"));

  c.synth.environments = {Environment::baseline};
  testing::TempDir one("synth_single");
  CHECK(cmd_synth(c, one.path).size() == 1);
}

TEST_CASE("verify passes and a zero tolerance scale fails without throwing") {
  RunConfig c;
  c.seed = 1;
  for (const auto& r : run_verify(c)) CHECK_MESSAGE(r.pass, r.name);
  c.verify.tolerance_scale = 0.0;
  std::vector<CheckResult> strict;
  CHECK_NOTHROW(strict = run_verify(c));
  CHECK(std::any_of(strict.begin(), strict.end(), [](const CheckResult& r) { return !r.pass; }));
}

TEST_CASE("tampered filter taps fail the filter check") {
  auto k = design_fir_bandpass(0.5, 50.0, 0.1, 0.5, 256.0);
  for (const auto& r : check_filter(k, "eeg", 1.0)) CHECK(r.pass);
  k.taps[k.size() / 2] += 0.05;
  const auto bad = check_filter(k, "eeg", 1.0);
  CHECK(std::any_of(bad.begin(), bad.end(), [](const CheckResult& r) { return !r.pass; }));
}

namespace {
RunConfig tiny_cohort() {
  RunConfig c;
  c.seed = 9;
  c.synth.participants = 3;
  c.synth.eye_tracking_participants = {"P2", "P3"};
  c.synth.block.block_duration_s = 60.0;
  c.learn.forest.n_trees = 10;
  c.eval.k = 3;
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}
} // namespace

TEST_CASE("pipeline writes provenance-stamped reports") {
  const auto c = tiny_cohort();
  testing::TempDir tmp("pipeline");
  cmd_synth(c, tmp.path / "sessions");
  const auto r = cmd_pipeline(c, tmp.path / "sessions", tmp.path / "out");
  CHECK(r.datasets.size() == 3);
  CHECK(r.reports.size() == 6);
  for (const auto& d : r.datasets) CHECK(d.count(EventKind::error) == d.count(EventKind::non_error));

  const auto csv = slurp(tmp.path / "out" / "report.csv");
  std::size_t lines = std::count(csv.begin(), csv.end(), '\n');
  // header + EEG 4 + ET 4 + pooled ECG 1
  CHECK(lines == 10);
  CHECK(csv.find(c.hash()) != std::string::npos);
  for (const char* f : {"report.json", "participants.csv", "datasets/eeg.json"}) {
    CHECK(slurp(tmp.path / "out" / f).find(c.hash()) != std::string::npos);
  }
  const auto sidecar = json::parse(slurp(tmp.path / "out" / "datasets" / "et.json"));
  CHECK(sidecar["participants"].size() == 2);
  CHECK(sidecar["skipped_sessions"].size() == 3);
}

TEST_CASE("stage failures carry the stage name") {
  auto c = tiny_cohort();
  testing::TempDir tmp("stage");
  try {
    cmd_pipeline(c, tmp.path / "missing", tmp.path / "out");
    FAIL("expected StageError");
  } catch (const StageError& e) {
    CHECK(e.stage() == "features");
    CHECK(e.exit_code() == 3);
  }
  c.seed.reset();
  try {
    run_pipeline(c, synth_source(tiny_cohort()));
    FAIL("expected StageError");
  } catch (const StageError& e) {
    CHECK(e.stage() == "config");
    CHECK(e.exit_code() == 2);
  }
  CHECK(stage_plan(tiny_cohort()).size() == 7);
}

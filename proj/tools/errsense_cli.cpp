#include "errsense/config.hpp"
#include "errsense/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

using namespace errsense;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string sessions;
  std::vector<std::string> modalities;
  std::vector<std::string> strategies;
  std::optional<double> tolerance_scale;
  bool dry_run{false};
};

RunConfig resolve(const Options& o) {
  RunConfig cfg = o.config.empty() ? RunConfig{} : load_config(o.config);
  if (o.seed) cfg.seed = o.seed;
  if (!o.out.empty()) cfg.paths.out = o.out;
  if (!o.sessions.empty()) cfg.paths.sessions = o.sessions;
  try {
    if (!o.modalities.empty()) {
      cfg.pipeline.modalities.clear();
      for (const auto& m : o.modalities) cfg.pipeline.modalities.push_back(parse_modality(m));
    }
    if (!o.strategies.empty()) {
      cfg.pipeline.strategies.clear();
      for (const auto& s : o.strategies) cfg.pipeline.strategies.push_back(parse_strategy(s));
    }
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (o.tolerance_scale) cfg.verify.tolerance_scale = *o.tolerance_scale;
  return cfg;
}

int run_synth(const Options& o) {
  const RunConfig cfg = resolve(o);
  cfg.master_seed();
  if (o.dry_run) {
    std::cout << "synth: " << cfg.synth.participants << " participants x " << cfg.synth.environments.size()
              << " environments x " << cfg.synth.difficulties.size() << " blocks -> " << cfg.paths.out.string()
              << "\nconfig_hash " << cfg.hash() << "\n";
    return 0;
  }
  const auto names = cmd_synth(cfg, cfg.paths.out);
  std::cout << "wrote " << names.size() << " sessions to " << cfg.paths.out.string() << "\n";
  return 0;
}

int run_pipeline_cmd(const Options& o) {
  const RunConfig cfg = resolve(o);
  cfg.experiment();
  if (o.dry_run) {
    for (const auto& line : stage_plan(cfg)) std::cout << line << "\n";
    std::cout << "config_hash " << cfg.hash() << "\n";
    return 0;
  }
  const auto r = cmd_pipeline(cfg, cfg.paths.sessions, cfg.paths.out);
  for (const auto& n : r.notes) std::cout << "note: " << n << "\n";
  for (const auto& rep : r.reports) {
    std::printf("%-4s %-14s %-10s acc %6.2f +- %5.2f  (n=%zu, %zu participants)\n",
                std::string(to_string(rep.modality)).c_str(), std::string(to_string(rep.classifier)).c_str(),
                std::string(to_string(rep.strategy)).c_str(), 100.0 * rep.overall.accuracy.mean,
                100.0 * rep.overall.accuracy.sd, rep.n_samples, rep.participants.size());
  }
  std::cout << "reports in " << cfg.paths.out.string() << "\n";
  return 0;
}

int run_verify_cmd(const Options& o) {
  const RunConfig cfg = resolve(o);
  if (o.dry_run) {
    std::cout << "verify: oracle suite, tolerance scale " << cfg.verify.tolerance_scale << "\n";
    return 0;
  }
  const auto checks = run_verify(cfg);
  bool ok = true;
  std::printf("%-28s %-6s %12s %12s\n", "check", "result", "measured", "tolerance");
  for (const auto& c : checks) {
    std::printf("%-28s %-6s %12.3e %12.3e %s\n", c.name.c_str(), c.pass ? "PASS" : "FAIL", c.measured,
                c.tolerance * cfg.verify.tolerance_scale, c.detail.c_str());
    ok = ok && c.pass;
  }
  return ok ? 0 : 4;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"errsense: error detection from physiological signals"};
  app.set_version_flag("--version", artifact_version());
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "master seed");
    sub->add_option("--out", o.out, "output directory");
    sub->add_flag("--dry-run", o.dry_run, "validate the config and print the plan");
  };
  auto* synth = app.add_subcommand("synth", "generate a synthetic cohort");
  common(synth);
  auto* pipe = app.add_subcommand("pipeline", "preprocess, featurize, train and evaluate");
  common(pipe);
  pipe->add_option("--sessions", o.sessions, "session directory tree");
  pipe->add_option("--modality", o.modalities, "eeg, et or ecg (repeatable)");
  pipe->add_option("--strategy", o.strategies, "grouped_cv, lopo or per_participant_cv (repeatable)");
  auto* verify = app.add_subcommand("verify", "run the oracle suite");
  common(verify);
  verify->add_option("--tolerance-scale", o.tolerance_scale, "multiply every tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (synth->parsed()) return run_synth(o);
    if (pipe->parsed()) return run_pipeline_cmd(o);
    return run_verify_cmd(o);
  } catch (const StageError& e) {
    std::cerr << "error [" << e.stage() << "]: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
}

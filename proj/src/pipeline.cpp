#include "errsense/pipeline.hpp"

#include "errsense/oracles.hpp"
#include "errsense/rng.hpp"
#include "errsense/session_io.hpp"
#include "errsense/wavelet.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

namespace errsense {

using nlohmann::json;
namespace fs = std::filesystem;

int exit_code_for(const std::exception& e) {
  if (const auto* s = dynamic_cast<const StageError*>(&e)) return s->exit_code();
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ParameterError*>(&e)) return 2;
  if (dynamic_cast<const InvariantError*>(&e)) return 4;
  if (dynamic_cast<const Error*>(&e)) return 3;
  return 1;
}

StageError::StageError(std::string stage, int exit_code, const std::string& cause)
    : Error("stage '" + stage + "' failed: " + cause), stage_(std::move(stage)), code_(exit_code) {}

namespace {

template <typename F>
auto in_stage(const std::string& stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, exit_code_for(e), e.what());
  }
}

void write_text(const fs::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw IoError("cannot write " + file.string());
  out << text;
  if (!out) throw IoError("failed writing " + file.string());
}

std::string fmt(double v, const char* spec = "%.4f") {
  if (!std::isfinite(v)) return std::isnan(v) ? "" : (v > 0 ? "inf" : "-inf");
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string fmt_p(double v) { return fmt(v, "%.6g"); }

json dataset_sidecar(const Dataset& d, const RunConfig& cfg, const ExperimentConfig& exp) {
  const auto& s = d.stats;
  return {{"modality", std::string(to_string(d.modality))},
          {"seed", exp.dataset.seed},
          {"width_s", exp.dataset.width_s},
          {"guard_s", exp.dataset.guard_s},
          {"n_features", d.feature_names.size()},
          {"counts", {{"error", d.count(EventKind::error)}, {"non_error", d.count(EventKind::non_error)}}},
          {"participants", d.participants()},
          {"dropped",
           {{"error_out_of_span", s.error_out_of_span},
            {"error_flagged", s.error_flagged},
            {"non_error_redrawn", s.non_error_redrawn}}},
          {"error_events", s.error_events},
          {"skipped_sessions", s.skipped_sessions},
          {"provenance", provenance(cfg)}};
}

struct CsvRow {
  std::string modality, environment, strategy, classifier;
  MetricSummary m;
  std::size_t n_participants{0}, n_samples{0};
};

std::string csv_line(const CsvRow& r, const std::string& hash, const std::string& version) {
  std::string p = "", t = "", sig = "";
  if (r.m.t_test) {
    t = fmt(r.m.t_test->t);
    p = fmt_p(r.m.t_test->p);
    sig = r.m.t_test->p < 0.001 ? "1" : "0";
  }
  auto pc = [](double v) { return fmt(100.0 * v); };
  return r.modality + "," + r.environment + "," + r.strategy + "," + r.classifier + "," + pc(r.m.accuracy.mean) +
         "," + pc(r.m.accuracy.sd) + "," + pc(r.m.precision.mean) + "," + pc(r.m.precision.sd) + "," +
         pc(r.m.recall.mean) + "," + pc(r.m.recall.sd) + "," + pc(r.m.f1.mean) + "," + pc(r.m.f1.sd) + "," + t +
         "," + p + "," + sig + "," + std::to_string(r.m.accuracy.n) + "," + std::to_string(r.n_participants) + "," +
         std::to_string(r.n_samples) + "," + hash + "," + version + "\n";
}

MetricSummary pool_folds(const std::vector<const EvalReport*>& reps) {
  std::vector<double> a, p, r, f;
  for (const auto* rep : reps) {
    for (const auto& fold : rep->folds) {
      a.push_back(fold.overall.accuracy);
      p.push_back(fold.overall.precision);
      r.push_back(fold.overall.recall);
      f.push_back(fold.overall.f1);
    }
  }
  MetricSummary s;
  s.accuracy = summarize(a);
  s.precision = summarize(p);
  s.recall = summarize(r);
  s.f1 = summarize(f);
  if (a.size() >= 2) s.t_test = t_test_vs_chance(a);
  return s;
}

} // namespace

// Synthetic cohort ---------------------------------------------------------------

std::string session_name(const std::string& participant_id, Environment env) {
  return participant_id + "_" + std::string(to_string(env));
}

std::vector<SynthConfig> session_blocks(const RunConfig& cfg, std::size_t participant, Environment env) {
  const SynthPlan& plan = cfg.synth;
  const std::string id = "P" + std::to_string(participant + 1);
  const std::uint64_t pseed = derive_seed(cfg.synth_seed(), id);
  Rng prng(pseed);
  const double amp_factor = 1.0 + plan.errp_amplitude_spread * prng.uniform(-1.0, 1.0);
  const bool eye = std::find(plan.eye_tracking_participants.begin(), plan.eye_tracking_participants.end(), id) !=
                   plan.eye_tracking_participants.end();

  std::vector<Difficulty> order = plan.difficulties;
  if (plan.shuffle_difficulty) {
    Rng orng(derive_seed(pseed, to_string(env)));
    orng.shuffle(order);
  }
  std::vector<SynthConfig> blocks;
  for (Difficulty d : order) {
    SynthConfig b = plan.block;
    b.participant_id = id;
    b.environment = env;
    b.difficulty = d;
    b.motion_artifact_gain = plan.motion_gain[static_cast<int>(env)];
    b.errp_amplitude_uv *= amp_factor;
    b.eye_tracking = eye;
    b.seed = derive_seed(pseed, std::string(to_string(env)) + "/" + std::string(to_string(d)));
    blocks.push_back(b);
  }
  return blocks;
}

SessionSource synth_source(const RunConfig& cfg) {
  return [cfg](const SessionVisitor& visit) {
    for (std::size_t p = 0; p < cfg.synth.participants; ++p) {
      for (Environment env : cfg.synth.environments) {
        const auto blocks = session_blocks(cfg, p, env);
        visit(generate_session(blocks));
      }
    }
  };
}

SessionSource directory_source(const fs::path& dir) {
  return [dir](const SessionVisitor& visit) {
    if (!fs::is_directory(dir)) throw IoError("session directory " + dir.string() + " does not exist");
    std::vector<fs::path> sessions;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.is_directory() && fs::exists(entry.path() / "manifest.json")) sessions.push_back(entry.path());
    }
    if (sessions.empty()) throw FormatError("no session directories under " + dir.string());
    std::sort(sessions.begin(), sessions.end());
    for (const auto& s : sessions) visit(load_session(s));
  };
}

std::vector<std::string> cmd_synth(const RunConfig& cfg, const fs::path& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create " + out.string() + ": " + ec.message());
  const json prov = provenance(cfg);
  std::vector<std::string> names;
  json listing = json::array();
  for (std::size_t p = 0; p < cfg.synth.participants; ++p) {
    for (Environment env : cfg.synth.environments) {
      const auto blocks = session_blocks(cfg, p, env);
      const SessionBundle b = generate_session(blocks);
      const std::string name = session_name(b.participant_id, env);
      save_session(b, out / name, prov);
      names.push_back(name);
      listing.push_back({{"session", name},
                         {"errors", b.events.count(EventKind::error)},
                         {"eye_tracking", b.has_eye_tracking()}});
    }
  }
  json cohort = {{"sessions", listing}, {"config", cfg.to_json()}, {"provenance", prov}};
  write_text(out / "cohort.json", cohort.dump(2) + "\n");
  return names;
}

// Pipeline ---------------------------------------------------------------------

std::vector<std::string> stage_plan(const RunConfig& cfg) {
  std::vector<std::string> plan;
  std::string mods, strats, clfs;
  for (auto m : cfg.pipeline.modalities) mods += (mods.empty() ? "" : ",") + std::string(to_string(m));
  for (auto s : cfg.pipeline.strategies) strats += (strats.empty() ? "" : ",") + std::string(to_string(s));
  for (auto c : cfg.pipeline.classifiers) clfs += (clfs.empty() ? "" : ",") + std::string(to_string(c));
  plan.push_back("load: session directories, one at a time");
  plan.push_back("preprocess: chains for " + mods);
  plan.push_back("features: " + fmt(cfg.features.window_s, "%g") + " s windows");
  plan.push_back("dataset: balanced windows, guard " + fmt(cfg.dataset.guard_s, "%g") + " s");
  plan.push_back("learn: " + clfs);
  plan.push_back("eval: " + strats + " (k = " + std::to_string(cfg.eval.k) + ")");
  plan.push_back("report: report.json, report.csv, participants.csv, datasets/");
  return plan;
}

PipelineResult run_pipeline(const RunConfig& cfg, const SessionSource& source) {
  const ExperimentConfig exp = in_stage("config", [&] { return cfg.experiment(); });
  PipelineResult result;
  std::vector<DatasetBuilder> builders;
  for (Modality m : cfg.pipeline.modalities) builders.emplace_back(m, exp.preprocess, exp.features, exp.dataset);

  in_stage("features", [&] {
    source([&](const SessionBundle& b) {
      for (auto& builder : builders) builder.add(b);
    });
  });
  for (auto& builder : builders) {
    result.datasets.push_back(builder.take());
    in_stage("dataset", [&] { check_balance(result.datasets.back()); });
  }

  for (const Dataset& d : result.datasets) {
    const std::size_t n_participants = d.participants().size();
    if (n_participants < 2) {
      result.notes.push_back(std::string(to_string(d.modality)) + ": fewer than two participants, not evaluated");
      continue;
    }
    for (ClassifierKind c : cfg.pipeline.classifiers) {
      for (Strategy s : cfg.pipeline.strategies) {
        EvalConfig ec = exp.eval;
        if (s == Strategy::grouped_cv && ec.k > n_participants) {
          result.notes.push_back(std::string(to_string(d.modality)) + ": grouped_cv k reduced to " +
                                 std::to_string(n_participants) + " participants");
          ec.k = n_participants;
        }
        result.reports.push_back(in_stage("eval", [&] { return evaluate_dataset(d, c, s, exp.learn, ec); }));
      }
    }
  }
  return result;
}

void write_pipeline_outputs(const PipelineResult& r, const RunConfig& cfg, const fs::path& out) {
  in_stage("report", [&] {
    std::error_code ec;
    fs::create_directories(out / "datasets", ec);
    if (ec) throw IoError("cannot create " + out.string() + ": " + ec.message());
    const ExperimentConfig exp = cfg.experiment();
    const std::string hash = cfg.hash();
    const std::string version = artifact_version();

    for (const Dataset& d : r.datasets) {
      const std::string mod(to_string(d.modality));
      write_dataset_csv(d, out / "datasets" / (mod + ".csv"));
      write_text(out / "datasets" / (mod + ".json"), dataset_sidecar(d, cfg, exp).dump(2) + "\n");
    }

    json reports = json::array();
    for (const auto& rep : r.reports) reports.push_back(rep.to_json());
    json doc = {{"provenance", provenance(cfg)}, {"config", cfg.to_json()}, {"notes", r.notes}, {"reports", reports}};
    write_text(out / "report.json", doc.dump(2) + "\n");

    std::string csv =
        "modality,environment,strategy,classifier,accuracy_mean,accuracy_sd,precision_mean,precision_sd,"
        "recall_mean,recall_sd,f1_mean,f1_sd,t_statistic,p_value,significant_p001,n_folds,n_participants,"
        "n_samples,config_hash,artifact_version\n";
    std::set<ClassifierKind> ecg_done;
    for (const auto& rep : r.reports) {
      const std::string mod(to_string(rep.modality));
      const std::string clf(to_string(rep.classifier));
      if (rep.modality == Modality::ecg) {
        if (ecg_done.count(rep.classifier)) continue;
        ecg_done.insert(rep.classifier);
        std::vector<const EvalReport*> all;
        for (const auto& other : r.reports) {
          if (other.modality == Modality::ecg && other.classifier == rep.classifier) all.push_back(&other);
        }
        csv += csv_line({mod, "both", "both", clf, pool_folds(all), rep.participants.size(), rep.n_samples}, hash,
                        version);
        continue;
      }
      const std::string strat(to_string(rep.strategy));
      csv += csv_line({mod, "baseline", strat, clf, rep.baseline, rep.participants.size(), rep.n_samples}, hash,
                      version);
      csv += csv_line({mod, "airborne", strat, clf, rep.airborne, rep.participants.size(), rep.n_samples}, hash,
                      version);
    }
    write_text(out / "report.csv", csv);

    std::string pcsv = "modality,classifier,strategy,participant_id,n_samples,accuracy,precision,recall,f1,"
                       "config_hash,artifact_version\n";
    for (const auto& rep : r.reports) {
      for (const auto& p : rep.per_participant) {
        pcsv += std::string(to_string(rep.modality)) + "," + std::string(to_string(rep.classifier)) + "," +
                std::string(to_string(rep.strategy)) + "," + p.participant_id + "," + std::to_string(p.n_samples) +
                "," + fmt(100.0 * p.metrics.accuracy) + "," + fmt(100.0 * p.metrics.precision) + "," +
                fmt(100.0 * p.metrics.recall) + "," + fmt(100.0 * p.metrics.f1) + "," + hash + "," + version + "\n";
      }
    }
    write_text(out / "participants.csv", pcsv);
  });
}

PipelineResult cmd_pipeline(const RunConfig& cfg, const fs::path& sessions, const fs::path& out) {
  PipelineResult r = run_pipeline(cfg, directory_source(sessions));
  write_pipeline_outputs(r, cfg, out);
  return r;
}

// Verify -----------------------------------------------------------------------

namespace {

CheckResult make_check(std::string name, double measured, double tolerance, double scale, std::string detail = {}) {
  CheckResult c;
  c.name = std::move(name);
  c.measured = measured;
  c.tolerance = tolerance;
  c.pass = std::isfinite(measured) && measured <= tolerance * scale;
  c.detail = std::move(detail);
  return c;
}

std::vector<double> random_series(Rng& rng, std::size_t n) {
  std::vector<double> x(n);
  double prev = 0.0;
  for (double& v : x) {
    prev = 0.6 * prev + rng.normal();
    v = prev + 0.5 * std::sin(0.3 * static_cast<double>(&v - x.data()));
  }
  return x;
}

} // namespace

std::vector<CheckResult> check_filter(const FirKernel& kernel, const std::string& name, double scale) {
  const auto r = oracle::probe_filter(kernel, 1000);
  std::vector<CheckResult> out;
  out.push_back(make_check(name + "_passband_ripple_db", r.max_passband_deviation_db, 1.0, scale));
  // -40 dB is an amplitude ratio of 0.01.
  out.push_back(make_check(name + "_stopband_gain", std::pow(10.0, r.max_stopband_gain_db / 20.0), 0.01, scale,
                           "max stopband " + fmt(r.max_stopband_gain_db, "%.1f") + " dB"));
  // Period of the probe must exceed the lag search span or the peak is ambiguous.
  const auto& d = kernel.design;
  const double f = std::clamp(d.rate_hz / 64.0, d.low_hz + d.transition_low_hz, d.high_hz - d.transition_high_hz);
  const auto n = std::max<std::size_t>(4 * kernel.size(), 4096);
  const int lag = oracle::zero_phase_lag(kernel.taps, f, d.rate_hz, n);
  out.push_back(make_check(name + "_zero_phase_lag", std::abs(lag), 0.0, scale));
  return out;
}

std::vector<CheckResult> run_verify(const RunConfig& cfg) {
  const double scale = cfg.verify.tolerance_scale;
  Rng rng(cfg.seed.value_or(0x5eed));
  std::vector<CheckResult> out;

  {
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      const auto x = random_series(rng, 256);
      const auto a = psd_band_powers(x, 256.0).as_array();
      const auto b = oracle::dft_band_powers(x, 256.0).as_array();
      for (int k = 0; k < 5; ++k) worst = std::max(worst, std::abs(a[k] - b[k]) / std::max(1e-300, std::abs(b[k])));
    }
    out.push_back(make_check("band_power_vs_dft", worst, 1e-6, scale));
  }
  {
    double worst = 0.0;
    for (int i = 0; i < 10; ++i) {
      const auto x = random_series(rng, 256);
      worst = std::max(worst, std::abs(approximate_entropy(x, 2, 0.2) - oracle::naive_apen(x, 2, 0.2)));
    }
    out.push_back(make_check("apen_vs_naive", worst, 1e-9, scale));
  }
  {
    const auto& p = cfg.preprocess;
    const auto eeg = design_fir_bandpass(p.eeg_low_hz, p.eeg_high_hz, p.eeg_transition_low_hz,
                                         p.eeg_transition_high_hz, kEegRateHz);
    const auto ecg = design_fir_bandpass(p.ecg_low_hz, p.ecg_high_hz, p.ecg_transition_low_hz,
                                         p.ecg_transition_high_hz, kEcgRateHz);
    for (auto& c : check_filter(eeg, "eeg_filter", scale)) out.push_back(std::move(c));
    for (auto& c : check_filter(ecg, "ecg_filter", scale)) out.push_back(std::move(c));
  }
  {
    double recon = 0.0, energy = 0.0;
    for (int i = 0; i < 10; ++i) {
      const auto x = random_series(rng, 1024);
      const auto d = dwt_forward(x, 4);
      const auto y = dwt_inverse(d);
      for (std::size_t k = 0; k < x.size(); ++k) recon = std::max(recon, std::abs(x[k] - y[k]));
      double ex = 0.0, ec = 0.0;
      for (double v : x) ex += v * v;
      for (const auto& lvl : d.details) {
        for (double v : lvl) ec += v * v;
      }
      for (double v : d.approximation) ec += v * v;
      energy = std::max(energy, std::abs(ex - ec) / ex);
    }
    out.push_back(make_check("dwt_reconstruction", recon, 1e-10, scale));
    out.push_back(make_check("dwt_energy", energy, 1e-6, scale));
  }
  {
    double worst = 0.0;
    for (double df : {4.0, 8.0, 9.0}) {
      for (double t : {0.3, 1.0, 2.5, 4.0}) {
        worst = std::max(worst, std::abs(student_t_two_sided_p(t, df) - oracle::t_two_sided_p(t, df)));
      }
    }
    out.push_back(make_check("t_pvalue_vs_integration", worst, 1e-6, scale));
  }
  {
    double worst = 0.0;
    for (Activation a : {Activation::relu, Activation::tanh}) {
      MlpParams hp;
      hp.hidden = {6};
      hp.activation = a;
      const MlpModel m = mlp_init(4, hp, 0.5, rng.next());
      Matrix X(5, 4);
      for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = rng.normal();
      const Labels y = {1, 0, 1, 1, 0};
      worst = std::max(worst, oracle::mlp_gradient_error(m, X, y, 1e-3));
    }
    out.push_back(make_check("mlp_gradient", worst, 1e-4, scale));
  }
  {
    Dataset d;
    d.feature_names = {"x"};
    for (int p = 1; p <= 9; ++p) {
      for (int k = 0; k < 6; ++k) {
        d.samples.push_back({"P" + std::to_string(p), kEnvironments[k % 3], Difficulty::low, Modality::eeg,
                             double(k), k % 2 ? EventKind::error : EventKind::non_error, {double(k)}});
      }
    }
    std::size_t violations = 0;
    std::size_t lopo_folds = 0;
    for (Strategy s : {Strategy::grouped_cv, Strategy::lopo}) {
      const auto plan = plan_folds(d, s, 5, rng.next());
      if (s == Strategy::lopo) lopo_folds = plan.folds.size();
      try {
        check_fold_plan(d, plan);
      } catch (const InvariantError&) {
        ++violations;
      }
    }
    out.push_back(make_check("fold_leakage", double(violations), 0.0, scale));
    out.push_back(make_check("lopo_fold_count", std::abs(double(lopo_folds) - 9.0), 0.0, scale));
  }
  return out;
}

} // namespace errsense

#include "errsense/config.hpp"
#include "errsense/features.hpp"
#include "errsense/fir.hpp"
#include "errsense/pipeline.hpp"
#include "errsense/stats.hpp"
#include "errsense/wavelet.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace errsense;

namespace {

RunConfig config_from_string(const std::string& text) {
  if (text.empty()) return RunConfig{};
  try {
    return config_from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
}

py::dict metrics_dict(const Metrics& m) {
  py::dict d;
  d["accuracy"] = m.accuracy;
  d["precision"] = m.precision;
  d["recall"] = m.recall;
  d["f1"] = m.f1;
  d["n"] = m.n;
  return d;
}

} // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "errsense native core";
  m.attr("__version__") = artifact_version();

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<ParameterError>(m, "ParameterError", base.ptr());
  py::register_exception<LengthError>(m, "LengthError", base.ptr());
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<DegenerateInputError>(m, "DegenerateInputError", base.ptr());
  py::register_exception<DegenerateLabelError>(m, "DegenerateLabelError", base.ptr());
  py::register_exception<InvariantError>(m, "InvariantError", base.ptr());

  // config
  m.def("config_hash", [](const std::string& cfg) { return config_from_string(cfg).hash(); }, py::arg("config") = "");
  m.def("canonical_config", [](const std::string& cfg) { return config_from_string(cfg).to_json().dump(); },
        py::arg("config") = "");

  // kernels
  m.def("band_powers", [](const std::vector<double>& x, double rate) { return psd_band_powers(x, rate).as_array(); },
        py::arg("x"), py::arg("rate_hz"));
  m.def("approximate_entropy", [](const std::vector<double>& x, std::size_t m_, double r) {
    return approximate_entropy(x, m_, r);
  }, py::arg("x"), py::arg("m") = 2, py::arg("r_factor") = 0.2);
  m.def("ar_coefficients", [](const std::vector<double>& x) { return ar_coefficients(x); }, py::arg("x"));
  m.def("hurst_exponent", [](const std::vector<double>& x) { return hurst_exponent(x).value; }, py::arg("x"));
  m.def("wavelet_energies", [](const std::vector<double>& x, std::size_t levels) {
    return wavelet_energies(x, levels);
  }, py::arg("x"), py::arg("levels") = 4);
  m.def("dwt_roundtrip", [](const std::vector<double>& x, std::size_t levels) {
    return dwt_inverse(dwt_forward(x, levels));
  }, py::arg("x"), py::arg("levels"));
  m.def("fir_bandpass", [](double lo, double hi, double tl, double th, double rate) {
    return design_fir_bandpass(lo, hi, tl, th, rate).taps;
  }, py::arg("low_hz"), py::arg("high_hz"), py::arg("transition_low_hz"), py::arg("transition_high_hz"),
        py::arg("rate_hz"));
  m.def("filter_zero_phase", [](const std::vector<double>& x, const std::vector<double>& taps) {
    return filter_zero_phase(x, taps);
  }, py::arg("x"), py::arg("taps"));
  m.def("detect_r_peaks", [](const std::vector<double>& ecg, double rate) {
    const SampledSignal s{{"ECG"}, rate, 0.0, {ecg}};
    return detect_r_peaks(s).peak_times_s;
  }, py::arg("ecg"), py::arg("rate_hz"));
  m.def("rr_metrics", [](const std::vector<double>& rr) {
    const auto r = rr_metrics(rr);
    return py::make_tuple(r.mean_rr_ms, r.sdnn_ms, r.cv);
  }, py::arg("intervals_ms"));

  // statistics
  m.def("compute_metrics", [](const std::vector<int>& y, const std::vector<int>& p) {
    return metrics_dict(compute_metrics(y, p));
  }, py::arg("y_true"), py::arg("y_pred"));
  m.def("t_test_vs_chance", [](const std::vector<double>& acc, double mu0) {
    const auto t = t_test_vs_chance(acc, mu0);
    return py::make_tuple(t.t, t.p);
  }, py::arg("fold_accuracies"), py::arg("mu0") = 0.5);
  m.def("power_sample_size", [](const std::string& kind, double alpha, double power) {
    PowerKind k;
    if (kind == "logistic_or") k = PowerKind::logistic_or;
    else if (kind == "anova_f") k = PowerKind::anova_f;
    else throw ParameterError("unknown power analysis '" + kind + "'");
    return power_sample_size(k, PowerParams{}, alpha, power);
  }, py::arg("kind"), py::arg("alpha") = 0.05, py::arg("power") = 0.80);

  // learning
  m.def("train_predict", [](const std::string& kind, const Matrix& X, const std::vector<int>& y, const Matrix& Xtest,
                            std::uint64_t seed, const std::string& cfg) {
    const RunConfig rc = config_from_string(cfg);
    std::vector<std::string> names;
    for (Eigen::Index c = 0; c < X.cols(); ++c) names.push_back("f" + std::to_string(c));
    const auto model = train_model(parse_classifier(kind), X, y, names, rc.learn, seed);
    return predict(model, Xtest, names).probability;
  }, py::arg("kind"), py::arg("X"), py::arg("y"), py::arg("X_test"), py::arg("seed"), py::arg("config") = "");

  // commands
  m.def("synth", [](const std::string& cfg, const std::filesystem::path& out) {
    return cmd_synth(config_from_string(cfg), out);
  }, py::arg("config"), py::arg("out"));
  m.def("pipeline", [](const std::string& cfg, const std::filesystem::path& sessions, const std::filesystem::path& out) {
    py::gil_scoped_release release;
    const auto r = cmd_pipeline(config_from_string(cfg), sessions, out);
    return r.notes;
  }, py::arg("config"), py::arg("sessions"), py::arg("out"));
  m.def("verify", [](const std::string& cfg) {
    py::list rows;
    for (const auto& c : run_verify(config_from_string(cfg))) {
      rows.append(py::make_tuple(c.name, c.measured, c.tolerance, c.pass));
    }
    return rows;
  }, py::arg("config") = "");
}

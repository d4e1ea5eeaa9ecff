#pragma once

#include "errsense/config.hpp"
#include "errsense/dataset.hpp"
#include "errsense/error.hpp"
#include "errsense/eval.hpp"
#include "errsense/fir.hpp"

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace errsense {

// Exit codes: 0 ok, 2 configuration, 3 data, 4 verification or invariant.
int exit_code_for(const std::exception& e);

// A stage failure carries the stage name and the category of its cause.
class StageError : public Error {
public:
  StageError(std::string stage, int exit_code, const std::string& cause);
  const std::string& stage() const { return stage_; }
  int exit_code() const { return code_; }

private:
  std::string stage_;
  int code_;
};

// Synthetic cohort -----------------------------------------------------------

// Blocks of one participant-environment session, in recording order.
std::vector<SynthConfig> session_blocks(const RunConfig& cfg, std::size_t participant, Environment env);
std::string session_name(const std::string& participant_id, Environment env);

using SessionVisitor = std::function<void(const SessionBundle&)>;
using SessionSource = std::function<void(const SessionVisitor&)>;

// Generates sessions one at a time, participant-major.
SessionSource synth_source(const RunConfig& cfg);
// Loads every session directory under `dir`, in name order.
SessionSource directory_source(const std::filesystem::path& dir);

// Writes one directory per session plus cohort.json. Returns the session
// directory names.
std::vector<std::string> cmd_synth(const RunConfig& cfg, const std::filesystem::path& out);

// Pipeline ---------------------------------------------------------------------

struct PipelineResult {
  std::vector<Dataset> datasets;
  std::vector<EvalReport> reports;
  std::vector<std::string> notes;
};

PipelineResult run_pipeline(const RunConfig& cfg, const SessionSource& source);
void write_pipeline_outputs(const PipelineResult& r, const RunConfig& cfg, const std::filesystem::path& out);
std::vector<std::string> stage_plan(const RunConfig& cfg);

// Loads sessions from `sessions`, writes report.json, report.csv,
// participants.csv and datasets/ under `out`.
PipelineResult cmd_pipeline(const RunConfig& cfg, const std::filesystem::path& sessions,
                            const std::filesystem::path& out);

// Verify -----------------------------------------------------------------------

struct CheckResult {
  std::string name;
  double measured{0.0};
  double tolerance{0.0}; // pass when measured <= tolerance * scale
  bool pass{false};
  std::string detail;
};

std::vector<CheckResult> check_filter(const FirKernel& kernel, const std::string& name, double tolerance_scale);
std::vector<CheckResult> run_verify(const RunConfig& cfg);

} // namespace errsense

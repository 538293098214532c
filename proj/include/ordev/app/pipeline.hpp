#pragma once

#include <string>

#include "json.hpp"
#include "ordev/app/config.hpp"
#include "ordev/model/model.hpp"
#include "ordev/opt/engine.hpp"

namespace ordev::app {

enum ExitCode {
  kOk = 0,
  kUsage = 1,
  kParseError = 2,
  kTimeout = 3,
  kInfeasible = 4,
  kSolverFailure = 5,  // solver missing, crashed, or only answered unknown
  kAnalysisError = 6,  // deps, summary, model or guard stage
  kMismatch = 7,       // corpus rows that disagree with the manifest
};

inline const char* kReportSchema = "ordev.report/1";

struct Report {
  nlohmann::json json;
  std::string text;  // for Format::Text and Format::Smt2
  int exit_code = kOk;

  // What the CLI prints for `format`.
  std::string render(Format format) const;
};

// The model an optimize run of `cfg` searches over. Throws the stage's own error.
model::OptModel build_run_model(const RunConfig& cfg);
// The search `cfg` asks for over `m`.
opt::OptResult run_search(const RunConfig& cfg, const model::OptModel& m);

// Parse -> extract -> deps -> summary -> model -> search (-> guard), stopping at the
// first failing stage. Never throws for bad input; the error lands in the report.
Report run_pipeline(const RunConfig& cfg);

}  // namespace ordev::app

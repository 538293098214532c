#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace ordev::app {

inline const char* kCorpusSchema = "ordev.corpus/1";

struct CorpusOptions {
  std::string manifest;  // defaults to <dir>/manifest.json when that exists
  int jobs = 1;
  std::string solver;
  bool timings = false;
  std::vector<std::string> only;  // fixture names; empty runs all
  bool stats_only = false;        // skip the solver runs
};

struct CorpusReport {
  nlohmann::json json;
  int exit_code = 0;
};

// Without a manifest every public function of every .osol file in `dir` is summarized.
// With one, each fixture's stats and runs are checked against the expected values.
// A failing fixture never stops the others.
CorpusReport run_corpus(const std::string& dir, const CorpusOptions& o = {});

// A manifest run's configuration: the fixture's config with the run's settings on top.
nlohmann::json run_config(const nlohmann::json& fixture, const nlohmann::json& run);

// Text table of a corpus report.
std::string corpus_table(const nlohmann::json& report);

}  // namespace ordev::app

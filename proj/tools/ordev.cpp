#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "ordev/app/config.hpp"
#include "ordev/app/corpus.hpp"
#include "ordev/app/pipeline.hpp"

using namespace ordev;
using namespace ordev::app;

namespace {

struct AnalyzeArgs {
  std::string file, entry, mode, delta, step, max_delta, search, solver, out = "json", output, config, dump_dir, tolerance, reference;
  std::vector<std::string> bounds, controls, targets, fixed, pins, prices, directions, maxima;
  double timeout = 0, query_timeout = 0;
  bool bisect = false, timings = false;
};

model::Control* find_control(RunConfig& c, const std::string& name) {
  for (auto& x : c.model.controls)
    if (x.name == name) return &x;
  throw ConfigError("no control named '" + name + "'");
}

Rational rational_arg(const std::string& text, const std::string& what) {
  try {
    return parse_rational(text);
  } catch (const std::invalid_argument&) {
    throw ConfigError(what + ": '" + text + "' is not a number");
  }
}

RunConfig build_config(const AnalyzeArgs& a) {
  RunConfig c;
  if (!a.config.empty()) {
    std::ifstream in(a.config);
    if (!in) throw ConfigError("cannot open config " + a.config);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
    c = config_from_json(j, std::filesystem::path(a.config).parent_path().string());
  }
  if (!a.file.empty()) c.input = a.file;
  if (!a.entry.empty()) c.entry = a.entry;
  if (!a.mode.empty()) c.mode = parse_mode(a.mode);
  c.format = parse_format(a.out);
  if (!a.delta.empty()) c.delta = rational_arg(a.delta, "--delta");
  if (!a.step.empty()) c.step = rational_arg(a.step, "--step");
  if (!a.max_delta.empty()) c.max_delta = rational_arg(a.max_delta, "--max-delta");
  if (!a.search.empty()) c.search = a.search;
  if (!a.solver.empty()) c.solver = a.solver;
  if (!a.dump_dir.empty()) c.dump_dir = a.dump_dir;
  if (!a.tolerance.empty()) c.model.tolerance = a.tolerance;
  if (!a.reference.empty()) c.reference = a.reference;
  if (a.timeout > 0) c.timeout = a.timeout;
  if (a.query_timeout > 0) c.query_timeout = a.query_timeout;
  if (a.bisect) c.bisect = true;
  if (a.timings) c.timings = true;
  for (const auto& b : a.bounds) {
    auto [k, v] = split_assignment(b);
    try {
      c.model.bounds[k] = std::stoi(v);
    } catch (const std::exception&) {
      throw ConfigError("--bound " + b + ": expected a count");
    }
  }
  // NAME=VALUE or NAME=VALUE:KEY1,KEY2
  for (const auto& s : a.controls) {
    auto [name, rest] = split_assignment(s);
    model::Control ctl;
    ctl.name = name;
    auto colon = rest.find(':');
    ctl.current = rational_arg(rest.substr(0, colon), "--control " + name);
    if (colon != std::string::npos) {
      std::stringstream keys(rest.substr(colon + 1));
      for (std::string k; std::getline(keys, k, ',');)
        if (!k.empty()) ctl.keys.push_back(k);
    }
    auto it = std::find_if(c.model.controls.begin(), c.model.controls.end(), [&](const auto& x) { return x.name == name; });
    if (it == c.model.controls.end()) {
      c.model.controls.push_back(ctl);
    } else {
      it->current = ctl.current;
      if (!ctl.keys.empty()) it->keys = ctl.keys;
    }
  }
  for (const auto& s : a.directions) {
    auto [name, dir] = split_assignment(s);
    if (dir != "up" && dir != "down") throw ConfigError("--direction " + s + ": up or down");
    find_control(c, name)->direction = dir == "up" ? model::Direction::Up : model::Direction::Down;
  }
  for (const auto& s : a.maxima) {
    auto [name, v] = split_assignment(s);
    find_control(c, name)->max = rational_arg(v, "--max " + name);
  }
  for (const auto& s : a.targets) {
    auto [k, v] = split_assignment(s);
    c.targets[k] = rational_arg(v, "--target " + k);
  }
  for (const auto& s : a.fixed) {
    auto [k, v] = split_assignment(s);
    c.fixed[k] = rational_arg(v, "--fixed " + k);
  }
  for (const auto& s : a.pins) {
    auto [k, v] = split_assignment(s);
    c.model.pins[k] = rational_arg(v, "--pin " + k);
  }
  for (const auto& s : a.prices) {
    auto [entry, side] = split_assignment(s);
    if (side != "floor" && side != "ceil") throw ConfigError("--price " + s + ": floor or ceil");
    c.price_entries.push_back({entry, side == "floor"});
  }
  return c;
}

int emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return 0;
  }
  std::ofstream out(path);
  if (!out) {
    std::cerr << "cannot write " << path << "\n";
    return kUsage;
  }
  out << text;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Oracle deviation analysis for lending-style contracts"};
  app.require_subcommand(1);

  AnalyzeArgs a;
  auto* an = app.add_subcommand("analyze", "Summarize, model and optimize one contract entry");
  an->add_option("file", a.file, "Contract source");
  an->add_option("--entry", a.entry, "Entry function");
  an->add_option("--mode", a.mode, "summarize | deps | optimize-delta | optimize-cv | guard");
  an->add_option("--delta", a.delta, "Oracle deviation for optimize-cv");
  an->add_option("--step", a.step, "Search grid step");
  an->add_option("--max-delta", a.max_delta, "Upper end of the deviation search");
  an->add_option("--search", a.search, "Control moved by optimize-cv");
  an->add_option("--bound", a.bounds, "Loop bound NAME=N")->allow_extra_args(false);
  an->add_option("--control", a.controls, "Control NAME=VALUE[:KEY,...]")->allow_extra_args(false);
  an->add_option("--direction", a.directions, "NAME=up|down")->allow_extra_args(false);
  an->add_option("--max", a.maxima, "Search limit NAME=VALUE")->allow_extra_args(false);
  an->add_option("--target", a.targets, "cv' for a control, NAME=VALUE")->allow_extra_args(false);
  an->add_option("--fixed", a.fixed, "cv' held during optimize-cv, NAME=VALUE")->allow_extra_args(false);
  an->add_option("--pin", a.pins, "Scenario constant KEY=VALUE")->allow_extra_args(false);
  an->add_option("--price", a.prices, "Price entry ENTRY=floor|ceil")->allow_extra_args(false);
  an->add_option("--tolerance", a.tolerance, "Control used as the price tolerance");
  an->add_option("--reference", a.reference, "Reference price source for guards");
  an->add_option("--timeout", a.timeout, "Search budget in seconds");
  an->add_option("--query-timeout", a.query_timeout, "Per-query limit in seconds");
  an->add_option("--solver", a.solver, "SMT solver executable (default: $ORDEV_SOLVER, then z3)");
  an->add_option("--out", a.out, "json | text | smt2");
  an->add_option("-o,--output", a.output, "Write the report here instead of stdout");
  an->add_option("--config", a.config, "JSON run configuration; flags override it");
  an->add_option("--dump-dir", a.dump_dir, "Keep every SMT query here");
  an->add_flag("--bisect", a.bisect, "Stride and bisect instead of walking the grid");
  an->add_flag("--timings", a.timings, "Keep durations in the report");

  std::string dir, manifest, out = "text", output, solver;
  std::vector<std::string> only;
  int jobs = 1;
  bool stats_only = false, timings = false;
  auto* co = app.add_subcommand("corpus", "Run every fixture of a corpus against its manifest");
  co->add_option("dir", dir, "Corpus directory")->required();
  co->add_option("--manifest", manifest, "Expected values (default: <dir>/manifest.json)");
  co->add_option("--jobs,-j", jobs, "Parallel fixtures");
  co->add_option("--only", only, "Fixture names to run");
  co->add_option("--solver", solver, "SMT solver executable");
  co->add_option("--out", out, "json | text");
  co->add_option("-o,--output", output, "Write the report here instead of stdout");
  co->add_flag("--stats-only", stats_only, "Skip solver runs");
  co->add_flag("--timings", timings, "Keep durations in the report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kUsage;
  }

  if (*an) {
    RunConfig cfg;
    try {
      cfg = build_config(a);
    } catch (const ConfigError& e) {
      std::cerr << "error [config] " << e.what() << "\n";
      return kUsage;
    }
    Report r = run_pipeline(cfg);
    if (r.json.contains("error") && cfg.format == Format::Json) std::cerr << r.text;
    int rc = emit(r.render(cfg.format), a.output);
    return rc ? rc : r.exit_code;
  }

  try {
    CorpusOptions o;
    o.manifest = manifest;
    o.jobs = jobs;
    o.solver = solver;
    o.only = only;
    o.stats_only = stats_only;
    o.timings = timings;
    CorpusReport r = run_corpus(dir, o);
    int rc = emit(out == "json" ? r.json.dump(2) + "\n" : corpus_table(r.json), output);
    return rc ? rc : r.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error [corpus] " << e.what() << "\n";
    return kUsage;
  }
}

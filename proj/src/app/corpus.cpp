#include "ordev/app/corpus.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <thread>

#include "ordev/app/pipeline.hpp"
#include "ordev/front/parser.hpp"

namespace ordev::app {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Run keys that describe the expectation rather than the configuration.
const std::set<std::string> kExpectationKeys = {"id", "expect", "tolerance", "may_timeout", "expect_status", "criterion", "note"};

struct Task {
  size_t fixture;
  int run;  // -1: the summarize pass for the stats
  json config;
  json report;
  double seconds = 0;
};

void execute(Task& t, const std::string& dir) {
  auto start = std::chrono::steady_clock::now();
  try {
    RunConfig cfg = config_from_json(t.config, dir);
    t.report = run_pipeline(cfg).json;
  } catch (const std::exception& e) {
    t.report = {{"status", "error"}, {"error", {{"stage", "config"}, {"message", e.what()}}}, {"exit_code", kUsage}};
  }
  t.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void run_all(std::vector<Task>& tasks, const std::string& dir, int jobs) {
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next++; i < tasks.size(); i = next++) execute(tasks[i], dir);
  };
  int n = std::max(1, std::min<int>(jobs, static_cast<int>(tasks.size())));
  std::vector<std::thread> pool;
  for (int i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
}

json error_of(const json& report) { return report.value("error", json::object()); }

json check_run(const json& run, const Task& t, bool timings) {
  json row = {{"id", run.value("id", "")}, {"mode", t.config.value("mode", "")}};
  for (const char* k : {"criterion", "expect", "tolerance", "may_timeout", "expect_status"})
    if (run.contains(k)) row[k] = run[k];
  std::string status = t.report.value("status", "error");
  row["status"] = status;
  row["exit_code"] = t.report.value("exit_code", -1);
  std::optional<Rational> value;
  if (t.report.contains("result") && t.report["result"]["value"].is_string()) {
    value = parse_rational(t.report["result"]["value"].get<std::string>());
    row["value"] = ordev::to_string(*value);
  }
  if (timings) row["seconds"] = t.seconds;

  bool pass = false;
  std::string why;
  std::string want_status = run.value("expect_status", "optimal");
  double budget = t.config.value("timeout", 120.0);
  if (status == "error") {
    why = error_of(t.report).value("stage", "?") + ": " + error_of(t.report).value("message", "");
  } else if (status == "timeout" && run.value("may_timeout", false)) {
    pass = t.seconds <= budget + 10;
    if (!pass) why = "ran past its budget";
  } else if (status != want_status) {
    why = "status " + status + ", expected " + want_status;
  } else if (run.contains("expect")) {
    Rational want = parse_rational(run["expect"].get<std::string>());
    Rational tol = parse_rational(run.value("tolerance", "0"));
    pass = value && abs(*value - want) <= tol;
    if (!pass) why = "value " + (value ? ordev::to_string(*value) : std::string("none")) + " is not within " + ordev::to_string(tol);
  } else {
    pass = true;
  }
  row["pass"] = pass;
  if (!why.empty()) row["reason"] = why;
  return row;
}

json check_stats(const json& want, const Task& t, bool timings) {
  json row = {{"status", t.report.value("status", "error")}};
  if (timings) row["seconds"] = t.seconds;
  if (!t.report.contains("stats")) {
    row["pass"] = false;
    row["reason"] = error_of(t.report).value("message", "no stats");
    return row;
  }
  const json& got = t.report["stats"];
  row["got"] = {{"requires", got["requires"]}, {"loops", got["loops"]}, {"vector_vars", got["vector_vars"]}, {"scalar_vars", got["scalar_vars"]}};
  row["expect"] = want;
  bool pass = true;
  for (const auto& [k, v] : want.items())
    if (!got.contains(k) || got[k] != v) pass = false;
  row["pass"] = pass;
  return row;
}

std::string cell(const json& j, const char* k) {
  if (!j.contains(k)) return "-";
  return j[k].is_string() ? j[k].get<std::string>() : j[k].dump();
}

}  // namespace

json run_config(const json& fixture, const json& run) {
  json cfg = fixture.at("config");
  for (const auto& [k, v] : run.items())
    if (!kExpectationKeys.count(k)) cfg[k] = v;
  return cfg;
}

CorpusReport run_corpus(const std::string& dir, const CorpusOptions& o) {
  CorpusReport out;
  json& j = out.json;
  j["schema"] = kCorpusSchema;
  j["fixtures"] = json::array();

  std::string manifest_path = o.manifest;
  if (manifest_path.empty() && fs::exists(fs::path(dir) / "manifest.json")) manifest_path = (fs::path(dir) / "manifest.json").string();

  std::vector<json> fixtures;
  std::vector<Task> tasks;
  if (!manifest_path.empty()) {
    std::ifstream in(manifest_path);
    if (!in) throw std::runtime_error("cannot open manifest " + manifest_path);
    json m = json::parse(in);
    for (const auto& fx : m.at("fixtures")) {
      std::string name = fx.at("name");
      if (!o.only.empty() && std::find(o.only.begin(), o.only.end(), name) == o.only.end()) continue;
      size_t fi = fixtures.size();
      fixtures.push_back(fx);
      json base = fx.at("config");
      if (!o.solver.empty()) base["solver"] = o.solver;
      json sum = base;
      sum["mode"] = "summarize";
      tasks.push_back({fi, -1, sum, {}, 0});
      if (o.stats_only) continue;
      const json runs = fx.value("runs", json::array());
      for (size_t r = 0; r < runs.size(); ++r) {
        json cfg = run_config(fx, runs[r]);
        if (!o.solver.empty()) cfg["solver"] = o.solver;
        tasks.push_back({fi, static_cast<int>(r), cfg, {}, 0});
      }
    }
  } else if (fs::is_directory(dir)) {
    std::vector<std::string> files;
    for (const auto& e : fs::directory_iterator(dir))
      if (e.path().extension() == ".osol") files.push_back(e.path().filename().string());
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
      json fx = {{"name", fs::path(file).stem().string()}, {"config", {{"file", file}}}};
      std::vector<std::string> entries;
      try {
        for (const auto& f : front::load_contract((fs::path(dir) / file).string()).funcs)
          if (f.is_public()) entries.push_back(f.name);
      } catch (const std::exception& e) {
        fx["error"] = e.what();
      }
      size_t fi = fixtures.size();
      fixtures.push_back(fx);
      for (size_t r = 0; r < entries.size(); ++r) {
        json cfg = {{"file", file}, {"entry", entries[r]}, {"mode", "summarize"}};
        fixtures[fi]["runs"].push_back({{"id", entries[r]}, {"expect_status", "ok"}});
        tasks.push_back({fi, static_cast<int>(r), cfg, {}, 0});
      }
    }
  } else {
    throw std::runtime_error("not a directory: " + dir);
  }

  run_all(tasks, dir, o.jobs);

  int passed = 0, failed = 0;
  std::vector<json> rows(fixtures.size());
  for (size_t i = 0; i < fixtures.size(); ++i) {
    rows[i] = {{"name", fixtures[i]["name"]}, {"file", fixtures[i]["config"].value("file", "")}, {"runs", json::array()}};
    if (fixtures[i].contains("error")) {
      rows[i]["error"] = fixtures[i]["error"];
      ++failed;
    }
  }
  for (const auto& t : tasks) {
    json& row = rows[t.fixture];
    if (t.run < 0) {
      json s = check_stats(fixtures[t.fixture].value("stats", json::object()), t, o.timings);
      (s["pass"].get<bool>() ? passed : failed)++;
      row["stats"] = s;
      continue;
    }
    json r = check_run(fixtures[t.fixture]["runs"][t.run], t, o.timings);
    (r["pass"].get<bool>() ? passed : failed)++;
    row["runs"].push_back(r);
  }
  for (auto& r : rows) j["fixtures"].push_back(r);
  j["totals"] = {{"fixtures", fixtures.size()}, {"checks", passed + failed}, {"passed", passed}, {"failed", failed}};
  out.exit_code = failed ? kMismatch : kOk;
  return out;
}

std::string corpus_table(const json& report) {
  std::ostringstream out;
  out << std::left;
  for (const auto& fx : report.at("fixtures")) {
    out << std::setw(22) << fx.value("name", "");
    if (fx.contains("stats") && fx["stats"].contains("got")) {
      const json& g = fx["stats"]["got"];
      out << " requires " << g["requires"] << "  loops " << g["loops"] << "  vectors " << g["vector_vars"] << "  scalars "
          << g["scalar_vars"];
    }
    if (fx.contains("stats")) out << "  " << (fx["stats"].value("pass", false) ? "ok" : "MISMATCH");
    if (fx.contains("error")) out << "  error: " << fx["error"].get<std::string>();
    out << "\n";
    for (const auto& r : fx["runs"]) {
      out << "  " << std::setw(34) << r.value("id", "") << " " << std::setw(10) << cell(r, "status") << " got " << std::setw(10)
          << cell(r, "value") << " want " << std::setw(8) << cell(r, "expect") << (r.value("pass", false) ? " ok" : " FAIL");
      if (r.contains("reason")) out << "  (" << r["reason"].get<std::string>() << ")";
      out << "\n";
    }
  }
  const json& t = report.at("totals");
  out << "checks " << t["checks"] << ", passed " << t["passed"] << ", failed " << t["failed"] << "\n";
  return out.str();
}

}  // namespace ordev::app

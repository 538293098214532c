#include "ordev/app/pipeline.hpp"

#include <chrono>
#include <sstream>

#include "ordev/app/guard.hpp"
#include "ordev/deps/deps.hpp"
#include "ordev/dsl/normalize.hpp"
#include "ordev/dsl/printer.hpp"
#include "ordev/front/interp.hpp"
#include "ordev/front/parser.hpp"
#include "ordev/opt/engine.hpp"
#include "ordev/summary/summary.hpp"

namespace ordev::app {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Stage {
  std::string name;
  int code;
};

struct Unit {
  std::string entry;
  front::FuncObj func;
  deps::DepSets deps;
  std::vector<summary::Constraint> constraints;
  std::vector<dsl::NodePtr> returns;
};

int exit_code(opt::Status s) {
  switch (s) {
    case opt::Status::Optimal: return kOk;
    case opt::Status::Timeout: return kTimeout;
    case opt::Status::Infeasible: return kInfeasible;
    default: return kSolverFailure;
  }
}

void drop_seconds(json& r) {
  r.erase("seconds");
  if (r.contains("trace"))
    for (auto& t : r["trace"]) t.erase("seconds");
}

std::string value_text(const opt::OptResult& r) { return r.value ? ordev::to_string(*r.value) : "none"; }

std::string candidate_text(const model::Candidate& c) {
  std::string s = "delta=" + ordev::to_string(c.delta);
  for (const auto& [k, v] : c.targets) s += " " + model::target_name(k) + "=" + ordev::to_string(v);
  return s;
}

model::OptModel units_model(const RunConfig& cfg, const std::vector<Unit>& units) {
  if (cfg.price_model()) {
    std::vector<model::PriceCheck> checks;
    for (size_t i = 0; i < units.size(); ++i) {
      if (units[i].returns.empty()) throw model::ModelError(units[i].entry + " returns nothing to price");
      checks.push_back({units[i].returns[0], cfg.price_entries[i].floor, units[i].entry});
    }
    return model::build_price_model(checks, cfg.model);
  }
  std::vector<dsl::NodePtr> cs;
  for (const auto& c : units[0].constraints) cs.push_back(c.expr);
  return model::build_model(cs, cfg.model);
}

std::vector<Unit> extract_units(const RunConfig& cfg, const front::Contract& contract) {
  std::vector<Unit> units;
  if (cfg.price_model()) {
    for (const auto& p : cfg.price_entries) units.push_back({p.entry, front::extract_func(contract, p.entry), {}, {}, {}});
  } else {
    units.push_back({cfg.entry, front::extract_func(contract, cfg.entry), {}, {}, {}});
  }
  return units;
}

}  // namespace

model::OptModel build_run_model(const RunConfig& cfg) {
  cfg.validate();
  std::vector<Unit> units = extract_units(cfg, front::load_contract(cfg.input));
  for (auto& u : units) {
    u.deps = deps::analyze(u.func);
    u.constraints = summary::code_summary(u.func, u.deps);
    u.returns = summary::return_summary(u.func, u.deps);
  }
  return units_model(cfg, units);
}

opt::OptResult run_search(const RunConfig& cfg, const model::OptModel& m) {
  opt::SearchOptions o;
  o.step = cfg.step;
  o.timeout = cfg.timeout;
  o.bisect = cfg.bisect;
  o.solver.path = opt::find_solver(cfg.solver);
  o.solver.query_timeout = cfg.query_timeout;
  o.solver.dump_dir = cfg.dump_dir;
  if (cfg.mode == Mode::OptimizeCv) {
    if (!cfg.delta) throw ConfigError("optimize-cv needs a deviation (--delta)");
    std::string search = cfg.search.empty() && !m.controls.empty() ? m.controls[0].name : cfg.search;
    return opt::solve_min_cv(m, search, *cfg.delta, o, cfg.fixed);
  }
  return opt::solve_max_delta(m, cfg.targets, o, cfg.max_delta);
}

std::string Report::render(Format format) const {
  if (format == Format::Json) return json.dump(2) + "\n";
  return text;
}

Report run_pipeline(const RunConfig& cfg) {
  Report rep;
  json& j = rep.json;
  j["schema"] = kReportSchema;
  j["mode"] = to_string(cfg.mode);
  json timings = json::object();
  std::ostringstream text;
  Stage stage{"config", kUsage};
  auto t0 = Clock::now();
  auto mark = [&](const char* name, int code) {
    timings[stage.name] = since(t0);
    t0 = Clock::now();
    stage = {name, code};
  };

  try {
    j["config"] = to_json(cfg);
    cfg.validate();

    mark("parse", kParseError);
    front::Contract contract = front::load_contract(cfg.input);

    mark("extract", kParseError);
    std::vector<Unit> units = extract_units(cfg, contract);

    mark("deps", kAnalysisError);
    for (auto& u : units) u.deps = deps::analyze(u.func);
    if (cfg.mode == Mode::Deps) {
      json d = json::array();
      for (const auto& u : units) {
        d.push_back({{"entry", u.entry}, {"deps", deps::to_json(u.func, u.deps)}});
        text << "# " << u.entry << "\n";
        for (const auto& id : u.deps.od_ids) text << "oracle-dependent " << id << "\n";
      }
      j["deps"] = d;
      j["status"] = "ok";
      rep.text = text.str();
      mark("done", kOk);
      j["exit_code"] = kOk;
      if (cfg.timings) j["timings"] = timings;
      return rep;
    }

    mark("summary", kAnalysisError);
    std::vector<dsl::NodePtr> counted;
    int requires_ = 0, loops = 0;
    json sj = json::array();
    for (auto& u : units) {
      u.constraints = summary::code_summary(u.func, u.deps);
      u.returns = summary::return_summary(u.func, u.deps);
      json cs = json::array(), rs = json::array();
      for (const auto& c : u.constraints) {
        cs.push_back(summary::to_json(c));
        counted.push_back(c.expr);
        text << "require " << dsl::print(dsl::tidy(c.expr)) << "\n";
      }
      for (const auto& r : u.returns) {
        rs.push_back(dsl::print(r));
        if (cfg.price_model()) counted.push_back(r);
        text << "return " << dsl::print(dsl::tidy(r)) << "\n";
      }
      requires_ += static_cast<int>(u.constraints.size());
      loops = std::max(loops, summary::stats(u.func, {}, 0).loops);
      sj.push_back({{"entry", u.entry}, {"constraints", cs}, {"returns", rs}});
    }
    auto st = summary::stats(units[0].func, counted, requires_,
                             std::set<std::string>(cfg.stats_excluded.begin(), cfg.stats_excluded.end()));
    j["summary"] = sj;
    j["stats"] = {{"requires", st.require_count}, {"loops", loops},        {"vector_vars", st.vector_vars},
                  {"scalar_vars", st.scalar_vars}, {"vectors", st.vectors}, {"scalars", st.scalars}};
    if (cfg.mode == Mode::Summarize) {
      j["status"] = "ok";
      rep.text = text.str();
      mark("done", kOk);
      j["exit_code"] = kOk;
      if (cfg.timings) j["timings"] = timings;
      return rep;
    }

    mark("model", kAnalysisError);
    model::OptModel m = units_model(cfg, units);
    j["model"] = model::to_json(m);

    mark("solve", kSolverFailure);
    std::string search = cfg.search.empty() && !m.controls.empty() ? m.controls[0].name : cfg.search;
    opt::OptResult r = run_search(cfg, m);
    json rj = opt::to_json(r);
    if (!cfg.timings) drop_seconds(rj);
    j["result"] = rj;
    j["status"] = opt::to_string(r.status);
    rep.exit_code = exit_code(r.status);
    if (cfg.format == Format::Smt2) {
      model::Candidate at = r.value ? r.best : (r.trace.empty() ? model::Candidate{} : r.trace.back().candidate);
      text.str("");
      text << model::to_smtlib(m, at);
    } else {
      text.str("");
      text << "status " << opt::to_string(r.status) << "\n";
      text << (cfg.mode == Mode::OptimizeCv ? model::target_name(search) : std::string("delta")) << " = " << value_text(r) << "\n";
      if (r.value) text << "candidate " << candidate_text(r.best) << "\n";
      text << "queries " << r.trace.size() << "\n";
      if (!r.note.empty()) text << "note " << r.note << "\n";
    }

    if (cfg.mode == Mode::Guard && r.status == opt::Status::Optimal) {
      mark("guard", kAnalysisError);
      GuardSpec g = generate_guard(r, m, {cfg.reference, cfg.tol_num, cfg.tol_den});
      j["guard"] = to_json(g);
      if (cfg.format != Format::Smt2) {
        text.str("");
        for (const auto& w : g.warnings) text << "# warning: " << w << "\n";
        text << g.rendered;
      }
    }
    mark("done", rep.exit_code);
  } catch (const ConfigError& e) {
    j["status"] = "error";
    j["error"] = {{"stage", stage.name}, {"message", e.what()}};
    rep.exit_code = kUsage;
  } catch (const opt::SolverError& e) {
    j["status"] = "error";
    j["error"] = {{"stage", stage.name}, {"message", e.what()}};
    rep.exit_code = kSolverFailure;
  } catch (const std::exception& e) {
    // parse stages map to parse errors, everything else to analysis errors
    j["status"] = "error";
    j["error"] = {{"stage", stage.name}, {"message", e.what()}};
    rep.exit_code = stage.code == kSolverFailure ? kAnalysisError : stage.code;
  }
  if (j.contains("error")) {
    text.str("");
    text << "error [" << j["error"]["stage"].get<std::string>() << "] " << j["error"]["message"].get<std::string>() << "\n";
  }
  j["exit_code"] = rep.exit_code;
  if (cfg.timings) j["timings"] = timings;
  rep.text = text.str();
  return rep;
}

}  // namespace ordev::app

#include "ordev/opt/engine.hpp"

#include <chrono>
#include <functional>

#include "ordev/dsl/eval.hpp"
#include "ordev/dsl/printer.hpp"

namespace ordev::opt {

using model::Candidate;
using model::OptModel;

const char* to_string(Safety s) {
  switch (s) {
    case Safety::Safe: return "safe";
    case Safety::Unsafe: return "unsafe";
    default: return "unknown";
  }
}

const char* to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::Timeout: return "timeout";
    case Status::Infeasible: return "infeasible";
    default: return "solver-unknown";
  }
}

SafetyResult check_safety(const OptModel& m, const Candidate& c, const SolverConfig& s, double timeout) {
  SolverRun run = run_solver(model::to_smtlib(m, c), s, timeout);
  SafetyResult out;
  out.solver = run.status;
  out.seconds = run.seconds;
  switch (run.status) {
    case SolverStatus::Unsat:
      out.verdict = Safety::Safe;
      break;
    case SolverStatus::Sat:
      out.verdict = Safety::Unsafe;
      out.counterexample = std::move(run.model);
      out.approximate = run.approximate;
      break;
    default:
      out.verdict = Safety::Unknown;
  }
  return out;
}

bool replay(const OptModel& m, const Candidate& c, const std::map<std::string, Rational>& values, std::string* why) {
  OptModel q = model::instantiate(m, c);
  dsl::Resolver r = [&](const dsl::NodePtr& leaf) -> Rational {
    if (leaf->kind != dsl::Kind::Id) throw dsl::DslError("unexpected leaf " + dsl::print(leaf));
    auto it = values.find(leaf->name);
    if (it == values.end()) throw dsl::DslError("no value for " + leaf->name);
    return it->second;
  };
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  try {
    for (const auto* group : {&q.c0, &q.c1, &q.side})
      for (const auto& x : *group)
        if (!dsl::holds(x, r)) return fail("violated: " + dsl::print(x));
    bool truth_fails = false;
    for (const auto& p : q.pairs) {
      if (!dsl::holds(p.oracle, r)) return fail("oracle instance false: " + dsl::print(p.oracle));
      truth_fails = truth_fails || !dsl::holds(p.truth, r);
    }
    if (!truth_fails) return fail("every truth instance holds");
  } catch (const dsl::DslError& e) {
    return fail(e.what());
  }
  return true;
}

namespace {

using Clock = std::chrono::steady_clock;

// Walks an integer grid k = 0, 1, ... where candidate(k) is nullopt past the search range.
class Search {
 public:
  Search(const OptModel& m, const SearchOptions& opts, std::function<std::optional<Candidate>(long)> candidate)
      : m_(m), opts_(opts), candidate_(std::move(candidate)), start_(Clock::now()) {}

  OptResult result;

  // Verdict at grid index k; nullopt past the range. Throws Budget when time runs out.
  struct Budget {};
  std::optional<Safety> at(long k) {
    if (auto it = seen_.find(k); it != seen_.end()) return it->second;
    auto cand = candidate_(k);
    if (!cand) return std::nullopt;
    double left = opts_.timeout - elapsed();
    if (left <= 0) throw Budget{};
    SafetyResult r;
    try {
      r = check_safety(m_, *cand, opts_.solver, std::min(opts_.solver.query_timeout, left));
    } catch (const model::ModelError& e) {
      // the candidate leaves the model's domain (a denominator turns non-positive)
      result.note = e.what();
      return std::nullopt;
    }
    result.trace.push_back({*cand, r.verdict, r.seconds});
    if (r.verdict == Safety::Unknown) {
      ++unknowns_;
      if (elapsed() >= opts_.timeout) throw Budget{};
    }
    if (r.verdict == Safety::Unsafe) {
      cex_[k] = r.counterexample;
    }
    seen_[k] = r.verdict;
    return r.verdict;
  }

  void finish_optimal(long k, std::optional<long> adjacent) {
    result.status = Status::Optimal;
    result.best = *candidate_(k);
    if (adjacent) {
      if (auto it = cex_.find(*adjacent); it != cex_.end()) result.counterexample = it->second;
    } else if (!cex_.empty()) {
      result.counterexample = cex_.rbegin()->second;
    }
    if (unknowns_) note("solver returned unknown " + std::to_string(unknowns_) + " time(s); counted as unsafe");
  }

  void finish_failed(Status s) {
    result.status = s == Status::Infeasible && unknowns_ ? Status::SolverUnknown : s;
    if (!cex_.empty()) result.counterexample = cex_.rbegin()->second;
    if (unknowns_) note("solver returned unknown " + std::to_string(unknowns_) + " time(s)");
  }

  void stamp() { result.seconds = elapsed(); }
  long steps() const { return opts_.max_steps; }

 private:
  const OptModel& m_;
  const SearchOptions& opts_;
  std::function<std::optional<Candidate>(long)> candidate_;
  Clock::time_point start_;
  std::map<long, Safety> seen_;
  std::map<long, std::map<std::string, Rational>> cex_;
  int unknowns_ = 0;

  double elapsed() const { return std::chrono::duration<double>(Clock::now() - start_).count(); }
  void note(const std::string& s) { result.note = result.note.empty() ? s : result.note + "; " + s; }
};

constexpr long kStride = 8;

// First k with a safe verdict.
void first_safe(Search& s, bool bisect) {
  try {
    long k = 0;
    long last_bad = -1;
    long stride = bisect ? kStride : 1;
    for (;; k += stride) {
      if (k > s.steps()) return s.finish_failed(Status::Infeasible);
      auto v = s.at(k);
      if (!v) {
        if (stride > 1 && k - stride + 1 <= s.steps()) {
          // the range ends inside this stride: fall back to single steps
          for (long j = last_bad + 1; j < k; ++j) {
            auto w = s.at(j);
            if (!w) break;
            if (*w == Safety::Safe) return s.finish_optimal(j, j > 0 ? std::optional<long>(j - 1) : std::nullopt);
            last_bad = j;
          }
        }
        s.result.at_boundary = true;
        return s.finish_failed(Status::Infeasible);
      }
      if (*v == Safety::Safe) break;
      last_bad = k;
    }
    // bracket (last_bad, k]: bisect assuming safety is monotone along the grid
    long lo = last_bad, hi = k;
    while (hi - lo > 1) {
      long mid = lo + (hi - lo) / 2;
      auto v = s.at(mid);
      if (v && *v == Safety::Safe) hi = mid;
      else lo = mid;
    }
    if (hi == 0) s.result.at_boundary = true;
    s.finish_optimal(hi, hi > 0 ? std::optional<long>(hi - 1) : std::nullopt);
  } catch (const Search::Budget&) {
    s.finish_failed(Status::Timeout);
  }
}

// Last k before the first non-safe verdict.
void last_safe(Search& s, bool bisect) {
  try {
    auto v0 = s.at(0);
    if (!v0 || *v0 != Safety::Safe) return s.finish_failed(Status::Infeasible);
    long good = 0, k = 0;
    long stride = bisect ? kStride : 1;
    std::optional<long> bad;
    while (!bad) {
      k += stride;
      if (k > s.steps()) break;
      auto v = s.at(k);
      if (!v) {
        if (stride > 1) {
          for (long j = good + 1; j < k; ++j) {
            auto w = s.at(j);
            if (!w) break;
            if (*w != Safety::Safe) {
              bad = j;
              break;
            }
            good = j;
          }
        }
        break;
      }
      if (*v == Safety::Safe) good = k;
      else bad = k;
    }
    if (!bad) {
      s.result.at_boundary = true;
      return s.finish_optimal(good, std::nullopt);
    }
    long lo = good, hi = *bad;
    while (hi - lo > 1) {
      long mid = lo + (hi - lo) / 2;
      auto v = s.at(mid);
      if (v && *v == Safety::Safe) lo = mid;
      else hi = mid;
    }
    s.finish_optimal(lo, hi);
  } catch (const Search::Budget&) {
    s.finish_failed(Status::Timeout);
  }
}

std::map<std::string, Rational> all_targets(const OptModel& m, const std::map<std::string, Rational>& fixed) {
  std::map<std::string, Rational> t;
  for (const auto& c : m.controls) {
    auto it = fixed.find(c.name);
    t[c.name] = it == fixed.end() ? c.current : it->second;
  }
  return t;
}

}  // namespace

OptResult solve_min_cv(const OptModel& m, const std::string& control, const Rational& delta, const SearchOptions& opts,
                       const std::map<std::string, Rational>& fixed) {
  const model::Control* ctl = nullptr;
  for (const auto& c : m.controls)
    if (c.name == control) ctl = &c;
  if (!ctl) throw model::ModelError("no control named '" + control + "'");
  if (opts.step <= 0) throw model::ModelError("search step must be positive");
  auto base = all_targets(m, fixed);
  bool up = ctl->direction == model::Direction::Up;
  Search s(m, opts, [&](long k) -> std::optional<Candidate> {
    Rational v = up ? Rational(ctl->current + opts.step * k) : Rational(ctl->current - opts.step * k);
    if (ctl->max && (up ? v > *ctl->max : v < *ctl->max)) return std::nullopt;
    if (v <= 0) return std::nullopt;
    Candidate c{delta, base};
    c.targets[control] = v;
    return c;
  });
  first_safe(s, opts.bisect);
  if (s.result.status == Status::Optimal) s.result.value = s.result.best.targets.at(control);
  s.stamp();
  return s.result;
}

OptResult solve_max_delta(const OptModel& m, const std::map<std::string, Rational>& targets, const SearchOptions& opts,
                          const Rational& max_delta) {
  if (opts.step <= 0) throw model::ModelError("search step must be positive");
  auto base = all_targets(m, targets);
  Search s(m, opts, [&](long k) -> std::optional<Candidate> {
    Rational d = opts.step * k;
    if (d > max_delta) return std::nullopt;
    return Candidate{d, base};
  });
  last_safe(s, opts.bisect);
  if (s.result.status == Status::Optimal) s.result.value = s.result.best.delta;
  s.stamp();
  return s.result;
}

nlohmann::json to_json(const Candidate& c) {
  nlohmann::json j;
  j["delta"] = ordev::to_string(c.delta);
  for (const auto& [k, v] : c.targets) j["targets"][model::target_name(k)] = ordev::to_string(v);
  return j;
}

nlohmann::json to_json(const OptResult& r) {
  nlohmann::json j;
  j["status"] = to_string(r.status);
  if (r.value) {
    j["value"] = ordev::to_string(*r.value);
    j["value_approx"] = to_double(*r.value);
    j["candidate"] = to_json(r.best);
  } else {
    j["value"] = nullptr;
  }
  j["at_boundary"] = r.at_boundary;
  if (!r.note.empty()) j["note"] = r.note;
  j["seconds"] = r.seconds;
  auto& tr = j["trace"] = nlohmann::json::array();
  for (const auto& t : r.trace) {
    auto e = to_json(t.candidate);
    e["verdict"] = to_string(t.verdict);
    e["seconds"] = t.seconds;
    tr.push_back(e);
  }
  if (r.counterexample) {
    auto& cx = j["counterexample"];
    for (const auto& [k, v] : *r.counterexample) cx[k] = ordev::to_string(v);
  }
  return j;
}

}  // namespace ordev::opt

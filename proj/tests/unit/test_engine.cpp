#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "fixtures.hpp"
#include "models.hpp"
#include "ordev/opt/engine.hpp"

using namespace ordev;
using namespace ordev::opt;
using model::Candidate;
using testkit::lending_fixture;
using testkit::lending_model;

namespace {

bool have_solver() {
  try {
    find_solver();
    return true;
  } catch (const SolverError&) {
    return false;
  }
}

#define REQUIRE_SOLVER() \
  if (!have_solver()) GTEST_SKIP() << "no SMT solver available"

Rational q(const char* text) { return parse_rational(text); }

SearchOptions step(const char* s) {
  SearchOptions o;
  o.step = q(s);
  return o;
}

// Shell script standing in for a solver.
std::string fake_solver(const std::string& name, const std::string& body) {
  auto dir = std::filesystem::temp_directory_path() / "ordev-fake-solvers";
  std::filesystem::create_directories(dir);
  auto path = dir / name;
  std::ofstream(path) << "#!/bin/sh\ncat > /dev/null\n" << body << "\n";
  std::filesystem::permissions(path, std::filesystem::perms::owner_all);
  return path.string();
}

model::OptModel compound(int bound = 1) { return lending_model(lending_fixture("compound.osol", "borrowAllowed", bound)); }

void expect_replays(const model::OptModel& m, const OptResult& r) {
  for (const auto& t : r.trace) {
    if (t.verdict != Safety::Unsafe) continue;
    auto s = check_safety(m, t.candidate, {});
    ASSERT_EQ(s.verdict, Safety::Unsafe);
    std::string why;
    EXPECT_TRUE(replay(m, t.candidate, s.counterexample, &why)) << why;
  }
}

}  // namespace

TEST(SolverValues, Parse) {
  auto v = parse_values("((x 1.0) (|re.ret(p, 0)| (/ 1.0 3.0)) (y (- 2.5)) (z (root-obj (+ (^ x 2) (- 2)) 1)))");
  EXPECT_EQ(v.at("x"), Rational(1));
  EXPECT_EQ(v.at("re.ret(p, 0)"), Rational(1, 3));
  EXPECT_EQ(v.at("y"), Rational(-5, 2));
  EXPECT_FALSE(v.at("z").has_value());
  EXPECT_EQ(parse_values("((w 1.4142?))").at("w"), q("1.4142"));
}

TEST(SolverValues, Malformed) {
  EXPECT_THROW(parse_values("((x 1.0)"), SolverError);
  EXPECT_THROW(parse_values("x"), SolverError);
  EXPECT_THROW(parse_values("((x foo))"), SolverError);
}

TEST(SolverDriver, Lookup) {
  EXPECT_EQ(find_solver("/opt/some/solver"), "/opt/some/solver");
  ::setenv("ORDEV_SOLVER", "/tmp/from-env", 1);
  EXPECT_EQ(find_solver(), "/tmp/from-env");
  ::unsetenv("ORDEV_SOLVER");
}

TEST(SolverDriver, SatUnsat) {
  REQUIRE_SOLVER();
  auto sat = run_solver("(declare-fun x () Real)(assert (> x 2.0))(check-sat)(get-value (x))", {});
  EXPECT_EQ(sat.status, SolverStatus::Sat);
  ASSERT_TRUE(sat.model.count("x"));
  EXPECT_GT(sat.model["x"], 2);
  auto unsat = run_solver("(declare-fun x () Real)(assert (> x 2.0))(assert (< x 1.0))(check-sat)", {});
  EXPECT_EQ(unsat.status, SolverStatus::Unsat);
}

TEST(SolverDriver, IrrationalModelIsApproximated) {
  REQUIRE_SOLVER();
  auto r = run_solver("(declare-fun x () Real)(assert (= (* x x) 2.0))(assert (> x 0.0))(check-sat)(get-value (x))", {});
  ASSERT_EQ(r.status, SolverStatus::Sat);
  EXPECT_TRUE(r.approximate);
  ASSERT_TRUE(r.model.count("x"));
  EXPECT_NEAR(to_double(r.model["x"]), 1.41421356, 1e-6);
}

TEST(SolverDriver, Failures) {
  SolverConfig missing{"/nonexistent/solver", 5, ""};
  EXPECT_THROW(run_solver("(check-sat)", missing), SolverError);
  SolverConfig garbage{fake_solver("garbage", "echo hello"), 5, ""};
  EXPECT_THROW(run_solver("(check-sat)", garbage), SolverError);
  SolverConfig slow{fake_solver("slow", "sleep 10; echo unsat"), 0.3, ""};
  auto r = run_solver("(check-sat)", slow);
  EXPECT_EQ(r.status, SolverStatus::Timeout);
  EXPECT_LT(r.seconds, 2.0);
}

TEST(SolverDriver, DumpsQueries) {
  auto dir = std::filesystem::temp_directory_path() / "ordev-dump-test";
  std::filesystem::remove_all(dir);
  SolverConfig cfg{fake_solver("unsat", "echo unsat"), 5, dir.string()};
  run_solver("(check-sat)\n", cfg);
  int files = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir)) files += e.path().extension() == ".smt2";
  EXPECT_EQ(files, 1);
}

TEST(CheckSafety, CompoundExamples) {
  REQUIRE_SOLVER();
  auto m = compound();
  EXPECT_EQ(check_safety(m, {q("0.1"), {{"cf", q("0.86")}}}, {}).verdict, Safety::Safe);
  auto bad = check_safety(m, {q("0.1"), {{"cf", q("0.70")}}}, {});
  ASSERT_EQ(bad.verdict, Safety::Unsafe);
  std::string why;
  EXPECT_TRUE(replay(m, {q("0.1"), {{"cf", q("0.70")}}}, bad.counterexample, &why)) << why;
  // a reported collateral price above its true value is what makes it unsafe
  EXPECT_GT(bad.counterexample.at("re.ret(oraclePrice(v), 0)"), bad.counterexample.at("gt.ret(oraclePrice(v), 0)") *
                                                                    bad.counterexample.at("re.ret(pBrw, null)") /
                                                                    bad.counterexample.at("gt.ret(pBrw, null)"));
}

TEST(CheckSafety, ZeroDeviationIsSafeEverywhere) {
  REQUIRE_SOLVER();
  for (int b : {1, 2})
    for (const auto& fx : testkit::lending_fixtures(b)) {
      auto m = lending_model(fx);
      Candidate c{0, {}};
      for (const auto& ctl : m.controls) c.targets[ctl.name] = ctl.current;
      EXPECT_EQ(check_safety(m, c, {}).verdict, Safety::Safe) << fx.file << ":" << fx.entry << " bound " << b;
    }
}

TEST(CheckSafety, UnknownFromSolver) {
  SolverConfig cfg{fake_solver("unknown", "echo unknown"), 5, ""};
  EXPECT_EQ(check_safety(compound(), {q("0.1"), {{"cf", q("0.8")}}}, cfg).verdict, Safety::Unknown);
}

TEST(Replay, RejectsNonWitness) {
  auto m = compound();
  std::map<std::string, Rational> all_one;
  for (const auto& v : m.vars) all_one[v.name] = 1;
  std::string why;
  EXPECT_FALSE(replay(m, {q("0.1"), {{"cf", q("0.7")}}}, all_one, &why));
  EXPECT_FALSE(why.empty());
  EXPECT_FALSE(replay(m, {q("0.1"), {{"cf", q("0.7")}}}, {}, &why));
}

TEST(MinCv, CompoundTable) {
  REQUIRE_SOLVER();
  auto m = compound();
  auto r = solve_min_cv(m, "cf", q("0.01"), step("0.01"));
  ASSERT_EQ(r.status, Status::Optimal);
  EXPECT_EQ(*r.value, q("0.72"));
  ASSERT_TRUE(r.counterexample);
  EXPECT_TRUE(replay(m, {q("0.01"), {{"cf", q("0.71")}}}, *r.counterexample));
  expect_replays(m, r);
}

TEST(MinCv, DForceBorrowFactor) {
  REQUIRE_SOLVER();
  auto m = lending_model(lending_fixture("dforce.osol", "beforeBorrow", 1));
  auto r = solve_min_cv(m, "bf", q("0.01"), step("0.005"), {{"cf", q("0.5")}});
  ASSERT_EQ(r.status, Status::Optimal);
  EXPECT_EQ(*r.value, q("0.715"));
  EXPECT_EQ(r.best.targets.at("cf"), q("0.5"));
}

TEST(MinCv, SoloBoundTwo) {
  REQUIRE_SOLVER();
  auto m = lending_model(lending_fixture("solo.osol", "liquidate", 2));
  auto r = solve_min_cv(m, "mr", q("0.01"), step("0.01"));
  ASSERT_EQ(r.status, Status::Optimal);
  EXPECT_EQ(*r.value, q("0.13"));
  EXPECT_EQ(r.best.targets.at("mp"), q("0.15"));
}

TEST(MinCv, ZeroDeviationGivesCurrentValue) {
  REQUIRE_SOLVER();
  for (const auto& fx : testkit::lending_fixtures(1)) {
    auto m = lending_model(fx);
    for (const auto& ctl : m.controls) {
      auto r = solve_min_cv(m, ctl.name, 0, step("0.01"));
      ASSERT_EQ(r.status, Status::Optimal) << fx.file;
      EXPECT_EQ(*r.value, ctl.current) << fx.file << " " << ctl.name;
      EXPECT_TRUE(r.at_boundary);
    }
  }
}

TEST(MinCv, SearchBoundary) {
  REQUIRE_SOLVER();
  auto fx = lending_fixture("compound.osol", "borrowAllowed", 1);
  fx.cfg.controls[0].max = q("0.8");
  auto r = solve_min_cv(lending_model(fx), "cf", q("0.1"), step("0.01"));
  EXPECT_EQ(r.status, Status::Infeasible);
  EXPECT_TRUE(r.at_boundary);
  EXPECT_FALSE(r.value);
  EXPECT_EQ(r.trace.size(), 11u);
  EXPECT_TRUE(r.counterexample);
}

TEST(MinCv, UnknownCountsAsUnsafe) {
  auto opts = step("0.01");
  opts.solver = {fake_solver("unknown", "echo unknown"), 5, ""};
  opts.max_steps = 5;
  auto r = solve_min_cv(compound(), "cf", q("0.1"), opts);
  EXPECT_EQ(r.status, Status::SolverUnknown);
  EXPECT_EQ(r.trace.size(), 6u);
  for (const auto& t : r.trace) EXPECT_EQ(t.verdict, Safety::Unknown);
}

TEST(MinCv, BudgetIsRespected) {
  auto opts = step("0.01");
  opts.solver = {fake_solver("slow", "sleep 10; echo unsat"), 0.4, ""};
  opts.timeout = 1.5;
  auto r = solve_min_cv(compound(), "cf", q("0.1"), opts);
  EXPECT_EQ(r.status, Status::Timeout);
  EXPECT_LT(r.seconds, 1.5 + 1.0);
  EXPECT_FALSE(r.trace.empty());
}

TEST(MinCv, UnknownControl) { EXPECT_THROW(solve_min_cv(compound(), "zz", 0, {}), model::ModelError); }

TEST(MaxDelta, TableRows) {
  REQUIRE_SOLVER();
  struct Row {
    const char* file;
    const char* entry;
    int bound;
    std::map<std::string, Rational> current, target;
    const char* want;
  };
  std::vector<Row> rows = {
      {"compound.osol", "borrowAllowed", 1, {}, {{"cf", 1}}, "0.17"},
      {"testamm.osol", "borrow", 1, {}, {{"cr", 1}}, "0.42"},
      {"solo.osol", "liquidate", 2, {}, {}, "0"},
      {"warp.osol", "borrowSC", 1, {}, {{"cr", 1}}, "0.2"},
  };
  for (const auto& row : rows) {
    auto m = lending_model(lending_fixture(row.file, row.entry, row.bound));
    auto r = solve_max_delta(m, row.target, step("0.01"));
    ASSERT_EQ(r.status, Status::Optimal) << row.file;
    EXPECT_EQ(*r.value, q(row.want)) << row.file;
    expect_replays(m, r);
  }
}

TEST(MaxDelta, PriceFixtures) {
  REQUIRE_SOLVER();
  auto x = testkit::price_model("xtoken.osol", "mint", "burn", "0.02");
  auto rx = solve_max_delta(x, {}, step("0.01"));
  ASSERT_EQ(rx.status, Status::Optimal);
  EXPECT_EQ(*rx.value, q("0.02"));
  auto b = testkit::price_model("beefy.osol", "deposit", "withdraw", "0");
  auto rb = solve_max_delta(b, {}, step("0.01"));
  ASSERT_EQ(rb.status, Status::Optimal);
  EXPECT_EQ(*rb.value, 0);
  expect_replays(b, rb);
}

TEST(MaxDelta, InfeasibleAtZero) {
  REQUIRE_SOLVER();
  // cf' below cf cannot be safe even without deviation
  auto r = solve_max_delta(compound(), {{"cf", q("0.5")}}, step("0.01"));
  EXPECT_EQ(r.status, Status::Infeasible);
  ASSERT_EQ(r.trace.size(), 1u);
  EXPECT_TRUE(r.counterexample);
}

TEST(MaxDelta, UpperLimit) {
  REQUIRE_SOLVER();
  auto r = solve_max_delta(compound(), {{"cf", 1}}, step("0.05"), q("0.1"));
  ASSERT_EQ(r.status, Status::Optimal);
  EXPECT_EQ(*r.value, q("0.1"));
  EXPECT_TRUE(r.at_boundary);
}

TEST(EngineProperty, OptimaReverifySafe) {
  REQUIRE_SOLVER();
  for (const auto& fx : testkit::lending_fixtures(1)) {
    auto m = lending_model(fx);
    auto r = solve_min_cv(m, m.controls[0].name, q("0.01"), step("0.01"));
    ASSERT_EQ(r.status, Status::Optimal) << fx.file;
    EXPECT_EQ(check_safety(m, r.best, {}).verdict, Safety::Safe) << fx.file;
    if (!r.at_boundary) {
      Candidate before = r.best;
      auto& v = before.targets[m.controls[0].name];
      v = m.controls[0].direction == model::Direction::Up ? Rational(v - q("0.01")) : Rational(v + q("0.01"));
      EXPECT_EQ(check_safety(m, before, {}).verdict, Safety::Unsafe) << fx.file;
    }
  }
}

TEST(EngineProperty, MonotoneInDelta) {
  REQUIRE_SOLVER();
  for (const auto& fx : testkit::lending_fixtures(1)) {
    auto m = lending_model(fx);
    const auto& ctl = m.controls[0];
    std::optional<Rational> prev;
    for (const char* d : {"0.001", "0.01", "0.1"}) {
      auto r = solve_min_cv(m, ctl.name, q(d), step("0.01"));
      ASSERT_EQ(r.status, Status::Optimal) << fx.file << " delta " << d;
      if (prev) {
        if (ctl.direction == model::Direction::Up) EXPECT_GE(*r.value, *prev) << fx.file;
        else EXPECT_LE(*r.value, *prev) << fx.file;
      }
      prev = r.value;
    }
  }
}

TEST(EngineProperty, StepRefinementCoherence) {
  REQUIRE_SOLVER();
  for (const auto& [file, entry] : std::vector<std::pair<std::string, std::string>>{
           {"compound.osol", "borrowAllowed"}, {"testamm.osol", "borrow"}, {"morpho.osol", "borrowAllowed"}}) {
    auto m = lending_model(lending_fixture(file, entry, 1));
    auto coarse = solve_min_cv(m, m.controls[0].name, q("0.1"), step("0.02"));
    auto fine = solve_min_cv(m, m.controls[0].name, q("0.1"), step("0.01"));
    ASSERT_EQ(coarse.status, Status::Optimal);
    ASSERT_EQ(fine.status, Status::Optimal);
    EXPECT_LE(*fine.value, *coarse.value) << file;
    EXPECT_GE(*fine.value, *coarse.value - q("0.02")) << file;
  }
}

TEST(EngineProperty, LargerBoundNeverLowersMinimum) {
  REQUIRE_SOLVER();
  for (const auto& [file, entry, control] : std::vector<std::tuple<std::string, std::string, std::string>>{
           {"compound.osol", "borrowAllowed", "cf"}, {"euler.osol", "checkLiquidity", "bf"}, {"solo.osol", "liquidate", "mr"}}) {
    std::optional<Rational> prev;
    for (int b : {1, 2}) {
      auto m = lending_model(lending_fixture(file, entry, b));
      auto r = solve_min_cv(m, control, q("0.01"), step("0.01"));
      ASSERT_EQ(r.status, Status::Optimal) << file << " bound " << b;
      if (prev) EXPECT_GE(*r.value, *prev) << file;
      prev = r.value;
    }
  }
}

TEST(EngineProperty, BisectionMatchesWalk) {
  REQUIRE_SOLVER();
  auto m = compound();
  auto walk = solve_min_cv(m, "cf", q("0.1"), step("0.01"));
  auto opts = step("0.01");
  opts.bisect = true;
  auto bis = solve_min_cv(m, "cf", q("0.1"), opts);
  ASSERT_EQ(bis.status, Status::Optimal);
  EXPECT_EQ(*bis.value, *walk.value);
  EXPECT_LT(bis.trace.size(), walk.trace.size());
  auto dw = solve_max_delta(m, {{"cf", 1}}, step("0.01"));
  auto db = solve_max_delta(m, {{"cf", 1}}, opts);
  EXPECT_EQ(*db.value, *dw.value);
}

TEST(EngineJson, Result) {
  REQUIRE_SOLVER();
  auto r = solve_min_cv(compound(), "cf", q("0.01"), step("0.01"));
  auto j = to_json(r);
  EXPECT_EQ(j["status"], "optimal");
  EXPECT_EQ(j["value"], "0.72");
  EXPECT_EQ(j["candidate"]["targets"]["cf'"], "0.72");
  EXPECT_EQ(j["trace"].size(), r.trace.size());
  EXPECT_EQ(j["trace"][0]["verdict"], "unsafe");
  EXPECT_TRUE(j.contains("counterexample"));
}

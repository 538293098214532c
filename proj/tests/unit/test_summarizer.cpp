#include <gtest/gtest.h>

#include <chrono>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "ordev/deps/deps.hpp"
#include "ordev/dsl/eval.hpp"
#include "ordev/dsl/normalize.hpp"
#include "ordev/dsl/parse.hpp"
#include "ordev/dsl/printer.hpp"
#include "ordev/front/interp.hpp"
#include "ordev/front/parser.hpp"
#include "ordev/summary/summary.hpp"
#include "equivalence.hpp"
#include "random_env.hpp"

using namespace ordev;
using namespace ordev::front;
using dsl::NodePtr;
using testkit::Equivalence;

namespace {

struct Summaries {
  std::vector<summary::Constraint> constraints;
  std::vector<NodePtr> returns;
};

Summaries summarize(const FuncObj& f) {
  auto d = deps::analyze(f);
  return {summary::code_summary(f, d), summary::return_summary(f, d)};
}

std::vector<NodePtr> listing(const std::string& name) {
  return summarize(extract_func(testkit::load_data("listings.osol"), name)).returns;
}

void expect_equiv(const NodePtr& got, const std::string& want, const std::set<std::string>& iters = {}) {
  EXPECT_TRUE(dsl::equivalent(got, dsl::parse(want, iters)))
      << "got:  " << dsl::print(dsl::pretty(got)) << "\nwant: " << dsl::print(dsl::pretty(dsl::parse(want, iters)));
}

const Stmt* find_stmt(const std::vector<Stmt>& body, StmtKind kind) {
  const Stmt* hit = nullptr;
  walk_stmts(body, [&](const Stmt& s) {
    if (!hit && s.kind == kind) hit = &s;
  });
  return hit;
}

void check_hygiene(const NodePtr& n, std::vector<std::string>& binders) {
  if (n->kind == dsl::Kind::Sum) {
    EXPECT_EQ(std::count(binders.begin(), binders.end(), n->name), 0) << "nested reuse of " << n->name;
    EXPECT_TRUE(dsl::has_free_iter(n->kids[0], n->name)) << dsl::print(n);
    binders.push_back(n->name);
    check_hygiene(n->kids[0], binders);
    binders.pop_back();
    check_hygiene(n->kids[1], binders);
    return;
  }
  for (const auto& k : n->kids) check_hygiene(k, binders);
}

Equivalence compare_with_interpreter(const FuncObj& f, const Summaries& s, std::mt19937_64& rng, int want) {
  return testkit::compare_with_interpreter(f, s.constraints, s.returns, rng, want);
}

std::vector<std::pair<Contract, std::string>> all_entries() {
  std::vector<std::pair<Contract, std::string>> out;
  auto files = testkit::corpus_files();
  files.push_back(testkit::data_dir() + "/listings.osol");
  for (const auto& path : files) {
    Contract c = load_contract(path);
    for (const auto& f : c.funcs)
      if (f.is_public()) out.emplace_back(c, f.name);
  }
  return out;
}

}  // namespace

TEST(ConvDsl, ArrayRead) {
  auto e = summary::conv_dsl(parse_expr("A[i]"), {"i"});
  EXPECT_EQ(dsl::print(e), "index(A, i)");
  EXPECT_EQ(e->kids[1]->kind, dsl::Kind::Iter);
}

TEST(ConvDsl, Constant) {
  auto e = summary::conv_dsl(parse_expr("5"));
  ASSERT_EQ(e->kind, dsl::Kind::Const);
  EXPECT_EQ(e->value, 5);
}

TEST(ConvDsl, NestedMapMember) {
  auto e = summary::conv_dsl(parse_expr("markets[assets[i]].collFact"), {"i"});
  EXPECT_EQ(dsl::print(e), "collFact(index(markets, index(assets, i)))");
}

TEST(ConvDsl, NumericNegationRejected) {
  EXPECT_THROW(summary::conv_dsl(parse_expr("!(a + 1)")), summary::SummaryError);
  EXPECT_NO_THROW(summary::conv_dsl(parse_expr("!(a > 1)")));
}

TEST(ExtractSummary, AssignmentSubstitutesIntoTheSeed) {
  Contract c = parse_contract(R"(contract(C) {
  @entry
  func(f, Int sumColl, Int sumBrwEfct) {
    surplus = sumColl - sumBrwEfct
    require(surplus > 0)
    return(0)
  }
})");
  FuncObj f = extract_func(c, "f");
  auto d = deps::analyze(f);
  summary::Summarizer s(f, d);
  const Stmt& assign = f.entry_function().body[0];
  auto out = s.extract_summary("f", assign, dsl::parse("surplus > 0"));
  EXPECT_EQ(dsl::print(out), "sumColl - sumBrwEfct > 0");
}

TEST(ExtractSummary, UnrelatedAssignmentIsANoOp) {
  Contract c = parse_contract(R"(contract(C) {
  @entry
  func(f, Int a) {
    other = a * 2
    return(a)
  }
})");
  FuncObj f = extract_func(c, "f");
  auto d = deps::analyze(f);
  summary::Summarizer s(f, d);
  auto seed = dsl::parse("a + 1");
  EXPECT_EQ(s.extract_summary("f", f.entry_function().body[0], seed), seed);
}

TEST(ExtractSummary, OracleCallInLoopBecomesIteratedRet) {
  FuncObj f = extract_func(testkit::load_corpus("compound.osol"), "borrowAllowed");
  auto cs = summarize(f).constraints;
  ASSERT_EQ(cs.size(), 1u);
  bool found = dsl::contains(cs[0].expr, [](const dsl::Node& n) {
    return n.kind == dsl::Kind::Ret && dsl::print(n.kids[0]) == "oraclePrice(v)" && n.kids[1]->kind == dsl::Kind::Iter &&
           n.oracle && n.callee == "oracle.getUnderlyingPrice";
  });
  EXPECT_TRUE(found) << dsl::print(cs[0].expr);
}

TEST(LoopSummary, Listing3Accumulator) {
  auto r = listing("listing3");
  ASSERT_EQ(r.size(), 2u);
  expect_equiv(r[0], "acc_0 + sum(index(A, j), j, b)");
}

// acc1 adds the value of acc after the current iteration's update, so the inner sum
// covers k + 1 elements.
TEST(LoopSummary, Listing3NestedAccumulator) {
  auto r = listing("listing3");
  expect_equiv(r[1], "acc1_0 + sum(acc_0 + sum(index(A, j), j, k) + index(A, k), k, b)");
  EXPECT_FALSE(dsl::equivalent(r[1], dsl::parse("acc1_0 + sum(acc_0 + sum(index(A, j), j, k), k, b)")));
}

TEST(LoopSummary, ZipFold) {
  expect_equiv(listing("zipFold")[0], "total_0 + sum(index(arr1, j) * index(arr2, j), j, len)");
}

TEST(LoopSummary, DependentStatements) {
  expect_equiv(listing("dependentStmts")[0], "total_0 + sum(5 * index(arr, j), j, len)");
}

TEST(LoopSummary, UntouchedSymbolsPassThrough) {
  Contract c = parse_contract(R"(contract(C) {
  @entry
  func(f, Array A, Int n, Int x) {
    acc = 0
    for(i, n) {
      acc = acc + A[i]
    }
    return(x)
  }
})");
  FuncObj f = extract_func(c, "f");
  auto d = deps::analyze(f);
  summary::Summarizer s(f, d);
  const Stmt* loop = find_stmt(f.entry_function().body, StmtKind::For);
  auto seed = dsl::parse("x * 2");
  EXPECT_EQ(s.loop_summary("f", *loop, seed), seed);
}

TEST(LoopSummary, NonAccumulationIsRejected) {
  Contract c = parse_contract(R"(contract(C) {
  @entry
  func(f, Array A, Int n) {
    acc = 1
    for(i, n) {
      acc = acc * A[i]
    }
    return(acc)
  }
})");
  FuncObj f = extract_func(c, "f");
  EXPECT_THROW(summarize(f), summary::SummaryError);
}

TEST(LoopSummary, LastValueAfterLoop) {
  Contract c = parse_contract(R"(contract(C) {
  @entry
  func(f, Array A, Int n) {
    last = 7
    for(i, n) {
      last = A[i] * 2
    }
    return(last)
  }
})");
  FuncObj f = extract_func(c, "f");
  auto r = summarize(f).returns;
  ASSERT_EQ(r.size(), 1u);
  Env env;
  env.arrays["A"] = {3, 4, 5};
  for (int n : {0, 1, 3}) {
    env.scalars["n"] = n;
    EXPECT_EQ(dsl::eval(r[0], dsl::env_resolver(env)), interpret_function(f, env).returns[0]) << n;
  }
}

TEST(IfSummary, Listing5) {
  auto r = listing("listing4");
  ASSERT_EQ(r.size(), 2u);
  expect_equiv(r[0], "a1_0 + sum(index(A, j) * index(B, j) * Int(index(D, j)), j, b)");
  expect_equiv(r[1], "a2_0 + sum(index(A, k) * index(C, k) * (1 - Int(index(D, k))), k, b)");
  EXPECT_NE(dsl::print(r[0]).find("Int(index(D, j))"), std::string::npos) << dsl::print(r[0]);
}

TEST(IfSummary, IdenticalBranchesCancelFlags) {
  Contract c = parse_contract(R"(contract(C) {
  @entry
  func(f, Int a, Int v, Int c) {
    x = a
    if (c > 1) {
      x = v
    } else {
      x = v
    }
    return(x)
  }
})");
  auto r = summarize(extract_func(c, "f")).returns;
  EXPECT_EQ(dsl::print(r[0]), "v");
}

TEST(IfSummary, CompoundBranchFlag) {
  FuncObj f = extract_func(testkit::load_corpus("compound.osol"), "borrowAllowed");
  auto cs = summarize(f).constraints;
  bool found = dsl::contains(cs[0].expr, [](const dsl::Node& n) {
    if (n.kind != dsl::Kind::Int || n.kids[0]->kind != dsl::Kind::Cmp || n.kids[0]->cmp != dsl::CmpOp::Eq) return false;
    return dsl::ids(n.kids[0]) == std::set<std::string>{"accountAssets", "cToken"};
  });
  EXPECT_TRUE(found) << dsl::print(cs[0].expr);
}

TEST(CodeSummary, CompoundMatchesAnalysisSummary) {
  FuncObj f = extract_func(testkit::load_corpus("compound.osol"), "borrowAllowed");
  auto cs = summarize(f).constraints;
  ASSERT_EQ(cs.size(), 1u);
  expect_equiv(cs[0].expr,
               "sum(collFact(index(markets, index(accountAssets, a))) * ret(exchRt(v), a) * ret(oraclePrice(v), a) * "
               "ret(cTokenBal(v), a), a, numAssets) - sum(ret(brwBal(v), a) * ret(oraclePrice(v), a) + "
               "Int(index(accountAssets, a) == cToken) * (ret(pBrw, null) * brwAmt + collFact(index(markets, cToken)) * "
               "ret(exchRtR, null) * ret(pR, null) * redTok), a, numAssets) > 0");
}

TEST(CodeSummary, NoOracleNoConstraints) {
  Contract c = parse_contract(R"(contract(C) {
  state(Int, total)
  @entry
  func(f, Int a) {
    load(t, total)
    require(t > a)
    return(0)
  }
})");
  EXPECT_TRUE(summarize(extract_func(c, "f")).constraints.empty());
}

TEST(CodeSummary, SoloLiquidation) {
  auto cs = summarize(extract_func(testkit::load_corpus("solo.osol"), "liquidate")).constraints;
  ASSERT_EQ(cs.size(), 2u);
  NodePtr liq;
  for (const auto& c : cs)
    if (c.source.find("<") != std::string::npos) liq = c.expr;
  ASSERT_TRUE(liq);
  expect_equiv(liq,
               "sum(index(supplyPar, j) * index(supplyIdx, j) * ret(price, j), j, numMarkets) / (1 - marginPremium) < "
               "sum(index(borrowPar, j) * index(borrowIdx, j) * ret(price, j), j, numMarkets) * (1 + marginPremium) * "
               "(1 + marginRatio)");
  EXPECT_EQ(dsl::print(dsl::tidy(liq)),
            "sum(index(supplyIdx, j)*index(supplyPar, j)*ret(price, j), j, numMarkets)/(1 - marginPremium) < "
            "sum(index(borrowIdx, k)*index(borrowPar, k)*ret(price, k), k, numMarkets)*(1 + marginPremium)*(1 + marginRatio)");
}

TEST(CodeSummary, OnlyEntryInputsRemain) {
  for (const auto& [c, name] : all_entries()) {
    FuncObj f = extract_func(c, name);
    std::set<std::string> allowed;
    for (const auto& p : f.entry_function().params) allowed.insert(p.name);
    for (const auto& st : f.states) allowed.insert(st.name);
    auto s = summarize(f);
    for (const auto& k : s.constraints) {
      for (const auto& x : dsl::ids(k.expr)) EXPECT_TRUE(allowed.count(x)) << name << ": " << x;
      EXPECT_TRUE(dsl::free_iters(k.expr).empty()) << name;
    }
  }
}

TEST(SummaryStats, CompoundCounts) {
  FuncObj f = extract_func(testkit::load_corpus("compound.osol"), "borrowAllowed");
  auto cs = summarize(f).constraints;
  auto st = summary::stats(f, {cs[0].expr}, 1, {"redTok"});
  EXPECT_EQ(st.loops, 1);
  EXPECT_EQ(st.vector_vars, 5) << nlohmann::json(st.vectors).dump();
  EXPECT_EQ(st.scalar_vars, 5) << nlohmann::json(st.scalars).dump();
}

struct StatsRow {
  const char* file;
  std::vector<const char*> entries;
  bool from_returns;
  int requires_, loops, vectors, scalars;
};

TEST(SummaryStats, EveryFixture) {
  const std::vector<StatsRow> rows = {
      {"compound.osol", {"borrowAllowed"}, false, 1, 1, 5, 5},
      {"aave.osol", {"validateBorrow"}, false, 3, 1, 6, 4},
      {"aave.osol", {"liquidationCall"}, false, 1, 1, 5, 1},
      {"solo.osol", {"liquidate"}, false, 2, 1, 5, 2},
      {"dforce.osol", {"beforeBorrow"}, false, 1, 2, 6, 2},
      {"euler.osol", {"checkLiquidity"}, false, 1, 1, 5, 2},
      {"warp.osol", {"borrowSC"}, false, 1, 2, 4, 2},
      {"morpho.osol", {"borrowAllowed"}, false, 1, 2, 7, 1},
      {"testamm.osol", {"borrow"}, false, 1, 0, 0, 4},
      {"xtoken.osol", {"mint", "burn"}, true, 0, 0, 0, 4},
      {"beefy.osol", {"deposit", "withdraw"}, true, 0, 0, 0, 4},
  };
  for (const auto& row : rows) {
    Contract c = testkit::load_corpus(row.file);
    std::vector<NodePtr> exprs;
    int reqs = 0, loops = 0;
    for (const char* entry : row.entries) {
      FuncObj f = extract_func(c, entry);
      Summaries s = summarize(f);
      reqs += static_cast<int>(s.constraints.size());
      for (const auto& k : s.constraints) exprs.push_back(k.expr);
      if (row.from_returns) exprs.insert(exprs.end(), s.returns.begin(), s.returns.end());
      loops = std::max(loops, summary::stats(f, {}, 0).loops);
    }
    auto st = summary::stats(extract_func(c, row.entries[0]), exprs, reqs, {"redTok"});
    std::string label = std::string(row.file) + "::" + row.entries[0];
    EXPECT_EQ(st.require_count, row.requires_) << label;
    EXPECT_EQ(loops, row.loops) << label;
    EXPECT_EQ(st.vector_vars, row.vectors) << label << " " << nlohmann::json(st.vectors).dump();
    EXPECT_EQ(st.scalar_vars, row.scalars) << label << " " << nlohmann::json(st.scalars).dump();
  }
}

TEST(SummaryJson, TextAndTree) {
  FuncObj f = extract_func(testkit::load_corpus("testamm.osol"), "borrow");
  auto cs = summarize(f).constraints;
  ASSERT_EQ(cs.size(), 1u);
  auto j = summary::to_json(cs[0]);
  EXPECT_EQ(j["text"], "amount <= index(deposits, user)*ret(price, null)*collateralRatio");
  EXPECT_EQ(j["tree"]["kind"], "cmp");
}

// Every fixture and listing against the interpreter, loop bounds drawn from 0..5.
TEST(SummaryProperty, MatchesInterpreter) {
  std::mt19937_64 rng(2024);
  auto start = std::chrono::steady_clock::now();
  for (const auto& [c, name] : all_entries()) {
    FuncObj f = extract_func(c, name);
    Summaries s = summarize(f);
    auto eq = compare_with_interpreter(f, s, rng, 100);
    EXPECT_EQ(eq.envs, 100) << c.id << "::" << name << " skipped " << eq.skipped;
    EXPECT_EQ(eq.mismatches, 0) << c.id << "::" << name << " first at " << eq.first;
  }
  EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(), 30.0);
}

TEST(SummaryProperty, ZeroIterationsGiveInitialValues) {
  for (const char* name : {"listing3", "listing4", "zipFold", "dependentStmts"}) {
    FuncObj f = extract_func(testkit::load_data("listings.osol"), name);
    auto r = summarize(f).returns;
    for (const auto& v : r) {
      NodePtr zero = dsl::subst_ids(v, [](const std::string& x) -> NodePtr {
        return x == "b" || x == "len" ? dsl::cst(0) : nullptr;
      });
      auto p = dsl::normalize(zero);
      ASSERT_EQ(p.terms.size(), 1u) << name;
      auto atom = p.atoms.begin()->second;
      EXPECT_EQ(atom->kind, dsl::Kind::Id);
      EXPECT_EQ(atom->name.substr(atom->name.size() - 2), "_0") << name;
    }
  }
}

TEST(SummaryProperty, IteratorHygiene) {
  for (const auto& [c, name] : all_entries()) {
    auto s = summarize(extract_func(c, name));
    std::vector<std::string> binders;
    for (const auto& k : s.constraints) check_hygiene(k.expr, binders);
    for (const auto& r : s.returns) check_hygiene(r, binders);
  }
}

namespace {

// Random straight-line/if/loop programs over a price oracle and two balance maps.
class ProgramGen {
 public:
  explicit ProgramGen(std::mt19937_64& rng) : rng_(rng) {}

  std::string contract() {
    std::ostringstream os;
    int accs = pick(1, 3);
    bool oracle = pick(0, 1);
    bool with_if = pick(0, 1);
    os << "contract(G) {\n  state(Map, bal)\n  state(Map, debt)\n  state(Int, n)\n"
       << "  @oracle extern(feed.price)\n  @entry\n  func(f, Int x, Int y, Int z) {\n";
    for (int a = 0; a < accs; ++a) os << "    a" << a << " = " << atom_outside() << "\n";
    os << "    for(i, n) {\n";
    if (oracle) os << "      call(feed.price, i, p)\n";
    for (int a = 0; a < accs; ++a) {
      std::string term = product(oracle, a);
      std::string op = pick(0, 3) ? "+" : "-";
      if (with_if && pick(0, 1)) {
        os << "      if (" << condition() << ") {\n        a" << a << " = a" << a << " " << op << " " << term << "\n";
        if (pick(0, 1)) os << "      } else {\n        a" << a << " = a" << a << " + " << product(oracle, a) << "\n";
        os << "      }\n";
      } else {
        os << "      a" << a << " = a" << a << " " << op << " " << term << "\n";
      }
    }
    os << "    }\n";
    std::string lhs = "a0", rhs = accs > 1 ? "a1" : "y";
    if (pick(0, 1)) os << "    s = " << lhs << " - " << rhs << "\n    require(s > " << atom_outside() << ")\n";
    else os << "    require(" << lhs << " >= " << rhs << " * " << atom_outside() << ")\n";
    os << "    return(a" << pick(0, accs - 1) << ")\n  }\n}\n";
    return os.str();
  }

 private:
  std::mt19937_64& rng_;

  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  std::string atom_outside() {
    switch (pick(0, 3)) {
      case 0: return "x";
      case 1: return "z";
      case 2: return std::to_string(pick(0, 3));
      default: return "y";
    }
  }

  std::string factor(bool oracle, int acc) {
    switch (pick(0, 5)) {
      case 0: return "bal[i]";
      case 1: return "debt[i]";
      case 2: return oracle ? "p" : "bal[i]";
      case 3: return acc > 0 ? "a" + std::to_string(pick(0, acc - 1)) : "x";
      case 4: return std::to_string(pick(1, 4));
      default: return atom_outside();
    }
  }

  std::string product(bool oracle, int acc) {
    std::string t = factor(oracle, acc);
    for (int k = pick(0, 2); k > 0; --k) t += " * " + factor(oracle, acc);
    return t;
  }

  std::string condition() {
    switch (pick(0, 2)) {
      case 0: return "bal[i] > y";
      case 1: return "debt[i] == z";
      default: return "bal[i] >= debt[i]";
    }
  }
};

}  // namespace

TEST(SummaryProperty, RandomProgramsMatchInterpreter) {
  std::mt19937_64 rng(99);
  ProgramGen gen(rng);
  for (int trial = 0; trial < 60; ++trial) {
    std::string text = gen.contract();
    FuncObj f = extract_func(parse_contract(text), "f");
    Summaries s;
    auto d = deps::analyze(f);
    s.returns = summary::return_summary(f, d);
    // every top-level require, oracle-dependent or not
    summary::Summarizer sm(f, d);
    const auto& body = f.entry_function().body;
    for (size_t k = 0; k < body.size(); ++k) {
      if (body[k].kind != StmtKind::Require) continue;
      summary::Constraint c;
      c.stmt = body[k].id;
      c.source = text;
      c.expr = sm.extract_block("f", body, k, summary::conv_dsl(body[k].expr));
      s.constraints.push_back(c);
    }
    auto eq = compare_with_interpreter(f, s, rng, 100);
    EXPECT_EQ(eq.mismatches, 0) << text;
    EXPECT_EQ(eq.envs, 100) << text;
  }
}

// In every if-summary the two arms are weighted by Int(c) and 1 - Int(c) for one c.
TEST(SummaryProperty, BranchFlagsPartition) {
  std::mt19937_64 rng(5);
  ProgramGen gen(rng);
  int seen = 0;
  for (int trial = 0; trial < 80; ++trial) {
    FuncObj f = extract_func(parse_contract(gen.contract()), "f");
    auto d = deps::analyze(f);
    summary::Summarizer s(f, d);
    walk_stmts(f.entry_function().body, [&](const Stmt& st) {
      if (st.kind != StmtKind::If) return;
      for (const auto& phi : st.phis) {
        NodePtr v = s.if_summary("f", st, dsl::id(phi.target));
        if (v->kind != dsl::Kind::Add) continue;  // arms were identical
        ++seen;
        const auto& then_arm = v->kids[0];
        const auto& else_arm = v->kids[1];
        ASSERT_EQ(then_arm->kind, dsl::Kind::Mul);
        ASSERT_EQ(else_arm->kind, dsl::Kind::Mul);
        const NodePtr& f1 = then_arm->kids[1];
        const NodePtr& f2 = else_arm->kids[1];
        ASSERT_EQ(f1->kind, dsl::Kind::Int);
        ASSERT_EQ(f2->kind, dsl::Kind::Sub);
        EXPECT_TRUE(f2->kids[0]->kind == dsl::Kind::Const && f2->kids[0]->value == 1);
        EXPECT_TRUE(dsl::equal(f2->kids[1], f1));
      }
    });
  }
  EXPECT_GT(seen, 10);
}

TEST(SummaryProperty, DeadAssignmentsChangeNothing) {
  std::mt19937_64 rng(11);
  int dead = 0;
  for (const auto& [c, name] : all_entries()) {
    Summaries base = summarize(extract_func(c, name));
    for (int trial = 0; trial < 5; ++trial) {
      Contract mod = c;
      // collect every statement list and pick one
      std::vector<std::vector<Stmt>*> blocks;
      std::function<void(std::vector<Stmt>&)> gather = [&](std::vector<Stmt>& b) {
        blocks.push_back(&b);
        for (auto& s : b) {
          if (s.kind == StmtKind::For || s.kind == StmtKind::If) {
            gather(s.body);
            if (s.kind == StmtKind::If) gather(s.orelse);
          }
        }
      };
      for (auto& fn : mod.funcs) gather(fn.body);
      auto* block = blocks[std::uniform_int_distribution<size_t>(0, blocks.size() - 1)(rng)];
      size_t at = std::uniform_int_distribution<size_t>(0, block->size())(rng);
      auto stmt = parse_statements("unusedLocal" + std::to_string(dead++) + " = 3 * 7")[0];
      block->insert(block->begin() + static_cast<long>(at), stmt);
      Summaries again = summarize(extract_func(mod, name));
      ASSERT_EQ(base.constraints.size(), again.constraints.size());
      for (size_t k = 0; k < base.constraints.size(); ++k)
        EXPECT_TRUE(dsl::equal(base.constraints[k].expr, again.constraints[k].expr)) << name;
      ASSERT_EQ(base.returns.size(), again.returns.size());
      for (size_t k = 0; k < base.returns.size(); ++k) EXPECT_TRUE(dsl::equal(base.returns[k], again.returns[k])) << name;
    }
  }
}

TEST(SummaryTiming, EachFixtureUnderTenSeconds) {
  for (const auto& [c, name] : all_entries()) {
    auto start = std::chrono::steady_clock::now();
    summarize(extract_func(c, name));
    EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(), 10.0) << name;
  }
}

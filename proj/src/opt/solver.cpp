#include "ordev/opt/solver.hpp"

#include <unistd.h>
#include <sys/wait.h>

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace ordev::opt {

namespace fs = std::filesystem;

const char* to_string(SolverStatus s) {
  switch (s) {
    case SolverStatus::Sat: return "sat";
    case SolverStatus::Unsat: return "unsat";
    case SolverStatus::Timeout: return "timeout";
    default: return "unknown";
  }
}

std::string find_solver(const std::string& explicit_path) {
  if (!explicit_path.empty()) return explicit_path;
  if (const char* env = std::getenv("ORDEV_SOLVER"); env && *env) return env;
  if (const char* path = std::getenv("PATH")) {
    std::stringstream dirs(path);
    std::string dir;
    while (std::getline(dirs, dir, ':')) {
      fs::path cand = fs::path(dir.empty() ? "." : dir) / "z3";
      if (::access(cand.c_str(), X_OK) == 0) return cand.string();
    }
  }
  throw SolverError("no SMT solver found: pass --solver, set ORDEV_SOLVER or put z3 on PATH");
}

namespace {

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return out + "'";
}

// A few well-known solvers need flags to read SMT-LIB 2 from stdin.
std::string solver_args(const std::string& path, double timeout) {
  std::string base = fs::path(path).filename().string();
  if (base.rfind("z3", 0) == 0) return " -in -smt2 -t:" + std::to_string(static_cast<long>(timeout * 1000));
  if (base.rfind("cvc5", 0) == 0) return " --lang=smt2 --produce-models --tlimit-per=" + std::to_string(static_cast<long>(timeout * 1000));
  return "";
}

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& text) {
    std::string tmpl = (fs::temp_directory_path() / "ordev-XXXXXX.smt2").string();
    int fd = ::mkstemps(tmpl.data(), 5);
    if (fd < 0) throw SolverError("cannot create a temporary query file");
    path = tmpl;
    ::close(fd);
    std::ofstream(path) << text;
  }
  ~TempFile() {
    std::error_code ec;
    fs::remove(path, ec);
  }
};

std::atomic<long> dump_counter{0};

// --- s-expressions -------------------------------------------------------------------

struct Sexp {
  std::string atom;
  std::vector<Sexp> list;
  bool is_list = false;
};

class SexpReader {
 public:
  explicit SexpReader(const std::string& s) : s_(s) {}

  std::optional<Sexp> next() {
    skip();
    if (p_ >= s_.size()) return std::nullopt;
    return read();
  }

 private:
  const std::string& s_;
  size_t p_ = 0;

  void skip() {
    while (p_ < s_.size()) {
      if (std::isspace(static_cast<unsigned char>(s_[p_]))) {
        ++p_;
      } else if (s_[p_] == ';') {
        while (p_ < s_.size() && s_[p_] != '\n') ++p_;
      } else {
        break;
      }
    }
  }

  Sexp read() {
    skip();
    if (p_ >= s_.size()) throw SolverError("malformed solver output: unexpected end");
    Sexp out;
    if (s_[p_] == '(') {
      ++p_;
      out.is_list = true;
      for (skip(); p_ < s_.size() && s_[p_] != ')'; skip()) out.list.push_back(read());
      if (p_ >= s_.size()) throw SolverError("malformed solver output: unbalanced parenthesis");
      ++p_;
      return out;
    }
    if (s_[p_] == ')') throw SolverError("malformed solver output: stray ')'");
    if (s_[p_] == '|') {
      size_t end = s_.find('|', p_ + 1);
      if (end == std::string::npos) throw SolverError("malformed solver output: unterminated symbol");
      out.atom = s_.substr(p_ + 1, end - p_ - 1);
      p_ = end + 1;
      return out;
    }
    if (s_[p_] == '"') {
      size_t end = s_.find('"', p_ + 1);
      if (end == std::string::npos) throw SolverError("malformed solver output: unterminated string");
      out.atom = s_.substr(p_, end - p_ + 1);
      p_ = end + 1;
      return out;
    }
    size_t start = p_;
    while (p_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[p_])) && s_[p_] != '(' && s_[p_] != ')') ++p_;
    out.atom = s_.substr(start, p_ - start);
    return out;
  }
};

std::optional<Rational> value_of(const Sexp& e) {
  if (!e.is_list) {
    std::string a = e.atom;
    if (!a.empty() && a.back() == '?') a.pop_back();  // decimal approximation marker
    try {
      return parse_rational(a);
    } catch (const std::invalid_argument&) {
      throw SolverError("malformed solver value: " + e.atom);
    }
  }
  if (e.list.empty() || e.list[0].is_list) throw SolverError("malformed solver value");
  const std::string& op = e.list[0].atom;
  if (op == "root-obj") return std::nullopt;
  std::vector<Rational> args;
  for (size_t k = 1; k < e.list.size(); ++k) {
    auto v = value_of(e.list[k]);
    if (!v) return std::nullopt;
    args.push_back(*v);
  }
  if (op == "-" && args.size() == 1) return -args[0];
  if (op == "-" && args.size() == 2) return args[0] - args[1];
  if (op == "+" && !args.empty()) {
    Rational s = 0;
    for (const auto& a : args) s += a;
    return s;
  }
  if (op == "*" && !args.empty()) {
    Rational s = 1;
    for (const auto& a : args) s *= a;
    return s;
  }
  if (op == "/" && args.size() == 2) {
    if (args[1] == 0) throw SolverError("solver value divides by zero");
    return args[0] / args[1];
  }
  throw SolverError("unsupported solver value operator: " + op);
}

SolverStatus status_of(const std::string& word) {
  if (word == "sat") return SolverStatus::Sat;
  if (word == "unsat") return SolverStatus::Unsat;
  if (word == "timeout") return SolverStatus::Timeout;
  if (word == "unknown") return SolverStatus::Unknown;
  throw SolverError("malformed solver output: expected sat/unsat/unknown, got '" + word + "'");
}

struct Raw {
  std::string out;
  int code = 0;
};

Raw run(const std::string& cmd) {
  Raw r;
  FILE* p = ::popen(cmd.c_str(), "r");
  if (!p) throw SolverError("cannot start solver: " + cmd);
  char buf[4096];
  size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  int st = ::pclose(p);
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : 128 + (WIFSIGNALED(st) ? WTERMSIG(st) : 0);
  return r;
}

}  // namespace

std::map<std::string, std::optional<Rational>> parse_values(const std::string& text) {
  std::map<std::string, std::optional<Rational>> out;
  SexpReader rd(text);
  auto e = rd.next();
  if (!e || !e->is_list) throw SolverError("malformed get-value answer");
  for (const auto& pair : e->list) {
    if (!pair.is_list || pair.list.size() != 2 || pair.list[0].is_list) throw SolverError("malformed get-value entry");
    out[pair.list[0].atom] = value_of(pair.list[1]);
  }
  return out;
}

SolverRun run_solver(const std::string& script, const SolverConfig& cfg, double timeout) {
  std::string solver = find_solver(cfg.path);
  double limit = timeout > 0 ? timeout : cfg.query_timeout;
  if (limit < 0.05) limit = 0.05;
  if (!cfg.dump_dir.empty()) {
    fs::create_directories(cfg.dump_dir);
    std::ofstream(fs::path(cfg.dump_dir) / ("query-" + std::to_string(dump_counter++) + ".smt2")) << script;
  }
  TempFile file(script);
  // the wrapper is the hard limit; the solver's own soft limit usually fires first
  auto hard = std::to_string(limit + 0.5);
  std::string base = "timeout -k 0.5 " + hard + " " + shell_quote(solver);
  std::string cmd = base + solver_args(solver, limit) + " < " + shell_quote(file.path) + " 2>&1";

  auto t0 = std::chrono::steady_clock::now();
  Raw r = run(cmd);
  SolverRun out;
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out.output = r.out;
  if (r.code == 124 || r.code == 137) {
    out.status = SolverStatus::Timeout;
    return out;
  }
  if (r.code == 127 || r.code == 126) throw SolverError("cannot run solver '" + solver + "'");

  SexpReader rd(r.out);
  auto first = rd.next();
  if (!first || first->is_list) throw SolverError("malformed solver output: " + r.out.substr(0, 200));
  out.status = status_of(first->atom);
  if (out.status != SolverStatus::Sat) return out;
  auto values = rd.next();
  if (!values) return out;  // script without get-value
  if (!values->is_list || (!values->list.empty() && !values->list[0].is_list)) {
    throw SolverError("solver error after sat: " + r.out.substr(0, 200));
  }
  size_t pos = r.out.find('(');
  auto parsed = parse_values(r.out.substr(pos));
  bool irrational = false;
  for (const auto& [k, v] : parsed) {
    if (v) out.model[k] = *v;
    else irrational = true;
  }
  if (irrational && fs::path(solver).filename().string().rfind("z3", 0) == 0) {
    // ask again for decimal expansions of the algebraic values
    Raw again = run(base + solver_args(solver, limit) + " pp.decimal=true pp.decimal_precision=40 < " +
                    shell_quote(file.path) + " 2>&1");
    SexpReader rd2(again.out);
    auto st = rd2.next();
    if (st && !st->is_list && st->atom == "sat") {
      size_t p2 = again.out.find('(');
      if (p2 != std::string::npos)
        for (const auto& [k, v] : parse_values(again.out.substr(p2)))
          if (v && !out.model.count(k)) out.model[k] = *v;
    }
    out.approximate = true;
  } else if (irrational) {
    out.approximate = true;
  }
  return out;
}

}  // namespace ordev::opt

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "bsp/harness.hpp"
#include "bsp/sexpr.hpp"

using namespace bsp;

namespace {

enum Exit { kSolved = 0, kUnsolvable = 1, kTimedOut = 2, kUsage = 3 };

double env_double(const char* name, double fallback) {
  const char* v = std::getenv(name);
  if (!v || !*v) return fallback;
  try {
    return std::stod(v);
  } catch (const std::exception&) {
    std::cerr << "ignoring malformed " << name << "\n";
    return fallback;
  }
}

std::uint64_t env_seed(std::uint64_t fallback) {
  const char* v = std::getenv("BSP_SEED");
  if (!v || !*v) return fallback;
  try {
    return std::stoull(v);
  } catch (const std::exception&) {
    std::cerr << "ignoring malformed BSP_SEED\n";
    return fallback;
  }
}

Direction parse_dir(const std::string& s) {
  return s == "regress" ? Direction::kRegression : Direction::kProgression;
}

struct Common {
  std::string gen, file, dir = "progress", h = "lug:rp", mutex;
  double w = 5.0, frac = 1.0, timeout = 1200;
  std::uint64_t seed = 1;
};

void add_common(CLI::App* app, Common& c, bool search_flags) {
  app->add_option("--gen", c.gen, "generated problem, e.g. btc:3");
  app->add_option("--file", c.file, "problem file (.bsp)");
  app->add_option("--frac", c.frac, "fraction of worlds sampled for graphs")->check(CLI::Range(0.0, 1.0));
  app->add_option("--seed", c.seed, "sampling seed");
  if (!search_flags) return;
  app->add_option("--dir", c.dir, "search direction")->check(CLI::IsMember({"regress", "progress"}));
  app->add_option("--h", c.h, "heuristic");
  app->add_option("--w", c.w, "heuristic weight");
  app->add_option("--mutex", c.mutex, "mutex scheme nx|stx|dyx|fx[-sx|-ix|-cx]");
  app->add_option("--timeout", c.timeout, "time limit in seconds");
}

Problem load(const Common& c) {
  if (c.gen.empty() == c.file.empty()) throw CLI::ValidationError("give exactly one of --gen or --file");
  return c.gen.empty() ? load_problem(c.file) : generate(c.gen);
}

int cmd_solve(const Common& c, bool quiet) {
  Problem p = load(c);
  for (const std::string& w : p.warnings) std::cerr << "warning: " << w << "\n";
  ProblemContext ctx(p);
  RunConfig cfg;
  cfg.heuristic = c.h;
  cfg.dir = parse_dir(c.dir);
  cfg.weight = c.w;
  cfg.fraction = c.frac;
  cfg.seed = c.seed;
  if (!c.mutex.empty()) cfg.mutex = c.mutex;
  cfg.timeout_s = c.timeout;
  make_spec(cfg);
  if (cfg.dir == Direction::kRegression && p.has_observations())
    throw CLI::ValidationError("regression search does not support sensing actions");
  RunOutcome r = run_search(ctx, cfg);
  if (r.status == Status::kSolved && !quiet) std::cout << r.plan.to_string(p);
  if (!r.error.empty()) std::cerr << r.error << "\n";
  std::cout << format_stats(r) << "\n";
  switch (r.status) {
    case Status::kSolved: return r.valid ? kSolved : kUnsolvable;
    case Status::kUnsolvable: return kUnsolvable;
    case Status::kTimeout: return kTimedOut;
  }
  return kUnsolvable;
}

int cmd_bench(const std::string& suite, const Common& c, unsigned jobs, const std::string& out) {
  std::ifstream in(suite);
  if (!in) throw CLI::ValidationError("cannot read suite " + suite);
  std::stringstream text;
  text << in.rdbuf();
  RunConfig defaults;
  defaults.weight = c.w;
  defaults.timeout_s = c.timeout;
  defaults.fraction = c.frac;
  defaults.seed = c.seed;
  defaults.dir = parse_dir(c.dir);
  if (!c.mutex.empty()) defaults.mutex = c.mutex;
  auto rows = parse_suite(text.str(), defaults);
  auto results = run_bench(rows, jobs);
  std::ofstream file;
  if (!out.empty()) {
    file.open(out);
    if (!file) throw CLI::ValidationError("cannot write " + out);
  }
  std::ostream& o = out.empty() ? std::cout : file;
  o << csv_header() << "\n";
  for (const auto& r : results) o << csv_row(r) << "\n";
  return 0;
}

int cmd_hsnapshot(const Common& c, const std::string& at, const std::vector<std::string>& specs) {
  Problem p = load(c);
  ProblemContext ctx(p);
  const Direction d = at == "goal" ? Direction::kRegression : Direction::kProgression;
  for (const std::string& s : specs) HeuristicSpec::parse(s);
  auto rows = snapshot(ctx, d, specs.empty() ? default_snapshot_specs() : specs, c.frac, c.seed);
  for (const auto& e : rows) {
    std::cout << e.spec << ' ';
    if (e.error.empty()) std::cout << format_cost(e.value) << "\n";
    else std::cout << "error (" << e.error << ")\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"belief-space planner"};
  app.set_help_flag("--help", "print this help");
  app.require_subcommand(1);
  Common c;
  c.timeout = env_double("BSP_TIMEOUT_S", c.timeout);
  c.seed = env_seed(c.seed);

  auto* solve = app.add_subcommand("solve", "find a plan");
  add_common(solve, c, true);
  bool quiet = false;
  solve->add_flag("--quiet", quiet, "print only the stats line");

  auto* bench = app.add_subcommand("bench", "run a suite and print CSV");
  std::string suite, out;
  unsigned jobs = 1;
  bench->add_option("suite", suite, "suite file")->required();
  bench->add_option("--dir", c.dir, "default direction")->check(CLI::IsMember({"regress", "progress"}));
  bench->add_option("--w", c.w, "default weight");
  bench->add_option("--timeout", c.timeout, "default time limit in seconds");
  bench->add_option("--frac", c.frac, "fraction of worlds sampled")->check(CLI::Range(0.0, 1.0));
  bench->add_option("--seed", c.seed, "sampling seed");
  bench->add_option("--mutex", c.mutex, "mutex scheme for every row");
  bench->add_option("--jobs", jobs, "rows run in parallel")->check(CLI::PositiveNumber);
  bench->add_option("--out", out, "CSV file (default stdout)");

  auto* snap = app.add_subcommand("hsnapshot", "heuristic values at one belief");
  add_common(snap, c, false);
  std::string at = "goal";
  std::vector<std::string> specs;
  snap->add_option("--at", at, "goal: regression from the initial belief; init: progression")
      ->check(CLI::IsMember({"goal", "init"}));
  snap->add_option("--h", specs, "heuristics to report (repeatable)");

  auto* gen = app.add_subcommand("gen", "print a generated problem");
  std::string gen_name;
  gen->add_option("name", gen_name, "e.g. ring:3")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }
  try {
    if (*solve) return cmd_solve(c, quiet);
    if (*bench) return cmd_bench(suite, c, jobs, out);
    if (*snap) return cmd_hsnapshot(c, at, specs);
    if (*gen) {
      std::cout << print_problem(generate(gen_name));
      return 0;
    }
  } catch (const CLI::Error& e) {
    std::cerr << e.what() << "\n";
    return kUsage;
  } catch (const SpecError& e) {
    std::cerr << e.what() << "\n";
    return kUsage;
  } catch (const bsp::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kUsage;
  } catch (const ModelError& e) {
    std::cerr << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUnsolvable;
  }
  return kUsage;
}

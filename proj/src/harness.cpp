#include "bsp/harness.hpp"

#include <atomic>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <thread>

namespace bsp {

Problem load_any(const std::string& name) {
  if (name.find('/') != std::string::npos || name.ends_with(".bsp")) return load_problem(name);
  return generate(name);
}

HeuristicSpec make_spec(const RunConfig& cfg) {
  HeuristicSpec h = HeuristicSpec::parse(cfg.heuristic);
  if (cfg.mutex) {
    if (h.substrate == Substrate::kNone) throw SpecError("mutexes need a planning graph");
    try {
      h.mutex = MutexScheme::parse(*cfg.mutex);
    } catch (const std::invalid_argument& e) {
      throw SpecError(e.what());
    }
    h.mutex_given = true;
  }
  h.fraction = cfg.fraction;
  h.seed = cfg.seed;
  if (!(cfg.fraction > 0 && cfg.fraction <= 1)) throw SpecError("fraction must lie in (0, 1]");
  return h;
}

RunOutcome run_search(const ProblemContext& ctx, const RunConfig& cfg,
                      std::function<void(const std::string&, Cost)> trace) {
  RunOutcome out;
  HeuristicEvaluator h(ctx, make_spec(cfg), cfg.dir, Deadline(cfg.timeout_s));
  SearchOptions opt;
  opt.weight = cfg.weight;
  opt.deadline = Deadline(cfg.timeout_s);
  opt.trace = std::move(trace);
  SearchResult r = cfg.dir == Direction::kRegression ? astar_regress(ctx, h, opt)
                                                     : aostar_progress(ctx, h, opt);
  out.status = r.status;
  out.stats = r.stats;
  if (r.status == Status::kSolved) {
    out.plan = std::move(r.plan);
    Validation v = validate(ctx, out.plan);
    out.valid = v.valid;
    out.plan_len = v.valid ? v.max_length : out.plan.depth();
    if (!v.valid) out.error = "plan failed validation: " + v.message;
  }
  return out;
}

namespace {

std::string fixed(double v) {
  std::ostringstream o;
  o << std::fixed << std::setprecision(3) << v;
  return o.str();
}

std::string status_text(const RunOutcome& r) {
  if (!r.error.empty()) return r.status == Status::kSolved ? "invalid" : "error";
  return status_name(r.status);
}

}  // namespace

std::string format_stats(const RunOutcome& r) {
  std::ostringstream o;
  o << "stats expanded=" << r.stats.expanded << " generated=" << r.stats.generated
    << " heuristic_ms=" << fixed(r.stats.heuristic_ms) << " search_ms=" << fixed(r.stats.search_ms)
    << " total_ms=" << fixed(r.stats.total_ms) << " plan_len=";
  if (r.plan_len >= 0) o << r.plan_len;
  o << " status=" << status_text(r);
  return o.str();
}

std::optional<StatsLine> parse_stats(const std::string& line) {
  std::istringstream in(line);
  std::string word;
  if (!(in >> word) || word != "stats") return std::nullopt;
  StatsLine s;
  int seen = 0;
  try {
    while (in >> word) {
      auto eq = word.find('=');
      if (eq == std::string::npos) return std::nullopt;
      std::string k = word.substr(0, eq), v = word.substr(eq + 1);
      if (k == "expanded") s.expanded = std::stoull(v);
      else if (k == "generated") s.generated = std::stoull(v);
      else if (k == "heuristic_ms") s.heuristic_ms = std::stod(v);
      else if (k == "search_ms") s.search_ms = std::stod(v);
      else if (k == "total_ms") s.total_ms = std::stod(v);
      else if (k == "plan_len") s.plan_len = v.empty() ? -1 : std::stoi(v);
      else if (k == "status") s.status = v;
      else return std::nullopt;
      ++seen;
    }
  } catch (const std::exception&) {
    return std::nullopt;
  }
  if (seen != 7) return std::nullopt;
  return s;
}

// ---------------------------------------------------------------- bench

namespace {

std::vector<std::string> expand_problem(const std::string& p) {
  auto colon = p.find(':');
  auto dots = p.find("..");
  if (colon == std::string::npos || dots == std::string::npos || dots < colon) return {p};
  int lo = std::stoi(p.substr(colon + 1, dots - colon - 1));
  int hi = std::stoi(p.substr(dots + 2));
  std::vector<std::string> out;
  for (int n = lo; n <= hi; ++n) out.push_back(p.substr(0, colon + 1) + std::to_string(n));
  return out;
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

}  // namespace

std::vector<BenchRow> parse_suite(const std::string& text, const RunConfig& defaults) {
  std::vector<BenchRow> rows;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::vector<std::string> f;
    for (std::string w; ls >> w;) f.push_back(w);
    if (f.empty()) continue;
    if (f.size() < 2 || f.size() > 5)
      throw std::invalid_argument("suite line " + std::to_string(lineno) +
                                  ": expected problem spec [weight] [timeout] [dir]");
    RunConfig cfg = defaults;
    try {
      if (f.size() > 2) cfg.weight = std::stod(f[2]);
      if (f.size() > 3) cfg.timeout_s = std::stod(f[3]);
    } catch (const std::exception&) {
      throw std::invalid_argument("suite line " + std::to_string(lineno) + ": bad number");
    }
    if (f.size() > 4) {
      if (f[4] == "regress") cfg.dir = Direction::kRegression;
      else if (f[4] == "progress") cfg.dir = Direction::kProgression;
      else throw std::invalid_argument("suite line " + std::to_string(lineno) + ": bad direction");
    }
    for (const std::string& p : expand_problem(f[0]))
      for (const std::string& s : split_commas(f[1])) {
        RunConfig c = cfg;
        c.heuristic = s;
        make_spec(c);  // reject bad specs up front
        rows.push_back({p, c});
      }
  }
  return rows;
}

std::vector<BenchResult> run_bench(const std::vector<BenchRow>& rows, unsigned jobs) {
  std::vector<BenchResult> out(rows.size());
  auto one = [&](std::size_t i) {
    out[i].row = rows[i];
    RunOutcome& o = out[i].outcome;
    try {
      Problem p = load_any(rows[i].problem);
      ProblemContext ctx(p);
      o = run_search(ctx, rows[i].cfg);
    } catch (const std::exception& e) {
      o = RunOutcome{};
      o.error = e.what();
    }
  };
  if (jobs <= 1) {
    for (std::size_t i = 0; i < rows.size(); ++i) one(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < jobs; ++t)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next++) < rows.size();) one(i);
    });
  for (auto& t : pool) t.join();
  return out;
}

std::string csv_header() { return "problem,spec,total_ms,heuristic_ms,expanded,plan_len,status"; }

std::string csv_row(const BenchResult& r) {
  const RunOutcome& o = r.outcome;
  std::ostringstream s;
  s << r.row.problem << ',' << r.row.cfg.heuristic << ',' << fixed(o.stats.total_ms) << ','
    << fixed(o.stats.heuristic_ms) << ',' << o.stats.expanded << ',';
  if (o.status == Status::kSolved && o.plan_len >= 0) s << o.plan_len;
  s << ',' << status_text(o);
  return s.str();
}

// ---------------------------------------------------------------- snapshot

std::vector<std::string> default_snapshot_specs() {
  return {"card",          "sg:max",          "sg:sum",      "sg:level",    "sg:rp",
          "mg:max:max",    "mg:sum:sum",      "mg:level:max", "mg:rp:max",  "mg:rp:sum",
          "mg:rpu",        "lug:max",         "lug:sum",     "lug:level",   "lug:level:fx-sx",
          "lug:level:fx-cx",  "lug:rp"};
}

std::string format_cost(Cost c) {
  if (c == kInfinity) return "inf";
  std::ostringstream o;
  if (c == std::floor(c)) o << static_cast<long long>(c);
  else o << c;
  return o.str();
}

std::vector<SnapshotEntry> snapshot(const ProblemContext& ctx, Direction at,
                                    const std::vector<std::string>& specs, double fraction,
                                    std::uint64_t seed) {
  std::vector<SnapshotEntry> out;
  for (const std::string& s : specs) {
    SnapshotEntry e;
    e.spec = s;
    try {
      HeuristicSpec h = HeuristicSpec::parse(s);
      h.fraction = fraction;
      h.seed = seed;
      HeuristicEvaluator ev(ctx, h, at);
      e.value = ev(at == Direction::kRegression ? ctx.goal() : ctx.init());
    } catch (const std::exception& x) {
      e.error = x.what();
    }
    out.push_back(e);
  }
  SnapshotEntry star;
  star.spec = "h*";
  try {
    auto v = bfs_oracle(ctx);
    star.value = v ? *v : kInfinity;
  } catch (const std::exception& x) {
    star.error = x.what();
  }
  out.push_back(star);
  return out;
}

}  // namespace bsp

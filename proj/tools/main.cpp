#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dbmk/bead_sweep.hpp"
#include "dbmk/correlation.hpp"
#include "dbmk/errors.hpp"
#include "dbmk/eynard_mehta.hpp"
#include "dbmk/kernels.hpp"
#include "dbmk/monte_carlo.hpp"
#include "table.hpp"

namespace {

using dbmk::DomainError;
using dbmk::cli::Cell;
using dbmk::cli::Table;
using dbmk::kernels::SpaceTimePoint;

constexpr const char* kVersion = "0.1.0";

struct Common {
  std::string output;
  std::string format = "csv";
  std::optional<std::uint64_t> seed;
  int threads = 0;
};

// ---- parsing helpers ------------------------------------------------------

std::vector<std::string> split(const std::string& s, char sep = ',') {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.push_back("");
  return out;
}

double parse_double(const std::string& s, const std::string& param) {
  std::string t = s;
  t.erase(0, t.find_first_not_of(' '));
  t.erase(t.find_last_not_of(' ') + 1);
  if (t == "inf" || t == "+inf") return std::numeric_limits<double>::infinity();
  if (t == "-inf") return -std::numeric_limits<double>::infinity();
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &pos);
  } catch (const std::exception&) {
    throw DomainError("'" + s + "' is not a number", param);
  }
  if (pos != t.size() || std::isnan(v)) throw DomainError("'" + s + "' is not a number", param);
  return v;
}

long parse_long(const std::string& s, const std::string& param) {
  std::size_t pos = 0;
  long v = 0;
  try {
    v = std::stol(s, &pos);
  } catch (const std::exception&) {
    throw DomainError("'" + s + "' is not an integer", param);
  }
  if (pos != s.size()) throw DomainError("'" + s + "' is not an integer", param);
  return v;
}

std::vector<double> parse_doubles(const std::string& s, const std::string& param) {
  std::vector<double> out;
  for (const auto& part : split(s)) out.push_back(parse_double(part, param));
  if (out.empty()) throw DomainError("empty list", param);
  return out;
}

std::vector<long> parse_longs(const std::string& s, const std::string& param) {
  std::vector<long> out;
  for (const auto& part : split(s)) out.push_back(parse_long(part, param));
  if (out.empty()) throw DomainError("empty list", param);
  return out;
}

SpaceTimePoint parse_point(const std::string& s, const std::string& param) {
  auto parts = split(s);
  if (parts.size() != 3) throw DomainError("point must be level,time,position", param);
  SpaceTimePoint p;
  p.n = static_cast<int>(parse_long(parts[0], param));
  p.t = parse_double(parts[1], param);
  p.x = parse_double(parts[2], param);
  if (!std::isfinite(p.t) || !std::isfinite(p.x)) throw DomainError("point must be finite", param);
  return p;
}

std::string point_text(const SpaceTimePoint& p) {
  return std::to_string(p.n) + "," + dbmk::cli::format_double(p.t) + "," +
         dbmk::cli::format_double(p.x);
}

// ---- output ---------------------------------------------------------------

void add_common(CLI::App* sub, Common& c, bool with_seed) {
  sub->add_option("--output,-o", c.output, "Output file (default: stdout or $DBMK_OUTPUT_DIR)");
  sub->add_option("--format", c.format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  if (with_seed) {
    sub->add_option("--seed", c.seed, "RNG seed");
    sub->add_option("--threads", c.threads, "Worker threads (0: all cores)")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
  }
}

nlohmann::ordered_json config_echo(const CLI::App* sub) {
  nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
  std::istringstream in(sub->config_to_str(true, false));
  std::string line;
  while (std::getline(in, line)) {
    auto eq = line.find('=');
    if (line.empty() || line[0] == '[' || line[0] == '#' || eq == std::string::npos) continue;
    std::string key = line.substr(0, eq), value = line.substr(eq + 1);
    if (key == "output") continue;  // destination is not part of the run
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    cfg[key] = value;
  }
  return cfg;
}

void emit(const Table& t, const Common& c, const std::string& command) {
  std::string path = c.output;
  const char* env = std::getenv("DBMK_OUTPUT_DIR");
  namespace fs = std::filesystem;
  if (env && *env) {
    if (path.empty()) {
      path = (fs::path(env) / (command + "." + c.format)).string();
    } else if (fs::path(path).is_relative()) {
      path = (fs::path(env) / path).string();
    }
  }
  if (path.empty()) {
    c.format == "json" ? dbmk::cli::write_json(std::cout, t) : dbmk::cli::write_csv(std::cout, t);
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw dbmk::IoError("cannot open output file '" + path + "'", "output");
  c.format == "json" ? dbmk::cli::write_json(out, t) : dbmk::cli::write_csv(out, t);
  out.close();
  if (!out) throw dbmk::IoError("failed writing '" + path + "'", "output");
}

Table make_table(const std::string& command, const CLI::App* sub, const Common& c,
                 std::vector<std::string> columns) {
  Table t;
  t.columns = std::move(columns);
  t.metadata["tool"] = "dbmk";
  t.metadata["version"] = kVersion;
  t.metadata["command"] = command;
  t.metadata["seed"] = c.seed ? nlohmann::ordered_json(*c.seed) : nlohmann::ordered_json(nullptr);
  t.metadata["config"] = config_echo(sub);
  return t;
}

// ---- commands ---------------------------------------------------------------

struct KernelArgs {
  std::string family = "dbm";
  std::vector<std::string> points, points2;
  double a = 0.0;
  std::string representation = "auto";
  std::string method = "auto";
  int l_max = 500;
  double term_tol = 1e-14;
  int nodes = 64;
};

dbmk::kernels::KernelEvalConfig eval_config(const KernelArgs& k) {
  using namespace dbmk::kernels;
  KernelEvalConfig cfg;
  cfg.representation = k.representation == "series"    ? Representation::Series
                       : k.representation == "contour" ? Representation::Contour
                                                       : Representation::Auto;
  cfg.contour_method = k.method == "quadrature" ? ContourMethod::Quadrature
                       : k.method == "residue"  ? ContourMethod::Residue
                                                : ContourMethod::Auto;
  cfg.l_max = k.l_max;
  cfg.term_tol = k.term_tol;
  return cfg;
}

void run_kernel(const KernelArgs& k, const Common& c, const CLI::App* sub) {
  using namespace dbmk::kernels;
  auto family = dbmk::corr::parse_family(k.family);
  std::vector<SpaceTimePoint> ps, qs;
  for (const auto& s : k.points) ps.push_back(parse_point(s, "point"));
  for (const auto& s : k.points2) qs.push_back(parse_point(s, "point2"));
  KernelEvalConfig cfg = eval_config(k);
  std::optional<BeadParam> bead;
  if (family == dbmk::corr::Family::Bead) bead.emplace(k.a);
  Table t = make_table("kernel", sub, c,
                       {"family", "n", "t", "x", "n2", "t2", "x2", "value", "representation",
                        "method", "terms", "error_estimate"});
  for (const auto& p : ps) {
    for (const auto& q : qs) {
      KernelValue v;
      std::string rep, method = "none";
      switch (family) {
        case dbmk::corr::Family::DBM: v = eval_dbm(p, q, cfg); break;
        case dbmk::corr::Family::Warren: v = eval_warren(p, q, cfg); break;
        case dbmk::corr::Family::ADBM: v = eval_adbm(p, q, cfg); break;
        case dbmk::corr::Family::Bead:
          v.value = kernel_bead(*bead, p, q, k.nodes);
          v.terms = k.nodes;
          break;
      }
      if (family == dbmk::corr::Family::Bead) {
        rep = "segment";
      } else {
        rep = to_string(v.used);
        if (v.used == Representation::Contour) method = to_string(v.method);
      }
      t.add({k.family, std::int64_t{p.n}, p.t, p.x, std::int64_t{q.n}, q.t, q.x, v.value, rep, method,
             std::int64_t{v.terms}, v.error_estimate});
    }
  }
  emit(t, c, "kernel");
}

struct CompareArgs {
  std::string family = "dbm";
  std::string grid;
  std::string times = "0.1,0.5,1,2";
  std::vector<std::string> points, points2;
  double tol = 1e-7;
};

void run_compare(const CompareArgs& a, const Common& c, const CLI::App* sub) {
  using namespace dbmk::kernels;
  const bool warren = a.family == "warren";
  std::vector<PointPair> cases;
  if (!a.points.empty() || !a.points2.empty()) {
    if (!a.grid.empty()) throw DomainError("use either --grid or --point/--point2", "grid");
    if (a.points.size() != a.points2.size()) {
      throw DomainError("--point and --point2 must be given the same number of times", "point2");
    }
    for (std::size_t i = 0; i < a.points.size(); ++i) {
      cases.push_back({parse_point(a.points[i], "point"), parse_point(a.points2[i], "point2")});
    }
  } else {
    if (!a.grid.empty() && a.grid != "default") throw DomainError("unknown grid '" + a.grid + "'", "grid");
    auto times = parse_doubles(a.times, "times");
    for (double t : times) {
      if (!std::isfinite(t) || (warren ? !(t > 0.0) : !(t >= 0.0))) {
        throw DomainError("grid time " + dbmk::cli::format_double(t) + " is outside the " + a.family +
                              " domain",
                          "times");
      }
    }
    cases = representation_grid(times);
  }
  // Validate every case before evaluating any.
  for (const auto& pc : cases) {
    for (const auto* p : {&pc.p, &pc.pp}) {
      if (p->n < 1) throw DomainError("level must be >= 1", "n");
      if (warren ? !(p->t > 0.0) : !(p->t >= 0.0)) {
        throw DomainError("time " + dbmk::cli::format_double(p->t) + " is outside the " + a.family +
                              " domain",
                          "t");
      }
    }
    if (spacelike_compare(pc.p, pc.pp) == Order::Less && pc.pp.t < pc.p.t) {
      throw DomainError("Less-ordered pair with t > t' is not on a space-like path", "t");
    }
  }
  KernelEvalConfig s, q, r;
  s.representation = Representation::Series;
  q.representation = r.representation = Representation::Contour;
  q.contour_method = ContourMethod::Quadrature;
  r.contour_method = ContourMethod::Residue;
  auto eval = [&](const PointPair& pc, const KernelEvalConfig& cfg) {
    return warren ? eval_warren(pc.p, pc.pp, cfg) : eval_dbm(pc.p, pc.pp, cfg);
  };
  Table t = make_table("compare-reps", sub, c,
                       {"case", "n", "t", "x", "n2", "t2", "x2", "order", "series", "series_used",
                        "contour_quadrature", "contour_residue", "rel_diff", "pass"});
  bool all = true;
  double worst = 0.0;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto& pc = cases[i];
    KernelValue vs = eval(pc, s), vq = eval(pc, q), vr = eval(pc, r);
    double scale = std::max(std::abs(vs.value), std::numeric_limits<double>::min());
    double rel = std::max(std::abs(vs.value - vq.value), std::abs(vs.value - vr.value)) / scale;
    bool pass = rel <= a.tol;
    all = all && pass;
    worst = std::max(worst, rel);
    bool less = spacelike_compare(pc.p, pc.pp) == Order::Less;
    t.add({std::int64_t(i), std::int64_t{pc.p.n}, pc.p.t, pc.p.x, std::int64_t{pc.pp.n}, pc.pp.t,
           pc.pp.x, std::string(less ? "less" : "geq"), vs.value, to_string(vs.used), vq.value,
           vr.value, rel, pass});
  }
  t.metadata["cases"] = cases.size();
  t.metadata["max_rel_diff"] = worst;
  t.metadata["all_pass"] = all;
  emit(t, c, "compare-reps");
}

struct CorrArgs {
  std::string family = "dbm";
  std::vector<std::string> points;
  double a = 0.0;
};

void run_corr(const CorrArgs& a, const Common& c, const CLI::App* sub) {
  dbmk::corr::CorrelationQuery q;
  q.kernel = dbmk::corr::make_kernel(dbmk::corr::parse_family(a.family), {}, a.a);
  std::string pts;
  for (const auto& s : a.points) {
    q.points.push_back(parse_point(s, "point"));
    pts += (pts.empty() ? "" : ";") + point_text(q.points.back());
  }
  auto r = dbmk::corr::correlation_density(q);
  Table t = make_table("corr", sub, c, {"family", "k", "points", "value", "raw", "clamped"});
  t.add({a.family, std::int64_t(q.points.size()), pts, r.value, r.raw, r.clamped});
  emit(t, c, "corr");
}

struct BeadArgs {
  double a = 0.0;
  std::string levels = "0,0";
  double dt = 0.0;
  double dx = 0.0;
  std::string sizes = "50,100,200,400";
  int centers = 49;
};

void run_bead(const BeadArgs& a, const Common& c, const CLI::App* sub) {
  dbmk::kernels::BeadParam bp(a.a);
  auto lv = parse_longs(a.levels, "levels");
  if (lv.size() != 2) throw DomainError("levels must be n,n'", "levels");
  if (!std::isfinite(a.dt)) throw DomainError("dt must be finite", "dt");
  if (!std::isfinite(a.dx)) throw DomainError("dx must be finite", "dx");
  dbmk::bead::SweepConfig cfg;
  cfg.a = a.a;
  cfg.n = static_cast<int>(lv[0]);
  cfg.np = static_cast<int>(lv[1]);
  cfg.t = 0.0;
  cfg.tp = a.dt;
  cfg.x = a.dx;
  cfg.xp = 0.0;
  cfg.sizes.clear();
  for (long n : parse_longs(a.sizes, "N")) cfg.sizes.push_back(static_cast<int>(n));
  cfg.centers = a.centers;
  auto rows = dbmk::bead::bead_limit_sweep(cfg);
  Table t = make_table("bead-limit", sub, c, {"N", "scaled", "limit", "error", "pointwise_error"});
  auto up = bp.u_plus(), um = bp.u_minus();
  t.metadata["u_plus"] = {up.real(), up.imag()};
  t.metadata["u_minus"] = {um.real(), um.imag()};
  t.metadata["window_half_width"] = dbmk::bead::window_half_width(a.a);
  for (const auto& r : rows) {
    t.add({std::int64_t{r.size}, r.scaled, r.limit, r.error, r.pointwise_error});
  }
  emit(t, c, "bead-limit");
}

struct OracleArgs {
  std::string levels = "2,1";
  std::string times = "0.5,0.5";
  std::string grid = "-5,5,200";
  double u = -8.0;
  std::string family = "ou";
};

void run_oracle(const OracleArgs& a, const Common& c, const CLI::App* sub) {
  using namespace dbmk::em;
  PathDescriptor path;
  for (long n : parse_longs(a.levels, "levels")) path.levels.push_back(static_cast<int>(n));
  path.times = parse_doubles(a.times, "times");
  auto g = parse_doubles(a.grid, "grid");
  if (g.size() != 3 || g[2] != std::floor(g[2])) throw DomainError("grid must be lo,hi,points", "grid");
  Grid grid = Grid::uniform(g[0], g[1], static_cast<int>(g[2]));
  OracleFamily fam;
  if (a.family == "ou") {
    fam = OracleFamily::OU;
  } else if (a.family == "warren") {
    fam = OracleFamily::Warren;
  } else {
    throw DomainError("family must be ou or warren", "family");
  }
  DiscreteKernel k = discretized_minor_kernel(path, grid, a.u, fam);
  Table t = make_table("oracle", sub, c, {"index", "level", "time", "x", "rho1", "analytic", "abs_error"});
  double worst = 0.0;
  for (std::size_t m = 0; m < path.levels.size(); ++m) {
    auto rho = k.rho1(static_cast<int>(m));
    for (std::size_t i = 0; i < grid.points.size(); ++i) {
      SpaceTimePoint p{path.levels[m], path.times[m], grid.points[i]};
      double an = fam == OracleFamily::OU ? dbmk::kernels::kernel_dbm(p, p)
                                          : dbmk::kernels::kernel_warren(p, p);
      double err = std::abs(rho[i] - an);
      worst = std::max(worst, err);
      t.add({std::int64_t(m), std::int64_t{path.levels[m]}, path.times[m], grid.points[i], rho[i], an, err});
    }
  }
  t.metadata["condition_estimate"] = k.condition_estimate;
  t.metadata["max_abs_error"] = worst;
  emit(t, c, "oracle");
}

struct SimArgs {
  std::string process = "dbm";
  int n = 2;
  std::string times = "1";
  long paths = 10;
  double euler_step = 1e-3;
  std::string histogram;
  std::string edges = "-4,4,40";
};

void run_simulate(const SimArgs& a, const Common& c, const CLI::App* sub) {
  using namespace dbmk::mc;
  Process proc;
  if (a.process == "dbm") {
    proc = Process::DBM;
  } else if (a.process == "warren") {
    proc = Process::Warren;
  } else {
    throw DomainError("process must be dbm or warren", "process");
  }
  SimConfig cfg;
  cfg.n = a.n;
  cfg.times = parse_doubles(a.times, "times");
  cfg.paths = a.paths;
  cfg.seed = c.seed.value_or(0);
  cfg.euler_step = a.euler_step;
  cfg.threads = c.threads;
  cfg.validate(proc);
  if (a.histogram.empty()) {
    auto recs = observation_records(proc, cfg);
    Table t = make_table("simulate", sub, c, {"path_id", "level", "time", "index", "position"});
    for (const auto& r : recs) {
      t.add({std::int64_t{r.path_id}, std::int64_t{r.level}, r.time, std::int64_t{r.index}, r.position});
    }
    t.metadata["seed"] = cfg.seed;
    emit(t, c, "simulate");
    return;
  }
  auto hp = split(a.histogram);
  if (hp.size() != 2) throw DomainError("histogram must be level,time", "histogram");
  int level = static_cast<int>(parse_long(hp[0], "histogram"));
  double time = parse_double(hp[1], "histogram");
  auto e = parse_doubles(a.edges, "edges");
  if (e.size() != 3 || !(e[1] > e[0]) || e[2] < 1 || e[2] != std::floor(e[2])) {
    throw DomainError("edges must be lo,hi,bins", "edges");
  }
  std::vector<double> edges;
  int bins = static_cast<int>(e[2]);
  for (int i = 0; i <= bins; ++i) edges.push_back(e[0] + (e[1] - e[0]) * i / bins);
  auto h = histogram(proc, cfg, level, time, edges);
  Table t = make_table("simulate", sub, c,
                       {"level", "time", "bin_lo", "bin_hi", "count", "density", "standard_error"});
  for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
    t.add({std::int64_t{level}, time, edges[b], edges[b + 1], static_cast<std::int64_t>(h.counts[b]),
           h.density(b), h.standard_error(b)});
  }
  t.metadata["seed"] = cfg.seed;
  emit(t, c, "simulate");
}

struct GapArgs {
  int level = 1;
  double time = 0.0;
  std::string interval = "0,inf";
  int nodes = 40;
  std::string family = "dbm";
};

void run_gap(const GapArgs& a, const Common& c, const CLI::App* sub) {
  auto iv = parse_doubles(a.interval, "interval");
  if (iv.size() != 2) throw DomainError("interval must be a,b", "interval");
  dbmk::corr::GapFamily fam;
  if (a.family == "dbm") {
    fam = dbmk::corr::GapFamily::DBM;
  } else if (a.family == "warren") {
    fam = dbmk::corr::GapFamily::Warren;
  } else {
    throw DomainError("family must be dbm or warren", "family");
  }
  double p = dbmk::corr::gap_probability(a.level, a.time, iv[0], iv[1], a.nodes, fam);
  Table t = make_table("gap", sub, c, {"level", "time", "a", "b", "nodes", "probability"});
  t.add({std::int64_t{a.level}, a.time, iv[0], iv[1], std::int64_t{a.nodes}, p});
  emit(t, c, "gap");
}

// ---- errors -----------------------------------------------------------------

std::string kind_name(dbmk::ErrorKind k) {
  switch (k) {
    case dbmk::ErrorKind::Validation: return "validation";
    case dbmk::ErrorKind::Convergence: return "convergence";
    case dbmk::ErrorKind::Conditioning: return "conditioning";
    case dbmk::ErrorKind::Io: return "io";
  }
  return "internal";
}

int report(const std::string& kind, int code, const std::string& message,
           const std::string& parameter, nlohmann::ordered_json extra = {}) {
  nlohmann::ordered_json e;
  e["kind"] = kind;
  e["exit_code"] = code;
  e["message"] = message;
  e["parameter"] = parameter.empty() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(parameter);
  for (auto& [k, v] : extra.items()) e[k] = v;
  nlohmann::ordered_json j;
  j["error"] = e;
  std::cerr << j.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dyson Brownian minor process kernels, oracles and simulations"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  Common common;

  KernelArgs ka;
  auto* kernel = app.add_subcommand("kernel", "Evaluate a correlation kernel");
  kernel->add_option("--family", ka.family)->check(CLI::IsMember({"dbm", "warren", "bead", "adbm"}))->capture_default_str();
  kernel->add_option("--point", ka.points, "level,time,position (repeatable)")->required();
  kernel->add_option("--point2", ka.points2, "level,time,position (repeatable)")->required();
  kernel->add_option("--a", ka.a, "Bead parameter")->capture_default_str();
  kernel->add_option("--representation", ka.representation)->check(CLI::IsMember({"auto", "series", "contour"}))->capture_default_str();
  kernel->add_option("--method", ka.method, "Contour method")->check(CLI::IsMember({"auto", "quadrature", "residue"}))->capture_default_str();
  kernel->add_option("--l-max", ka.l_max, "Series term cap")->check(CLI::PositiveNumber)->capture_default_str();
  kernel->add_option("--term-tol", ka.term_tol, "Series tail tolerance")->check(CLI::PositiveNumber)->capture_default_str();
  kernel->add_option("--nodes", ka.nodes, "Bead segment nodes")->check(CLI::Range(4, 4096))->capture_default_str();
  add_common(kernel, common, false);

  CompareArgs ca;
  auto* compare = app.add_subcommand("compare-reps", "Series versus contour representations");
  compare->add_option("--family", ca.family)->check(CLI::IsMember({"dbm", "warren"}))->capture_default_str();
  compare->add_option("--grid", ca.grid, "Case grid (default)");
  compare->add_option("--times", ca.times, "Time set of the case grid")->capture_default_str();
  compare->add_option("--point", ca.points, "level,time,position (repeatable)");
  compare->add_option("--point2", ca.points2, "level,time,position (repeatable)");
  compare->add_option("--tol", ca.tol, "Relative tolerance")->check(CLI::PositiveNumber)->capture_default_str();
  add_common(compare, common, false);

  CorrArgs ra;
  auto* corr = app.add_subcommand("corr", "Correlation density det[K(p_i, p_j)]");
  corr->add_option("--family", ra.family)->check(CLI::IsMember({"dbm", "warren", "bead", "adbm"}))->capture_default_str();
  corr->add_option("--point", ra.points, "level,time,position (repeatable)")->required();
  corr->add_option("--a", ra.a, "Bead parameter")->capture_default_str();
  add_common(corr, common, false);

  BeadArgs ba;
  auto* bead = app.add_subcommand("bead-limit", "Bulk scaling limit sweep");
  bead->add_option("--a", ba.a, "Bead parameter in (-1, 1)")->required();
  bead->add_option("--levels", ba.levels, "Relative levels n,n'")->capture_default_str();
  bead->add_option("--dt", ba.dt, "t' - t")->capture_default_str();
  bead->add_option("--dx", ba.dx, "x - x'")->capture_default_str();
  bead->add_option("--N", ba.sizes, "Increasing matrix sizes")->capture_default_str();
  bead->add_option("--centers", ba.centers, "Window centers for the error")->check(CLI::PositiveNumber)->capture_default_str();
  add_common(bead, common, false);

  OracleArgs oa;
  auto* oracle = app.add_subcommand("oracle", "Discrete Eynard-Mehta oracle");
  oracle->add_option("--levels", oa.levels, "Path levels")->capture_default_str();
  oracle->add_option("--times", oa.times, "Path times")->capture_default_str();
  oracle->add_option("--grid", oa.grid, "lo,hi,points")->capture_default_str();
  oracle->add_option("--u", oa.u, "Virtual particle position")->capture_default_str();
  oracle->add_option("--family", oa.family)->check(CLI::IsMember({"ou", "warren"}))->capture_default_str();
  add_common(oracle, common, false);

  SimArgs sa;
  auto* sim = app.add_subcommand("simulate", "Monte Carlo simulation");
  sim->add_option("--process", sa.process)->check(CLI::IsMember({"dbm", "warren"}))->capture_default_str();
  sim->add_option("--N", sa.n, "Matrix size / levels")->check(CLI::PositiveNumber)->capture_default_str();
  sim->add_option("--times", sa.times, "Observation times")->capture_default_str();
  sim->add_option("--paths", sa.paths)->check(CLI::PositiveNumber)->capture_default_str();
  sim->add_option("--euler-step", sa.euler_step)->check(CLI::PositiveNumber)->capture_default_str();
  sim->add_option("--histogram", sa.histogram, "level,time: histogram instead of records");
  sim->add_option("--edges", sa.edges, "lo,hi,bins")->capture_default_str();
  add_common(sim, common, true);

  GapArgs ga;
  auto* gap = app.add_subcommand("gap", "Gap probability on a fixed slice");
  gap->add_option("--level", ga.level)->capture_default_str();
  gap->add_option("--time", ga.time)->capture_default_str();
  gap->add_option("--interval", ga.interval, "a,b (inf allowed)")->capture_default_str();
  gap->add_option("--nodes", ga.nodes)->capture_default_str();
  gap->add_option("--family", ga.family)->check(CLI::IsMember({"dbm", "warren"}))->capture_default_str();
  add_common(gap, common, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report("validation", 2, e.what(), "");
  }

  try {
    if (kernel->parsed()) run_kernel(ka, common, kernel);
    if (compare->parsed()) run_compare(ca, common, compare);
    if (corr->parsed()) run_corr(ra, common, corr);
    if (bead->parsed()) run_bead(ba, common, bead);
    if (oracle->parsed()) run_oracle(oa, common, oracle);
    if (sim->parsed()) run_simulate(sa, common, sim);
    if (gap->parsed()) run_gap(ga, common, gap);
  } catch (const dbmk::ConvergenceError& e) {
    return report("convergence", e.exit_code(), e.what(), e.parameter(),
                  {{"partial_sum", e.partial_sum()}, {"tail_estimate", e.tail_estimate()}});
  } catch (const dbmk::ConditioningError& e) {
    return report("conditioning", e.exit_code(), e.what(), e.parameter(),
                  {{"condition_estimate", e.condition_estimate()}});
  } catch (const dbmk::Error& e) {
    return report(kind_name(e.kind()), e.exit_code(), e.what(), e.parameter());
  } catch (const std::exception& e) {
    return report("internal", 1, e.what(), "");
  }
  return 0;
}

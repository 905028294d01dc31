#include "weylspec/cli/run.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "weylspec/eigen/eigen.hpp"
#include "weylspec/geometry/geometry.hpp"
#include "weylspec/io/report.hpp"
#include "weylspec/numerics/quadrature.hpp"
#include "weylspec/warp/model.hpp"
#include "weylspec/weyl/weyl.hpp"

namespace weylspec::cli {

using nlohmann::json;

namespace {

const std::set<std::string> kCommands = {"hypotheses", "weyl", "weyl-zero", "eigen", "appendix", "horoball"};

/// Typed access to one JSON object with key-path error messages.
class Block {
 public:
  Block(const json& doc, std::string path, std::set<std::string> allowed) : doc_(doc), path_(std::move(path)) {
    if (!doc_.is_object()) throw ConfigError(where() + "expected an object");
    for (auto it = doc_.begin(); it != doc_.end(); ++it) {
      if (!allowed.count(it.key())) throw ConfigError(where() + "unknown key '" + it.key() + "'");
    }
  }

  bool has(const std::string& key) const { return doc_.contains(key); }
  const json& raw(const std::string& key) const { return doc_.at(key); }
  std::string path(const std::string& key) const { return path_ + "/" + key; }

  template <typename T>
  T get(const std::string& key, std::optional<T> fallback = std::nullopt) const {
    if (!doc_.contains(key)) {
      if (fallback) return *fallback;
      throw ConfigError(where() + "missing key '" + key + "'");
    }
    try {
      return doc_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError("config " + path(key) + ": " + e.what());
    }
  }

  Block sub(const std::string& key, std::set<std::string> allowed) const {
    static const json empty = json::object();
    return Block(doc_.contains(key) ? doc_.at(key) : empty, path(key), std::move(allowed));
  }

 private:
  std::string where() const { return "config " + (path_.empty() ? std::string("/") : path_) + ": "; }

  const json& doc_;
  std::string path_;
};

warp::ManifoldModel model_of(const Block& b, const std::string& key = "model") {
  try {
    const json& m = b.raw(key);
    if (m.is_string()) return warp::builtin_model(m.get<std::string>());
    return warp::model_from_json(m);
  } catch (const json::exception& e) {
    throw ConfigError("config " + b.path(key) + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError("config " + b.path(key) + ": " + e.what());
  }
}

numerics::QuadratureSpec quadrature_of(const Block& b) {
  const Block q = b.sub("quadrature", {"abs_tol", "rel_tol", "max_depth"});
  numerics::QuadratureSpec spec;
  spec.abs_tol = q.get<double>("abs_tol", spec.abs_tol);
  spec.rel_tol = q.get<double>("rel_tol", spec.rel_tol);
  spec.max_depth = q.get<int>("max_depth", spec.max_depth);
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("config /quadrature: " + std::string(e.what()));
  }
  return spec;
}

geometry::SampleGrid grid_of(const Block& b, double r_min_default) {
  const Block g = b.sub("grid", {"r_min", "r_max", "r_points", "s_points", "geometric"});
  geometry::SampleGrid grid;
  grid.r_min = g.get<double>("r_min", std::max(grid.r_min, r_min_default));
  grid.r_max = g.get<double>("r_max", grid.r_max);
  grid.r_points = g.get<int>("r_points", grid.r_points);
  grid.s_points = g.get<int>("s_points", grid.s_points);
  grid.geometric = g.get<bool>("geometric", grid.geometric);
  return grid;
}

std::string csv_name(const RunConfig& cfg, const std::string& stem) { return (cfg.out_dir / (stem + ".csv")).string(); }

json to_json(const geometry::HypothesisReport& rep) {
  json conds = json::array();
  for (const auto& c : rep.conditions) {
    json trend = json::array();
    for (const auto& t : c.trend) trend.push_back({{"r", t.r}, {"sup", t.sup}});
    conds.push_back({{"id", c.id},
                     {"verdict", geometry::to_string(c.verdict)},
                     {"observed_sup", c.observed_sup},
                     {"note", c.note},
                     {"trend", trend}});
  }
  json params = json::object();
  for (const auto& [k, v] : rep.parameters) params[k] = v;
  return {{"check", rep.check},
          {"model", rep.model_label},
          {"verdict", geometry::to_string(rep.verdict)},
          {"parameters", params},
          {"conditions", conds}};
}

json to_json(const weyl::ResidualReport& r) {
  json terms = json::object();
  for (std::size_t i = 0; i < 7; ++i) terms[weyl::kTermNames[i]] = r.term_norms[i];
  return {{"path", r.path},    {"lambda", r.lambda},       {"lambda_reproduced", r.lambda_reproduced},
          {"beta", r.beta},    {"alpha", r.alpha},         {"k", r.k},
          {"p", r.p},          {"m", r.m},                 {"delta", r.delta},
          {"norm_u", r.norm_u}, {"norm_residual", r.norm_residual}, {"ratio", r.ratio},
          {"term_norms", terms}};
}

json to_json(const eigen::EigenReport& e) {
  return {{"kind", e.kind},   {"model", e.model_label}, {"R", e.R},
          {"r_start", e.r_start}, {"h", e.h},           {"h_theta", e.h_theta},
          {"theta_max", e.theta_max}, {"boundary", e.boundary}, {"eigenvalues", e.eigenvalues},
          {"predicted_bottom", e.predicted_bottom}};
}

void write_hypothesis_rows(io::CsvWriter& csv, const geometry::HypothesisReport& rep) {
  for (const auto& c : rep.conditions) {
    for (const auto& t : c.trend) csv.row({rep.check, c.id, t.r, t.sup});
  }
}

std::vector<std::string> residual_header(bool with_shifted) {
  std::vector<std::string> h = {"lambda", "k", "p", "m", "beta", "delta", "norm_u", "norm_residual", "ratio"};
  for (const char* t : weyl::kTermNames) h.emplace_back(t);
  if (with_shifted) h.emplace_back("norm_u_shifted");
  return h;
}

std::vector<io::Cell> residual_cells(const weyl::ResidualReport& r, std::optional<double> shifted = std::nullopt) {
  std::vector<io::Cell> c = {r.lambda,   std::int64_t{r.k}, std::int64_t{r.p},  std::int64_t{r.m}, r.beta,
                             r.delta,    r.norm_u,          r.norm_residual,    r.ratio};
  for (double t : r.term_norms) c.emplace_back(t);
  if (shifted) c.emplace_back(*shifted);
  return c;
}

/// Runs a residual sweep one lambda at a time so that finished rows reach the
/// CSV before a later lambda can fail.
struct SweepOutcome {
  json rows = json::array();
  json summaries = json::array();
  bool all_within_epsilon = true;
  std::vector<io::Series> series;
};

SweepOutcome sweep_and_write(const warp::ManifoldModel& model, const std::vector<double>& lambdas,
                             const std::vector<int>& ks, int m, const weyl::SweepOptions& opt,
                             const numerics::QuadratureSpec& quad, io::CsvWriter& csv, std::ostream& log) {
  SweepOutcome out;
  for (double lambda : lambdas) {
    const weyl::SweepResult res = weyl::residual_sweep(model, {lambda}, ks, m, opt, quad);
    io::Series s{"lambda = " + io::format_number(lambda), {}};
    for (const auto& row : res.rows) {
      std::optional<double> shifted;
      if (opt.zero_path) {
        weyl::WeylParams p;
        p.lambda = lambda;
        p.k = row.report.k;
        p.m = m;
        p.alpha = opt.alpha;
        shifted = weyl::zero_path_norms(weyl::build_weyl_zero(p, model), quad).norm_on_shifted;
      }
      csv.row(residual_cells(row.report, shifted));
      json j = to_json(row.report);
      if (shifted) j["norm_u_shifted"] = *shifted;
      out.rows.push_back(j);
      s.points.emplace_back(row.report.k, row.report.ratio);
    }
    for (const auto& sm : res.summaries) {
      json j = {{"lambda", sm.lambda}, {"strictly_decreasing", sm.strictly_decreasing}};
      j["first_k_within_epsilon"] = sm.first_k_within_epsilon ? json(*sm.first_k_within_epsilon) : json(nullptr);
      out.summaries.push_back(j);
      if (!sm.first_k_within_epsilon) out.all_within_epsilon = false;
      log << "lambda " << io::format_number(sm.lambda) << ": "
          << (sm.first_k_within_epsilon ? "ratio <= " + io::format_number(opt.epsilon) + " from k = " +
                                              std::to_string(*sm.first_k_within_epsilon)
                                        : "epsilon not reached")
          << (sm.strictly_decreasing ? ", strictly decreasing" : ", not monotone") << '\n';
    }
    out.series.push_back(std::move(s));
  }
  return out;
}

template <typename T, typename F>
std::vector<T> parallel_map(std::size_t count, int threads, F&& f) {
  std::vector<std::optional<T>> results(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        results[i] = f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < std::min<int>(threads, static_cast<int>(count)); ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<T> out;
  for (auto& r : results) out.push_back(std::move(*r));
  return out;
}

int exit_for(bool pass) { return pass ? 0 : 2; }

// hypotheses ---------------------------------------------------------------

int run_hypotheses(const RunConfig& cfg, std::ostream& log) {
  const Block b(cfg.doc, "", {"model", "checks", "grid", "tolerance", "c", "c1", "gamma", "r_list"});
  const warp::ManifoldModel model = model_of(b);
  const Block tol = b.sub("tolerance", {"uniform", "growth_factor"});
  geometry::CheckOptions opts;
  opts.tol_uniform = tol.get<double>("uniform", opts.tol_uniform);
  opts.growth_factor = tol.get<double>("growth_factor", opts.growth_factor);
  const geometry::SampleGrid grid = grid_of(b, model.r_min);

  json checks = json::array();
  if (b.has("checks")) {
    checks = b.raw("checks");
    if (!checks.is_array()) throw ConfigError("config /checks: expected an array");
  } else if (b.has("gamma")) {
    checks.push_back({{"type", "thm2"}, {"gamma", b.raw("gamma")}, {"c1", b.get<double>("c1", 1.0)}});
  } else if (b.has("c")) {
    checks.push_back({{"type", "thm1"}, {"c", b.raw("c")}, {"c1", b.get<double>("c1", 1.0)}});
  } else {
    throw ConfigError("config /: give 'checks', or 'gamma' (zero-curvature check) or 'c' (exponential check)");
  }

  io::CsvWriter csv(csv_name(cfg, "hypotheses"), {"check", "condition", "r", "sup_value"});
  json reports = json::array();
  std::vector<geometry::Verdict> verdicts;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    const Block c(checks[i], "/checks/" + std::to_string(i), {"type", "c", "c1", "gamma", "r_list", "range"});
    const std::string type = c.get<std::string>("type");
    geometry::HypothesisReport rep;
    if (type == "thm1") {
      rep = geometry::check_thm1(model, c.get<double>("c"), c.get<double>("c1", 1.0), grid, opts);
    } else if (type == "thm2") {
      rep = geometry::check_thm2(model, c.get<double>("c1", 1.0), c.get<double>("gamma"), grid, opts);
    } else if (type == "kumura") {
      geometry::KumuraOptions k;
      k.tol = opts.tol_uniform;
      const std::string range = c.get<std::string>("range", std::string("neighborhood"));
      if (range == "full") {
        k.range = geometry::AngularRange::full;
      } else if (range != "neighborhood") {
        throw ConfigError("config " + c.path("range") + ": expected 'neighborhood' or 'full'");
      }
      rep = geometry::check_kumura(model, c.get<double>("c", 0.0), c.get<std::vector<double>>("r_list"), k);
    } else {
      throw ConfigError("config " + c.path("type") + ": unknown check '" + type + "' (thm1, thm2 or kumura)");
    }
    write_hypothesis_rows(csv, rep);
    reports.push_back(to_json(rep));
    verdicts.push_back(rep.verdict);
    log << rep.check << " on " << rep.model_label << ": " << geometry::to_string(rep.verdict) << '\n';
  }
  const geometry::Verdict overall = geometry::combine(verdicts);
  io::write_json(cfg.out_dir / "hypotheses.json",
                 {{"command", "hypotheses"},
                  {"model", warp::model_to_json(model)},
                  {"verdict", geometry::to_string(overall)},
                  {"reports", reports}});
  if (cfg.plots) {
    std::vector<io::Series> series;
    for (const auto& r : reports) {
      for (const auto& c : r["conditions"]) {
        io::Series s{r["check"].get<std::string>() + " " + c["id"].get<std::string>(), {}};
        for (const auto& t : c["trend"]) s.points.emplace_back(t["r"].get<double>(), t["sup"].get<double>());
        series.push_back(std::move(s));
      }
    }
    io::write_svg(cfg.out_dir / "hypotheses.svg", {"Hypothesis trends", "r", "sup", true, true}, series);
  }
  return exit_for(overall == geometry::Verdict::pass);
}

// weyl / weyl-zero ------------------------------------------------------------

int run_weyl(const RunConfig& cfg, std::ostream& log, bool zero) {
  std::set<std::string> keys = {"model", "lambdas", "ks", "m", "epsilon", "quadrature", "lemma5"};
  keys.insert(zero ? "alpha" : "c");
  const Block b(cfg.doc, "", keys);
  const warp::ManifoldModel model = model_of(b);
  const numerics::QuadratureSpec quad = quadrature_of(b);
  weyl::SweepOptions opt;
  opt.zero_path = zero;
  opt.c = zero ? 0 : b.get<double>("c", 0.0);
  opt.alpha = zero ? b.get<double>("alpha") : 0;
  opt.epsilon = b.get<double>("epsilon", opt.epsilon);
  opt.threads = cfg.threads;
  const auto lambdas = b.get<std::vector<double>>("lambdas");
  const auto ks = b.get<std::vector<int>>("ks");
  const int m = b.get<int>("m", 4);
  const std::string stem = zero ? "weyl_zero" : "weyl";

  io::CsvWriter csv(csv_name(cfg, stem), residual_header(zero));
  SweepOutcome sw = sweep_and_write(model, lambdas, ks, m, opt, quad, csv, log);
  json doc = {{"command", zero ? "weyl-zero" : "weyl"},
              {"model", warp::model_to_json(model)},
              {"m", m},
              {"epsilon", opt.epsilon},
              {"rows", sw.rows},
              {"summaries", sw.summaries}};
  if (zero) {
    doc["alpha"] = opt.alpha;
  } else {
    doc["c"] = opt.c;
  }

  if (b.has("lemma5")) {
    const Block l = b.sub("lemma5", {"k", "lambda", "k_min"});
    weyl::WeylParams p;
    p.lambda = l.get<double>("lambda");
    p.k = l.get<int>("k");
    p.m = m;
    p.c = opt.c;
    p.alpha = opt.alpha;
    const weyl::WeylFunction wf = zero ? weyl::build_weyl_zero(p, model) : weyl::build_weyl(p, model);
    const weyl::Lemma5Report rep = weyl::lemma5_ratios(wf, quad, l.get<int>("k_min", 8));
    json entries = json::array();
    bool within = true;
    for (const auto& e : rep.entries) {
      json j = {{"name", e.name}, {"measured", e.measured}};
      j["bound"] = e.bound ? json(*e.bound) : json(nullptr);
      j["log10_constant"] = e.log10_constant ? json(*e.log10_constant) : json(nullptr);
      if (e.bound && e.measured > *e.bound) within = false;
      entries.push_back(j);
    }
    doc["lemma5"] = {{"k", rep.k},
                     {"delta", rep.delta},
                     {"log10_inf_psi", rep.log10_inf_psi},
                     {"within_bounds", within},
                     {"entries", entries}};
    if (!within) sw.all_within_epsilon = false;
    log << "lemma 5 ratios at k = " << rep.k << ": " << (within ? "within bounds" : "bound exceeded") << '\n';
  }
  io::write_json(cfg.out_dir / (stem + ".json"), doc);
  if (cfg.plots) {
    io::write_svg(cfg.out_dir / (stem + ".svg"), {"Residual ratio", "k", "||Delta u + lambda u|| / ||u||", true, true},
                  sw.series);
  }
  return exit_for(sw.all_within_epsilon);
}

// eigen ---------------------------------------------------------------------

struct EigenRun {
  std::vector<eigen::EigenReport> reports;
  eigen::BottomTrend trend{0, 0, true};
  bool has_trend = false;
};

EigenRun eigen_runs(const warp::ManifoldModel& model, const Block& e, int threads) {
  const std::string mode = e.get<std::string>("mode", std::string("radial"));
  const auto radii = e.get<std::vector<double>>("radii");
  const auto count = e.get<std::size_t>("count", std::size_t{6});
  const double c = e.get<double>("c", 0.0);
  const std::optional<double> r_start =
      e.has("r_start") ? std::optional<double>(e.get<double>("r_start")) : std::nullopt;
  EigenRun out;
  if (mode == "radial") {
    eigen::RadialOptions o;
    o.r_start = r_start;
    o.c = c;
    const std::string inner = e.get<std::string>("inner", std::string("automatic"));
    if (inner == "dirichlet") {
      o.inner = eigen::InnerBoundary::dirichlet;
    } else if (inner == "regular") {
      o.inner = eigen::InnerBoundary::regular;
    } else if (inner != "automatic") {
      throw ConfigError("config " + e.path("inner") + ": expected automatic, dirichlet or regular");
    }
    const double h = e.get<double>("h");
    out.reports = parallel_map<eigen::EigenReport>(
        radii.size(), threads, [&](std::size_t i) { return eigen::radial_eigs(model, radii[i], h, count, o); });
  } else if (mode == "surface") {
    eigen::SurfaceOptions o;
    o.r_start = r_start;
    o.c = c;
    const double h_r = e.get<double>("h");
    const int theta_cells = e.get<int>("theta_cells", 40);
    // Either a fixed half-width or the shrinking window c2 e^{-a R}.
    const bool shrinking = e.has("theta_rate");
    const double theta_rate = e.get<double>("theta_rate", 0.0);
    const double theta_fixed = shrinking ? 0 : e.get<double>("theta_max");
    out.reports = parallel_map<eigen::EigenReport>(radii.size(), threads, [&](std::size_t i) {
      const double tm = shrinking ? model.neighborhood.c2 * std::exp(-theta_rate * radii[i]) : theta_fixed;
      return eigen::surface_eigs(model, radii[i], h_r, 2 * tm / theta_cells, tm, count, o);
    });
  } else {
    throw ConfigError("config " + e.path("mode") + ": expected 'radial' or 'surface'");
  }
  if (out.reports.size() >= 3) {
    out.trend = eigen::bottom_trend(out.reports);
    out.has_trend = true;
  }
  return out;
}

json eigen_json(const EigenRun& run) {
  json reps = json::array();
  for (const auto& r : run.reports) reps.push_back(to_json(r));
  json doc = {{"reports", reps}};
  if (run.has_trend) {
    doc["trend"] = {{"estimate", run.trend.estimate}, {"slope", run.trend.slope}, {"monotone", run.trend.monotone}};
  }
  return doc;
}

void write_eigen_csv(const RunConfig& cfg, const std::string& stem, const EigenRun& run) {
  std::size_t count = 0;
  for (const auto& r : run.reports) count = std::max(count, r.eigenvalues.size());
  std::vector<std::string> header = {"R", "h", "h_theta", "theta_max"};
  for (std::size_t i = 1; i <= count; ++i) header.push_back("lambda_" + std::to_string(i));
  io::CsvWriter csv(csv_name(cfg, stem), header);
  for (const auto& r : run.reports) {
    std::vector<io::Cell> row = {r.R, r.h, r.h_theta, r.theta_max};
    for (std::size_t i = 0; i < count; ++i) {
      if (i < r.eigenvalues.size()) {
        row.emplace_back(r.eigenvalues[i]);
      } else {
        row.emplace_back(std::string());
      }
    }
    csv.row(row);
  }
}

void plot_eigen(const RunConfig& cfg, const std::string& stem, const EigenRun& run) {
  io::Series s{"lambda_1", {}};
  io::Series bottom{"predicted bottom", {}};
  for (const auto& r : run.reports) {
    s.points.emplace_back(r.R, r.eigenvalues.front());
    bottom.points.emplace_back(r.R, r.predicted_bottom);
  }
  io::write_svg(cfg.out_dir / (stem + ".svg"), {"Lowest eigenvalue against truncation radius", "R", "lambda_1"},
                {s, bottom});
}

int run_eigen(const RunConfig& cfg, std::ostream& log) {
  const Block b(cfg.doc, "",
                {"model", "mode", "radii", "h", "theta_cells", "theta_max", "theta_rate", "count", "r_start", "c",
                 "inner"});
  const warp::ManifoldModel model = model_of(b);
  const EigenRun run = eigen_runs(model, b, cfg.threads);
  write_eigen_csv(cfg, "eigen", run);
  json doc = eigen_json(run);
  doc["command"] = "eigen";
  doc["model"] = warp::model_to_json(model);
  io::write_json(cfg.out_dir / "eigen.json", doc);
  if (cfg.plots) plot_eigen(cfg, "eigen", run);
  for (const auto& r : run.reports) {
    log << "R = " << io::format_number(r.R) << ": lambda_1 = " << io::format_number(r.eigenvalues.front()) << '\n';
  }
  if (run.has_trend) {
    log << "extrapolated bottom " << io::format_number(run.trend.estimate)
        << (run.trend.monotone ? " (monotone)" : " (not monotone)") << '\n';
  }
  return exit_for(!run.has_trend || run.trend.monotone);
}

// appendix --------------------------------------------------------------------

int run_appendix(const RunConfig& cfg, std::ostream& log) {
  const Block b(cfg.doc, "",
                {"a_check", "a_weyl", "curvature", "thm1", "lambdas", "ks", "m", "epsilon", "quadrature", "eigen"});
  const double a_check = b.get<double>("a_check", 1.0);
  const double a_weyl = b.get<double>("a_weyl", 0.5);
  const numerics::QuadratureSpec quad = quadrature_of(b);
  const warp::ManifoldModel check_model = warp::builtin_model("appendix-surface(" + io::format_number(a_check) + ")");
  const warp::ManifoldModel weyl_model = warp::builtin_model("appendix-surface(" + io::format_number(a_weyl) + ")");
  json doc = {{"command", "appendix"}, {"a_check", a_check}, {"a_weyl", a_weyl}};
  bool pass = true;

  // Curvature table and the two closed-form checks.
  const Block cb = b.sub("curvature", {"r", "theta"});
  const auto rs = cb.get<std::vector<double>>("r", std::vector<double>{0.5, 1, 2, 4, 5, 8, 10, 16});
  const auto thetas = cb.get<std::vector<double>>("theta", std::vector<double>{0, 0.25, 0.5, 1});
  {
    io::CsvWriter csv(csv_name(cfg, "curvature"), {"r", "theta", "K"});
    for (double r : rs) {
      for (double t : thetas) csv.row({r, t, static_cast<double>(geometry::curvature_at(check_model, r, t).radial_K)});
    }
  }
  double worst_axis = 0;
  for (double r : {1.0, 2.0, 5.0, 10.0}) {
    const double K = geometry::curvature_at(check_model, r, 0).radial_K;
    worst_axis = std::max(worst_axis, std::abs(K - (-1 - 2 / r)));
  }
  bool decreasing = true;
  double prev = 0;
  json k1 = json::array();
  for (double r : {2.0, 4.0, 8.0, 16.0}) {
    const double K = geometry::curvature_at(check_model, r, 1).radial_K;
    if (!k1.empty() && !(K < prev)) decreasing = false;
    prev = K;
    k1.push_back({{"r", r}, {"K", K}});
  }
  const bool axis_ok = worst_axis <= 1e-10;
  doc["curvature"] = {{"axis_max_error", worst_axis}, {"axis_ok", axis_ok}, {"K_theta_1", k1},
                      {"K_theta_1_decreasing", decreasing}};
  pass = pass && axis_ok && decreasing;
  log << "curvature: K(r,0) = -1 - 2/r " << (axis_ok ? "holds" : "fails") << ", K(r,1) "
      << (decreasing ? "decreasing" : "not decreasing") << '\n';

  // Hypothesis check on the narrow neighbourhood.
  const Block tb = b.sub("thm1", {"c1", "grid"});
  const geometry::SampleGrid grid = grid_of(tb, check_model.r_min);
  const geometry::HypothesisReport thm1 = geometry::check_thm1(check_model, 1.0, tb.get<double>("c1", 1.0), grid);
  {
    io::CsvWriter csv(csv_name(cfg, "appendix_hypotheses"), {"check", "condition", "r", "sup_value"});
    write_hypothesis_rows(csv, thm1);
  }
  doc["thm1"] = to_json(thm1);
  pass = pass && thm1.verdict == geometry::Verdict::pass;
  log << "thm1 on " << thm1.model_label << ": " << geometry::to_string(thm1.verdict) << '\n';

  // Residual sweep above the bottom 1/4.
  weyl::SweepOptions opt;
  opt.c = 1;
  opt.epsilon = b.get<double>("epsilon", 0.1);
  opt.threads = cfg.threads;
  const auto lambdas = b.get<std::vector<double>>("lambdas", std::vector<double>{0.3, 0.5, 1.0});
  const auto ks = b.get<std::vector<int>>("ks", std::vector<int>{8, 16, 32, 64});
  const int m = b.get<int>("m", 4);
  SweepOutcome sw;
  {
    io::CsvWriter csv(csv_name(cfg, "appendix_weyl"), residual_header(false));
    sw = sweep_and_write(weyl_model, lambdas, ks, m, opt, quad, csv, log);
  }
  doc["weyl"] = {{"model", weyl_model.label}, {"epsilon", opt.epsilon}, {"m", m},
                 {"rows", sw.rows}, {"summaries", sw.summaries}};
  pass = pass && sw.all_within_epsilon;

  // Surface eigenvalues on shrinking windows theta_max = e^{-a R}.
  const Block eb = b.sub("eigen", {"radii", "h", "theta_cells", "count", "theta_rate"});
  json edoc = {{"mode", "surface"},
               {"radii", eb.get<std::vector<double>>("radii", std::vector<double>{4.1, 6.1, 8.1})},
               {"h", eb.get<double>("h", 0.05)},
               {"theta_cells", eb.get<int>("theta_cells", 40)},
               {"count", eb.get<std::size_t>("count", std::size_t{3})},
               {"theta_rate", eb.get<double>("theta_rate", a_weyl)},
               {"c", 1.0}};
  const EigenRun er = eigen_runs(weyl_model, Block(edoc, "/eigen", {"mode", "radii", "h", "theta_cells", "count",
                                                                   "theta_rate", "c"}),
                                 cfg.threads);
  write_eigen_csv(cfg, "appendix_eigen", er);
  doc["eigen"] = eigen_json(er);
  if (er.has_trend) {
    log << "surface eigenvalues: extrapolated bottom " << io::format_number(er.trend.estimate) << " against 1/4"
        << (er.trend.monotone ? " (monotone)" : " (not monotone)") << '\n';
  }
  doc["verdict"] = pass ? "pass" : "fail";
  io::write_json(cfg.out_dir / "appendix.json", doc);
  if (cfg.plots) {
    io::write_svg(cfg.out_dir / "appendix_weyl.svg", {"Residual ratio on the appendix surface", "k", "ratio", true, true},
                  sw.series);
    plot_eigen(cfg, "appendix_eigen", er);
    std::vector<io::Series> ks_series;
    for (double t : thetas) {
      io::Series s{"theta = " + io::format_number(t), {}};
      for (double r : rs) s.points.emplace_back(r, geometry::curvature_at(check_model, r, t).radial_K);
      ks_series.push_back(std::move(s));
    }
    io::write_svg(cfg.out_dir / "curvature.svg", {"Gaussian curvature K(r, theta)", "r", "K"}, ks_series);
  }
  return exit_for(pass);
}

// horoball --------------------------------------------------------------------

int run_horoball(const RunConfig& cfg, std::ostream& log) {
  const Block b(cfg.doc, "", {"r_max", "steps", "c2", "a"});
  const double r_max = b.get<double>("r_max", 50.0);
  const int steps = b.get<int>("steps", 400);
  const double c2 = b.get<double>("c2", 1.0);
  const double a = b.get<double>("a", 0.5);
  const geometry::HoroballResult res = geometry::horoball_margin(r_max, steps, c2, a);
  {
    io::CsvWriter csv(csv_name(cfg, "horoball"), {"r_max", "steps", "c2", "a", "holds", "min_margin", "r_at_min",
                                                  "s_at_min"});
    csv.row({r_max, std::int64_t{steps}, c2, a, std::string(res.holds ? "true" : "false"), res.min_margin,
             res.r_at_min, res.s_at_min});
  }
  io::write_json(cfg.out_dir / "horoball.json", {{"command", "horoball"},
                                                 {"r_max", r_max},
                                                 {"steps", steps},
                                                 {"c2", c2},
                                                 {"a", a},
                                                 {"holds", res.holds},
                                                 {"min_margin", res.min_margin},
                                                 {"r_at_min", res.r_at_min},
                                                 {"s_at_min", res.s_at_min}});
  log << "horoball inclusion " << (res.holds ? "holds" : "fails") << ", min margin "
      << io::format_number(res.min_margin) << '\n';
  return exit_for(res.holds);
}

}  // namespace

RunConfig parse_config(const std::string& command, const std::string& text) {
  if (!kCommands.count(command)) {
    throw ConfigError("unknown command '" + command + "' (hypotheses, weyl, weyl-zero, eigen, appendix, horoball)");
  }
  RunConfig cfg;
  cfg.command = command;
  try {
    cfg.doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config parse error at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  if (!cfg.doc.is_object()) throw ConfigError("config: expected a JSON object at the top level");
  return cfg;
}

RunConfig load_config(const std::string& command, const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + file.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(command, text.str());
}

int threads_from_environment() {
  const char* env = std::getenv("WEYLSPEC_THREADS");
  if (!env || !*env) return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1 || v > 1024) {
    throw ConfigError(std::string("WEYLSPEC_THREADS must be an integer in [1, 1024], got '") + env + "'");
  }
  return static_cast<int>(v);
}

int run(const RunConfig& config, std::ostream& log) {
  if (config.threads < 1) throw ConfigError("thread count must be >= 1");
  std::filesystem::create_directories(config.out_dir);
  if (config.command == "hypotheses") return run_hypotheses(config, log);
  if (config.command == "weyl") return run_weyl(config, log, false);
  if (config.command == "weyl-zero") return run_weyl(config, log, true);
  if (config.command == "eigen") return run_eigen(config, log);
  if (config.command == "appendix") return run_appendix(config, log);
  if (config.command == "horoball") return run_horoball(config, log);
  throw ConfigError("unknown command '" + config.command + "'");
}

}  // namespace weylspec::cli

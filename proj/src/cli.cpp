#include "geosep/cli.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>

#include "CLI11.hpp"

#include "geosep/pde.hpp"
#include "geosep/sep.hpp"
#include "geosep/version.hpp"
#include "geosep/walk.hpp"

namespace geosep {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

bool is_power_of_two(std::size_t n) { return n && !(n & (n - 1)); }

Kernel make_kernel(const KernelConfig& k) {
  Kernel out = default_kernel();
  if (k.scale != 1.0) out = scaled_kernel(out, k.scale);
  if (k.dilation != 1.0) out = dilated_kernel(out, k.dilation);
  return out;
}

struct Gate {
  std::string name;
  bool passed;
  std::string detail;
};

int finish(const ExperimentConfig& c, const std::string& command, const std::vector<Gate>& gates,
           std::ostream& log) {
  json j;
  j["command"] = command;
  bool ok = true;
  j["gates"] = json::array();
  for (const auto& g : gates) {
    ok = ok && g.passed;
    j["gates"].push_back({{"name", g.name}, {"passed", g.passed}, {"detail", g.detail}});
    if (!g.passed) log << command << ": gate failed: " << g.name << " (" << g.detail << ")\n";
  }
  j["passed"] = ok;
  stamp(j, output_meta(c));
  write_text(fs::path(c.output_dir) / (command + "_status.json"), j.dump(2) + "\n");
  return ok ? kExitOk : kExitGateFailed;
}

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

Point default_start(const Manifold& m) {
  Point p;
  if (m.kind() == ManifoldKind::Sphere2) p.x = {0.0, 0.0, 1.0};
  return p;
}

std::string size_tag(std::size_t N) { return "N" + std::to_string(N); }

}  // namespace

ExperimentConfig parse_config(const json& j) {
  reject_unknown(j,
                 {"manifold", "sizes", "kernel", "seed", "replicas", "t_end", "record_times",
                  "observables", "output_dir", "truncation", "grid", "walk", "sep"},
                 "config");
  ExperimentConfig c;
  read(j, "manifold", c.manifold);
  read(j, "sizes", c.sizes);
  read(j, "seed", c.seed);
  read(j, "replicas", c.replicas);
  read(j, "t_end", c.t_end);
  read(j, "record_times", c.record_times);
  read(j, "observables", c.observables);
  read(j, "output_dir", c.output_dir);
  read(j, "truncation", c.truncation);
  if (j.contains("kernel")) {
    const json& k = j["kernel"];
    reject_unknown(k, {"id", "scale", "dilation"}, "kernel");
    read(k, "id", c.kernel.id);
    read(k, "scale", c.kernel.scale);
    read(k, "dilation", c.kernel.dilation);
  }
  if (j.contains("grid")) {
    const json& g = j["grid"];
    reject_unknown(g, {"mode", "epsilon", "w1_cell_factor"}, "grid");
    read(g, "mode", c.grid.mode);
    if (g.contains("epsilon") && !g["epsilon"].is_null()) {
      double eps = 0.0;
      read(g, "epsilon", eps);
      c.grid.epsilon = eps;
    }
    read(g, "w1_cell_factor", c.grid.w1_cell_factor);
  }
  if (j.contains("walk")) {
    const json& w = j["walk"];
    reject_unknown(w, {"scale", "step", "start", "allowance"}, "walk");
    read(w, "scale", c.walk.scale);
    read(w, "step", c.walk.step);
    read(w, "start", c.walk.start);
    read(w, "allowance", c.walk.allowance);
  }
  if (j.contains("sep")) {
    const json& s = j["sep"];
    reject_unknown(s, {"profile", "allowance"}, "sep");
    read(s, "profile", c.sep.profile);
    read(s, "allowance", c.sep.allowance);
  }
  validate(c);
  return c;
}

ExperimentConfig load_config(const fs::path& p) {
  const std::string text = read_text(p);
  json j;
  try {
    j = json::parse(text, nullptr, true, true);
  } catch (const json::exception& e) {
    throw ConfigError(p.string() + ": " + e.what());
  }
  return parse_config(j);
}

void validate(const ExperimentConfig& c) {
  Manifold m = Manifold::circle();
  try {
    m = Manifold::parse(c.manifold);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  for (std::size_t k = 0; k < c.sizes.size(); ++k) {
    if (!is_power_of_two(c.sizes[k]) || c.sizes[k] < 4) throw ConfigError("sizes must be dyadic and >= 4");
    if (k && c.sizes[k] <= c.sizes[k - 1]) throw ConfigError("sizes must be strictly increasing");
  }
  if (c.replicas < 1) throw ConfigError("replicas must be >= 1");
  if (!(c.t_end > 0.0)) throw ConfigError("t_end must be positive");
  for (std::size_t k = 0; k < c.record_times.size(); ++k) {
    const double t = c.record_times[k];
    if (!(t >= 0.0 && t <= c.t_end)) throw ConfigError("record_times must lie in [0, t_end]");
    if (k && t <= c.record_times[k - 1]) throw ConfigError("record_times must be increasing");
  }
  if (c.kernel.id != "hat") throw ConfigError("unknown kernel '" + c.kernel.id + "'");
  if (!(c.kernel.scale > 0.0) || !(c.kernel.dilation > 0.0))
    throw ConfigError("kernel scale and dilation must be positive");
  if (c.truncation < 1) throw ConfigError("truncation must be >= 1");
  if (c.grid.mode != "iid" && c.grid.mode != "regular") throw ConfigError("grid.mode must be iid or regular");
  if (c.grid.mode == "regular" && m.kind() != ManifoldKind::Circle)
    throw ConfigError("grid.mode regular needs the circle");
  if (c.grid.epsilon && !(*c.grid.epsilon > 0.0)) throw ConfigError("grid.epsilon must be positive");
  if (c.grid.w1_cell_factor < 1) throw ConfigError("grid.w1_cell_factor must be >= 1");
  if (c.walk.step != "uniform" && c.walk.step != "product")
    throw ConfigError("walk.step must be uniform or product");
  if (!(c.walk.scale > 0.0)) throw ConfigError("walk.scale must be positive");
  if (!c.walk.start.empty()) {
    if (c.walk.start.size() != static_cast<std::size_t>(m.coord_dim()))
      throw ConfigError("walk.start has the wrong number of coordinates");
    Point p;
    std::copy(c.walk.start.begin(), c.walk.start.end(), p.x.begin());
    if (!m.contains(p, 1e-9)) throw ConfigError("walk.start is not on the manifold");
  }
  if (c.sep.profile != "cosine" && !c.sep.profile.starts_with("constant:"))
    throw ConfigError("sep.profile must be cosine or constant:<v>");
  initial_profile(c);
  for (const auto& id : c.observables) {
    try {
      find_test_function(m, id);
    } catch (const std::out_of_range& e) {
      throw ConfigError(e.what());
    }
  }
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["manifold"] = c.manifold;
  j["sizes"] = c.sizes;
  j["kernel"] = {{"id", c.kernel.id}, {"scale", c.kernel.scale}, {"dilation", c.kernel.dilation}};
  j["seed"] = c.seed;
  j["replicas"] = c.replicas;
  j["t_end"] = c.t_end;
  j["record_times"] = c.record_times;
  j["observables"] = c.observables;
  j["truncation"] = c.truncation;
  j["grid"] = {{"mode", c.grid.mode},
               {"epsilon", c.grid.epsilon ? json(*c.grid.epsilon) : json(nullptr)},
               {"w1_cell_factor", c.grid.w1_cell_factor}};
  j["walk"] = {{"scale", c.walk.scale},
               {"step", c.walk.step},
               {"start", c.walk.start},
               {"allowance", c.walk.allowance}};
  j["sep"] = {{"profile", c.sep.profile}, {"allowance", c.sep.allowance}};
  return j;
}

std::string config_hash(const ExperimentConfig& c) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : to_json(c).dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

OutputMeta output_meta(const ExperimentConfig& c) { return {config_hash(c), kVersion}; }

std::vector<double> effective_record_times(const ExperimentConfig& c) {
  std::vector<double> t = c.record_times;
  if (t.empty())
    for (int k = 0; k <= 10; ++k) t.push_back(c.t_end * k / 10.0);
  if (t.front() > 0.0) t.insert(t.begin(), 0.0);
  if (t.back() < c.t_end) t.push_back(c.t_end);
  return t;
}

std::vector<TestFunction> effective_observables(const ExperimentConfig& c) {
  const Manifold m = Manifold::parse(c.manifold);
  std::vector<TestFunction> out;
  if (!c.observables.empty()) {
    for (const auto& id : c.observables) out.push_back(find_test_function(m, id));
    return out;
  }
  for (auto& f : test_function_library(m)) {
    if (f.id == "one") continue;
    out.push_back(f);
    if (out.size() == 3) break;
  }
  return out;
}

std::function<double(const Point&)> initial_profile(const ExperimentConfig& c) {
  if (c.sep.profile.starts_with("constant:")) {
    double v = 0.0;
    try {
      v = std::stod(c.sep.profile.substr(9));
    } catch (const std::exception&) {
      throw ConfigError("bad constant profile '" + c.sep.profile + "'");
    }
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("constant profile must lie in [0, 1]");
    return [v](const Point&) { return v; };
  }
  switch (Manifold::parse(c.manifold).kind()) {
    case ManifoldKind::Circle: return [](const Point& p) { return 0.5 * (1.0 + std::cos(p.x[0])); };
    case ManifoldKind::Sphere2: return [](const Point& p) { return 0.5 * (1.0 + p.x[2]); };
    case ManifoldKind::FlatTorus:
      return [](const Point& p) { return 0.5 * (1.0 + std::cos(2.0 * std::numbers::pi * p.x[0])); };
  }
  throw ConfigError("unsupported manifold");
}

std::vector<GridRow> build_grids(const ExperimentConfig& c, std::ostream& log) {
  if (c.sizes.empty()) throw ConfigError("sizes must not be empty");
  const Manifold m = Manifold::parse(c.manifold);
  std::vector<GridRow> rows;
  if (c.grid.mode == "regular") {
    for (std::size_t N : c.sizes) {
      GridRow r;
      r.N = N;
      r.grid = regular_circle_cloud(N).grid;
      r.w1.value = to_unit_circumference(circle_w1_exact(r.grid.cloud.points));
      r.w1.transport_cost = r.w1.dual_bound = r.w1.value;
      r.w1.exact = true;
      r.connectivity = check_connected(r.grid);
      rows.push_back(std::move(r));
    }
    return rows;
  }
  W1Options w1opt;
  w1opt.cell_factor = c.grid.w1_cell_factor;
  std::vector<std::pair<std::size_t, double>> curve;
  std::vector<PointCloud> clouds;
  for (std::size_t N : c.sizes) {
    clouds.push_back(sample_cloud(m, N, c.seed));
    GridRow r;
    r.N = N;
    r.w1 = wasserstein1(clouds.back(), w1opt);
    curve.emplace_back(N, r.w1.value);
    log << "W1 N=" << N << " " << fmt("%.6g", r.w1.value)
        << (r.w1.exact ? "" : " (gap " + fmt("%.3f", r.w1.relative_gap) + ")") << '\n';
    rows.push_back(std::move(r));
  }
  const Kernel k = make_kernel(c.kernel);
  for (std::size_t q = 0; q < rows.size(); ++q) {
    const double eps = c.grid.epsilon ? *c.grid.epsilon : epsilon_schedule(curve, m.dim(), rows[q].N);
    rows[q].grid = normalize(build_weights(clouds[q], eps, k));
    rows[q].connectivity = check_connected(rows[q].grid);
  }
  return rows;
}

int cmd_grid(const ExperimentConfig& c, std::ostream& log) {
  const OutputMeta meta = output_meta(c);
  const fs::path dir(c.output_dir);
  auto rows = build_grids(c, log);
  json report;
  report["manifold"] = c.manifold;
  report["mode"] = c.grid.mode;
  report["w1_estimator"] = c.manifold == "circle" ? "exact" : "transport upper bound";
  report["epsilon_floor_constant"] = kEpsilonFloorConstant;
  report["epsilon_forced"] = c.grid.epsilon.has_value();
  report["rows"] = json::array();
  std::vector<Gate> gates;
  for (const auto& r : rows) {
    std::ostringstream cloud, edges;
    write_cloud_csv(cloud, r.grid.cloud, meta);
    write_edges_csv(edges, r.grid, meta);
    write_text(dir / ("cloud_" + size_tag(r.N) + ".csv"), cloud.str());
    write_text(dir / ("edges_" + size_tag(r.N) + ".csv"), edges.str());
    write_text(dir / ("grid_" + size_tag(r.N) + ".json"), grid_sidecar(r.grid, meta).dump(2) + "\n");
    report["rows"].push_back({{"N", r.N},
                              {"W1", r.w1.value},
                              {"epsilon", r.grid.epsilon},
                              {"a", r.grid.a_scaling},
                              {"C", r.grid.limiting_constant},
                              {"connected", r.connectivity.connected},
                              {"mean_degree", r.grid.mean_degree()}});
    gates.push_back({"connected " + size_tag(r.N), r.connectivity.connected,
                     std::to_string(r.connectivity.components) + " component(s)"});
    if (c.grid.mode == "regular") {
      const double bound = 0.5 / static_cast<double>(r.N);
      gates.push_back({"W1 <= 1/(2N) " + size_tag(r.N), r.w1.value <= bound * (1.0 + 1e-12),
                       fmt("%.6g", r.w1.value) + " vs " + fmt("%.6g", bound)});
    }
    log << "grid N=" << r.N << " eps=" << fmt("%.5g", r.grid.epsilon)
        << " mean_degree=" << fmt("%.1f", r.grid.mean_degree())
        << (r.connectivity.connected ? "" : " DISCONNECTED") << '\n';
  }
  stamp(report, meta);
  write_text(dir / "grid_report.json", report.dump(2) + "\n");
  return finish(c, "grid", gates, log);
}

int cmd_laplacian(const ExperimentConfig& c, std::ostream& log) {
  if (c.sizes.empty()) throw ConfigError("sizes must not be empty");
  const OutputMeta meta = output_meta(c);
  const fs::path dir(c.output_dir);
  const Manifold m = Manifold::parse(c.manifold);
  std::vector<TestFunction> phis;
  if (c.observables.empty()) phis = test_function_library(m);
  else phis = effective_observables(c);

  std::ostringstream csv;
  csv << meta_comment(meta) << "\nN,phi_id,mean_err,sup_err\n";
  std::vector<std::vector<ConvergenceError>> errs(phis.size());
  for (std::size_t N : c.sizes) {
    std::istringstream cloud_in(read_text(dir / ("cloud_" + size_tag(N) + ".csv")));
    std::istringstream edges_in(read_text(dir / ("edges_" + size_tag(N) + ".csv")));
    json sidecar;
    try {
      sidecar = json::parse(read_text(dir / ("grid_" + size_tag(N) + ".json")));
    } catch (const json::exception& e) {
      throw IoError(std::string("grid sidecar: ") + e.what());
    }
    PointCloud cloud = read_cloud_csv(cloud_in);
    if (!(cloud.manifold == m)) throw IoError("grid files are for a different manifold");
    const WeightedGrid g = grid_from_parts(std::move(cloud), read_edges_csv(edges_in), sidecar);
    for (std::size_t q = 0; q < phis.size(); ++q) {
      const auto e = convergence_error(g, phis[q]);
      errs[q].push_back(e);
      csv << N << ',' << csv_field(phis[q].id) << ',' << format_double(e.mean_err) << ','
          << format_double(e.sup_err) << '\n';
    }
  }
  write_text(dir / "laplacian_report.csv", csv.str());

  std::vector<Gate> gates;
  for (std::size_t q = 0; q < phis.size(); ++q) {
    const double first = errs[q].front().mean_err, last = errs[q].back().mean_err;
    const std::string detail = fmt("%.4g", first) + " -> " + fmt("%.4g", last);
    if (phis[q].id == "one")
      gates.push_back({"constant exact", first == 0.0 && last == 0.0, detail});
    else
      gates.push_back({"decrease " + phis[q].id, c.sizes.size() < 2 || last < first, detail});
    log << "laplacian " << phis[q].id << " mean_err " << detail << '\n';
  }
  return finish(c, "laplacian", gates, log);
}

int cmd_walk(const ExperimentConfig& c, std::ostream& log) {
  const OutputMeta meta = output_meta(c);
  const Manifold m = Manifold::parse(c.manifold);
  Point p0 = default_start(m);
  if (!c.walk.start.empty()) std::copy(c.walk.start.begin(), c.walk.start.end(), p0.x.begin());
  p0 = m.canonical(p0);
  const StepMeasure step = c.walk.step == "uniform" ? uniform_sphere_step(m) : product_counterexample_step(m);
  const double speed = step.declared_speed.value_or(1.0);
  const auto times = effective_record_times(c);
  const auto phis = effective_observables(c);
  const auto stats = walk_ensemble(m, p0, c.walk.scale, step, times, phis, c.replicas, c.seed);

  std::ostringstream csv;
  csv << meta_comment(meta) << "\nt,phi_id,mean,stderr,oracle,abs_gap\n";
  std::vector<Gate> gates;
  for (std::size_t q = 0; q < phis.size(); ++q) {
    const SpectralField field = project(phis[q].eval, m, c.truncation);
    gates.push_back({"spectral residual " + phis[q].id, field.residual < 1e-8, fmt("%.3g", field.residual)});
    double worst = 0.0;
    bool ok = true;
    for (std::size_t k = 0; k < times.size(); ++k) {
      const double oracle = evolve(field, speed * times[k], Diffusivity::Half).eval(p0);
      const double mean = stats.mean[q][k], se = stats.std_error[q][k];
      const double gap = std::abs(mean - oracle);
      ok = ok && gap <= kGateSigmas * se + c.walk.allowance;
      worst = std::max(worst, gap);
      csv << format_double(times[k]) << ',' << csv_field(phis[q].id) << ',' << format_double(mean) << ','
          << format_double(se) << ',' << format_double(oracle) << ',' << format_double(gap) << '\n';
    }
    gates.push_back({"oracle " + phis[q].id, ok, "max gap " + fmt("%.4g", worst)});
    log << "walk " << phis[q].id << " max gap " << fmt("%.4g", worst) << '\n';
  }
  write_text(fs::path(c.output_dir) / "walk_report.csv", csv.str());
  return finish(c, "walk", gates, log);
}

int cmd_sep(const ExperimentConfig& c, std::ostream& log) {
  const OutputMeta meta = output_meta(c);
  const fs::path dir(c.output_dir);
  const Manifold m = Manifold::parse(c.manifold);
  const auto times = effective_record_times(c);
  const auto phis = effective_observables(c);
  const auto rho0 = initial_profile(c);
  auto rows = build_grids(c, log);

  std::vector<Gate> gates;
  for (const auto& r : rows) {
    if (!r.connectivity.connected) {
      log << "sep: refusing disconnected grid at N=" << r.N << '\n';
      gates.push_back({"connected " + size_tag(r.N), false,
                       std::to_string(r.connectivity.components) + " component(s)"});
      return finish(c, "sep", gates, log);
    }
  }

  const SpectralField field0 = project(rho0, m, c.truncation);
  gates.push_back({"spectral residual", field0.residual < 1e-8, fmt("%.3g", field0.residual)});

  std::ostringstream density, qv;
  density << meta_comment(meta) << "\nN,t,phi_id,mu_phi_mean,mu_phi_stderr,oracle_pair,abs_gap\n";
  qv << meta_comment(meta) << "\nN,phi_id,var_MT,var_MT_stderr,qv_bound,within_bound\n";
  json martingales = json::array();
  std::vector<std::vector<double>> qv_by_phi(phis.size());

  for (const auto& r : rows) {
    const WeightedGrid& g = r.grid;
    std::vector<SiteObservable> obs;
    for (const auto& phi : phis) {
      obs.push_back(site_observable(g.cloud, phi));
      obs.push_back(site_generator(g, phi));
    }
    const EdgeTable table(g);
    SepOptions opt;
    opt.t_end = c.t_end;
    opt.record_times = times;
    const PointCloud& cloud = g.cloud;
    InitialState init = [&cloud, &rho0](Rng& rng) { return init_bernoulli(cloud, rho0, rng); };
    const auto traces = run_replicas(table, init, obs, opt, c.replicas, c.seed ^ r.N);
    log << "sep N=" << r.N << " events/replica=" << traces.front().event_count << '\n';
    std::vector<TraceRow> trace_rows;

    for (std::size_t q = 0; q < phis.size(); ++q) {
      const std::size_t o = 2 * q;
      bool ok = true;
      double worst = 0.0;
      for (std::size_t k = 0; k < times.size(); ++k) {
        std::vector<double> xs;
        for (std::size_t rep = 0; rep < traces.size(); ++rep) {
          xs.push_back(traces[rep].values[o][k]);
          trace_rows.push_back({times[k], phis[q].id, traces[rep].values[o][k], rep});
        }
        const auto s = sample_stats(xs);
        const double oracle =
            pair(evolve(field0, times[k] * g.target_constant(), Diffusivity::One), phis[q]);
        const double gap = std::abs(s.mean - oracle);
        ok = ok && gap <= kGateSigmas * s.std_error + c.sep.allowance;
        worst = std::max(worst, gap);
        density << r.N << ',' << format_double(times[k]) << ',' << csv_field(phis[q].id) << ','
                << format_double(s.mean) << ',' << format_double(s.std_error) << ','
                << format_double(oracle) << ',' << format_double(gap) << '\n';
      }
      gates.push_back({"density " + phis[q].id + " " + size_tag(r.N), ok, "max gap " + fmt("%.4g", worst)});

      std::vector<double> mt;
      for (const auto& tr : traces) mt.push_back(dynkin_from_trace(tr, phis[q].id).back());
      const auto s = sample_stats(mt);
      MartingaleReport rep{phis[q].id, r.N, c.t_end, s.variance, qv_bound(g, phis[q], c.t_end), s.mean,
                           s.std_error};
      qv_by_phi[q].push_back(rep.qv_bound);
      json jr = to_json(rep);
      stamp(jr, meta);
      martingales.push_back(jr);
      const bool mean_ok = std::abs(s.mean) <= kGateSigmas * s.std_error + 1e-12;
      const bool var_ok = s.variance <= rep.qv_bound + kGateSigmas * s.variance_std_error;
      gates.push_back({"martingale mean " + phis[q].id + " " + size_tag(r.N), mean_ok,
                       fmt("%.3g", s.mean) + " +- " + fmt("%.3g", s.std_error)});
      gates.push_back({"qv bound " + phis[q].id + " " + size_tag(r.N), var_ok,
                       fmt("%.4g", s.variance) + " vs " + fmt("%.4g", rep.qv_bound)});
      qv << r.N << ',' << csv_field(phis[q].id) << ',' << format_double(s.variance) << ','
         << format_double(s.variance_std_error) << ',' << format_double(rep.qv_bound) << ','
         << (var_ok ? "true" : "false") << '\n';
    }
    std::ostringstream trace;
    write_trace_csv(trace, trace_rows, meta);
    write_text(dir / ("sep_trace_" + size_tag(r.N) + ".csv"), trace.str());
  }
  for (std::size_t q = 0; q < phis.size(); ++q) {
    bool dec = true;
    for (std::size_t k = 1; k < qv_by_phi[q].size(); ++k) dec = dec && qv_by_phi[q][k] < qv_by_phi[q][k - 1];
    gates.push_back({"qv bound decreasing " + phis[q].id, dec, ""});
  }

  json mreport;
  mreport["reports"] = martingales;
  stamp(mreport, meta);
  write_text(dir / "sep_density.csv", density.str());
  write_text(dir / "martingale_report.json", mreport.dump(2) + "\n");
  write_text(dir / "qv_comparison.csv", qv.str());
  return finish(c, "sep", gates, log);
}

int cmd_report(const ExperimentConfig& c, std::ostream& log) {
  const fs::path dir(c.output_dir);
  json report;
  report["commands"] = json::object();
  bool any = false, ok = true;
  for (const char* cmd : {"grid", "laplacian", "walk", "sep"}) {
    const fs::path p = dir / (std::string(cmd) + "_status.json");
    if (!fs::exists(p)) continue;
    json s;
    try {
      s = json::parse(read_text(p));
    } catch (const json::exception& e) {
      throw IoError(p.string() + ": " + e.what());
    }
    any = true;
    const bool passed = s.value("passed", false);
    ok = ok && passed;
    std::size_t failed = 0, total = 0;
    for (const auto& g : s.value("gates", json::array())) {
      ++total;
      if (!g.value("passed", false)) ++failed;
    }
    report["commands"][cmd] = {{"passed", passed},
                               {"gates", total},
                               {"failed", failed},
                               {"config_hash", s.value("config_hash", "")}};
    log << cmd << ": " << (passed ? "PASS" : "FAIL") << " (" << total - failed << "/" << total << " gates)\n";
  }
  if (!any) throw IoError("no status files in " + dir.string());
  report["passed"] = ok;
  stamp(report, output_meta(c));
  write_text(dir / "report.json", report.dump(2) + "\n");
  return ok ? kExitOk : kExitGateFailed;
}

int cli_main(int argc, char** argv) {
  CLI::App app{"Geodesic random walks and exclusion processes on compact manifolds"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  int threads = 0;
  auto* seed_opt = app.add_option("--seed", seed, "Master seed (overrides the config)");
  app.add_option("--config", config_path, "Experiment JSON file")->check(CLI::ExistingFile);
  app.add_option("--threads", threads, "OpenMP thread cap")->check(CLI::NonNegativeNumber);
  app.add_option("--out", out_dir, "Output directory (overrides the config)");
  app.set_version_flag("--version", std::string(kVersion));
  std::string command;
  for (const char* name : {"grid", "laplacian", "walk", "sep", "report"}) {
    app.add_subcommand(name)->callback([&command, name] { command = name; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitIoError;
  }
  try {
    ExperimentConfig c;
    if (!config_path.empty()) c = load_config(config_path);
    if (*seed_opt) c.seed = seed;
    if (!out_dir.empty()) c.output_dir = out_dir;
    validate(c);
    if (threads > 0) omp_set_num_threads(threads);
    std::error_code ec;
    fs::create_directories(c.output_dir, ec);
    if (ec) throw IoError("cannot create " + c.output_dir + ": " + ec.message());
    if (command == "grid") return cmd_grid(c, std::cout);
    if (command == "laplacian") return cmd_laplacian(c, std::cout);
    if (command == "walk") return cmd_walk(c, std::cout);
    if (command == "sep") return cmd_sep(c, std::cout);
    return cmd_report(c, std::cout);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
  }
  return kExitIoError;
}

}  // namespace geosep

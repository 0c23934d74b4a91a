// End-to-end acceptance checks. One PASS/FAIL line per check; exit status 1
// if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "geosep/grid.hpp"
#include "geosep/manifold.hpp"
#include "geosep/pde.hpp"
#include "geosep/sep.hpp"
#include "geosep/transport.hpp"
#include "geosep/walk.hpp"
#include "oracles.hpp"

using namespace geosep;

namespace {

const double kPi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

std::vector<std::size_t> dyadic(int lo, int hi) {
  std::vector<std::size_t> out;
  for (int k = lo; k <= hi; ++k) out.push_back(std::size_t{1} << k);
  return out;
}

// Clouds and W1 values of one manifold at every dyadic size of a sweep,
// computed once and shared between checks.
struct Sweep {
  Manifold m = Manifold::circle();
  std::map<std::size_t, PointCloud> clouds;
  std::vector<std::pair<std::size_t, double>> curve;

  WeightedGrid grid(std::size_t N) const {
    const double eps = epsilon_schedule(curve, m.dim(), N);
    return normalize(build_weights(clouds.at(N), eps, default_kernel()));
  }
};

Sweep make_sweep(const Manifold& m, const std::vector<std::size_t>& sizes, std::uint64_t seed) {
  Sweep s;
  s.m = m;
  for (std::size_t N : sizes) {
    s.clouds.emplace(N, sample_cloud(m, N, seed));
    s.curve.emplace_back(N, wasserstein1(s.clouds.at(N)).value);
  }
  return s;
}

const std::uint64_t kSeed = 7;

Sweep& circle_sweep() {
  static Sweep s = make_sweep(Manifold::circle(), dyadic(5, 13), kSeed);
  return s;
}

Sweep& sphere_sweep() {
  static Sweep s = make_sweep(Manifold::sphere2(), dyadic(6, 12), kSeed);
  return s;
}

Outcome regular_circle_laplacian() {
  const TestFunction phi = find_test_function(Manifold::circle(), "cos1");
  std::vector<double> sup;
  for (std::size_t N : {256, 512, 1024}) sup.push_back(convergence_error(regular_circle_cloud(N).grid, phi).sup_err);
  Outcome o{true, "sup_err"};
  for (std::size_t k = 0; k < sup.size(); ++k) {
    o.detail += " " + fmt("%.3e", sup[k]);
    if (k) {
      const double ratio = sup[k - 1] / sup[k];
      o.pass = o.pass && ratio >= 3.0;
      o.detail += " (x" + fmt("%.2f", ratio) + ")";
    }
  }
  return o;
}

// (1/2) int_{|v| <= 1} (1 - |v|) v_1^2 dv over R^d, divided by the volume, by
// composite Simpson on the radial integral.
double hat_constant(int d, double volume) {
  const int n = 20000;
  auto radial = [d](double r) { return (1 - r) * std::pow(r, d + 1); };
  double s = radial(0) + radial(1);
  for (int k = 1; k < n; ++k) s += (k % 2 ? 4 : 2) * radial(double(k) / n);
  s /= 3.0 * n;
  // Angular factor of v_1^2: 2 on the line, pi in the plane.
  const double angular = d == 1 ? 2.0 : kPi;
  return 0.5 * angular * s / volume;
}

Outcome limiting_constants() {
  const double cs = limiting_constant_op(default_kernel(), Manifold::sphere2());
  const double cc = limiting_constant_op(default_kernel(), Manifold::circle());
  const double qs = hat_constant(2, 4 * kPi), qc = hat_constant(1, 2 * kPi);
  const double e1 = std::abs(cs - 1.0 / 160), e2 = std::abs(cc - 1.0 / (24 * kPi));
  const double e3 = std::abs(cs - qs), e4 = std::abs(cc - qc);
  const bool ok = e1 <= 1e-12 && e2 <= 1e-12 && e3 <= 1e-12 && e4 <= 1e-12;
  return {ok, "S2 " + fmt("%.15g", cs) + " S1 " + fmt("%.15g", cc) + " max dev " +
                  fmt("%.2e", std::max({e1, e2, e3, e4}))};
}

const std::size_t kCloudReplicas = 16;

// mean_err averaged over kCloudReplicas clouds per N (seeds kSeed + r, the
// sweep's own cloud first); bandwidths follow the sweep's W1 curve.
Outcome generator_sweep(Sweep& s, const std::vector<std::size_t>& sizes) {
  const auto lib = test_function_library(s.m);
  std::vector<std::vector<double>> err(lib.size());
  for (std::size_t N : sizes) {
    const double eps = epsilon_schedule(s.curve, s.m.dim(), N);
    std::vector<double> sum(lib.size(), 0.0);
    for (std::size_t r = 0; r < kCloudReplicas; ++r) {
      const PointCloud cloud = r == 0 ? s.clouds.at(N) : sample_cloud(s.m, N, kSeed + r);
      const WeightedGrid g = normalize(build_weights(cloud, eps, default_kernel()));
      for (std::size_t q = 0; q < lib.size(); ++q) sum[q] += convergence_error(g, lib[q]).mean_err;
    }
    for (std::size_t q = 0; q < lib.size(); ++q) err[q].push_back(sum[q] / kCloudReplicas);
  }
  Outcome o{true, ""};
  double worst_ratio = 0;
  for (std::size_t q = 0; q < lib.size(); ++q) {
    const auto& e = err[q];
    if (lib[q].id == "one") {
      for (double x : e) o.pass = o.pass && x == 0.0;
      continue;
    }
    for (std::size_t k = 1; k < e.size(); ++k) o.pass = o.pass && e[k] < e[k - 1];
    o.pass = o.pass && e.back() < 0.5 * e.front();
    worst_ratio = std::max(worst_ratio, e.back() / e.front());
  }
  o.detail = std::to_string(lib.size()) + " functions, worst final/initial " + fmt("%.3f", worst_ratio);
  if (!o.pass) {
    for (std::size_t q = 0; q < lib.size(); ++q) {
      o.detail += "\n      " + lib[q].id + ":";
      for (double x : err[q]) o.detail += " " + fmt("%.3e", x);
    }
  }
  return o;
}

Outcome generator_convergence() {
  auto a = generator_sweep(circle_sweep(), {32, 128, 512, 2048, 8192});
  auto b = generator_sweep(sphere_sweep(), {64, 256, 1024, 4096});
  return {a.pass && b.pass, "S1: " + a.detail + "; S2: " + b.detail};
}

Outcome kantorovich_decay() {
  bool ok = true;
  double worst = 0;
  for (std::size_t N : dyadic(0, 14)) {
    const double w = wasserstein1(sample_cloud(Manifold::circle(), N, kSeed)).value;
    const double bound = 3.0 * std::pow(double(N), -1.0 / 3.0);
    ok = ok && w <= bound;
    worst = std::max(worst, w / bound);
  }
  return {ok, "max W1 / (3 N^-1/3) = " + fmt("%.3f", worst)};
}

Outcome connectivity() {
  bool ok = true;
  std::string detail;
  for (Sweep* s : {&circle_sweep(), &sphere_sweep()}) {
    for (std::size_t N : {512, 1024, 2048, 4096}) {
      const auto c = check_connected(s->grid(N));
      ok = ok && c.connected;
      if (!c.connected) detail += " " + s->m.name() + " N=" + std::to_string(N) + " disconnected";
    }
  }
  return {ok, detail.empty() ? "8 grids connected" : detail};
}

Outcome invariance_principle() {
  const Manifold s = Manifold::sphere2();
  const Point p0{{0.0, 0.6, 0.8}};
  const TestFunction y10 = find_test_function(s, "Y1,0");
  const std::vector<double> times{0.25, 0.5, 1.0};
  const auto stats = walk_ensemble(s, p0, 200.0, uniform_sphere_step(s, std::sqrt(2.0)), times, {y10}, 20000, kSeed);
  Outcome o{true, ""};
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double oracle = std::exp(-times[k]) * y10.eval(p0);
    const double gap = std::abs(stats.mean[0][k] - oracle);
    o.pass = o.pass && gap <= 4 * stats.std_error[0][k] + 0.02;
    o.detail += "t=" + fmt("%g", times[k]) + " gap " + fmt("%.4f", gap) + " se " + fmt("%.4f", stats.std_error[0][k]) + "; ";
  }
  return o;
}

Outcome canonical_validators() {
  Rng rng(kSeed);
  const Manifold s = Manifold::sphere2(), t = Manifold::flat_torus(2);
  const auto r2 = check_canonical(s, uniform_sphere_step(s, std::sqrt(2.0)), Point{{0.0, 0.6, 0.8}}, 40000, rng);
  const auto r3 = check_canonical(t, product_counterexample_step(t), Point{{0.3, 0.7, 0}}, 40000, rng);
  const auto rb = check_canonical(s, biased_step(s), Point{{1, 0, 0}}, 40000, rng);
  const bool c2 = r2.pass && std::abs(r2.c_hat - 1) <= 4 * r2.c_hat_stderr;
  const bool c3 = r3.pass && std::abs(r3.c_hat - 1) <= 4 * r3.c_hat_stderr;
  return {c2 && c3 && !rb.pass, "uniform c_hat " + fmt("%.4f", r2.c_hat) + ", product c_hat " + fmt("%.4f", r3.c_hat) +
                                    ", biased " + (rb.pass ? "PASS" : "FAIL")};
}

Outcome single_particle_exactness() {
  const std::size_t N = 64, start = 5;
  const auto r = regular_circle_cloud(N);
  const EdgeTable table(r.grid);
  const Manifold c = Manifold::circle();
  const std::vector<TestFunction> phis{find_test_function(c, "cos1"), find_test_function(c, "sin1")};
  std::vector<SiteObservable> obs;
  for (const auto& f : phis) obs.push_back(site_observable(r.grid.cloud, f));
  SepOptions opt;
  opt.record_times = {0.005, 0.01, 0.02};
  opt.t_end = 0.02;
  const auto runs = run_replicas(table, [&](Rng&) { return single_particle(N, start); }, obs, opt, 10000, kSeed);

  const Eigen::MatrixXd Q = oracle::cycle_generator(int(N), double(N) * N);
  Outcome o{true, ""};
  double worst = 0;
  for (std::size_t q = 0; q < phis.size(); ++q) {
    Eigen::VectorXd v(N);
    for (std::size_t i = 0; i < N; ++i) v[i] = phis[q].eval(r.grid.cloud.points[i]);
    for (std::size_t k = 0; k < opt.record_times.size(); ++k) {
      const double exact = (oracle::symmetric_expm(Q, opt.record_times[k]) * v)[start];
      std::vector<double> xs;
      for (const auto& tr : runs) xs.push_back(tr.values[q][k] * double(N));
      const auto st = sample_stats(xs);
      const double z = std::abs(st.mean - exact) / st.std_error;
      o.pass = o.pass && z <= 4.0;
      worst = std::max(worst, z);
    }
  }
  o.detail = "max |gap|/se " + fmt("%.2f", worst);
  return o;
}

Outcome hydrodynamic_limit() {
  const Manifold c = Manifold::circle();
  // Equispaced points with kernel weights: iid points add a quadrature error
  // of order 1/sqrt(N) to the initial profile that swamps the trend.
  Sweep s;
  s.m = c;
  for (std::size_t N : dyadic(10, 14)) {
    s.clouds.emplace(N, regular_circle_cloud(N).cloud);
    s.curve.emplace_back(N, wasserstein1(s.clouds.at(N)).value);
  }
  auto rho0 = [](const Point& p) { return 0.5 * (1 + std::cos(p.x[0])); };
  const SpectralField f0 = project(rho0, c);
  const std::vector<TestFunction> phis{find_test_function(c, "cos1"), find_test_function(c, "sin1"),
                                       find_test_function(c, "cos2")};
  SepOptions opt;
  opt.t_end = 1.0;
  for (int k = 0; k <= 20; ++k) opt.record_times.push_back(0.05 * k);
  std::vector<double> worst;
  for (std::size_t N : {std::size_t{1} << 10, std::size_t{1} << 12, std::size_t{1} << 14}) {
    const WeightedGrid g = s.grid(N);
    const EdgeTable table(g);
    std::vector<SiteObservable> obs;
    for (const auto& f : phis) obs.push_back(site_observable(g.cloud, f));
    Rng rng = make_stream(kSeed, N);
    const auto tr = simulate(init_bernoulli(g.cloud, rho0, rng), table, obs, opt, rng);
    double w = 0;
    for (std::size_t q = 0; q < phis.size(); ++q)
      for (std::size_t k = 0; k < opt.record_times.size(); ++k)
        w = std::max(w, std::abs(tr.values[q][k] - pair(evolve(f0, opt.record_times[k], Diffusivity::One), phis[q])));
    worst.push_back(w);
  }
  const bool ok = worst[1] < worst[0] && worst[2] < worst[1] && worst[2] <= 0.02;
  return {ok, "max error " + fmt("%.4f", worst[0]) + " -> " + fmt("%.4f", worst[1]) + " -> " + fmt("%.4f", worst[2])};
}

Outcome martingale_suite() {
  const Manifold c = Manifold::circle();
  const TestFunction phi = find_test_function(c, "cos1");
  const std::vector<std::size_t> sizes{256, 512, 1024};
  Sweep s = make_sweep(c, sizes, kSeed);
  auto rho0 = [](const Point& p) { return 0.5 * (1 + std::cos(p.x[0])); };
  SepOptions opt;
  opt.t_end = 1.0;
  opt.record_times = {0.0, 1.0};
  Outcome o{true, ""};
  double prev_qv = INFINITY;
  for (std::size_t N : sizes) {
    const WeightedGrid g = s.grid(N);
    const EdgeTable table(g);
    const std::vector<SiteObservable> obs{site_observable(g.cloud, phi), site_generator(g, phi)};
    const auto runs =
        run_replicas(table, [&](Rng& r) { return init_bernoulli(g.cloud, rho0, r); }, obs, opt, 1000, kSeed + N);
    std::vector<double> mt;
    for (const auto& tr : runs) mt.push_back(dynkin_from_trace(tr, phi.id).back());
    const auto st = sample_stats(mt);
    const double qv = qv_bound(g, phi, opt.t_end);
    o.pass = o.pass && std::abs(st.mean) <= 4 * st.std_error && st.variance <= qv && qv < prev_qv;
    prev_qv = qv;
    o.detail += "N=" + std::to_string(N) + " mean " + fmt("%.2e", st.mean) + " se " + fmt("%.1e", st.std_error) +
                " var " + fmt("%.3e", st.variance) + " qv " + fmt("%.3e", qv) + "; ";
  }
  return o;
}

Outcome exclusion_invariants() {
  const Manifold c = Manifold::circle();
  auto cloud = sample_cloud(c, 512, kSeed);
  const WeightedGrid g = normalize(build_weights(cloud, 0.3, default_kernel()));
  const EdgeTable table(g);
  Rng rng(kSeed);
  SepOptions opt;
  opt.t_end = 1.05e6 / table.total_rate();
  opt.journal = true;
  opt.validate_every = 1;
  const auto c0 = init_bernoulli(cloud, [](const Point& p) { return 0.5 * (1 + std::sin(p.x[0])); }, rng);
  std::size_t violations = 0;
  ObservableTrace tr;
  try {
    tr = simulate(c0, table, {}, opt, rng);
  } catch (const std::logic_error& e) {
    return {false, std::string("simulator assert: ") + e.what()};
  }
  // Independent replay: every intermediate state is a 0/1 vector with the
  // initial particle count.
  Configuration s = tr.journal->initial;
  for (const auto& ev : tr.journal->events) {
    const Edge& e = g.edges[ev.edge];
    std::swap(s.occupancy[e.i], s.occupancy[e.j]);
    std::size_t count = 0;
    bool binary = true;
    for (auto x : s.occupancy) {
      count += x;
      binary = binary && x <= 1;
    }
    if (!binary || count != c0.particle_count) ++violations;
  }
  std::size_t final_count = 0;
  for (auto x : s.occupancy) {
    final_count += x;
    if (x > 1) ++violations;
  }
  if (final_count != c0.particle_count || s.occupancy != tr.final_state.occupancy) ++violations;
  return {tr.event_count >= 1000000 && violations == 0,
          std::to_string(tr.event_count) + " events, " + std::to_string(violations) + " violations"};
}

Outcome volume_density() {
  std::vector<double> radii;
  for (int k = 1; k <= 50; ++k) radii.push_back(0.01 * k);
  const auto rows = volume_density_expansion_check(Manifold::sphere2(), Point{{0, 0, 1}}, radii);
  bool ok = rows.size() == radii.size();
  double worst = 0;
  for (const auto& r : rows) {
    const double exact = std::sin(r.radius) / r.radius;
    const double dev = std::abs(exact - (1 - r.radius * r.radius / 6));
    ok = ok && r.within_bound && std::abs(r.sqrt_det_g - exact) <= 1e-12 && dev <= 0.05 * std::pow(r.radius, 4);
    worst = std::max(worst, dev / std::pow(r.radius, 4));
  }
  return {ok, "max deviation / r^4 = " + fmt("%.4f", worst)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> checks{
      {"regular circle Laplacian, second order", regular_circle_laplacian},
      {"limiting constants 1/160 and 1/(24 pi)", limiting_constants},
      {"kernel-grid generator convergence", generator_convergence},
      {"W1 decay on the circle", kantorovich_decay},
      {"connectivity under the bandwidth schedule", connectivity},
      {"invariance principle on the sphere", invariance_principle},
      {"canonical step validators", canonical_validators},
      {"single particle vs matrix exponential", single_particle_exactness},
      {"hydrodynamic limit on the circle", hydrodynamic_limit},
      {"Dynkin martingale and quadratic variation", martingale_suite},
      {"conservation and exclusion over 1e6 events", exclusion_invariants},
      {"sphere volume density in normal coordinates", volume_density},
  };
  int failed = 0;
  for (std::size_t k = 0; k < checks.size(); ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = checks[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failed;
    std::printf("%s  [%2zu] %-46s %7.1fs  %s\n", o.pass ? "PASS" : "FAIL", k + 1, checks[k].first.c_str(), secs,
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu passed\n", int(checks.size()) - failed, checks.size());
  return failed ? 1 : 0;
}

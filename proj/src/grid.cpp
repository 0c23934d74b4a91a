#include "geosep/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "geosep/neighbors.hpp"
#include "geosep/union_find.hpp"

namespace geosep {

Kernel default_kernel() {
  Kernel k;
  k.id = "hat";
  k.eval = [](double x) { return x >= 0.0 && x <= 1.0 ? 1.0 - x : 0.0; };
  k.lipschitz_const = 1.0;
  k.support_radius = 1.0;
  k.positivity_radius = 1.0;
  return k;
}

Kernel scaled_kernel(const Kernel& k, double factor) {
  if (!(factor > 0.0)) throw std::invalid_argument("kernel scale factor must be positive");
  Kernel s = k;
  s.id = k.id + "*" + std::to_string(factor);
  s.eval = [f = k.eval, factor](double x) { return factor * f(x); };
  s.lipschitz_const = factor * k.lipschitz_const;
  return s;
}

Kernel dilated_kernel(const Kernel& k, double s) {
  if (!(s > 0.0)) throw std::invalid_argument("kernel dilation must be positive");
  Kernel d = k;
  d.id = k.id + "/" + std::to_string(s);
  d.eval = [f = k.eval, s](double x) { return f(x / s); };
  d.lipschitz_const = k.lipschitz_const / s;
  d.support_radius = k.support_radius * s;
  d.positivity_radius = k.positivity_radius * s;
  return d;
}

std::string to_string(CloudProvenance p) {
  switch (p) {
    case CloudProvenance::IidUniform: return "iid-uniform";
    case CloudProvenance::RegularCircle: return "regular-circle";
    case CloudProvenance::File: return "file";
  }
  return {};
}

PointCloud sample_cloud(const Manifold& m, std::size_t N, std::uint64_t seed) {
  PointCloud c;
  c.manifold = m;
  c.provenance = CloudProvenance::IidUniform;
  c.seed = seed;
  c.points.reserve(N);
  Rng rng(stream_seed(seed, 0));
  for (std::size_t i = 0; i < N; ++i) c.points.push_back(m.sample_uniform(rng));
  return c;
}

std::vector<std::size_t> WeightedGrid::degrees() const {
  std::vector<std::size_t> deg(size(), 0);
  for (const auto& e : edges) {
    ++deg[e.i];
    ++deg[e.j];
  }
  return deg;
}

double WeightedGrid::mean_degree() const {
  return size() == 0 ? 0.0 : 2.0 * static_cast<double>(edges.size()) / size();
}

namespace {

WeightedGrid empty_grid(const PointCloud& cloud, double epsilon, const Kernel& k) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (cloud.size() > UINT32_MAX) throw std::invalid_argument("cloud too large");
  WeightedGrid g;
  g.cloud = cloud;
  g.epsilon = epsilon;
  g.kernel_id = k.id;
  const int d = cloud.manifold.dim();
  g.a_scaling = std::pow(epsilon, -2.0 - d) / static_cast<double>(std::max<std::size_t>(cloud.size(), 1));
  g.limiting_constant = limiting_constant_op(k, cloud.manifold);
  g.metric_scale = 1.0;
  g.normalized = false;
  return g;
}

}  // namespace

WeightedGrid build_weights(const PointCloud& cloud, double epsilon, const Kernel& k) {
  WeightedGrid g = empty_grid(cloud, epsilon, k);
  const std::size_t n = cloud.size();
  const Manifold& m = cloud.manifold;
  const double radius = k.support_radius * epsilon;
  NeighborIndex index(m, cloud.points, radius);
  std::vector<std::vector<Edge>> rows(n);
  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic, 64)
  for (std::int64_t ii = 0; ii < count; ++ii) {
    const auto i = static_cast<std::uint32_t>(ii);
    auto& row = rows[i];
    const Point& p = cloud.points[i];
    index.for_each_candidate(p, [&](std::uint32_t j) {
      if (j <= i) return;
      double w = k.eval(m.distance(p, cloud.points[j]) / epsilon);
      if (w > 0.0) row.push_back({i, j, w});
    });
    std::sort(row.begin(), row.end(), [](const Edge& a, const Edge& b) { return a.j < b.j; });
  }
  std::size_t total = 0;
  for (const auto& row : rows) total += row.size();
  g.edges.reserve(total);
  for (auto& row : rows) {
    g.edges.insert(g.edges.end(), row.begin(), row.end());
    std::vector<Edge>().swap(row);
  }
  return g;
}

WeightedGrid build_weights_serial(const PointCloud& cloud, double epsilon, const Kernel& k) {
  WeightedGrid g = empty_grid(cloud, epsilon, k);
  const Manifold& m = cloud.manifold;
  const auto n = static_cast<std::uint32_t>(cloud.size());
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = i + 1; j < n; ++j) {
      double w = k.eval(m.distance(cloud.points[i], cloud.points[j]) / epsilon);
      if (w > 0.0) g.edges.push_back({i, j, w});
    }
  }
  return g;
}

WeightedGrid normalize(WeightedGrid g) {
  if (g.normalized) return g;
  if (!(g.limiting_constant > 0.0)) throw std::invalid_argument("grid has no limiting constant");
  g.a_scaling /= g.limiting_constant;
  g.normalized = true;
  return g;
}

double limiting_constant_op(const Kernel& k, const Manifold& m) {
  const double n = m.dim();
  const double prefactor =
      std::pow(std::numbers::pi, n / 2.0) / (m.volume() * n * std::tgamma(n / 2.0));
  auto integrand = [&](double r) { return k.eval(r) * std::pow(r, n + 1.0); };
  double error = 0.0;
  double integral = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      integrand, 0.0, k.support_radius, 20, 1e-15, &error);
  return prefactor * integral;
}

Connectivity check_connected(const WeightedGrid& g) {
  UnionFind uf(g.size());
  for (const auto& e : g.edges) {
    if (e.w > 0.0) uf.unite(e.i, e.j);
  }
  return {uf.components() <= 1, uf.components()};
}

std::vector<double> evaluate(const PointCloud& cloud, const std::function<double(const Point&)>& f) {
  std::vector<double> v(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) v[i] = f(cloud.points[i]);
  return v;
}

std::vector<double> graph_laplacian_apply(const WeightedGrid& g, std::span<const double> phi) {
  const std::size_t n = g.size();
  if (phi.size() != n) throw std::invalid_argument("graph_laplacian_apply: size mismatch");
  const std::size_t m = g.edges.size();
  // Edges are sorted by (i, j): node x owns the contiguous range with i == x
  // and is the j endpoint of the edges listed in `lower`. Each node sums its
  // terms in a fixed order, so the result does not depend on thread count.
  std::vector<std::size_t> upper(n + 1, 0), lower_start(n + 1, 0);
  for (const auto& e : g.edges) {
    ++upper[e.i + 1];
    ++lower_start[e.j + 1];
  }
  for (std::size_t x = 0; x < n; ++x) {
    upper[x + 1] += upper[x];
    lower_start[x + 1] += lower_start[x];
  }
  std::vector<std::uint32_t> lower(m);
  {
    std::vector<std::size_t> fill(lower_start.begin(), lower_start.end() - 1);
    for (std::size_t k = 0; k < m; ++k) lower[fill[g.edges[k].j]++] = static_cast<std::uint32_t>(k);
  }
  std::vector<double> out(n, 0.0);
  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
  for (std::int64_t x = 0; x < count; ++x) {
    double s = 0.0;
    for (std::size_t k = upper[x]; k < upper[x + 1]; ++k) {
      const Edge& e = g.edges[k];
      s += e.w * (phi[e.j] - phi[x]);
    }
    for (std::size_t q = lower_start[x]; q < lower_start[x + 1]; ++q) {
      const Edge& e = g.edges[lower[q]];
      s += e.w * (phi[e.i] - phi[x]);
    }
    out[x] = g.a_scaling * s;
  }
  return out;
}

std::vector<double> graph_laplacian_apply(const WeightedGrid& g, const TestFunction& phi) {
  auto values = evaluate(g.cloud, phi.eval);
  return graph_laplacian_apply(g, values);
}

std::vector<double> graph_laplacian_apply_serial(const WeightedGrid& g, std::span<const double> phi) {
  const std::size_t n = g.size();
  if (phi.size() != n) throw std::invalid_argument("graph_laplacian_apply: size mismatch");
  std::vector<double> out(n, 0.0);
  for (const auto& e : g.edges) {
    double d = e.w * (phi[e.j] - phi[e.i]);
    out[e.i] += d;
    out[e.j] -= d;
  }
  for (double& x : out) x *= g.a_scaling;
  return out;
}

ConvergenceError convergence_error(const WeightedGrid& g, const TestFunction& phi) {
  if (!(g.limiting_constant > 0.0)) throw std::invalid_argument("grid has no limiting constant");
  auto lap = graph_laplacian_apply(g, phi);
  const double c = g.target_constant();
  ConvergenceError err;
  for (std::size_t i = 0; i < g.size(); ++i) {
    double e = std::abs(lap[i] - c * phi.laplacian(g.cloud.points[i]));
    err.mean_err += e;
    err.sup_err = std::max(err.sup_err, e);
  }
  if (g.size() > 0) err.mean_err /= static_cast<double>(g.size());
  return err;
}

RegularCircleGrid regular_circle_cloud(std::size_t N) {
  if (N < 3) throw std::invalid_argument("regular_circle_cloud: need N >= 3");
  const Manifold circle = Manifold::circle();
  RegularCircleGrid out;
  out.cloud.manifold = circle;
  out.cloud.provenance = CloudProvenance::RegularCircle;
  for (std::size_t k = 1; k <= N; ++k) {
    Point p;
    p.x[0] = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(N);
    out.cloud.points.push_back(circle.canonical(p));
  }
  WeightedGrid& g = out.grid;
  g.cloud = out.cloud;
  g.epsilon = 2.0 * std::numbers::pi / static_cast<double>(N);
  g.kernel_id = "nearest_neighbour";
  // Point k sits at index k-1, so index N-1 is the origin and neighbours index 0.
  const auto n = static_cast<std::uint32_t>(N);
  g.edges.push_back({0, 1, 1.0});
  g.edges.push_back({0, n - 1, 1.0});
  for (std::uint32_t i = 1; i + 1 < n; ++i) g.edges.push_back({i, i + 1, 1.0});
  g.a_scaling = static_cast<double>(N) * static_cast<double>(N);
  g.limiting_constant = 1.0;
  g.metric_scale = 4.0 * std::numbers::pi * std::numbers::pi;
  g.normalized = true;
  return out;
}

double epsilon_schedule(const std::vector<std::pair<std::size_t, double>>& w1_curve, int d,
                        std::size_t N) {
  bool found = false;
  double sup = 0.0;
  for (const auto& [size, w1] : w1_curve) {
    if (size == N) found = true;
    if (size >= N) sup = std::max(sup, w1);
  }
  if (!found) throw std::invalid_argument("epsilon_schedule: N was not measured");
  const double floor = kEpsilonFloorConstant * std::pow(static_cast<double>(N), -1.0 / (d + 2.0));
  return std::pow(std::max(sup, floor), 1.0 / (4.0 + d));
}

}  // namespace geosep

#include "geosep/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "geosep/neighbors.hpp"

namespace geosep {

ReferenceDiscretization reference_discretization(const Manifold& m, std::size_t min_cells) {
  if (min_cells == 0) throw std::invalid_argument("reference_discretization: need at least one cell");
  ReferenceDiscretization ref;
  switch (m.kind()) {
    case ManifoldKind::Circle: {
      const double width = 2.0 * std::numbers::pi / static_cast<double>(min_cells);
      for (std::size_t k = 0; k < min_cells; ++k) {
        ref.atoms.push_back(m.canonical(Point{{(k + 0.5) * width, 0.0, 0.0}}));
        ref.weights.push_back(1.0 / static_cast<double>(min_cells));
      }
      ref.cell_diameter = width;
      break;
    }
    case ManifoldKind::FlatTorus: {
      const int d = m.dim();
      auto per_axis = static_cast<std::size_t>(
          std::ceil(std::pow(static_cast<double>(min_cells), 1.0 / d) - 1e-9));
      while (std::pow(static_cast<double>(per_axis), d) < static_cast<double>(min_cells)) ++per_axis;
      std::size_t total = 1;
      for (int a = 0; a < d; ++a) total *= per_axis;
      for (std::size_t idx = 0; idx < total; ++idx) {
        Point p;
        std::size_t rest = idx;
        for (int a = 0; a < d; ++a) {
          p.x[a] = (static_cast<double>(rest % per_axis) + 0.5) / static_cast<double>(per_axis);
          rest /= per_axis;
        }
        ref.atoms.push_back(p);
        ref.weights.push_back(1.0 / static_cast<double>(total));
      }
      ref.cell_diameter = std::sqrt(static_cast<double>(d)) / static_cast<double>(per_axis);
      break;
    }
    case ManifoldKind::Sphere2: {
      auto n_theta = static_cast<std::size_t>(std::ceil(std::sqrt(min_cells / 2.0)));
      while (2 * n_theta * n_theta < min_cells) ++n_theta;
      const std::size_t n_phi = 2 * n_theta;
      const double d_theta = std::numbers::pi / static_cast<double>(n_theta);
      const double d_phi = 2.0 * std::numbers::pi / static_cast<double>(n_phi);
      for (std::size_t a = 0; a < n_theta; ++a) {
        const double t0 = a * d_theta;
        const double t1 = (a + 1) * d_theta;
        const double tm = 0.5 * (t0 + t1);
        const double mass = d_phi * (std::cos(t0) - std::cos(t1)) / (4.0 * std::numbers::pi);
        for (std::size_t b = 0; b < n_phi; ++b) {
          const double ph = (b + 0.5) * d_phi;
          ref.atoms.push_back(
              Point{{std::sin(tm) * std::cos(ph), std::sin(tm) * std::sin(ph), std::cos(tm)}});
          ref.weights.push_back(mass);
        }
      }
      // Walk along the parallel (<= d_phi), then along the meridian (<= d_theta).
      ref.cell_diameter = d_theta + d_phi;
      break;
    }
  }
  return ref;
}

namespace {

struct Bounds {
  double primal;
  double dual;
};

struct CandidatePairs {
  std::vector<std::size_t> col_start;
  std::vector<std::uint32_t> col_src;
  std::vector<double> col_cost;
  std::vector<std::size_t> row_start;
  std::vector<std::uint32_t> row_dst;
  std::vector<double> row_cost;
  std::vector<std::size_t> col_to_row;  // position of column entry k in the row arrays
  bool covers_all = true;
};

CandidatePairs collect_pairs(const Manifold& m, std::span<const Point> sources,
                             std::span<const Point> targets, double radius) {
  CandidatePairs c;
  NeighborIndex index(m, sources, radius);
  const std::size_t nt = targets.size();
  const std::size_t ns = sources.size();
  std::vector<std::vector<std::pair<std::uint32_t, double>>> per_target(nt);
  const auto count = static_cast<std::int64_t>(nt);
#pragma omp parallel for schedule(dynamic, 256)
  for (std::int64_t jj = 0; jj < count; ++jj) {
    auto& list = per_target[jj];
    index.for_each_candidate(targets[jj], [&](std::uint32_t i) {
      double d = m.distance(sources[i], targets[jj]);
      if (d <= radius) list.emplace_back(i, d);
    });
    std::sort(list.begin(), list.end());
  }
  c.col_start.assign(nt + 1, 0);
  std::vector<std::size_t> row_count(ns + 1, 0);
  for (std::size_t j = 0; j < nt; ++j) {
    c.col_start[j + 1] = c.col_start[j] + per_target[j].size();
    if (per_target[j].empty()) c.covers_all = false;
    for (const auto& [i, d] : per_target[j]) ++row_count[i + 1];
  }
  c.col_src.reserve(c.col_start[nt]);
  c.col_cost.reserve(c.col_start[nt]);
  for (auto& list : per_target) {
    for (const auto& [i, d] : list) {
      c.col_src.push_back(i);
      c.col_cost.push_back(d);
    }
    std::vector<std::pair<std::uint32_t, double>>().swap(list);
  }
  c.row_start.assign(ns + 1, 0);
  for (std::size_t i = 0; i < ns; ++i) {
    c.row_start[i + 1] = c.row_start[i] + row_count[i + 1];
    if (row_count[i + 1] == 0) c.covers_all = false;
  }
  c.row_dst.resize(c.col_src.size());
  c.row_cost.resize(c.col_src.size());
  c.col_to_row.resize(c.col_src.size());
  std::vector<std::size_t> fill(c.row_start.begin(), c.row_start.end() - 1);
  for (std::size_t j = 0; j < nt; ++j) {
    for (std::size_t k = c.col_start[j]; k < c.col_start[j + 1]; ++k) {
      std::size_t slot = fill[c.col_src[k]]++;
      c.row_dst[slot] = static_cast<std::uint32_t>(j);
      c.row_cost[slot] = c.col_cost[k];
      c.col_to_row[k] = slot;
    }
  }
  return c;
}

// One soft c-transform pass: out[r] = eta log(mass[r]) - eta LSE_k((other[k] - cost)/eta).
// Returns sum_r mass[r] |exp((out_old - out_new)/eta) - 1|, the marginal
// violation before the update.
double soft_update(std::span<const std::size_t> start, std::span<const std::uint32_t> idx,
                   std::span<const double> cost, std::span<const double> other,
                   std::span<const double> mass, std::span<double> out, double eta) {
  double err = 0.0;
  const auto n = static_cast<std::int64_t>(out.size());
#pragma omp parallel for schedule(static) reduction(+ : err)
  for (std::int64_t r = 0; r < n; ++r) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t k = start[r]; k < start[r + 1]; ++k) mx = std::max(mx, other[idx[k]] - cost[k]);
    double s = 0.0;
    for (std::size_t k = start[r]; k < start[r + 1]; ++k) s += std::exp((other[idx[k]] - cost[k] - mx) / eta);
    double updated = eta * std::log(mass[r]) - mx - eta * std::log(s);
    err += mass[r] * std::abs(std::expm1((out[r] - updated) / eta));
    out[r] = updated;
  }
  return err;
}

// Points grouped into small clusters, each with a member as centre and the
// largest centre-member distance as radius.
struct Clusters {
  std::vector<std::uint32_t> centre;
  std::vector<double> radius;
  std::vector<std::size_t> start;
  std::vector<std::uint32_t> members;
};

Clusters build_clusters(const Manifold& m, std::span<const Point> pts, std::size_t mean_size) {
  const int axes = m.coord_dim();
  const double want = std::max(1.0, static_cast<double>(pts.size()) / static_cast<double>(mean_size));
  double lo = 0.0;
  double span = 1.0;
  std::int64_t per_axis = 1;
  switch (m.kind()) {
    case ManifoldKind::Circle:
      span = 2.0 * std::numbers::pi;
      per_axis = static_cast<std::int64_t>(std::ceil(want));
      break;
    case ManifoldKind::FlatTorus:
      per_axis = static_cast<std::int64_t>(std::ceil(std::pow(want, 1.0 / axes)));
      break;
    case ManifoldKind::Sphere2:
      // Roughly 1.5 pi k^2 cubes of side 2/k meet the unit sphere.
      lo = -1.0;
      span = 2.0;
      per_axis = static_cast<std::int64_t>(std::ceil(std::sqrt(want / (1.5 * std::numbers::pi))));
      break;
  }
  per_axis = std::max<std::int64_t>(per_axis, 1);
  std::vector<std::pair<std::int64_t, std::uint32_t>> keyed(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    std::int64_t key = 0;
    for (int a = 0; a < axes; ++a) {
      auto k = static_cast<std::int64_t>(std::floor((pts[i].x[a] - lo) / span * per_axis));
      key = key * per_axis + std::clamp<std::int64_t>(k, 0, per_axis - 1);
    }
    keyed[i] = {key, static_cast<std::uint32_t>(i)};
  }
  std::sort(keyed.begin(), keyed.end());
  Clusters c;
  for (std::size_t k = 0; k < keyed.size(); ++k) {
    if (k == 0 || keyed[k].first != keyed[k - 1].first) c.start.push_back(k);
    c.members.push_back(keyed[k].second);
  }
  c.start.push_back(keyed.size());
  const std::size_t count = c.start.size() - 1;
  c.centre.resize(count);
  c.radius.resize(count);
  for (std::size_t q = 0; q < count; ++q) {
    c.centre[q] = c.members[c.start[q]];
    double r = 0.0;
    for (std::size_t k = c.start[q]; k < c.start[q + 1]; ++k) {
      r = std::max(r, m.distance(pts[c.centre[q]], pts[c.members[k]]));
    }
    c.radius[q] = r;
  }
  return c;
}

// out[q] = min_k d(queries[q], data[k]) - h[k] over all k. `out` enters holding
// an upper bound (from nearby pairs); clusters whose triangle-inequality lower
// bound cannot beat it are skipped.
void exact_c_transform(const Manifold& m, std::span<const Point> queries, std::span<const Point> data,
                       const Clusters& clusters, std::span<const double> h, std::span<double> out) {
  const std::size_t count = clusters.centre.size();
  std::vector<double> hmax(count, -std::numeric_limits<double>::infinity());
  for (std::size_t q = 0; q < count; ++q) {
    for (std::size_t k = clusters.start[q]; k < clusters.start[q + 1]; ++k) {
      hmax[q] = std::max(hmax[q], h[clusters.members[k]]);
    }
  }
  const auto nq = static_cast<std::int64_t>(queries.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::int64_t qq = 0; qq < nq; ++qq) {
    const Point& x = queries[qq];
    double best = out[qq];
    for (std::size_t c = 0; c < count; ++c) {
      double lower = m.distance(x, data[clusters.centre[c]]) - clusters.radius[c] - hmax[c] - 1e-12;
      if (lower >= best) continue;
      for (std::size_t k = clusters.start[c]; k < clusters.start[c + 1]; ++k) {
        std::uint32_t idx = clusters.members[k];
        best = std::min(best, m.distance(x, data[idx]) - h[idx]);
      }
    }
    out[qq] = best;
  }
}

// Cost of the Sinkhorn plan after scaling rows, then columns, down to the
// marginals, plus the leftover mass sent at the largest possible cost.
double primal_bound(const CandidatePairs& c, std::span<const double> a, std::span<const double> b,
                    std::span<const double> f, std::span<const double> g, double eta,
                    double max_cost) {
  const std::size_t ns = a.size();
  const std::size_t nt = b.size();
  std::vector<double> row_scale(ns, 1.0);
  for (std::size_t i = 0; i < ns; ++i) {
    double r = 0.0;
    for (std::size_t k = c.row_start[i]; k < c.row_start[i + 1]; ++k) {
      r += std::exp((f[i] + g[c.row_dst[k]] - c.row_cost[k]) / eta);
    }
    if (r > a[i]) row_scale[i] = a[i] / r;
  }
  double cost = 0.0;
  double moved = 0.0;
  for (std::size_t j = 0; j < nt; ++j) {
    double col = 0.0;
    double col_cost = 0.0;
    for (std::size_t k = c.col_start[j]; k < c.col_start[j + 1]; ++k) {
      std::uint32_t i = c.col_src[k];
      double p = row_scale[i] * std::exp((f[i] + g[j] - c.col_cost[k]) / eta);
      col += p;
      col_cost += p * c.col_cost[k];
    }
    double scale = col > b[j] ? b[j] / col : 1.0;
    cost += scale * col_cost;
    moved += scale * col;
  }
  double total = 0.0;
  for (double x : a) total += x;
  return cost + max_cost * std::max(0.0, total - moved);
}

// Sinkhorn iterations at fixed eta in scaling form: the kernel
// exp((f + g - c) / eta) is tabulated and the scalings u, v are absorbed into
// the potentials whenever they drift far from 1. Falls back to a log-domain
// sweep if a row or column sum underflows. Returns the iteration count.
std::size_t scaling_stage(const CandidatePairs& c, std::span<const double> a,
                          std::span<const double> b, std::span<double> f, std::span<double> g,
                          double eta, double tolerance, std::size_t max_iterations) {
  const std::size_t ns = a.size();
  const std::size_t nt = b.size();
  const std::size_t np = c.col_src.size();
  std::vector<double> kcol(np), krow(np);
  std::vector<double> u(ns, 1.0), v(nt, 1.0);
  auto rebuild = [&] {
    const auto cols = static_cast<std::int64_t>(nt);
#pragma omp parallel for schedule(static)
    for (std::int64_t j = 0; j < cols; ++j) {
      for (std::size_t k = c.col_start[j]; k < c.col_start[j + 1]; ++k) {
        double x = std::exp((f[c.col_src[k]] + g[j] - c.col_cost[k]) / eta);
        kcol[k] = x;
        krow[c.col_to_row[k]] = x;
      }
    }
  };
  auto absorb = [&] {
    for (std::size_t i = 0; i < ns; ++i) {
      if (u[i] > 0.0 && std::isfinite(u[i])) f[i] += eta * std::log(u[i]);
      u[i] = 1.0;
    }
    for (std::size_t j = 0; j < nt; ++j) {
      if (v[j] > 0.0 && std::isfinite(v[j])) g[j] += eta * std::log(v[j]);
      v[j] = 1.0;
    }
  };
  rebuild();
  std::size_t it = 0;
  while (it < max_iterations) {
    ++it;
    double err = 0.0;
    bool bad = false;
    const auto rows = static_cast<std::int64_t>(ns);
#pragma omp parallel for schedule(static) reduction(+ : err) reduction(|| : bad)
    for (std::int64_t i = 0; i < rows; ++i) {
      double sum = 0.0;
      for (std::size_t k = c.row_start[i]; k < c.row_start[i + 1]; ++k) sum += krow[k] * v[c.row_dst[k]];
      if (!(sum > 0.0) || !std::isfinite(sum)) {
        bad = true;
        continue;
      }
      err += std::abs(u[i] * sum - a[i]);
      u[i] = a[i] / sum;
    }
    const auto cols = static_cast<std::int64_t>(nt);
#pragma omp parallel for schedule(static) reduction(|| : bad)
    for (std::int64_t j = 0; j < cols; ++j) {
      double sum = 0.0;
      for (std::size_t k = c.col_start[j]; k < c.col_start[j + 1]; ++k) sum += kcol[k] * u[c.col_src[k]];
      if (!(sum > 0.0) || !std::isfinite(sum)) {
        bad = true;
        continue;
      }
      v[j] = b[j] / sum;
    }
    if (bad) {
      absorb();
      soft_update(c.row_start, c.row_dst, c.row_cost, g, a, f, eta);
      soft_update(c.col_start, c.col_src, c.col_cost, f, b, g, eta);
      rebuild();
      continue;
    }
    if (it > 1 && err < tolerance) break;
    if (it % 10 == 0) {
      double worst = 0.0;
      for (double x : u) worst = std::max(worst, std::abs(std::log(x)));
      for (double x : v) worst = std::max(worst, std::abs(std::log(x)));
      if (worst > 30.0) {
        absorb();
        rebuild();
      }
    }
  }
  absorb();
  return it;
}

struct SparseSide {
  std::span<const std::size_t> start;
  std::span<const std::uint32_t> idx;
  std::span<const double> cost;
};

// min over listed pairs of cost - h[other], per row of `side`.
std::vector<double> nearby_c_transform(const SparseSide& side, std::span<const double> h) {
  std::vector<double> out(side.start.size() - 1, std::numeric_limits<double>::infinity());
  for (std::size_t r = 0; r + 1 < side.start.size(); ++r) {
    for (std::size_t k = side.start[r]; k < side.start[r + 1]; ++k) {
      out[r] = std::min(out[r], side.cost[k] - h[side.idx[k]]);
    }
  }
  return out;
}

// Value of the feasible pair (u^c, u^cc) built from the potential u on `xs`
// (masses ax); ys carries masses ay. Valid for the full cost matrix.
double dual_from(const Manifold& m, std::span<const Point> xs, std::span<const Point> ys,
                 const SparseSide& x_side, const SparseSide& y_side, const Clusters& x_clusters,
                 const Clusters& y_clusters, std::span<const double> ax,
                 std::span<const double> ay, std::span<const double> u) {
  auto uc = nearby_c_transform(y_side, u);
  exact_c_transform(m, ys, xs, x_clusters, u, uc);
  auto ucc = nearby_c_transform(x_side, uc);
  exact_c_transform(m, xs, ys, y_clusters, uc, ucc);
  double dual = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) dual += ax[i] * ucc[i];
  for (std::size_t j = 0; j < ys.size(); ++j) dual += ay[j] * uc[j];
  return dual;
}

double dual_bound(const Manifold& m, const CandidatePairs& c, std::span<const Point> sources,
                  std::span<const Point> targets, const Clusters& source_clusters,
                  const Clusters& target_clusters, std::span<const double> a,
                  std::span<const double> b, std::span<const double> f, std::span<const double> g) {
  SparseSide rows{c.row_start, c.row_dst, c.row_cost};
  SparseSide cols{c.col_start, c.col_src, c.col_cost};
  return std::max(
      dual_from(m, sources, targets, rows, cols, source_clusters, target_clusters, a, b, f),
      dual_from(m, targets, sources, cols, rows, target_clusters, source_clusters, b, a, g));
}

double unit_ball_volume(int d) {
  return std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0 + 1.0);
}

}  // namespace

TransportBounds sinkhorn_transport(const Manifold& m, std::span<const Point> sources,
                                   std::span<const double> source_mass,
                                   std::span<const Point> targets,
                                   std::span<const double> target_mass,
                                   const SinkhornOptions& options) {
  if (sources.empty() || targets.empty()) throw std::invalid_argument("sinkhorn_transport: empty measure");
  if (sources.size() != source_mass.size() || targets.size() != target_mass.size()) {
    throw std::invalid_argument("sinkhorn_transport: mass vector size mismatch");
  }
  const int d = m.dim();
  const double max_cost = m.diameter();
  double radius = std::pow(options.neighbours_per_target * m.volume() /
                               (unit_ball_volume(d) * static_cast<double>(sources.size())),
                           1.0 / d);
  radius = std::min(radius, max_cost);

  TransportBounds best;
  best.primal = std::numeric_limits<double>::infinity();
  best.dual = -std::numeric_limits<double>::infinity();
  std::size_t total_iterations = 0;

  std::vector<double> f;
  std::vector<double> g;
  double last_eta = 0.0;
  const Clusters source_clusters = build_clusters(m, sources, 8);
  const Clusters target_clusters = build_clusters(m, targets, 16);

  for (int attempt = 0; attempt <= options.max_radius_doublings; ++attempt) {
    CandidatePairs pairs = collect_pairs(m, sources, targets, radius);
    if (!pairs.covers_all) {
      if (radius >= max_cost) break;
      radius = std::min(2.0 * radius, max_cost);
      continue;
    }
    // After a radius doubling the potentials are kept and annealing resumes
    // a little above where it stalled.
    double eta = f.empty() ? radius / 4.0 : 4.0 * last_eta;
    f.resize(sources.size(), 0.0);
    g.resize(targets.size(), 0.0);
    const double eta_floor = radius * 1e-5;
    // Marginal error at which a stage stops; the rounding step charges at most
    // max_cost times this, so it is tied to the best primal value so far.
    double tolerance = 1e-3;
    double stage_primal = std::numeric_limits<double>::infinity();
    bool done = false;
    while (!done) {
      total_iterations += scaling_stage(pairs, source_mass, target_mass, f, g, eta, tolerance,
                                        options.max_iterations_per_stage);
      Bounds bnd{primal_bound(pairs, source_mass, target_mass, f, g, eta, max_cost),
                 dual_bound(m, pairs, sources, targets, source_clusters, target_clusters,
                            source_mass, target_mass, f, g)};
      if (bnd.primal < best.primal) best.primal = bnd.primal;
      tolerance = std::max(1e-8, 0.01 * best.primal / max_cost);
      if (bnd.dual > best.dual) {
        best.dual = bnd.dual;
        best.radius = radius;
      }
      best.candidate_pairs = pairs.col_src.size();
      const double gap = (best.primal - best.dual) / std::max(best.primal, 1e-300);
      if (gap <= options.max_relative_gap) {
        best.relative_gap = gap;
        best.iterations = total_iterations;
        return best;
      }
      // A stalled primal with an open gap: the radius is too small.
      if (bnd.primal > (1.0 - 1e-2) * stage_primal) done = true;
      stage_primal = std::min(stage_primal, bnd.primal);
      last_eta = eta;
      eta *= 0.5;
      if (eta < eta_floor) done = true;
    }
    if (radius >= max_cost) break;
    radius = std::min(2.0 * radius, max_cost);
  }
  best.relative_gap = (best.primal - best.dual) / std::max(best.primal, 1e-300);
  best.iterations = total_iterations;
  return best;
}

double circle_w1_exact(std::span<const Point> points) {
  if (points.empty()) throw std::invalid_argument("circle_w1_exact: empty cloud");
  const std::size_t n = points.size();
  std::vector<double> x(n);
  for (std::size_t k = 0; k < n; ++k) x[k] = points[k].x[0] / (2.0 * std::numbers::pi);
  std::sort(x.begin(), x.end());
  // Segment k is [x_k, x_{k+1}) with x_0 = 0, x_{n+1} = 1 and F_N = k/n on it;
  // h(x) = F_N(x) - x is linear there.
  std::vector<double> lo(n + 1), hi(n + 1), level(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    lo[k] = k == 0 ? 0.0 : x[k - 1];
    hi[k] = k == n ? 1.0 : x[k];
    level[k] = static_cast<double>(k) / static_cast<double>(n);
  }
  // Lebesgue measure of {h < s}; nondecreasing in s.
  auto below = [&](double s) {
    double total = 0.0;
    for (std::size_t k = 0; k <= n; ++k) {
      double from = std::max(lo[k], level[k] - s);
      total += std::max(0.0, hi[k] - from);
    }
    return total;
  };
  double s_lo = -1.0;
  double s_hi = 1.0;
  for (int it = 0; it < 200 && s_hi - s_lo > 1e-17; ++it) {
    double mid = 0.5 * (s_lo + s_hi);
    (below(mid) < 0.5 ? s_lo : s_hi) = mid;
  }
  const double s = 0.5 * (s_lo + s_hi);
  double integral = 0.0;
  for (std::size_t k = 0; k <= n; ++k) {
    const double u = lo[k];
    const double v = hi[k];
    if (v <= u) continue;
    const double root = level[k] - s;  // where level - x - s changes sign
    if (root <= u) {
      integral += ((v - root) * (v - root) - (u - root) * (u - root)) / 2.0;
    } else if (root >= v) {
      integral += ((root - u) * (root - u) - (root - v) * (root - v)) / 2.0;
    } else {
      integral += ((root - u) * (root - u) + (v - root) * (v - root)) / 2.0;
    }
  }
  return 2.0 * std::numbers::pi * integral;
}

W1Estimate wasserstein1(const PointCloud& cloud, const W1Options& options) {
  if (cloud.size() == 0) throw std::invalid_argument("wasserstein1: empty cloud");
  W1Estimate est;
  if (cloud.manifold.kind() == ManifoldKind::Circle) {
    est.value = circle_w1_exact(cloud.points);
    est.transport_cost = est.value;
    est.dual_bound = est.value;
    est.exact = true;
    return est;
  }
  auto ref = reference_discretization(cloud.manifold, options.cell_factor * cloud.size());
  std::vector<double> mass(cloud.size(), 1.0 / static_cast<double>(cloud.size()));
  auto bounds = sinkhorn_transport(cloud.manifold, cloud.points, mass, ref.atoms, ref.weights,
                                   options.sinkhorn);
  est.transport_cost = bounds.primal;
  est.dual_bound = bounds.dual;
  est.relative_gap = bounds.relative_gap;
  est.cell_slack = ref.cell_diameter;
  est.reference_cells = ref.atoms.size();
  est.value = bounds.primal + ref.cell_diameter;
  return est;
}

}  // namespace geosep

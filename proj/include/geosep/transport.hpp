#pragma once

#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "geosep/grid.hpp"

namespace geosep {

/// Finite discretization of the normalized volume: `atoms[k]` lies inside a
/// cell of mass `weights[k]`, and every cell has diameter <= cell_diameter.
struct ReferenceDiscretization {
  std::vector<Point> atoms;
  std::vector<double> weights;
  double cell_diameter = 0.0;
};

/// Equal arcs on the circle, equal cubes on the torus, and a latitude-longitude
/// grid with exact area weights on the sphere. At least `min_cells` cells.
ReferenceDiscretization reference_discretization(const Manifold& m, std::size_t min_cells);

struct SinkhornOptions {
  /// Target (primal - dual) / primal.
  double max_relative_gap = 0.05;
  /// Mean number of candidate sources per target for the first radius.
  double neighbours_per_target = 48.0;
  std::size_t max_iterations_per_stage = 2000;
  int max_radius_doublings = 6;
};

/// Certified bounds on the optimal transport cost between two discrete
/// measures with geodesic cost. `primal` is the cost of a feasible coupling,
/// `dual` the value of a feasible dual pair, so dual <= OT <= primal.
struct TransportBounds {
  double primal = 0.0;
  double dual = 0.0;
  double relative_gap = 0.0;
  double radius = 0.0;
  std::size_t iterations = 0;
  std::size_t candidate_pairs = 0;
};

/// Log-domain entropic transport restricted to pairs within a search radius,
/// annealed in the regularization. The primal plan is rounded onto the exact
/// marginals; the dual is made feasible for the full cost matrix by exact
/// c-transforms over all pairs, pruned with clustered lower bounds.
TransportBounds sinkhorn_transport(const Manifold& m, std::span<const Point> sources,
                                   std::span<const double> source_mass,
                                   std::span<const Point> targets,
                                   std::span<const double> target_mass,
                                   const SinkhornOptions& options = {});

/// W1 on the circle of circumference 2pi between the empirical measure of the
/// angles and the uniform law: 2pi min_s int_0^1 |F_N(x) - x - s| dx, integrated
/// exactly segment by segment.
double circle_w1_exact(std::span<const Point> points);

struct W1Options {
  std::size_t cell_factor = 16;
  SinkhornOptions sinkhorn;
};

struct W1Estimate {
  /// Exact value on the circle; elsewhere an upper bound equal to
  /// transport_cost + cell_slack.
  double value = 0.0;
  double transport_cost = 0.0;
  double dual_bound = 0.0;
  double cell_slack = 0.0;
  double relative_gap = 0.0;
  std::size_t reference_cells = 0;
  bool exact = false;
};

/// W1(mu^N, normalized volume) for the cloud's empirical measure. Throws
/// std::invalid_argument for an empty cloud.
W1Estimate wasserstein1(const PointCloud& cloud, const W1Options& options = {});

/// Converts a circle distance in the native chart to the unit-circumference
/// chart used by the regular circle grid.
inline double to_unit_circumference(double native) { return native / (2.0 * std::numbers::pi); }

}  // namespace geosep

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "geosep/manifold.hpp"

namespace geosep {

/// Lipschitz, compactly supported radial profile k: [0, inf) -> [0, inf).
struct Kernel {
  std::string id;
  std::function<double(double)> eval;
  double lipschitz_const = 0.0;
  double support_radius = 0.0;     // eval(x) = 0 for x > support_radius
  double positivity_radius = 0.0;  // eval(x) > 0 for x < positivity_radius
};

/// k(x) = (1 - x) on [0, 1], zero beyond.
Kernel default_kernel();
/// factor * k.
Kernel scaled_kernel(const Kernel& k, double factor);
/// x -> k(x / s); support and positivity radii grow by s.
Kernel dilated_kernel(const Kernel& k, double s);

enum class CloudProvenance { IidUniform, RegularCircle, File };

std::string to_string(CloudProvenance p);

struct PointCloud {
  Manifold manifold = Manifold::circle();
  std::vector<Point> points;
  CloudProvenance provenance = CloudProvenance::IidUniform;
  std::uint64_t seed = 0;

  std::size_t size() const { return points.size(); }
};

/// First N points of the iid uniform sequence for `seed`. Clouds for the same
/// seed are nested: sample_cloud(m, N, s) is a prefix of sample_cloud(m, 2N, s).
PointCloud sample_cloud(const Manifold& m, std::size_t N, std::uint64_t seed);

struct Edge {
  std::uint32_t i;
  std::uint32_t j;
  double w;
};

/// Point cloud with symmetric kernel weights. Each unordered pair with
/// W_ij > 0 is stored once (i < j, sorted), which makes W_ij = W_ji exact.
///
/// a_scaling multiplies the raw graph Laplacian. When `normalized` is set it
/// has already been divided by limiting_constant, so the rescaled Laplacian
/// approximates metric_scale * Delta. metric_scale converts the native
/// Laplace-Beltrami operator into the chart the weights were designed for; it
/// is 1 for kernel grids and (2 pi)^2 for the regular circle grid, whose chart
/// has unit circumference.
struct WeightedGrid {
  PointCloud cloud;
  double epsilon = 0.0;
  std::string kernel_id;
  std::vector<Edge> edges;
  double a_scaling = 0.0;
  double limiting_constant = 0.0;
  double metric_scale = 1.0;
  bool normalized = false;

  std::size_t size() const { return cloud.size(); }
  /// Constant c with a_scaling * L^N phi -> c * Delta phi.
  double target_constant() const { return (normalized ? 1.0 : limiting_constant) * metric_scale; }
  std::vector<std::size_t> degrees() const;
  double mean_degree() const;
};

/// Kernel weights W_ij = k(d(p_i, p_j) / epsilon) with a(N) = eps^{-2-d} / N and
/// C from limiting_constant_op. Rows are assembled in parallel from a bucket
/// index.
WeightedGrid build_weights(const PointCloud& cloud, double epsilon, const Kernel& k);
/// All-pairs reference for build_weights; O(N^2).
WeightedGrid build_weights_serial(const PointCloud& cloud, double epsilon, const Kernel& k);

/// Divides a_scaling by the limiting constant; no-op if already normalized.
WeightedGrid normalize(WeightedGrid g);

/// C = pi^{n/2} / (V(M) n Gamma(n/2)) * int_0^alpha k(r) r^{n+1} dr, the integral
/// by adaptive Gauss-Kronrod quadrature.
double limiting_constant_op(const Kernel& k, const Manifold& m);

struct Connectivity {
  bool connected = false;
  std::size_t components = 0;
};

Connectivity check_connected(const WeightedGrid& g);

std::vector<double> evaluate(const PointCloud& cloud, const std::function<double(const Point&)>& f);

/// a_scaling * sum_j W_ij (phi_j - phi_i) for every i. OpenMP over nodes.
std::vector<double> graph_laplacian_apply(const WeightedGrid& g, std::span<const double> phi);
std::vector<double> graph_laplacian_apply(const WeightedGrid& g, const TestFunction& phi);
/// Single-threaded reference.
std::vector<double> graph_laplacian_apply_serial(const WeightedGrid& g, std::span<const double> phi);

struct ConvergenceError {
  double mean_err = 0.0;
  double sup_err = 0.0;
};

/// Mean and max over grid points of |rescaled L^N phi - c Delta phi| with
/// c = target_constant().
ConvergenceError convergence_error(const WeightedGrid& g, const TestFunction& phi);

/// Grid k/N (k = 1..N) of the unit-circumference circle, stored as angles, with
/// nearest-neighbour unit weights and a(N) = N^2. Marked normalized with C = 1
/// in the unit chart (metric_scale = (2 pi)^2 in the native chart).
struct RegularCircleGrid {
  PointCloud cloud;
  WeightedGrid grid;
};

RegularCircleGrid regular_circle_cloud(std::size_t N);

/// Bandwidth eps(N) = (max(sup_{m >= N} W1(m), N^{-1/(d+2)}))^{1/(4+d)} where the
/// sup runs over the measured sizes. Throws std::invalid_argument if N is not
/// one of them.
double epsilon_schedule(const std::vector<std::pair<std::size_t, double>>& w1_curve, int d,
                        std::size_t N);

inline constexpr double kEpsilonFloorConstant = 1.0;

}  // namespace geosep

#pragma once

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "geosep/rng.hpp"

namespace geosep {

/// Raised when a caller breaks an operation's precondition.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

enum class ManifoldKind { Circle, FlatTorus, Sphere2 };

using Coords = std::array<double, 3>;

/// A point in canonical coordinates: an angle in [0, 2pi) for the circle, a
/// tuple in [0, 1)^d for the flat torus, a unit 3-vector for the sphere.
/// Unused trailing entries are zero.
struct Point {
  Coords x{};

  bool operator==(const Point&) const = default;
};

/// Tangent vector at `base`, in the intrinsic representation of the circle and
/// torus and as an ambient 3-vector orthogonal to `base` on the sphere.
struct TangentVector {
  Point base;
  Coords vec{};

  double norm() const;
  TangentVector operator-() const { return {base, {-vec[0], -vec[1], -vec[2]}}; }
  TangentVector scaled(double s) const { return {base, {s * vec[0], s * vec[1], s * vec[2]}}; }
};

/// One of the supported compact manifolds: the circle of circumference 2pi,
/// the flat unit torus T^d (d <= 3) and the unit sphere S^2.
class Manifold {
 public:
  static constexpr int kMaxTorusDim = 3;

  static Manifold circle() { return Manifold(ManifoldKind::Circle, 1); }
  static Manifold flat_torus(int d);
  static Manifold sphere2() { return Manifold(ManifoldKind::Sphere2, 2); }
  /// Accepts "circle", "sphere2" and "torus<d>".
  static Manifold parse(std::string_view name);

  ManifoldKind kind() const { return kind_; }
  int dim() const { return dim_; }
  /// Number of stored coordinates per point.
  int coord_dim() const { return kind_ == ManifoldKind::Sphere2 ? 3 : dim_; }
  double volume() const;
  double diameter() const;
  double injectivity_radius() const;
  std::string name() const;

  bool operator==(const Manifold&) const = default;

  Point canonical(Point p) const;
  bool contains(const Point& p, double tol = 1e-12) const;

  Point exp_map(const Point& p, const TangentVector& v, double t) const;
  double distance(const Point& p, const Point& q) const;
  Point sample_uniform(Rng& rng) const;

  /// Orthonormal frame of T_pM; the first dim() entries are meaningful. On the
  /// sphere the frame is Gram-Schmidt of the coordinate axis least aligned
  /// with p, then p x e1.
  std::array<Coords, 3> tangent_frame(const Point& p) const;
  /// Tangent vector with the given coordinates in tangent_frame(p).
  TangentVector from_frame(const Point& p, std::span<const double> a) const;
  /// Coordinates of v in tangent_frame(v.base).
  std::array<double, 3> to_frame(const TangentVector& v) const;

 private:
  Manifold(ManifoldKind kind, int dim) : kind_(kind), dim_(dim) {}

  ManifoldKind kind_;
  int dim_;
};

/// Optional link between a test function and a basis mode of the spectral
/// solver: the function equals `scale` times the orthonormal mode `mode_id`.
struct SpectralTag {
  std::string mode_id;
  double scale = 1.0;
};

/// Smooth function with its exact Laplace-Beltrami image.
struct TestFunction {
  std::string id;
  std::function<double(const Point&)> eval;
  std::function<double(const Point&)> laplacian;
  double lipschitz_bound = 0.0;
  std::optional<SpectralTag> spectral;
};

TestFunction constant_function(double value);

/// Real spherical harmonic of degree l and order m (m < 0 selects the sine
/// branch), orthonormal with respect to normalized surface measure.
double real_spherical_harmonic(int l, int m, const Point& p);

/// Smooth eigenfunctions with closed-form Laplacians: {1, cos k, sin k :
/// k <= 3} on the circle, Fourier products on the torus, Y_l^m (l <= 3) on the
/// sphere. Each one is checked against fd_laplacian before it is returned.
std::vector<TestFunction> test_function_library(const Manifold& m);
/// Library entry by id; throws std::out_of_range if absent.
TestFunction find_test_function(const Manifold& m, std::string_view id);

/// Geodesic central-difference stencil for the Laplace-Beltrami operator:
/// sum over an orthonormal frame of (f(exp(h e)) + f(exp(-h e)) - 2 f(p)) / h^2.
double fd_laplacian(const Manifold& m, const std::function<double(const Point&)>& f,
                    const Point& p, double h);

/// True when |laplacian - fd(h/2)| is at most a third of |laplacian - fd(h)|,
/// or both errors are at roundoff level.
bool laplacian_passes_fd_check(const Manifold& m, const TestFunction& f, const Point& p,
                               double h);

struct VolumeDensityRow {
  double radius;
  double sqrt_det_g;
  double second_order;  // 1 - Ric(v,v)/6 in polar form
  double deviation;
  double bound;  // 0.05 r^4
  bool within_bound;
};

/// Riemannian volume density in normal coordinates at p compared with its
/// second-order curvature expansion, one row per radius. Throws
/// std::domain_error for radii outside the injectivity radius.
std::vector<VolumeDensityRow> volume_density_expansion_check(const Manifold& m, const Point& p,
                                                             std::span<const double> radii);

}  // namespace geosep

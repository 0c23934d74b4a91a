#include "geosep/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace geosep {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double dot3(const Coords& a, const Coords& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

Coords cross3(const Coords& a, const Coords& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double norm3(const Coords& a) { return std::sqrt(dot3(a, a)); }

double wrap_unit(double x) {
  double r = x - std::floor(x);
  return r >= 1.0 ? 0.0 : r;
}

double wrap_angle(double x) {
  double r = std::fmod(x, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  return r >= kTwoPi ? 0.0 : r;
}

}  // namespace

double TangentVector::norm() const { return norm3(vec); }

Manifold Manifold::flat_torus(int d) {
  if (d < 1 || d > kMaxTorusDim) {
    throw std::invalid_argument("flat torus dimension must be in [1, 3]");
  }
  return Manifold(ManifoldKind::FlatTorus, d);
}

Manifold Manifold::parse(std::string_view name) {
  if (name == "circle") return circle();
  if (name == "sphere2" || name == "sphere") return sphere2();
  if (name.starts_with("torus") && name.size() == 6) {
    return flat_torus(name[5] - '0');
  }
  throw std::invalid_argument("unknown manifold '" + std::string(name) + "'");
}

double Manifold::volume() const {
  switch (kind_) {
    case ManifoldKind::Circle: return kTwoPi;
    case ManifoldKind::FlatTorus: return 1.0;
    case ManifoldKind::Sphere2: return 4.0 * std::numbers::pi;
  }
  return 0.0;
}

double Manifold::diameter() const {
  switch (kind_) {
    case ManifoldKind::Circle: return std::numbers::pi;
    case ManifoldKind::FlatTorus: return std::sqrt(static_cast<double>(dim_)) / 2.0;
    case ManifoldKind::Sphere2: return std::numbers::pi;
  }
  return 0.0;
}

double Manifold::injectivity_radius() const {
  return kind_ == ManifoldKind::FlatTorus ? 0.5 : std::numbers::pi;
}

std::string Manifold::name() const {
  switch (kind_) {
    case ManifoldKind::Circle: return "circle";
    case ManifoldKind::FlatTorus: return "torus" + std::to_string(dim_);
    case ManifoldKind::Sphere2: return "sphere2";
  }
  return {};
}

Point Manifold::canonical(Point p) const {
  switch (kind_) {
    case ManifoldKind::Circle:
      p.x = {wrap_angle(p.x[0]), 0.0, 0.0};
      break;
    case ManifoldKind::FlatTorus:
      for (int a = 0; a < 3; ++a) p.x[a] = a < dim_ ? wrap_unit(p.x[a]) : 0.0;
      break;
    case ManifoldKind::Sphere2: {
      double n = norm3(p.x);
      if (!(n > 0.0)) throw ContractViolation("sphere point with zero norm");
      for (double& c : p.x) c /= n;
      break;
    }
  }
  return p;
}

bool Manifold::contains(const Point& p, double tol) const {
  switch (kind_) {
    case ManifoldKind::Circle:
      return p.x[0] >= 0.0 && p.x[0] < kTwoPi && p.x[1] == 0.0 && p.x[2] == 0.0;
    case ManifoldKind::FlatTorus:
      for (int a = 0; a < 3; ++a) {
        if (a < dim_ ? (p.x[a] < 0.0 || p.x[a] >= 1.0) : p.x[a] != 0.0) return false;
      }
      return true;
    case ManifoldKind::Sphere2:
      return std::abs(norm3(p.x) - 1.0) <= tol;
  }
  return false;
}

Point Manifold::exp_map(const Point& p, const TangentVector& v, double t) const {
  if (!(v.base == p)) throw ContractViolation("exp_map: tangent vector is based at another point");
  if (!std::isfinite(t)) throw ContractViolation("exp_map: non-finite time");
  Point q = p;
  switch (kind_) {
    case ManifoldKind::Circle:
      q.x[0] = wrap_angle(p.x[0] + t * v.vec[0]);
      return q;
    case ManifoldKind::FlatTorus:
      for (int a = 0; a < dim_; ++a) q.x[a] = wrap_unit(p.x[a] + t * v.vec[a]);
      return q;
    case ManifoldKind::Sphere2: {
      double speed = norm3(v.vec);
      double angle = speed * t;
      if (angle == 0.0) return p;
      double c = std::cos(angle);
      double s = std::sin(angle) / speed;
      for (int a = 0; a < 3; ++a) q.x[a] = c * p.x[a] + s * v.vec[a];
      double n = norm3(q.x);
      for (double& x : q.x) x /= n;
      return q;
    }
  }
  return q;
}

double Manifold::distance(const Point& p, const Point& q) const {
  switch (kind_) {
    case ManifoldKind::Circle: {
      double d = std::abs(p.x[0] - q.x[0]);
      d = std::fmod(d, kTwoPi);
      return std::min(d, kTwoPi - d);
    }
    case ManifoldKind::FlatTorus: {
      double s = 0.0;
      for (int a = 0; a < dim_; ++a) {
        double d = std::abs(p.x[a] - q.x[a]);
        d -= std::floor(d);
        d = std::min(d, 1.0 - d);
        s += d * d;
      }
      return std::sqrt(s);
    }
    case ManifoldKind::Sphere2:
      // atan2 form: accurate at both small and near-antipodal separations.
      return std::atan2(norm3(cross3(p.x, q.x)), dot3(p.x, q.x));
  }
  return 0.0;
}

Point Manifold::sample_uniform(Rng& rng) const {
  Point p;
  switch (kind_) {
    case ManifoldKind::Circle:
      p.x[0] = wrap_angle(kTwoPi * uniform01(rng));
      return p;
    case ManifoldKind::FlatTorus:
      for (int a = 0; a < dim_; ++a) p.x[a] = uniform01(rng);
      return p;
    case ManifoldKind::Sphere2: {
      std::normal_distribution<double> gauss;
      double n = 0.0;
      do {
        for (double& c : p.x) c = gauss(rng);
        n = norm3(p.x);
      } while (n < 1e-12);
      for (double& c : p.x) c /= n;
      return p;
    }
  }
  return p;
}

std::array<Coords, 3> Manifold::tangent_frame(const Point& p) const {
  std::array<Coords, 3> frame{};
  if (kind_ != ManifoldKind::Sphere2) {
    for (int a = 0; a < dim_; ++a) frame[a][a] = 1.0;
    return frame;
  }
  int axis = 0;
  for (int a = 1; a < 3; ++a) {
    if (std::abs(p.x[a]) < std::abs(p.x[axis])) axis = a;
  }
  Coords e1{};
  e1[axis] = 1.0;
  double proj = dot3(e1, p.x);
  for (int a = 0; a < 3; ++a) e1[a] -= proj * p.x[a];
  double n = norm3(e1);
  for (double& c : e1) c /= n;
  frame[0] = e1;
  frame[1] = cross3(p.x, e1);
  return frame;
}

TangentVector Manifold::from_frame(const Point& p, std::span<const double> a) const {
  if (static_cast<int>(a.size()) != dim_) throw ContractViolation("from_frame: wrong coordinate count");
  TangentVector v{p, {}};
  if (kind_ != ManifoldKind::Sphere2) {
    for (int i = 0; i < dim_; ++i) v.vec[i] = a[i];
    return v;
  }
  auto frame = tangent_frame(p);
  for (int k = 0; k < 2; ++k) {
    for (int i = 0; i < 3; ++i) v.vec[i] += a[k] * frame[k][i];
  }
  return v;
}

std::array<double, 3> Manifold::to_frame(const TangentVector& v) const {
  std::array<double, 3> a{};
  if (kind_ != ManifoldKind::Sphere2) {
    for (int i = 0; i < dim_; ++i) a[i] = v.vec[i];
    return a;
  }
  auto frame = tangent_frame(v.base);
  a[0] = dot3(v.vec, frame[0]);
  a[1] = dot3(v.vec, frame[1]);
  return a;
}

double fd_laplacian(const Manifold& m, const std::function<double(const Point&)>& f,
                    const Point& p, double h) {
  double f0 = f(p);
  double acc = 0.0;
  for (int k = 0; k < m.dim(); ++k) {
    std::array<double, 3> a{};
    a[k] = 1.0;
    TangentVector e = m.from_frame(p, std::span<const double>(a.data(), m.dim()));
    acc += f(m.exp_map(p, e, h)) + f(m.exp_map(p, e, -h)) - 2.0 * f0;
  }
  return acc / (h * h);
}

bool laplacian_passes_fd_check(const Manifold& m, const TestFunction& f, const Point& p,
                               double h) {
  double exact = f.laplacian(p);
  double e1 = std::abs(fd_laplacian(m, f.eval, p, h) - exact);
  double e2 = std::abs(fd_laplacian(m, f.eval, p, h / 2) - exact);
  double roundoff = 1e-13 / (h * h);
  if (e1 <= roundoff && e2 <= 4.0 * roundoff) return true;
  return e2 * 3.0 <= e1;
}

TestFunction constant_function(double value) {
  TestFunction f;
  f.id = "one";
  f.eval = [value](const Point&) { return value; };
  f.laplacian = [](const Point&) { return 0.0; };
  f.lipschitz_bound = 0.0;
  if (value == 1.0) f.spectral = SpectralTag{"c0", 1.0};
  return f;
}

double real_spherical_harmonic(int l, int m, const Point& p) {
  if (l < 0 || std::abs(m) > l) throw std::invalid_argument("spherical harmonic index out of range");
  const int am = std::abs(m);
  const double z = std::clamp(p.x[2], -1.0, 1.0);
  const double s = std::sqrt(std::max(0.0, p.x[0] * p.x[0] + p.x[1] * p.x[1]));
  // Normalized associated Legendre functions sqrt((2l+1)(l-m)!/(l+m)!) P_l^m.
  double pmm = 1.0;
  for (int k = 1; k <= am; ++k) pmm *= std::sqrt((2.0 * k + 1.0) / (2.0 * k)) * s;
  double value = pmm;
  if (l > am) {
    double prev = pmm;
    double cur = std::sqrt(2.0 * am + 3.0) * z * pmm;
    for (int ll = am + 2; ll <= l; ++ll) {
      double a = std::sqrt((4.0 * ll * ll - 1.0) / (double(ll) * ll - double(am) * am));
      double b = std::sqrt((double(ll - 1) * (ll - 1) - double(am) * am) /
                           (4.0 * double(ll - 1) * (ll - 1) - 1.0));
      double next = a * (z * cur - b * prev);
      prev = cur;
      cur = next;
    }
    value = cur;
  }
  if (m == 0) return value;
  double phi = std::atan2(p.x[1], p.x[0]);
  return std::sqrt(2.0) * value * (m > 0 ? std::cos(am * phi) : std::sin(am * phi));
}

namespace {

std::vector<TestFunction> circle_library() {
  std::vector<TestFunction> lib{constant_function(1.0)};
  for (int k = 1; k <= 3; ++k) {
    const double kk = k;
    TestFunction c;
    c.id = "cos" + std::to_string(k);
    c.eval = [kk](const Point& p) { return std::cos(kk * p.x[0]); };
    c.laplacian = [kk](const Point& p) { return -kk * kk * std::cos(kk * p.x[0]); };
    c.lipschitz_bound = kk;
    c.spectral = SpectralTag{c.id, 1.0 / std::sqrt(2.0)};
    lib.push_back(c);
    TestFunction s;
    s.id = "sin" + std::to_string(k);
    s.eval = [kk](const Point& p) { return std::sin(kk * p.x[0]); };
    s.laplacian = [kk](const Point& p) { return -kk * kk * std::sin(kk * p.x[0]); };
    s.lipschitz_bound = kk;
    s.spectral = SpectralTag{s.id, 1.0 / std::sqrt(2.0)};
    lib.push_back(s);
  }
  return lib;
}

// One torus factor per axis: 0 = constant, +k = cos(2 pi k x), -k = sin(2 pi k x).
TestFunction torus_product(int d, std::array<int, 3> modes) {
  std::string id;
  double k2 = 0.0;
  double lip = 0.0;
  int nonconstant = 0;
  for (int a = 0; a < d; ++a) {
    if (a) id += '.';
    int k = modes[a];
    id += k == 0 ? "c0" : (k > 0 ? "c" + std::to_string(k) : "s" + std::to_string(-k));
    k2 += double(k) * k;
    lip += 2.0 * std::numbers::pi * std::abs(k);
    if (k != 0) ++nonconstant;
  }
  const double lambda = 4.0 * std::numbers::pi * std::numbers::pi * k2;
  auto eval = [d, modes](const Point& p) {
    double v = 1.0;
    for (int a = 0; a < d; ++a) {
      int k = modes[a];
      if (k > 0) v *= std::cos(2.0 * std::numbers::pi * k * p.x[a]);
      if (k < 0) v *= std::sin(-2.0 * std::numbers::pi * k * p.x[a]);
    }
    return v;
  };
  TestFunction f;
  f.id = nonconstant == 0 ? "one" : id;
  f.eval = eval;
  f.laplacian = [eval, lambda](const Point& p) { return -lambda * eval(p); };
  f.lipschitz_bound = lip;
  f.spectral = SpectralTag{id, std::pow(2.0, -0.5 * nonconstant)};
  if (nonconstant == 0) f.spectral = SpectralTag{"c0", 1.0};
  return f;
}

std::vector<TestFunction> torus_library(int d) {
  std::vector<TestFunction> lib{torus_product(d, {0, 0, 0})};
  for (int a = 0; a < d; ++a) {
    std::array<int, 3> c{}, s{};
    c[a] = 1;
    s[a] = -1;
    lib.push_back(torus_product(d, c));
    lib.push_back(torus_product(d, s));
  }
  lib.push_back(torus_product(d, {2, 0, 0}));
  if (d >= 2) lib.push_back(torus_product(d, {1, 1, 0}));
  return lib;
}

std::vector<TestFunction> sphere_library() {
  std::vector<TestFunction> lib;
  for (int l = 0; l <= 3; ++l) {
    for (int m = -l; m <= l; ++m) {
      TestFunction f;
      f.id = "Y" + std::to_string(l) + "," + std::to_string(m);
      f.eval = [l, m](const Point& p) { return real_spherical_harmonic(l, m, p); };
      const double lambda = double(l) * (l + 1);
      f.laplacian = [l, m, lambda](const Point& p) {
        return -lambda * real_spherical_harmonic(l, m, p);
      };
      // Addition theorem: sum_m |grad Y_l^m|^2 = l(l+1)(2l+1) pointwise.
      f.lipschitz_bound = std::sqrt(lambda * (2.0 * l + 1.0));
      f.spectral = SpectralTag{f.id, 1.0};
      if (l == 0) f.id = "one";
      lib.push_back(f);
    }
  }
  return lib;
}

}  // namespace

std::vector<TestFunction> test_function_library(const Manifold& m) {
  std::vector<TestFunction> lib;
  switch (m.kind()) {
    case ManifoldKind::Circle: lib = circle_library(); break;
    case ManifoldKind::FlatTorus: lib = torus_library(m.dim()); break;
    case ManifoldKind::Sphere2: lib = sphere_library(); break;
  }
  Rng rng(0x5eed);
  std::vector<Point> probes;
  for (int i = 0; i < 3; ++i) probes.push_back(m.sample_uniform(rng));
  for (const auto& f : lib) {
    for (const auto& p : probes) {
      if (!laplacian_passes_fd_check(m, f, p, 0.02)) {
        throw std::logic_error("test function " + f.id + " failed the finite-difference check");
      }
    }
  }
  return lib;
}

TestFunction find_test_function(const Manifold& m, std::string_view id) {
  for (auto& f : test_function_library(m)) {
    if (f.id == id) return f;
  }
  throw std::out_of_range("no test function '" + std::string(id) + "' on " + m.name());
}

std::vector<VolumeDensityRow> volume_density_expansion_check(const Manifold& m, const Point& p,
                                                             std::span<const double> radii) {
  std::vector<VolumeDensityRow> rows;
  const bool curved = m.kind() == ManifoldKind::Sphere2;
  for (double r : radii) {
    if (r < 0.0 || r >= m.injectivity_radius()) {
      throw std::domain_error("radius outside the injectivity radius");
    }
    VolumeDensityRow row{r, 1.0, 1.0, 0.0, 0.05 * r * r * r * r, true};
    if (curved && r > 0.0) {
      // Jacobian of exp_p at r*e1: the radial column is the unit geodesic
      // velocity, the transverse column is the Jacobi field sin(r)/r * e2.
      auto frame = m.tangent_frame(p);
      const Coords& e1 = frame[0];
      const Coords& e2 = frame[1];
      Coords radial{};
      for (int a = 0; a < 3; ++a) radial[a] = -std::sin(r) * p.x[a] + std::cos(r) * e1[a];
      Coords transverse{};
      for (int a = 0; a < 3; ++a) transverse[a] = std::sin(r) / r * e2[a];
      row.sqrt_det_g = norm3(cross3(radial, transverse));
      // Ric = g on the unit sphere, so Ric(x, x) = r^2 for |x| = r.
      row.second_order = 1.0 - r * r / 6.0;
    }
    row.deviation = std::abs(row.sqrt_det_g - row.second_order);
    row.within_bound = row.deviation <= row.bound;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace geosep

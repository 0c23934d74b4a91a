#include "doctest.h"

#include <cmath>
#include <numbers>

#include "geosep/manifold.hpp"
#include "oracles.hpp"

using namespace geosep;

namespace {

Point angle(double a) { return Point{{a, 0, 0}}; }
Point xyz(double x, double y, double z) { return Point{{x, y, z}}; }
const double kPi = std::numbers::pi;

std::vector<Manifold> all_manifolds() {
  return {Manifold::circle(), Manifold::flat_torus(1), Manifold::flat_torus(2), Manifold::flat_torus(3),
          Manifold::sphere2()};
}

}  // namespace

TEST_CASE("descriptor constants") {
  CHECK(Manifold::circle().volume() == doctest::Approx(2 * kPi));
  CHECK(Manifold::circle().diameter() == doctest::Approx(kPi));
  CHECK(Manifold::flat_torus(2).volume() == 1.0);
  CHECK(Manifold::flat_torus(3).diameter() == doctest::Approx(std::sqrt(3.0) / 2));
  CHECK(Manifold::sphere2().volume() == doctest::Approx(4 * kPi));
  CHECK(Manifold::sphere2().dim() == 2);
  CHECK(Manifold::sphere2().coord_dim() == 3);
  CHECK_THROWS_AS(Manifold::flat_torus(4), std::invalid_argument);
  CHECK(Manifold::parse("torus2") == Manifold::flat_torus(2));
  CHECK_THROWS(Manifold::parse("klein"));
}

TEST_CASE("exp_map examples") {
  const Manifold c = Manifold::circle();
  Point q = c.exp_map(angle(0.3), TangentVector{angle(0.3), {1, 0, 0}}, 0.25);
  CHECK(q.x[0] == doctest::Approx(0.55).epsilon(1e-14));

  const Manifold s = Manifold::sphere2();
  const Point p = xyz(1, 0, 0);
  Point r = s.exp_map(p, TangentVector{p, {0, kPi / 2, 0}}, 1.0);
  CHECK(r.x[0] == doctest::Approx(0).scale(1));
  CHECK(r.x[1] == doctest::Approx(1));
  CHECK(std::abs(r.x[2]) < 1e-15);

  for (const auto& m : all_manifolds()) {
    Rng rng(3);
    Point a = m.sample_uniform(rng);
    std::array<double, 3> co{0.4, -0.2, 0.1};
    TangentVector v = m.from_frame(a, std::span<const double>(co.data(), m.dim()));
    CHECK(m.exp_map(a, v, 0.0) == a);
  }
  // Mismatched base point.
  CHECK_THROWS_AS(s.exp_map(p, TangentVector{xyz(0, 1, 0), {1, 0, 0}}, 1.0), ContractViolation);
}

TEST_CASE("distance examples") {
  const Manifold s = Manifold::sphere2();
  CHECK(s.distance(xyz(1, 0, 0), xyz(-1, 0, 0)) == doctest::Approx(kPi));
  CHECK(s.distance(xyz(0, 0, 1), xyz(0, 0, 1)) == 0.0);
  const Manifold t1 = Manifold::flat_torus(1);
  CHECK(t1.distance(angle(0.1), angle(0.9)) == doctest::Approx(0.2));
  const Manifold c = Manifold::circle();
  CHECK(c.distance(angle(0.1), angle(2 * kPi - 0.1)) == doctest::Approx(0.2));
}

TEST_CASE("distance is a metric and exp_map has unit speed") {
  for (const auto& m : all_manifolds()) {
    Rng rng(11);
    for (int k = 0; k < 1000; ++k) {
      Point p = m.sample_uniform(rng), q = m.sample_uniform(rng), r = m.sample_uniform(rng);
      const double pq = m.distance(p, q);
      CHECK(pq >= 0.0);
      CHECK(pq == doctest::Approx(m.distance(q, p)).epsilon(1e-14));
      CHECK(pq <= m.distance(p, r) + m.distance(r, q) + 1e-12);
    }
    for (int k = 0; k < 200; ++k) {
      Point p = m.sample_uniform(rng);
      std::array<double, 3> co{uniform01(rng) - 0.5, uniform01(rng) - 0.5, uniform01(rng) - 0.5};
      TangentVector v = m.from_frame(p, std::span<const double>(co.data(), m.dim()));
      const double t = uniform01(rng);
      if (t * v.norm() >= 0.99 * std::min(m.injectivity_radius(), m.diameter())) continue;
      Point q = m.exp_map(p, v, t);
      CHECK(m.contains(q));
      CHECK(std::abs(m.distance(p, q) - t * v.norm()) < 1e-9);
    }
  }
}

TEST_CASE("sphere tangent vectors are orthogonal to the base") {
  const Manifold s = Manifold::sphere2();
  Rng rng(5);
  for (int k = 0; k < 100; ++k) {
    Point p = s.sample_uniform(rng);
    auto frame = s.tangent_frame(p);
    for (int a = 0; a < 2; ++a) {
      double dot = 0, nn = 0;
      for (int c = 0; c < 3; ++c) {
        dot += frame[a][c] * p.x[c];
        nn += frame[a][c] * frame[a][c];
      }
      CHECK(std::abs(dot) < 1e-12);
      CHECK(std::abs(nn - 1.0) < 1e-12);
    }
    std::array<double, 3> co{0.3, -0.7, 0};
    auto back = s.to_frame(s.from_frame(p, std::span<const double>(co.data(), 2)));
    CHECK(back[0] == doctest::Approx(0.3));
    CHECK(back[1] == doctest::Approx(-0.7));
  }
}

TEST_CASE("sample_uniform moments") {
  const int n = 100000;
  {
    Rng rng(1);
    const Manifold c = Manifold::circle();
    double s = 0;
    for (int k = 0; k < n; ++k) s += std::cos(c.sample_uniform(rng).x[0]);
    CHECK(std::abs(s / n) < 3.0 / std::sqrt(double(n)) * 0.71);
  }
  {
    Rng rng(2);
    const Manifold sp = Manifold::sphere2();
    std::array<double, 3> s{};
    for (int k = 0; k < n; ++k) {
      Point p = sp.sample_uniform(rng);
      for (int c = 0; c < 3; ++c) s[c] += p.x[c];
    }
    // Each coordinate has variance 1/3.
    for (int c = 0; c < 3; ++c) CHECK(std::abs(s[c] / n) < 4.0 * std::sqrt(1.0 / 3.0 / n));
  }
  {
    Rng rng(3);
    const Manifold t = Manifold::flat_torus(2);
    int hits = 0;
    for (int k = 0; k < n; ++k) {
      Point p = t.sample_uniform(rng);
      if (p.x[0] < 0.5 && p.x[1] < 0.5) ++hits;
    }
    CHECK(std::abs(double(hits) / n - 0.25) < 4.0 * std::sqrt(0.25 * 0.75 / n));
  }
}

TEST_CASE("sample_uniform chi-square on a fixed partition") {
  // Sphere: 8 equal-area z bands times 4 longitude sectors. Circle: 32 arcs.
  const int n = 64000, cells = 32;
  // Critical value of chi-square with 31 degrees of freedom at 1e-3.
  const double critical = 61.1;
  {
    Rng rng(42);
    const Manifold s = Manifold::sphere2();
    std::vector<int> count(cells, 0);
    for (int k = 0; k < n; ++k) {
      Point p = s.sample_uniform(rng);
      int band = std::min(7, int((p.x[2] + 1.0) * 4.0));
      double ph = std::atan2(p.x[1], p.x[0]) + kPi;
      int sector = std::min(3, int(ph / (kPi / 2)));
      ++count[band * 4 + sector];
    }
    double chi = 0, e = double(n) / cells;
    for (int c : count) chi += (c - e) * (c - e) / e;
    CHECK(chi < critical);
  }
  {
    Rng rng(43);
    const Manifold c = Manifold::circle();
    std::vector<int> count(cells, 0);
    for (int k = 0; k < n; ++k) ++count[std::min(cells - 1, int(c.sample_uniform(rng).x[0] / (2 * kPi) * cells))];
    double chi = 0, e = double(n) / cells;
    for (int x : count) chi += (x - e) * (x - e) / e;
    CHECK(chi < critical);
  }
}

TEST_CASE("test function library") {
  CHECK(test_function_library(Manifold::circle()).size() == 7);
  CHECK(test_function_library(Manifold::sphere2()).size() == 16);
  CHECK(test_function_library(Manifold::flat_torus(2)).size() >= 4);

  // Circle cos: three-point stencil at h = 1e-3.
  const Manifold c = Manifold::circle();
  TestFunction f = find_test_function(c, "cos1");
  for (double th : {0.0, 0.7, 2.9, 5.1}) {
    const double h = 1e-3;
    const double fd = (std::cos(th + h) + std::cos(th - h) - 2 * std::cos(th)) / (h * h);
    CHECK(f.laplacian(angle(th)) == doctest::Approx(fd).epsilon(1e-6));
    CHECK(f.laplacian(angle(th)) == doctest::Approx(-std::cos(th)).epsilon(1e-12));
  }

  // Sphere Y_1^0 and Y_2^1 against the polar-coordinate stencil.
  const Manifold s = Manifold::sphere2();
  for (const char* id : {"Y1,0", "Y2,1", "Y3,-2"}) {
    TestFunction y = find_test_function(s, id);
    auto polar = [&](double th, double ph) {
      return y.eval(xyz(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)));
    };
    for (auto [th, ph] : {std::pair{0.9, 0.3}, std::pair{2.0, -1.4}, std::pair{1.3, 2.5}}) {
      const Point p = xyz(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th));
      const double fd = oracle::sphere_polar_laplacian(polar, th, ph, 1e-4);
      CHECK(y.laplacian(p) == doctest::Approx(fd).epsilon(1e-5));
    }
  }
  TestFunction y10 = find_test_function(s, "Y1,0");
  CHECK(y10.eval(xyz(0, 0, 1)) == doctest::Approx(std::sqrt(3.0)));
  CHECK(y10.laplacian(xyz(0.6, 0, 0.8)) == doctest::Approx(-2.0 * y10.eval(xyz(0.6, 0, 0.8))));

  // Orthonormality with respect to the normalized area.
  auto yf = [&](const char* id) { return find_test_function(s, id); };
  auto prod = [&](const TestFunction& a, const TestFunction& b) {
    return oracle::sphere_mean([&](double x, double y, double z) { return a.eval(xyz(x, y, z)) * b.eval(xyz(x, y, z)); });
  };
  CHECK(prod(yf("Y2,0"), yf("Y2,0")) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(prod(yf("Y2,0"), yf("Y1,0"))) < 1e-12);
  CHECK(prod(yf("Y3,-3"), yf("Y3,-3")) == doctest::Approx(1.0).epsilon(1e-12));

  for (const auto& m : all_manifolds()) {
    TestFunction one = find_test_function(m, "one");
    Rng rng(9);
    for (int k = 0; k < 10; ++k) CHECK(one.laplacian(m.sample_uniform(rng)) == 0.0);
  }
  CHECK_THROWS_AS(find_test_function(c, "Y1,0"), std::out_of_range);
}

TEST_CASE("fd check catches a wrong Laplacian") {
  const Manifold s = Manifold::sphere2();
  TestFunction bad = find_test_function(s, "Y1,0");
  bad.laplacian = [](const Point& p) { return -3.0 * std::sqrt(3.0) * p.x[2]; };
  CHECK_FALSE(laplacian_passes_fd_check(s, bad, xyz(0.6, 0, 0.8), 0.02));
  CHECK(laplacian_passes_fd_check(s, find_test_function(s, "Y2,0"), xyz(0.6, 0, 0.8), 0.02));
}

TEST_CASE("volume density expansion") {
  const Manifold s = Manifold::sphere2();
  std::vector<double> radii{0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
  auto rows = volume_density_expansion_check(s, xyz(0, 0, 1), radii);
  REQUIRE(rows.size() == radii.size());
  CHECK(rows[0].sqrt_det_g == 1.0);
  CHECK(rows[0].deviation == 0.0);
  CHECK(std::abs(rows[1].sqrt_det_g - std::sin(0.1) / 0.1) < 1e-15);
  CHECK(rows[1].deviation < 1e-5);
  for (const auto& r : rows) CHECK(r.within_bound);
  std::vector<double> too_far{std::numbers::pi};
  CHECK_THROWS_AS(volume_density_expansion_check(s, xyz(0, 0, 1), too_far), std::domain_error);
  auto flat = volume_density_expansion_check(Manifold::flat_torus(2), Point{}, std::vector<double>{0.1, 0.3});
  for (const auto& r : flat) CHECK(r.deviation == 0.0);
}

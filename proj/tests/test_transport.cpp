#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "geosep/transport.hpp"

using namespace geosep;

namespace {

const double kPi = std::numbers::pi;

// W1 between the empirical measure of angles and the uniform law, by brute
// force on a fine grid: the optimal shift is the median of F_N(x) - x.
double circle_w1_brute(const std::vector<Point>& pts, int grid = 400000) {
  std::vector<double> u;
  for (const auto& p : pts) u.push_back(p.x[0] / (2 * kPi));
  std::sort(u.begin(), u.end());
  std::vector<double> diff(grid);
  std::size_t below = 0;
  for (int k = 0; k < grid; ++k) {
    const double x = (k + 0.5) / grid;
    while (below < u.size() && u[below] <= x) ++below;
    diff[k] = double(below) / u.size() - x;
  }
  std::vector<double> sorted = diff;
  std::nth_element(sorted.begin(), sorted.begin() + grid / 2, sorted.end());
  const double s = sorted[grid / 2];
  double acc = 0;
  for (double d : diff) acc += std::abs(d - s);
  return 2 * kPi * acc / grid;
}

// Exact optimal assignment by enumeration (n <= 8).
double assignment_cost(const Manifold& m, const std::vector<Point>& a, const std::vector<Point>& b) {
  std::vector<int> perm(a.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = 1e300;
  do {
    double c = 0;
    for (std::size_t i = 0; i < a.size(); ++i) c += m.distance(a[i], b[perm[i]]);
    best = std::min(best, c);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / a.size();
}

}  // namespace

TEST_CASE("circle W1: single point and regular grid") {
  const Manifold c = Manifold::circle();
  PointCloud one;
  one.manifold = c;
  one.points = {Point{{1.3, 0, 0}}};
  CHECK(wasserstein1(one).value == doctest::Approx(kPi / 2).epsilon(1e-14));
  CHECK(wasserstein1(one).exact);

  for (std::size_t N : {3, 16, 100, 1024}) {
    auto r = regular_circle_cloud(N);
    const double unit = to_unit_circumference(circle_w1_exact(r.cloud.points));
    CHECK(unit <= 0.5 / N);
    CHECK(unit == doctest::Approx(0.25 / N).epsilon(1e-9));
  }
  CHECK_THROWS_AS(circle_w1_exact(std::vector<Point>{}), std::invalid_argument);
  PointCloud empty;
  CHECK_THROWS_AS(wasserstein1(empty), std::invalid_argument);
}

TEST_CASE("circle W1 agrees with a brute-force integral") {
  for (std::size_t N : {1, 2, 7, 50, 400}) {
    auto cloud = sample_cloud(Manifold::circle(), N, 17 + N);
    const double exact = circle_w1_exact(cloud.points);
    CHECK(exact == doctest::Approx(circle_w1_brute(cloud.points)).epsilon(2e-4));
  }
}

TEST_CASE("reference discretization") {
  for (const auto& m : {Manifold::circle(), Manifold::flat_torus(1), Manifold::flat_torus(2),
                        Manifold::flat_torus(3), Manifold::sphere2()}) {
    for (std::size_t cells : {1, 10, 1000, 5000}) {
      auto r = reference_discretization(m, cells);
      CHECK(r.atoms.size() >= cells);
      CHECK(r.atoms.size() == r.weights.size());
      CHECK(std::accumulate(r.weights.begin(), r.weights.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
      for (const auto& a : r.atoms) CHECK(m.contains(a));
      CHECK(r.cell_diameter > 0.0);
    }
  }
  auto s = reference_discretization(Manifold::sphere2(), 2000);
  // Cap areas: the weight north of z = 0 is exactly one half.
  double north = 0;
  for (std::size_t k = 0; k < s.atoms.size(); ++k)
    if (s.atoms[k].x[2] > 0) north += s.weights[k];
  CHECK(north == doctest::Approx(0.5).epsilon(1e-12));
  CHECK_THROWS(reference_discretization(Manifold::sphere2(), 0));
}

TEST_CASE("sinkhorn bounds bracket the exact assignment") {
  for (const auto& m : {Manifold::flat_torus(2), Manifold::sphere2(), Manifold::circle()}) {
    for (std::uint64_t seed : {1, 2, 3}) {
      auto a = sample_cloud(m, 7, seed).points;
      auto b = sample_cloud(m, 7, seed + 100).points;
      std::vector<double> w(7, 1.0 / 7);
      auto t = sinkhorn_transport(m, a, w, b, w);
      const double exact = assignment_cost(m, a, b);
      CHECK(t.dual <= exact + 1e-12);
      CHECK(t.primal >= exact - 1e-12);
      CHECK(t.relative_gap <= 0.05);
    }
  }
  std::vector<double> w{1.0};
  std::vector<Point> p{Point{}};
  CHECK_THROWS(sinkhorn_transport(Manifold::flat_torus(2), p, std::vector<double>{}, p, w));
}

TEST_CASE("sinkhorn between identical measures costs nothing") {
  const Manifold s = Manifold::sphere2();
  auto ref = reference_discretization(s, 300);
  auto t = sinkhorn_transport(s, ref.atoms, ref.weights, ref.atoms, ref.weights);
  CHECK(t.primal <= 1e-3);
  CHECK(t.dual <= t.primal + 1e-12);
}

TEST_CASE("cloud equal to the reference atoms has W1 below the cell diameter") {
  const Manifold t = Manifold::flat_torus(2);
  auto ref = reference_discretization(t, 256);
  PointCloud c;
  c.manifold = t;
  c.points = ref.atoms;
  W1Options opt;
  opt.cell_factor = 1;
  auto est = wasserstein1(c, opt);
  CHECK(est.transport_cost <= 1e-3);
  CHECK(est.value <= est.cell_slack + 1e-3);
}

TEST_CASE("torus T^1 estimate brackets the exact circle value") {
  // T^1 is the circle of circumference 1.
  for (std::size_t N : {64, 256}) {
    auto cloud = sample_cloud(Manifold::flat_torus(1), N, 31);
    std::vector<Point> angles;
    for (const auto& p : cloud.points) angles.push_back(Point{{2 * kPi * p.x[0], 0, 0}});
    const double exact = to_unit_circumference(circle_w1_exact(angles));
    auto est = wasserstein1(cloud);
    CHECK_FALSE(est.exact);
    CHECK(est.relative_gap <= 0.05);
    CHECK(est.value >= exact);
    CHECK(est.dual_bound - est.cell_slack <= exact + 1e-12);
    CHECK(est.transport_cost <= exact / 0.95 + est.cell_slack);
  }
}

TEST_CASE("sphere W1 estimate is certified and shrinks with N") {
  std::vector<double> values;
  for (std::size_t N : {128, 512}) {
    auto est = wasserstein1(sample_cloud(Manifold::sphere2(), N, 4));
    CHECK(est.relative_gap <= 0.05);
    CHECK(est.dual_bound <= est.transport_cost);
    CHECK(est.reference_cells >= 16 * N);
    CHECK(est.value == doctest::Approx(est.transport_cost + est.cell_slack));
    values.push_back(est.value);
  }
  CHECK(values[1] < values[0]);
}

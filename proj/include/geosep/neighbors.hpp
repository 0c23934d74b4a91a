#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "geosep/manifold.hpp"

namespace geosep {

/// Bucket index over points of a manifold. for_each_candidate visits a
/// superset of the indexed points within geodesic `radius` of the query:
/// fundamental-domain buckets of width >= radius on the circle and torus,
/// ambient cubes of side >= the chord length on the sphere.
class NeighborIndex {
 public:
  NeighborIndex(const Manifold& m, std::span<const Point> points, double radius)
      : manifold_(m), axes_(m.coord_dim()) {
    const double r = std::max(radius, 1e-300);
    const std::size_t cap_cells = 8 * points.size() + 64;
    std::int64_t nb = 1;
    switch (m.kind()) {
      case ManifoldKind::Circle:
        wrap_ = true;
        lo_ = 0.0;
        span_ = 2.0 * std::numbers::pi;
        nb = static_cast<std::int64_t>(std::floor(span_ / r));
        break;
      case ManifoldKind::FlatTorus:
        wrap_ = true;
        lo_ = 0.0;
        span_ = 1.0;
        nb = static_cast<std::int64_t>(std::floor(1.0 / r));
        break;
      case ManifoldKind::Sphere2: {
        wrap_ = false;
        lo_ = -1.0;
        span_ = 2.0;
        double chord = r >= std::numbers::pi ? 2.0 : 2.0 * std::sin(r / 2.0);
        nb = static_cast<std::int64_t>(std::floor(2.0 / chord));
        break;
      }
    }
    nb = std::max<std::int64_t>(nb, 1);
    while (nb > 1 && std::pow(static_cast<double>(nb), axes_) > static_cast<double>(cap_cells)) {
      nb = static_cast<std::int64_t>(std::floor(nb * 0.8));
    }
    per_axis_ = std::max<std::int64_t>(nb, 1);
    std::size_t cells = 1;
    for (int a = 0; a < axes_; ++a) cells *= static_cast<std::size_t>(per_axis_);
    cell_start_.assign(cells + 1, 0);
    std::vector<std::size_t> cell_of(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
      cell_of[i] = linear(cell_coords(points[i]));
      ++cell_start_[cell_of[i] + 1];
    }
    for (std::size_t c = 0; c < cells; ++c) cell_start_[c + 1] += cell_start_[c];
    order_.resize(points.size());
    std::vector<std::size_t> fill(cell_start_.begin(), cell_start_.end() - 1);
    for (std::size_t i = 0; i < points.size(); ++i) {
      order_[fill[cell_of[i]]++] = static_cast<std::uint32_t>(i);
    }
    // Offsets per axis, deduplicated when the axis has fewer than 3 cells.
    if (wrap_ && per_axis_ < 3) {
      for (std::int64_t k = 0; k < per_axis_; ++k) offsets_.push_back(k);
      absolute_offsets_ = true;
    } else {
      offsets_ = {-1, 0, 1};
    }
  }

  template <class Visit>
  void for_each_candidate(const Point& q, Visit&& visit) const {
    const auto base = cell_coords(q);
    std::array<std::int64_t, 3> c{};
    visit_axis(0, base, c, visit);
  }

 private:
  std::array<std::int64_t, 3> cell_coords(const Point& p) const {
    std::array<std::int64_t, 3> c{};
    for (int a = 0; a < axes_; ++a) {
      auto k = static_cast<std::int64_t>(std::floor((p.x[a] - lo_) / span_ * per_axis_));
      c[a] = std::clamp<std::int64_t>(k, 0, per_axis_ - 1);
    }
    return c;
  }

  std::size_t linear(const std::array<std::int64_t, 3>& c) const {
    std::size_t idx = 0;
    for (int a = axes_ - 1; a >= 0; --a) idx = idx * per_axis_ + static_cast<std::size_t>(c[a]);
    return idx;
  }

  template <class Visit>
  void visit_axis(int a, const std::array<std::int64_t, 3>& base, std::array<std::int64_t, 3>& c,
                  Visit& visit) const {
    if (a == axes_) {
      std::size_t cell = linear(c);
      for (std::size_t k = cell_start_[cell]; k < cell_start_[cell + 1]; ++k) visit(order_[k]);
      return;
    }
    for (std::int64_t off : offsets_) {
      std::int64_t k = absolute_offsets_ ? off : base[a] + off;
      if (wrap_) {
        k = ((k % per_axis_) + per_axis_) % per_axis_;
      } else if (k < 0 || k >= per_axis_) {
        continue;
      }
      c[a] = k;
      visit_axis(a + 1, base, c, visit);
    }
  }

  Manifold manifold_;
  int axes_;
  bool wrap_ = true;
  bool absolute_offsets_ = false;
  double lo_ = 0.0;
  double span_ = 1.0;
  std::int64_t per_axis_ = 1;
  std::vector<std::int64_t> offsets_;
  std::vector<std::size_t> cell_start_;
  std::vector<std::uint32_t> order_;
};

}  // namespace geosep

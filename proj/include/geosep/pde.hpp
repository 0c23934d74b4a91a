#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "geosep/manifold.hpp"

namespace geosep {

/// Time scale of the heat semigroup: exp(t Delta / 2) for walks, exp(t Delta)
/// for the exclusion process.
enum class Diffusivity { Half, One };

double diffusivity_factor(Diffusivity d);

/// One orthonormal eigenfunction of -Delta with respect to the normalized
/// volume. `index` is {k} on the circle (k > 0 cosine, k < 0 sine), one signed
/// frequency per axis on the torus, and {l, m} on the sphere.
struct SpectralMode {
  std::string id;
  double lambda = 0.0;
  double coefficient = 0.0;
  std::array<int, 3> index{};
};

/// Truncated expansion sum_k coefficient_k e_k, modes sorted by eigenvalue.
/// `residual` is the largest reconstruction error seen on the check points
/// when the field was projected (0 for fields built otherwise).
struct SpectralField {
  Manifold manifold = Manifold::circle();
  std::vector<SpectralMode> modes;
  int truncation = 0;
  double residual = 0.0;

  double eval(const Point& p) const;
  /// Mode by id; "c0" also names the constant mode on every manifold.
  const SpectralMode* find(std::string_view id) const;
};

inline constexpr int kDefaultTruncation = 64;

/// Orthonormal basis functions, in the order used by project.
std::vector<SpectralMode> eigenbasis(const Manifold& m, int truncation);
/// Value of the orthonormal mode at p.
double eval_mode(const Manifold& m, const SpectralMode& mode, const Point& p);

/// Gauss-Legendre nodes and weights on [-1, 1] (weights sum to 2).
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

/// Coefficients by product quadrature: equispaced nodes on the circle and the
/// torus, Gauss-Legendre in z times equispaced longitude on the sphere, at
/// least 10^4 nodes. Truncation is the largest frequency per axis (circle,
/// torus) or the largest degree (sphere). Throws std::invalid_argument for
/// truncation < 1.
SpectralField project(const std::function<double(const Point&)>& rho0, const Manifold& m,
                      int truncation = kDefaultTruncation);

/// coefficient_k * exp(-lambda_k t D). Throws std::invalid_argument for t < 0.
SpectralField evolve(const SpectralField& f, double t, Diffusivity d);

/// int rho_t phi dV-bar: coefficient contraction when phi carries a spectral
/// tag, otherwise phi is projected with the field's truncation and contracted.
double pair(const SpectralField& f, const TestFunction& phi);

/// CSV `mode_id,lambda,coefficient`.
void write_field_csv(std::ostream& out, const SpectralField& f);

}  // namespace geosep

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "geosep/manifold.hpp"

namespace geosep {

/// Law mu_p of the tangent jump from p. `sampler` draws from the normalized
/// law; `total_mass` is the jump rate. `stratified`, when present, returns a
/// batch of equal-weight draws whose marginals each follow `sampler`, spread
/// over the support to lower the variance of batch averages.
struct StepMeasure {
  using Sampler = std::function<TangentVector(const Point&, Rng&)>;
  using BatchSampler = std::function<std::vector<TangentVector>(const Point&, std::size_t, Rng&)>;

  std::string id;
  Sampler sampler;
  double support_bound = 0.0;
  double total_mass = 1.0;
  std::optional<double> declared_speed;
  BatchSampler stratified;

  /// One draw; throws std::logic_error if it leaves the declared support.
  TangentVector draw(const Point& p, Rng& rng) const;
  /// `count` draws, stratified when available.
  std::vector<TangentVector> draw_batch(const Point& p, std::size_t count, Rng& rng) const;
};

/// Uniform law on the sphere of radius `scale` in T_pM.
StepMeasure uniform_sphere_step(const Manifold& m, double scale);
/// Uniform law on sqrt(n) S_pM, the speed-one choice.
StepMeasure uniform_sphere_step(const Manifold& m);
/// Frame coordinates iid (1/5) delta_{-2} + (4/5) delta_{1/2}: mean 0 and
/// identity covariance without invariance under eta -> -eta.
StepMeasure product_counterexample_step(const Manifold& m);
/// Point mass at the first frame vector; a control that is not centred.
StepMeasure biased_step(const Manifold& m);
/// Uses `first` where `use_first(p)` holds and `second` elsewhere. Both must
/// have the same total mass.
StepMeasure point_dependent_step(std::string id, StepMeasure first, StepMeasure second,
                                 std::function<bool(const Point&)> use_first);

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

struct MomentReport {
  std::vector<double> mean_vec;
  std::vector<std::vector<double>> cov_mat;
  double c_hat = 0.0;
  double c_hat_stderr = 0.0;
  /// Largest standard error among the mean and covariance entries.
  double mc_stderr = 0.0;
  bool pass = false;
};

inline constexpr double kGateSigmas = 4.0;
inline constexpr std::size_t kMinMomentSamples = 10000;

/// Monte Carlo moments of m at p in the orthonormal frame of T_pM. PASS when
/// every mean entry and every entry of cov - c_hat I is within four standard
/// errors of zero.
MomentReport check_canonical(const Manifold& M, const StepMeasure& m, const Point& p,
                             std::size_t samples, Rng& rng);

/// Monte Carlo estimate of (int |eta|^2 dmu_p) / n.
Estimate speed_constant(const Manifold& M, const StepMeasure& m, const Point& p,
                        std::size_t samples, Rng& rng);

/// N^2 L_N f(p), estimated with antithetic +-eta pairs over a (stratified)
/// batch of `samples` draws.
double generator_apply(const Manifold& M, const TestFunction& f, const Point& p, double N,
                       const StepMeasure& m, std::size_t samples, Rng& rng);

struct WalkRecord {
  double time;
  Point point;
};

/// Jump skeleton of the rescaled walk: Exp(total_mass N^2) holding times, jumps
/// p <- exp_p(eta / N). The first record is (0, p0).
std::vector<WalkRecord> simulate_walk(const Manifold& M, const Point& p0, double N,
                                      const StepMeasure& m, double t_end, Rng& rng);

/// Positions of one walk at the increasing `times`. Jump counts between
/// consecutive times are drawn as Poisson variables, which gives the same law
/// as simulate_walk without storing the skeleton.
std::vector<Point> walk_positions_at(const Manifold& M, const Point& p0, double N,
                                     const StepMeasure& m, const std::vector<double>& times,
                                     Rng& rng);

struct EnsembleStats {
  std::vector<double> times;
  /// mean[f][k], stderr[f][k] for observable f at times[k].
  std::vector<std::vector<double>> mean;
  std::vector<std::vector<double>> std_error;
  std::size_t replicas = 0;
};

/// Ensemble averages of f(X_t) over independent walks; replica r uses
/// make_stream(seed, r). OpenMP over replicas.
EnsembleStats walk_ensemble(const Manifold& M, const Point& p0, double N, const StepMeasure& m,
                            const std::vector<double>& times,
                            const std::vector<TestFunction>& observables, std::size_t replicas,
                            std::uint64_t seed);
/// Single-threaded reference for walk_ensemble.
EnsembleStats walk_ensemble_serial(const Manifold& M, const Point& p0, double N,
                                   const StepMeasure& m, const std::vector<double>& times,
                                   const std::vector<TestFunction>& observables,
                                   std::size_t replicas, std::uint64_t seed);

}  // namespace geosep

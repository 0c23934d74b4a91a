#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "geosep/grid.hpp"

namespace geosep {

/// Occupancy vector eta in {0,1}^N with a cached particle count.
struct Configuration {
  std::vector<std::uint8_t> occupancy;
  std::size_t particle_count = 0;

  std::size_t size() const { return occupancy.size(); }
  /// True when every entry is 0 or 1 and the cached count matches.
  bool valid() const;
};

Configuration empty_configuration(std::size_t n);
Configuration full_configuration(std::size_t n);
Configuration single_particle(std::size_t n, std::size_t site);

/// Independent Bernoulli(rho0(p_i)) occupancies. Throws std::invalid_argument
/// if rho0 leaves [0, 1] at a grid point.
Configuration init_bernoulli(const PointCloud& cloud, const std::function<double(const Point&)>& rho0,
                             Rng& rng);

/// Exchanges the occupancies of sites i and j. Throws std::out_of_range.
Configuration swap(Configuration c, std::size_t i, std::size_t j);
void swap_in_place(Configuration& c, std::size_t i, std::size_t j);

/// Unordered edges of a grid with clock rates a(N) W_ij, and a Vose alias
/// table for drawing the edge whose clock rings. The generator
/// (a/2) sum_{i,j} W_ij counts each unordered edge twice, so a single clock
/// per edge runs at a W_ij. Keeps a reference to the grid.
class EdgeTable {
 public:
  explicit EdgeTable(const WeightedGrid& g);

  std::size_t size() const { return grid_->edges.size(); }
  double total_rate() const { return total_rate_; }
  double rate(std::size_t k) const { return grid_->a_scaling * grid_->edges[k].w; }
  const Edge& edge(std::size_t k) const { return grid_->edges[k]; }
  const WeightedGrid& grid() const { return *grid_; }
  bool connected() const { return connected_; }

  std::size_t sample(Rng& rng) const {
    const std::size_t n = prob_.size();
    auto k = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n));
    if (k >= n) k = n - 1;
    return uniform01(rng) < prob_[k] ? k : alias_[k];
  }

 private:
  const WeightedGrid* grid_;
  double total_rate_ = 0.0;
  bool connected_ = false;
  std::vector<double> prob_;
  std::vector<std::uint32_t> alias_;
};

/// Per-site values o_i; the observable is mu(o) = (1/N) sum_i o_i eta_i.
struct SiteObservable {
  std::string id;
  std::vector<double> values;
};

SiteObservable site_observable(const PointCloud& cloud, const TestFunction& phi);
/// Sites carry Delta phi(p_i) (id "lap:" + phi.id).
SiteObservable site_laplacian(const PointCloud& cloud, const TestFunction& phi);
/// Sites carry a(N) sum_j W_ij (phi_j - phi_i); mu of it is L^N f(eta) for
/// f(eta) = mu(phi) (id "gen:" + phi.id).
SiteObservable site_generator(const WeightedGrid& g, const TestFunction& phi);

double mu(const Configuration& c, const SiteObservable& o);

struct SepEvent {
  double time;
  std::uint32_t edge;
};

/// Initial configuration plus every clock ring, enough to replay the path.
struct Journal {
  Configuration initial;
  std::vector<SepEvent> events;
};

struct SepOptions {
  double t_end = 1.0;
  /// Increasing, within [0, t_end].
  std::vector<double> record_times;
  bool journal = false;
  /// Recheck conservation and exclusion every k events (0 = never). Violations
  /// throw std::logic_error.
  std::size_t validate_every = 0;
};

/// Observable values at the record times. values[o][k] = mu_{t_k}(o) and
/// integrals[o][k] = int_0^{t_k} mu_s(o) ds, both exact for the simulated path.
struct ObservableTrace {
  std::vector<std::string> ids;
  std::vector<double> times;
  std::vector<std::vector<double>> values;
  std::vector<std::vector<double>> integrals;
  std::uint64_t event_count = 0;
  std::uint64_t effective_swaps = 0;
  Configuration final_state;
  std::optional<Journal> journal;
};

/// Exact continuous-time simulation: a global exponential clock with rate
/// total_rate, alias draw of the ringing edge, swap of its endpoints (no-op
/// when equal). Observables update incrementally by
/// (o_j - o_i)(eta_i - eta_j) / N. Requires g.normalized; throws
/// std::invalid_argument for t_end <= 0 or bad record times.
ObservableTrace simulate(Configuration c0, const EdgeTable& table,
                         const std::vector<SiteObservable>& observables, const SepOptions& options,
                         Rng& rng);
ObservableTrace simulate(Configuration c0, const WeightedGrid& g,
                         const std::vector<SiteObservable>& observables, const SepOptions& options,
                         Rng& rng);

/// M_t = mu_t(phi) - mu_0(phi) - int_0^t L^N f(eta_s) ds at the record times,
/// replayed from the journal. Throws std::invalid_argument without a journal.
std::vector<double> dynkin_path(const ObservableTrace& trace, const TestFunction& phi,
                                const WeightedGrid& g);
/// Same quantity from a trace that tracked `phi_id` and "gen:" + phi_id.
std::vector<double> dynkin_from_trace(const ObservableTrace& trace, const std::string& phi_id);

/// T a(N) / (2 N^2) sum_{i,j} W_ij (phi_j - phi_i)^2, an upper bound on
/// E <M>_T.
double qv_bound(const WeightedGrid& g, const TestFunction& phi, double T);

/// Replica r draws its initial configuration and its path from
/// make_stream(seed, r).
using InitialState = std::function<Configuration(Rng&)>;

/// Independent replicas; OpenMP over replicas, traces in replica order.
std::vector<ObservableTrace> run_replicas(const EdgeTable& table, const InitialState& initial,
                                          const std::vector<SiteObservable>& observables,
                                          const SepOptions& options, std::size_t replicas,
                                          std::uint64_t seed);
/// Single-threaded reference for run_replicas.
std::vector<ObservableTrace> run_replicas_serial(const EdgeTable& table, const InitialState& initial,
                                                 const std::vector<SiteObservable>& observables,
                                                 const SepOptions& options, std::size_t replicas,
                                                 std::uint64_t seed);

struct SampleStats {
  double mean = 0.0;
  double std_error = 0.0;
  double variance = 0.0;
  /// Standard error of the sample variance.
  double variance_std_error = 0.0;
};

SampleStats sample_stats(const std::vector<double>& xs);

}  // namespace geosep

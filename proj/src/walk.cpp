#include "geosep/walk.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace geosep {

TangentVector StepMeasure::draw(const Point& p, Rng& rng) const {
  TangentVector v = sampler(p, rng);
  if (v.norm() > support_bound * (1.0 + 1e-12) + 1e-15) {
    throw std::logic_error("step measure '" + id + "' drew outside its support bound");
  }
  return v;
}

std::vector<TangentVector> StepMeasure::draw_batch(const Point& p, std::size_t count,
                                                   Rng& rng) const {
  std::vector<TangentVector> out;
  if (stratified) {
    out = stratified(p, count, rng);
    for (const auto& v : out) {
      if (v.norm() > support_bound * (1.0 + 1e-12) + 1e-15) {
        throw std::logic_error("step measure '" + id + "' drew outside its support bound");
      }
    }
    return out;
  }
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(draw(p, rng));
  return out;
}

StepMeasure uniform_sphere_step(const Manifold& M, double scale) {
  if (!(scale > 0.0)) throw ContractViolation("uniform_sphere_step: scale must be positive");
  const int n = M.dim();
  StepMeasure m;
  m.id = "uniform_sphere";
  m.support_bound = scale;
  m.total_mass = 1.0;
  m.declared_speed = scale * scale / n;
  m.sampler = [M, n, scale](const Point& p, Rng& rng) {
    std::array<double, 3> a{};
    if (n == 1) {
      a[0] = uniform01(rng) < 0.5 ? -scale : scale;
    } else {
      std::normal_distribution<double> gauss;
      double r = 0.0;
      do {
        r = 0.0;
        for (int k = 0; k < n; ++k) {
          a[k] = gauss(rng);
          r += a[k] * a[k];
        }
      } while (r < 1e-24);
      r = std::sqrt(r);
      for (int k = 0; k < n; ++k) a[k] *= scale / r;
    }
    return M.from_frame(p, std::span<const double>(a.data(), n));
  };
  if (n <= 2) {
    // Rotated equispaced directions: each draw is uniform on the sphere, and
    // batch means of trigonometric polynomials of low degree are exact.
    m.stratified = [M, n, scale](const Point& p, std::size_t count, Rng& rng) {
      std::vector<TangentVector> out;
      out.reserve(count);
      const double u = uniform01(rng);
      for (std::size_t i = 0; i < count; ++i) {
        std::array<double, 3> a{};
        if (n == 1) {
          a[0] = ((i + (u < 0.5 ? 0 : 1)) % 2 == 0) ? scale : -scale;
        } else {
          double psi = 2.0 * std::numbers::pi * (static_cast<double>(i) + u) / count;
          a[0] = scale * std::cos(psi);
          a[1] = scale * std::sin(psi);
        }
        out.push_back(M.from_frame(p, std::span<const double>(a.data(), n)));
      }
      return out;
    };
  }
  return m;
}

StepMeasure uniform_sphere_step(const Manifold& M) {
  return uniform_sphere_step(M, std::sqrt(static_cast<double>(M.dim())));
}

StepMeasure product_counterexample_step(const Manifold& M) {
  constexpr double kLow = -2.0;
  constexpr double kHigh = 0.5;
  constexpr double kLowProb = 0.2;
  const int n = M.dim();
  StepMeasure m;
  m.id = "product_counterexample";
  m.support_bound = 2.0 * std::sqrt(static_cast<double>(n));
  m.total_mass = 1.0;
  m.declared_speed = 1.0;
  m.sampler = [M, n](const Point& p, Rng& rng) {
    std::array<double, 3> a{};
    for (int k = 0; k < n; ++k) a[k] = uniform01(rng) < kLowProb ? kLow : kHigh;
    return M.from_frame(p, std::span<const double>(a.data(), n));
  };
  // Systematic sampling over the 2^n atoms.
  m.stratified = [M, n](const Point& p, std::size_t count, Rng& rng) {
    const int atoms = 1 << n;
    std::vector<double> cumulative(atoms);
    double acc = 0.0;
    for (int s = 0; s < atoms; ++s) {
      double prob = 1.0;
      for (int k = 0; k < n; ++k) prob *= (s >> k & 1) ? kLowProb : 1.0 - kLowProb;
      acc += prob;
      cumulative[s] = acc;
    }
    cumulative.back() = 1.0;
    std::vector<TangentVector> out;
    out.reserve(count);
    const double u = uniform01(rng);
    int s = 0;
    for (std::size_t i = 0; i < count; ++i) {
      double q = (static_cast<double>(i) + u) / count;
      while (cumulative[s] <= q && s + 1 < atoms) ++s;
      std::array<double, 3> a{};
      for (int k = 0; k < n; ++k) a[k] = (s >> k & 1) ? kLow : kHigh;
      out.push_back(M.from_frame(p, std::span<const double>(a.data(), n)));
    }
    return out;
  };
  return m;
}

StepMeasure biased_step(const Manifold& M) {
  const int n = M.dim();
  StepMeasure m;
  m.id = "biased_constant";
  m.support_bound = 1.0;
  m.total_mass = 1.0;
  m.sampler = [M, n](const Point& p, Rng&) {
    std::array<double, 3> a{1.0, 0.0, 0.0};
    return M.from_frame(p, std::span<const double>(a.data(), n));
  };
  return m;
}

StepMeasure point_dependent_step(std::string id, StepMeasure first, StepMeasure second,
                                 std::function<bool(const Point&)> use_first) {
  if (first.total_mass != second.total_mass) {
    throw ContractViolation("point_dependent_step: total masses differ");
  }
  StepMeasure m;
  m.id = std::move(id);
  m.support_bound = std::max(first.support_bound, second.support_bound);
  m.total_mass = first.total_mass;
  if (first.declared_speed && second.declared_speed &&
      *first.declared_speed == *second.declared_speed) {
    m.declared_speed = first.declared_speed;
  }
  m.sampler = [first, second, use_first](const Point& p, Rng& rng) {
    return use_first(p) ? first.sampler(p, rng) : second.sampler(p, rng);
  };
  m.stratified = [first, second, use_first](const Point& p, std::size_t count, Rng& rng) {
    const StepMeasure& s = use_first(p) ? first : second;
    if (s.stratified) return s.stratified(p, count, rng);
    std::vector<TangentVector> out;
    for (std::size_t i = 0; i < count; ++i) out.push_back(s.sampler(p, rng));
    return out;
  };
  return m;
}

namespace {

struct RunningMoments {
  double sum = 0.0;
  double sumsq = 0.0;

  void add(double x) {
    sum += x;
    sumsq += x * x;
  }
  double mean(std::size_t n) const { return sum / n; }
  double std_error(std::size_t n) const {
    double mu = mean(n);
    double var = std::max(0.0, sumsq / n - mu * mu) * n / (n > 1 ? n - 1 : 1);
    return std::sqrt(var / n);
  }
};

}  // namespace

MomentReport check_canonical(const Manifold& M, const StepMeasure& m, const Point& p,
                             std::size_t samples, Rng& rng) {
  if (samples < kMinMomentSamples) throw ContractViolation("check_canonical: need >= 1e4 samples");
  const int n = M.dim();
  std::vector<RunningMoments> mean(n);
  std::vector<std::vector<RunningMoments>> second(n, std::vector<RunningMoments>(n));
  std::vector<std::vector<RunningMoments>> deviation(n, std::vector<RunningMoments>(n));
  RunningMoments speed;
  for (std::size_t s = 0; s < samples; ++s) {
    auto a = M.to_frame(m.draw(p, rng));
    double sq = 0.0;
    for (int i = 0; i < n; ++i) sq += a[i] * a[i];
    speed.add(sq / n);
    for (int i = 0; i < n; ++i) {
      mean[i].add(a[i]);
      for (int j = 0; j < n; ++j) {
        second[i][j].add(a[i] * a[j]);
        deviation[i][j].add(a[i] * a[j] - (i == j ? sq / n : 0.0));
      }
    }
  }
  MomentReport r;
  r.c_hat = speed.mean(samples);
  r.c_hat_stderr = speed.std_error(samples);
  r.mean_vec.resize(n);
  r.cov_mat.assign(n, std::vector<double>(n));
  constexpr double kExactSlack = 1e-12;
  bool pass = true;
  for (int i = 0; i < n; ++i) {
    r.mean_vec[i] = mean[i].mean(samples);
    double se = mean[i].std_error(samples);
    r.mc_stderr = std::max(r.mc_stderr, se);
    if (std::abs(r.mean_vec[i]) > kGateSigmas * se + kExactSlack) pass = false;
    for (int j = 0; j < n; ++j) {
      r.cov_mat[i][j] = second[i][j].mean(samples);
      double dev = deviation[i][j].mean(samples);
      double dse = deviation[i][j].std_error(samples);
      r.mc_stderr = std::max(r.mc_stderr, dse);
      if (std::abs(dev) > kGateSigmas * dse + kExactSlack) pass = false;
    }
  }
  r.pass = pass;
  return r;
}

Estimate speed_constant(const Manifold& M, const StepMeasure& m, const Point& p,
                        std::size_t samples, Rng& rng) {
  if (samples < kMinMomentSamples) throw ContractViolation("speed_constant: need >= 1e4 samples");
  RunningMoments acc;
  for (std::size_t s = 0; s < samples; ++s) {
    double norm = m.draw(p, rng).norm();
    acc.add(norm * norm / M.dim());
  }
  return {acc.mean(samples), acc.std_error(samples)};
}

double generator_apply(const Manifold& M, const TestFunction& f, const Point& p, double N,
                       const StepMeasure& m, std::size_t samples, Rng& rng) {
  if (!(N >= 1.0)) throw ContractViolation("generator_apply: N must be >= 1");
  if (samples == 0) throw ContractViolation("generator_apply: need at least one sample");
  const double f0 = f.eval(p);
  const double h = 1.0 / N;
  double acc = 0.0;
  for (const auto& eta : m.draw_batch(p, samples, rng)) {
    acc += 0.5 * ((f.eval(M.exp_map(p, eta, h)) - f0) + (f.eval(M.exp_map(p, -eta, h)) - f0));
  }
  return N * N * m.total_mass * acc / static_cast<double>(samples);
}

std::vector<WalkRecord> simulate_walk(const Manifold& M, const Point& p0, double N,
                                      const StepMeasure& m, double t_end, Rng& rng) {
  if (!(t_end > 0.0)) throw ContractViolation("simulate_walk: t_end must be positive");
  std::exponential_distribution<double> holding(m.total_mass * N * N);
  std::vector<WalkRecord> path{{0.0, p0}};
  Point p = p0;
  double t = 0.0;
  while (true) {
    t += holding(rng);
    if (t > t_end) break;
    p = M.exp_map(p, m.draw(p, rng), 1.0 / N);
    path.push_back({t, p});
  }
  return path;
}

std::vector<Point> walk_positions_at(const Manifold& M, const Point& p0, double N,
                                     const StepMeasure& m, const std::vector<double>& times,
                                     Rng& rng) {
  std::vector<Point> out;
  out.reserve(times.size());
  Point p = p0;
  double prev = 0.0;
  const double rate = m.total_mass * N * N;
  for (double t : times) {
    if (t < prev) throw ContractViolation("walk_positions_at: times must be increasing");
    std::poisson_distribution<long long> jumps(rate * (t - prev));
    long long count = t > prev ? jumps(rng) : 0;
    for (long long k = 0; k < count; ++k) p = M.exp_map(p, m.draw(p, rng), 1.0 / N);
    out.push_back(p);
    prev = t;
  }
  return out;
}

namespace {

// values[r * F * T + f * T + k]
void replica_values(const Manifold& M, const Point& p0, double N, const StepMeasure& m,
                    const std::vector<double>& times, const std::vector<TestFunction>& obs,
                    std::uint64_t seed, std::size_t r, double* out) {
  Rng rng = make_stream(seed, r);
  auto pos = walk_positions_at(M, p0, N, m, times, rng);
  for (std::size_t f = 0; f < obs.size(); ++f) {
    for (std::size_t k = 0; k < times.size(); ++k) out[f * times.size() + k] = obs[f].eval(pos[k]);
  }
}

EnsembleStats reduce_replicas(const std::vector<double>& values, const std::vector<double>& times,
                              std::size_t nobs, std::size_t replicas) {
  EnsembleStats s;
  s.times = times;
  s.replicas = replicas;
  const std::size_t T = times.size();
  s.mean.assign(nobs, std::vector<double>(T));
  s.std_error.assign(nobs, std::vector<double>(T));
  for (std::size_t f = 0; f < nobs; ++f) {
    for (std::size_t k = 0; k < T; ++k) {
      RunningMoments acc;
      for (std::size_t r = 0; r < replicas; ++r) acc.add(values[r * nobs * T + f * T + k]);
      s.mean[f][k] = acc.mean(replicas);
      s.std_error[f][k] = acc.std_error(replicas);
    }
  }
  return s;
}

}  // namespace

EnsembleStats walk_ensemble(const Manifold& M, const Point& p0, double N, const StepMeasure& m,
                            const std::vector<double>& times,
                            const std::vector<TestFunction>& observables, std::size_t replicas,
                            std::uint64_t seed) {
  const std::size_t stride = observables.size() * times.size();
  std::vector<double> values(replicas * stride);
  const auto count = static_cast<std::int64_t>(replicas);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t r = 0; r < count; ++r) {
    replica_values(M, p0, N, m, times, observables, seed, static_cast<std::size_t>(r),
                   values.data() + r * stride);
  }
  return reduce_replicas(values, times, observables.size(), replicas);
}

EnsembleStats walk_ensemble_serial(const Manifold& M, const Point& p0, double N,
                                   const StepMeasure& m, const std::vector<double>& times,
                                   const std::vector<TestFunction>& observables,
                                   std::size_t replicas, std::uint64_t seed) {
  const std::size_t stride = observables.size() * times.size();
  std::vector<double> values(replicas * stride);
  for (std::size_t r = 0; r < replicas; ++r) {
    replica_values(M, p0, N, m, times, observables, seed, r, values.data() + r * stride);
  }
  return reduce_replicas(values, times, observables.size(), replicas);
}

}  // namespace geosep

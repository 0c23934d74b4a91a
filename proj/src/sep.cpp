#include "geosep/sep.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>

namespace geosep {

bool Configuration::valid() const {
  std::size_t count = 0;
  for (auto x : occupancy) {
    if (x > 1) return false;
    count += x;
  }
  return count == particle_count;
}

Configuration empty_configuration(std::size_t n) { return Configuration{std::vector<std::uint8_t>(n, 0), 0}; }

Configuration full_configuration(std::size_t n) { return Configuration{std::vector<std::uint8_t>(n, 1), n}; }

Configuration single_particle(std::size_t n, std::size_t site) {
  if (site >= n) throw std::out_of_range("single_particle: site out of range");
  Configuration c = empty_configuration(n);
  c.occupancy[site] = 1;
  c.particle_count = 1;
  return c;
}

Configuration init_bernoulli(const PointCloud& cloud, const std::function<double(const Point&)>& rho0,
                             Rng& rng) {
  std::vector<double> p(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    p[i] = rho0(cloud.points[i]);
    if (!(p[i] >= 0.0 && p[i] <= 1.0)) {
      throw std::invalid_argument("init_bernoulli: profile outside [0,1] at site " + std::to_string(i));
    }
  }
  Configuration c = empty_configuration(cloud.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (uniform01(rng) < p[i]) {
      c.occupancy[i] = 1;
      ++c.particle_count;
    }
  }
  return c;
}

void swap_in_place(Configuration& c, std::size_t i, std::size_t j) {
  if (i >= c.size() || j >= c.size()) throw std::out_of_range("swap: index out of range");
  std::swap(c.occupancy[i], c.occupancy[j]);
}

Configuration swap(Configuration c, std::size_t i, std::size_t j) {
  swap_in_place(c, i, j);
  return c;
}

EdgeTable::EdgeTable(const WeightedGrid& g) : grid_(&g) {
  const std::size_t n = g.edges.size();
  if (n == 0) throw std::invalid_argument("EdgeTable: grid has no edges");
  if (n > UINT32_MAX) throw std::invalid_argument("EdgeTable: too many edges");
  connected_ = check_connected(g).connected;
  for (const auto& e : g.edges) total_rate_ += g.a_scaling * e.w;
  // Vose: scaled probabilities n * w / sum w, small and large work lists.
  double wsum = 0.0;
  for (const auto& e : g.edges) wsum += e.w;
  prob_.resize(n);
  alias_.resize(n);
  std::vector<std::uint32_t> small, large;
  for (std::size_t k = 0; k < n; ++k) {
    prob_[k] = g.edges[k].w * static_cast<double>(n) / wsum;
    (prob_[k] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(k));
  }
  while (!small.empty() && !large.empty()) {
    std::uint32_t s = small.back();
    small.pop_back();
    std::uint32_t l = large.back();
    alias_[s] = l;
    prob_[l] -= 1.0 - prob_[s];
    if (prob_[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  for (auto k : large) {
    prob_[k] = 1.0;
    alias_[k] = k;
  }
  for (auto k : small) {  // leftovers from rounding
    prob_[k] = 1.0;
    alias_[k] = k;
  }
}

SiteObservable site_observable(const PointCloud& cloud, const TestFunction& phi) {
  return {phi.id, evaluate(cloud, phi.eval)};
}

SiteObservable site_laplacian(const PointCloud& cloud, const TestFunction& phi) {
  return {"lap:" + phi.id, evaluate(cloud, phi.laplacian)};
}

SiteObservable site_generator(const WeightedGrid& g, const TestFunction& phi) {
  return {"gen:" + phi.id, graph_laplacian_apply(g, phi)};
}

double mu(const Configuration& c, const SiteObservable& o) {
  if (o.values.size() != c.size()) throw std::invalid_argument("mu: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c.occupancy[i]) s += o.values[i];
  }
  return s / static_cast<double>(c.size());
}

namespace {

void check_record_times(const SepOptions& options) {
  if (!(options.t_end > 0.0)) throw std::invalid_argument("simulate: t_end must be positive");
  double prev = -1.0;
  for (double t : options.record_times) {
    if (!(t >= 0.0 && t <= options.t_end) || t <= prev) {
      throw std::invalid_argument("simulate: record times must increase within [0, t_end]");
    }
    prev = t;
  }
}

void validate(const Configuration& c, std::size_t expected) {
  if (!c.valid() || c.particle_count != expected) {
    throw std::logic_error("simulate: conservation or exclusion violated");
  }
}

}  // namespace

ObservableTrace simulate(Configuration c0, const EdgeTable& table,
                         const std::vector<SiteObservable>& observables, const SepOptions& options,
                         Rng& rng) {
  const WeightedGrid& g = table.grid();
  if (!g.normalized) throw std::invalid_argument("simulate: grid must be normalized");
  check_record_times(options);
  const std::size_t n = g.size();
  if (c0.size() != n) throw std::invalid_argument("simulate: configuration size mismatch");
  validate(c0, c0.particle_count);
  for (const auto& o : observables) {
    if (o.values.size() != n) throw std::invalid_argument("simulate: observable size mismatch");
  }
  if (!table.connected()) {
    static bool warned = false;
    if (!warned) {
      warned = true;
      std::clog << "warning: simulating exclusion on a disconnected grid\n";
    }
  }

  ObservableTrace trace;
  const std::size_t no = observables.size();
  trace.times = options.record_times;
  trace.values.assign(no, {});
  trace.integrals.assign(no, {});
  for (const auto& o : observables) trace.ids.push_back(o.id);
  if (options.journal) trace.journal = Journal{c0, {}};

  Configuration c = std::move(c0);
  const std::size_t count = c.particle_count;
  std::vector<double> value(no), integral(no, 0.0);
  for (std::size_t k = 0; k < no; ++k) value[k] = mu(c, observables[k]);
  const double inv_n = 1.0 / static_cast<double>(n);

  std::exponential_distribution<double> clock(table.total_rate());
  double now = 0.0;
  std::size_t next_record = 0;
  const auto& rec = options.record_times;
  while (true) {
    const double next = now + clock(rng);
    // The path is constant on [now, next): record every time in that window.
    while (next_record < rec.size() && rec[next_record] < next) {
      const double t = rec[next_record];
      for (std::size_t k = 0; k < no; ++k) {
        trace.values[k].push_back(value[k]);
        trace.integrals[k].push_back(integral[k] + value[k] * (t - now));
      }
      ++next_record;
    }
    if (next > options.t_end) break;
    for (std::size_t k = 0; k < no; ++k) integral[k] += value[k] * (next - now);
    now = next;
    const std::size_t e = table.sample(rng);
    const Edge& edge = table.edge(e);
    ++trace.event_count;
    if (trace.journal) trace.journal->events.push_back({now, static_cast<std::uint32_t>(e)});
    const int diff = static_cast<int>(c.occupancy[edge.i]) - static_cast<int>(c.occupancy[edge.j]);
    if (diff != 0) {
      for (std::size_t k = 0; k < no; ++k) {
        const auto& o = observables[k].values;
        value[k] += (o[edge.j] - o[edge.i]) * diff * inv_n;
      }
      std::swap(c.occupancy[edge.i], c.occupancy[edge.j]);
      ++trace.effective_swaps;
    }
    if (options.validate_every > 0 && trace.event_count % options.validate_every == 0) {
      validate(c, count);
    }
  }
  validate(c, count);
  trace.final_state = std::move(c);
  return trace;
}

ObservableTrace simulate(Configuration c0, const WeightedGrid& g,
                         const std::vector<SiteObservable>& observables, const SepOptions& options,
                         Rng& rng) {
  EdgeTable table(g);
  return simulate(std::move(c0), table, observables, options, rng);
}

std::vector<double> dynkin_path(const ObservableTrace& trace, const TestFunction& phi,
                                const WeightedGrid& g) {
  if (!trace.journal) throw std::invalid_argument("dynkin_path: trace has no journal");
  const auto f = site_observable(g.cloud, phi);
  const auto lf = site_generator(g, phi);
  Configuration c = trace.journal->initial;
  const double f0 = mu(c, f);
  double fv = f0;
  double lv = mu(c, lf);
  double integral = 0.0;
  double now = 0.0;
  const double inv_n = 1.0 / static_cast<double>(c.size());
  std::vector<double> out;
  const auto& events = trace.journal->events;
  std::size_t e = 0;
  for (double t : trace.times) {
    while (e < events.size() && events[e].time <= t) {
      integral += lv * (events[e].time - now);
      now = events[e].time;
      const Edge& edge = g.edges[events[e].edge];
      const int diff = static_cast<int>(c.occupancy[edge.i]) - static_cast<int>(c.occupancy[edge.j]);
      if (diff != 0) {
        fv += (f.values[edge.j] - f.values[edge.i]) * diff * inv_n;
        lv += (lf.values[edge.j] - lf.values[edge.i]) * diff * inv_n;
        std::swap(c.occupancy[edge.i], c.occupancy[edge.j]);
      }
      ++e;
    }
    out.push_back(fv - f0 - (integral + lv * (t - now)));
  }
  return out;
}

std::vector<double> dynkin_from_trace(const ObservableTrace& trace, const std::string& phi_id) {
  auto find = [&](const std::string& id) {
    auto it = std::find(trace.ids.begin(), trace.ids.end(), id);
    if (it == trace.ids.end()) throw std::invalid_argument("dynkin_from_trace: missing observable " + id);
    return static_cast<std::size_t>(it - trace.ids.begin());
  };
  const std::size_t f = find(phi_id);
  const std::size_t lf = find("gen:" + phi_id);
  if (trace.times.empty()) return {};
  // Value at time 0 is recovered from the first record only if it is at 0.
  if (trace.times.front() != 0.0) throw std::invalid_argument("dynkin_from_trace: first record time must be 0");
  const double f0 = trace.values[f][0];
  std::vector<double> out;
  for (std::size_t k = 0; k < trace.times.size(); ++k) {
    out.push_back(trace.values[f][k] - f0 - trace.integrals[lf][k]);
  }
  return out;
}

double qv_bound(const WeightedGrid& g, const TestFunction& phi, double T) {
  const auto v = evaluate(g.cloud, phi.eval);
  double s = 0.0;
  for (const auto& e : g.edges) {
    const double d = v[e.j] - v[e.i];
    s += e.w * d * d;
  }
  const double n = static_cast<double>(g.size());
  // Each unordered edge appears twice in the ordered double sum.
  return T * g.a_scaling / (2.0 * n * n) * 2.0 * s;
}

std::vector<ObservableTrace> run_replicas(const EdgeTable& table, const InitialState& initial,
                                          const std::vector<SiteObservable>& observables,
                                          const SepOptions& options, std::size_t replicas,
                                          std::uint64_t seed) {
  std::vector<ObservableTrace> out(replicas);
  const auto count = static_cast<std::int64_t>(replicas);
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t r = 0; r < count; ++r) {
    try {
      Rng rng = make_stream(seed, static_cast<std::uint64_t>(r));
      Configuration c0 = initial(rng);
      out[r] = simulate(std::move(c0), table, observables, options, rng);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

std::vector<ObservableTrace> run_replicas_serial(const EdgeTable& table, const InitialState& initial,
                                                 const std::vector<SiteObservable>& observables,
                                                 const SepOptions& options, std::size_t replicas,
                                                 std::uint64_t seed) {
  std::vector<ObservableTrace> out;
  out.reserve(replicas);
  for (std::size_t r = 0; r < replicas; ++r) {
    Rng rng = make_stream(seed, r);
    Configuration c0 = initial(rng);
    out.push_back(simulate(std::move(c0), table, observables, options, rng));
  }
  return out;
}

SampleStats sample_stats(const std::vector<double>& xs) {
  SampleStats s;
  const double n = static_cast<double>(xs.size());
  if (xs.empty()) return s;
  for (double x : xs) s.mean += x;
  s.mean /= n;
  if (xs.size() < 2) return s;
  double m2 = 0.0, m4 = 0.0;
  for (double x : xs) {
    const double d = (x - s.mean) * (x - s.mean);
    m2 += d;
    m4 += d * d;
  }
  s.variance = m2 / (n - 1.0);
  s.std_error = std::sqrt(s.variance / n);
  m4 /= n;
  const double m2n = m2 / n;
  s.variance_std_error = std::sqrt(std::max(0.0, m4 - m2n * m2n) / n);
  return s;
}

}  // namespace geosep

#include "saloha/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace saloha::sim {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream) : engine_(mix64(mix64(seed) ^ stream)) {}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::exponential() { return -std::log1p(-uniform()); }

SimConfig SimConfig::for_intensity(double lambda, double L) {
  SimConfig cfg;
  cfg.L = L;
  cfg.params.lambda = lambda;
  cfg.N = static_cast<std::size_t>(std::llround(lambda * L * L));
  return cfg;
}

void SimConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("SimConfig: ") + what);
  };
  require(std::isfinite(L) && L > 0.0, "L must be > 0");
  require(N >= 2, "N must be >= 2");
  require(realizations >= 1, "realizations must be >= 1");
  require(inner_fraction > 0.0 && inner_fraction <= 1.0, "inner_fraction must lie in (0, 1]");
  require(solve_tol > 0.0, "solve_tol must be > 0");
  params.validate();
}

NetworkRealization sample_realization(const SimConfig& cfg, std::size_t index) {
  Rng rng(cfg.seed, index);
  std::size_t n = cfg.N;
  if (cfg.poisson_count) {
    std::poisson_distribution<std::size_t> count(cfg.params.lambda * cfg.L * cfg.L);
    n = count(rng.engine());
  }
  std::vector<Point> tx(n);
  std::vector<double> angles(n);
  for (std::size_t i = 0; i < n; ++i) {
    tx[i].x = cfg.L * rng.uniform();
    tx[i].y = cfg.L * rng.uniform();
    angles[i] = 2.0 * std::numbers::pi * rng.uniform();
  }
  return NetworkRealization(cfg.L, std::move(tx), std::move(angles), cfg.params.r, mix64(cfg.seed) ^ index);
}

MapAssignment assign_maps(const NetworkRealization& net, const StoppingSetSpec& spec,
                          const ModelParams& params, double tol) {
  if (spec.kind() == StoppingSetKind::FullPlane) return solve_finite_window(net, params, tol);
  MapAssignment out;
  out.maps.resize(net.size());
  for (std::size_t i = 0; i < net.size(); ++i) {
    out.maps[i] = solve_map(local_view(i, net, spec, params), params, tol).psi;
  }
  return out;
}

bool in_inner_window(Point x, double L, double fraction) {
  const double lo = 0.5 * L * (1.0 - fraction);
  const double hi = 0.5 * L * (1.0 + fraction);
  return x.x >= lo && x.x <= hi && x.y >= lo && x.y <= hi;
}

RealizationMetrics compute_metrics(const NetworkRealization& net, const MapAssignment& maps,
                                   const ModelParams& params, double inner_fraction) {
  maps.validate(net.size());
  RealizationMetrics m;
  const double L = net.window_side();
  double sum_log = 0.0;
  const auto tx = net.transmitters();
  for (std::size_t i = 0; i < net.size(); ++i) {
    if (!in_inner_window(tx[i], L, inner_fraction)) continue;
    const double log_pq = log_throughput(i, net, maps, params);
    ++m.inner_nodes;
    sum_log += log_pq;
    m.aggregate_throughput += std::exp(log_pq);
  }
  if (m.inner_nodes > 0) m.mean_log_throughput = sum_log / static_cast<double>(m.inner_nodes);
  const double side = inner_fraction * L;
  m.density_throughput = m.aggregate_throughput / (side * side);
  return m;
}

Statistic summarize(std::span<const double> values) {
  Statistic s;
  s.n = values.size();
  if (s.n == 0) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std_error = std::sqrt(ss / static_cast<double>(s.n - 1) / static_cast<double>(s.n));
  }
  return s;
}

Statistic MetricsReport::theta(double lambda) const {
  return {lambda * mean_log_throughput.mean, lambda * mean_log_throughput.std_error,
          mean_log_throughput.n};
}

namespace {

// Pooled CCDF over clusters (realizations): p = sum count / sum n, with the
// ratio-estimator standard error.
class ClusteredCcdf {
 public:
  explicit ClusteredCcdf(std::size_t grid_size) : grid_(analytic::uniform_grid(grid_size)) {}

  void add(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    std::vector<std::size_t> row(grid_.size() + 1);
    for (std::size_t k = 0; k < grid_.size(); ++k) {
      row[k] = static_cast<std::size_t>(values.end() -
                                        std::upper_bound(values.begin(), values.end(), grid_[k]));
    }
    row.back() = static_cast<std::size_t>(
        values.end() - std::lower_bound(values.begin(), values.end(), 1.0));
    counts_.push_back(std::move(row));
    sizes_.push_back(values.size());
  }

  analytic::MapDistribution finish() const {
    analytic::MapDistribution d;
    d.grid = grid_;
    d.source = analytic::DistributionSource::Empirical;
    d.ccdf.assign(grid_.size(), 0.0);
    d.error.assign(grid_.size(), 0.0);
    double total = 0.0;
    for (std::size_t n : sizes_) total += static_cast<double>(n);
    if (total == 0.0) return d;
    const double clusters = static_cast<double>(sizes_.size());
    auto estimate = [&](std::size_t k, double& p, double& se) {
      double hits = 0.0;
      for (const auto& row : counts_) hits += static_cast<double>(row[k]);
      p = hits / total;
      if (clusters < 2.0) {
        se = std::sqrt(p * (1.0 - p) / total);
        return;
      }
      double ss = 0.0;
      for (std::size_t c = 0; c < counts_.size(); ++c) {
        const double r = static_cast<double>(counts_[c][k]) - p * static_cast<double>(sizes_[c]);
        ss += r * r;
      }
      se = std::sqrt(ss * clusters / (clusters - 1.0)) / total;
    };
    for (std::size_t k = 0; k < grid_.size(); ++k) estimate(k, d.ccdf[k], d.error[k]);
    estimate(grid_.size(), d.atom_at_one, d.atom_error);
    return d;
  }

 private:
  std::vector<double> grid_;
  std::vector<std::vector<std::size_t>> counts_;
  std::vector<std::size_t> sizes_;
};

}  // namespace

MetricsReport run(const SimConfig& cfg, std::size_t grid_size) {
  cfg.validate();
  MetricsReport report;
  ClusteredCcdf ccdf(grid_size);
  std::vector<double> log_tp, density, aggregate;
  for (std::size_t r = 0; r < cfg.realizations; ++r) {
    const NetworkRealization net = sample_realization(cfg, r);
    if (net.size() < 2) {
      ++report.empty_windows;
      continue;
    }
    const MapAssignment maps = assign_maps(net, cfg.spec, cfg.params, cfg.solve_tol);
    const RealizationMetrics m = compute_metrics(net, maps, cfg.params, cfg.inner_fraction);
    report.per_realization.push_back(m);
    if (m.inner_nodes == 0) {
      ++report.empty_windows;
      continue;
    }
    log_tp.push_back(m.mean_log_throughput);
    density.push_back(m.density_throughput);
    aggregate.push_back(m.aggregate_throughput);
    std::vector<double> inner_maps;
    inner_maps.reserve(m.inner_nodes);
    const auto tx = net.transmitters();
    for (std::size_t i = 0; i < net.size(); ++i) {
      if (in_inner_window(tx[i], cfg.L, cfg.inner_fraction)) inner_maps.push_back(maps.maps[i]);
    }
    ccdf.add(std::move(inner_maps));
  }
  report.mean_log_throughput = summarize(log_tp);
  report.density_throughput = summarize(density);
  report.aggregate_throughput = summarize(aggregate);
  report.map_ccdf = ccdf.finish();
  return report;
}

analytic::MapDistribution empirical_extra_receiver_ccdf(const SimConfig& cfg, double t,
                                                        const StoppingSetSpec& spec,
                                                        std::size_t grid_size) {
  cfg.validate();
  if (!(t > 0.0)) throw std::invalid_argument("empirical_extra_receiver_ccdf: t must be > 0");
  ClusteredCcdf ccdf(grid_size);
  const Point centre{0.5 * cfg.L, 0.5 * cfg.L};
  for (std::size_t r = 0; r < cfg.realizations; ++r) {
    Rng rng(cfg.seed, r);
    std::vector<Point> receivers;
    receivers.reserve(cfg.N);
    for (std::size_t i = 1; i < cfg.N; ++i) {
      const Point x{cfg.L * rng.uniform(), cfg.L * rng.uniform()};
      const double a = 2.0 * std::numbers::pi * rng.uniform();
      receivers.push_back({x.x + cfg.params.r * std::cos(a), x.y + cfg.params.r * std::sin(a)});
    }
    const double extra_angle = 2.0 * std::numbers::pi * rng.uniform();
    if (std::isfinite(t)) {
      receivers.push_back({centre.x + t * std::cos(extra_angle), centre.y + t * std::sin(extra_angle)});
    }
    const LocalView view = local_view_from_receivers(centre, receivers, std::nullopt, spec, cfg.params);
    ccdf.add({solve_map(view, cfg.params, cfg.solve_tol).psi});
  }
  return ccdf.finish();
}

double ack_pathloss_estimate(double true_distance, std::size_t n_samples,
                             const ModelParams& params, Rng& rng) {
  if (n_samples == 0) throw std::invalid_argument("ack_pathloss_estimate: n_samples must be >= 1");
  if (!(true_distance > 0.0)) throw std::invalid_argument("ack_pathloss_estimate: distance must be > 0");
  const double path = std::pow(true_distance, params.beta);
  double sum = 0.0;
  for (std::size_t k = 0; k < n_samples; ++k) sum += params.P_a * rng.exponential() * path;
  return sum / static_cast<double>(n_samples) / params.P_a;
}

std::vector<SweepRow> run_sweep(const SimConfig& base, SweepVariable variable,
                                std::span<const double> values, std::size_t grid_size) {
  std::vector<SweepRow> rows;
  rows.reserve(values.size());
  for (double v : values) {
    SweepRow row;
    row.value = v;
    row.cfg = base;
    try {
      switch (variable) {
        case SweepVariable::Lambda:
          row.cfg.params.lambda = v;
          row.cfg.N = static_cast<std::size_t>(std::llround(v * base.L * base.L));
          break;
        case SweepVariable::Radius:
          row.cfg.spec = base.spec.kind() == StoppingSetKind::NearestKCapped
                             ? StoppingSetSpec::nearest_capped(base.spec.k(), v)
                             : StoppingSetSpec::disk(v);
          break;
        case SweepVariable::K: {
          const double k = std::round(v);
          if (k != v || k < 1.0) throw std::invalid_argument("sweep: k must be a positive integer");
          row.cfg.spec = base.spec.kind() == StoppingSetKind::NearestKCapped
                             ? StoppingSetSpec::nearest_capped(static_cast<int>(k), base.spec.radius())
                             : StoppingSetSpec::nearest(static_cast<int>(k));
          break;
        }
      }
      row.report = run(row.cfg, grid_size);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<double> simulate_slots(const NetworkRealization& net, const MapAssignment& maps,
                                   const ModelParams& params, std::size_t slots, Rng& rng) {
  maps.validate(net.size());
  const std::size_t n = net.size();
  const auto tx = net.transmitters();
  const auto rx = net.receivers();
  // Path gains |X_j - y_i|^{-beta}.
  std::vector<double> gain(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      gain[i * n + j] = std::pow(squared_distance(tx[j], rx[i]), -0.5 * params.beta);
    }
  }
  std::vector<std::size_t> attempts(n, 0), successes(n, 0);
  std::vector<char> on(n);
  for (std::size_t s = 0; s < slots; ++s) {
    for (std::size_t j = 0; j < n; ++j) on[j] = rng.uniform() < maps.maps[j];
    for (std::size_t i = 0; i < n; ++i) {
      if (!on[i]) continue;
      double interference = params.W;
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i && on[j]) interference += rng.exponential() / params.mu * gain[i * n + j];
      }
      const double signal = rng.exponential() / params.mu * gain[i * n + i];
      ++attempts[i];
      if (signal >= params.T * interference) ++successes[i];
    }
  }
  std::vector<double> out(n, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < n; ++i) {
    if (attempts[i] > 0) out[i] = static_cast<double>(successes[i]) / static_cast<double>(attempts[i]);
  }
  return out;
}

}  // namespace saloha::sim

#pragma once

/// \file
/// Monte Carlo engine: finite square networks, MAP assignment per stopping
/// set, metrics averaged over the central window, empirical MAP laws, and the
/// acknowledgement-based path-loss estimator.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "saloha/analytic.hpp"
#include "saloha/map_solver.hpp"
#include "saloha/model.hpp"
#include "saloha/stopping_set.hpp"

namespace saloha::sim {

/// splitmix64 finaliser.
std::uint64_t mix64(std::uint64_t x);

/// Per-stream generator: mt19937_64 seeded from (seed, stream).
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream);

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Exponential with mean 1.
  double exponential();
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

struct SimConfig {
  double L = 40.0;
  std::size_t N = 400;
  StoppingSetSpec spec = StoppingSetSpec::full_plane();
  ModelParams params;
  std::size_t realizations = 1000;
  double inner_fraction = 0.5;
  std::uint64_t seed = 1;
  /// Draw the node count from Poisson(lambda L^2) instead of fixing it at N.
  bool poisson_count = false;
  double solve_tol = kDefaultSolveTol;

  /// Config with N = round(lambda L^2) and params.lambda = lambda.
  static SimConfig for_intensity(double lambda, double L = 40.0);

  /// Throws std::invalid_argument.
  void validate() const;
};

/// Realization `index` of cfg: uniform transmitters in [0, L]^2 and uniform
/// receiver angles, from the stream (cfg.seed, index).
NetworkRealization sample_realization(const SimConfig& cfg, std::size_t index);

/// MAP of every node under `spec`. FullPlane gives the finite-window optimum.
MapAssignment assign_maps(const NetworkRealization& net, const StoppingSetSpec& spec,
                          const ModelParams& params, double tol = kDefaultSolveTol);

/// Whether transmitter x lies in the central square of side fraction * L.
bool in_inner_window(Point x, double L, double fraction);

struct RealizationMetrics {
  std::size_t inner_nodes = 0;
  double mean_log_throughput = 0.0;   ///< mean over inner nodes of log(p q)
  double aggregate_throughput = 0.0;  ///< sum over inner nodes of p q
  double density_throughput = 0.0;    ///< aggregate / inner area
};

/// Metrics of one realization. q_i counts every node as an interferer; the
/// averages run over inner-window nodes only. inner_nodes == 0 flags an
/// empty window.
RealizationMetrics compute_metrics(const NetworkRealization& net, const MapAssignment& maps,
                                   const ModelParams& params, double inner_fraction);

/// Across-realization mean with its standard error.
struct Statistic {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
};

Statistic summarize(std::span<const double> values);

struct MetricsReport {
  Statistic mean_log_throughput;
  Statistic density_throughput;
  Statistic aggregate_throughput;
  analytic::MapDistribution map_ccdf;  ///< pooled over inner nodes
  std::vector<RealizationMetrics> per_realization;
  std::size_t empty_windows = 0;  ///< realizations without inner nodes, excluded

  /// Per-area utility lambda * mean_log_throughput.
  Statistic theta(double lambda) const;
};

/// Runs cfg.realizations realizations of cfg. The empirical CCDF uses
/// uniform_grid(grid_size); its errors are standard errors with realizations
/// as independent clusters.
MetricsReport run(const SimConfig& cfg, std::size_t grid_size = 512);

/// Empirical law of the MAP of a tagged transmitter at the window centre with
/// N - 1 other nodes and an extra receiver at distance t (t = +inf: none).
/// Realization i uses the same other nodes and angles for every t.
analytic::MapDistribution empirical_extra_receiver_ccdf(const SimConfig& cfg, double t,
                                                        const StoppingSetSpec& spec,
                                                        std::size_t grid_size = 512);

/// Estimate of d^beta from n acknowledgements received at power
/// P_a G_k d^beta with G_k ~ Exp(1): (1/n) sum P_a G_k d^beta / P_a.
double ack_pathloss_estimate(double true_distance, std::size_t n_samples,
                             const ModelParams& params, Rng& rng);

enum class SweepVariable { Lambda, Radius, K };

struct SweepRow {
  double value = 0.0;
  SimConfig cfg;
  std::optional<MetricsReport> report;
  std::string error;  ///< set when the row failed
};

/// One run() per grid value. Lambda changes N and params.lambda; Radius and
/// K rewrite the stopping set (Disk / NearestK / NearestKCapped). A failing
/// row records its error and the sweep continues.
std::vector<SweepRow> run_sweep(const SimConfig& base, SweepVariable variable,
                                std::span<const double> values, std::size_t grid_size = 512);

/// Slot-level check of the success probabilities: over `slots` slots each
/// node transmits with probability p_i, fading is Exp(mu) and node i succeeds
/// when SINR >= T. Returns per node the fraction of its transmissions that
/// succeeded (NaN if it never transmitted).
std::vector<double> simulate_slots(const NetworkRealization& net, const MapAssignment& maps,
                                   const ModelParams& params, std::size_t slots, Rng& rng);

}  // namespace saloha::sim

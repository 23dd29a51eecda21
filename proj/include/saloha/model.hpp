#pragma once

/// \file
/// Bipole network model: transmitter/receiver geometry, power-law path loss,
/// Rayleigh fading and the conditional success probability of a link given
/// the medium access probabilities of all other nodes.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace saloha {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
  friend Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
  friend bool operator==(Point a, Point b) = default;
};

double squared_distance(Point a, Point b);
double distance(Point a, Point b);

/// Physical and protocol constants of the model.
struct ModelParams {
  double lambda = 0.25;  ///< transmitter density (nodes per unit area)
  double r = 1.0;        ///< transmitter-receiver distance
  double beta = 4.0;     ///< path-loss exponent, > 2
  double T = 10.0;       ///< SINR threshold
  double mu = 1.0;       ///< inverse mean fading
  double W = 0.0;        ///< thermal noise variance
  double P_a = 1.0;      ///< acknowledgement transmit power

  /// Throws std::invalid_argument naming the first offending field.
  void validate() const;

  /// T * r^beta, the denominator of every b-coefficient.
  double scaled_threshold() const;
};

/// A finite snapshot of the bipole process inside [0, L]^2.
class NetworkRealization {
 public:
  NetworkRealization() = default;
  NetworkRealization(double window_side, std::vector<Point> transmitters,
                     std::vector<double> receiver_angles, double link_distance,
                     std::uint64_t seed = 0);

  double window_side() const { return window_side_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t size() const { return transmitters_.size(); }
  std::span<const Point> transmitters() const { return transmitters_; }
  std::span<const double> receiver_angles() const { return angles_; }
  /// Receiver positions y_i = X_i + r (cos a_i, sin a_i), cached at construction.
  std::span<const Point> receivers() const { return receivers_; }
  double link_distance() const { return link_distance_; }

 private:
  double window_side_ = 0.0;
  double link_distance_ = 1.0;
  std::uint64_t seed_ = 0;
  std::vector<Point> transmitters_;
  std::vector<double> angles_;
  std::vector<Point> receivers_;
};

/// Medium access probabilities, one per transmitter.
struct MapAssignment {
  std::vector<double> maps;

  void validate(std::size_t expected_size) const;
};

/// b = |x - y|^beta / (T r^beta). Throws std::domain_error when x == y.
double b_coeff(Point x, Point y, const ModelParams& params);

/// b-coefficient from a squared distance; skips the coincidence check.
double b_from_squared_distance(double d2, const ModelParams& params);

/// log q_i, accumulated as a sum of log1p terms.
double log_success_prob(std::size_t i, const NetworkRealization& net, const MapAssignment& maps,
                        const ModelParams& params);

/// Conditional success probability of link i given the geometry:
/// q_i = exp(-mu T r^beta W) prod_{j != i} (1 - p_j / (1 + b_ji)).
double success_prob(std::size_t i, const NetworkRealization& net, const MapAssignment& maps,
                    const ModelParams& params);

/// log(p_i q_i); -infinity when p_i = 0 or q_i = 0.
double log_throughput(std::size_t i, const NetworkRealization& net, const MapAssignment& maps,
                      const ModelParams& params);

}  // namespace saloha

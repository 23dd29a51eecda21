#include "saloha/model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace saloha {

double squared_distance(Point a, Point b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

double distance(Point a, Point b) { return std::sqrt(squared_distance(a, b)); }

void ModelParams::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("ModelParams: ") + what);
  };
  require(std::isfinite(lambda) && lambda > 0.0, "lambda must be > 0");
  require(std::isfinite(r) && r > 0.0, "r must be > 0");
  require(std::isfinite(beta) && beta > 2.0, "beta must be > 2");
  require(std::isfinite(T) && T > 0.0, "T must be > 0");
  require(std::isfinite(mu) && mu > 0.0, "mu must be > 0");
  require(std::isfinite(W) && W >= 0.0, "W must be >= 0");
  require(std::isfinite(P_a) && P_a > 0.0, "P_a must be > 0");
}

double ModelParams::scaled_threshold() const { return T * std::pow(r, beta); }

NetworkRealization::NetworkRealization(double window_side, std::vector<Point> transmitters,
                                       std::vector<double> receiver_angles, double link_distance,
                                       std::uint64_t seed)
    : window_side_(window_side),
      link_distance_(link_distance),
      seed_(seed),
      transmitters_(std::move(transmitters)),
      angles_(std::move(receiver_angles)) {
  if (transmitters_.size() != angles_.size()) {
    throw std::invalid_argument("NetworkRealization: transmitter and angle counts differ");
  }
  if (!(link_distance_ > 0.0)) {
    throw std::invalid_argument("NetworkRealization: link distance must be > 0");
  }
  receivers_.reserve(transmitters_.size());
  for (std::size_t i = 0; i < transmitters_.size(); ++i) {
    const Point x = transmitters_[i];
    if (x.x < 0.0 || x.y < 0.0 || x.x > window_side_ || x.y > window_side_) {
      throw std::invalid_argument("NetworkRealization: transmitter " + std::to_string(i) +
                                  " outside the window");
    }
    receivers_.push_back(
        {x.x + link_distance_ * std::cos(angles_[i]), x.y + link_distance_ * std::sin(angles_[i])});
  }
}

void MapAssignment::validate(std::size_t expected_size) const {
  if (maps.size() != expected_size) {
    throw std::invalid_argument("MapAssignment: expected " + std::to_string(expected_size) +
                                " entries, got " + std::to_string(maps.size()));
  }
  for (double p : maps) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("MapAssignment: p outside [0, 1]");
  }
}

double b_from_squared_distance(double d2, const ModelParams& params) {
  const double path = params.beta == 4.0 ? d2 * d2 : std::pow(d2, 0.5 * params.beta);
  return path / params.scaled_threshold();
}

double b_coeff(Point x, Point y, const ModelParams& params) {
  const double d2 = squared_distance(x, y);
  if (d2 == 0.0) throw std::domain_error("b_coeff: coincident points (singular path loss)");
  return b_from_squared_distance(d2, params);
}

double log_success_prob(std::size_t i, const NetworkRealization& net, const MapAssignment& maps,
                        const ModelParams& params) {
  if (i >= net.size()) throw std::out_of_range("log_success_prob: node index out of range");
  if (maps.maps.size() != net.size()) {
    throw std::invalid_argument("log_success_prob: MAP assignment size mismatch");
  }
  const auto tx = net.transmitters();
  const Point yi = net.receivers()[i];
  double log_q = -params.mu * params.scaled_threshold() * params.W;
  for (std::size_t j = 0; j < net.size(); ++j) {
    if (j == i || maps.maps[j] == 0.0) continue;
    const double b = b_from_squared_distance(squared_distance(tx[j], yi), params);
    log_q += std::log1p(-maps.maps[j] / (1.0 + b));
  }
  return log_q;
}

double success_prob(std::size_t i, const NetworkRealization& net, const MapAssignment& maps,
                    const ModelParams& params) {
  return std::exp(log_success_prob(i, net, maps, params));
}

double log_throughput(std::size_t i, const NetworkRealization& net, const MapAssignment& maps,
                      const ModelParams& params) {
  if (i >= maps.maps.size()) throw std::out_of_range("log_throughput: node index out of range");
  const double p = maps.maps[i];
  if (p == 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(p) + log_success_prob(i, net, maps, params);
}

}  // namespace saloha

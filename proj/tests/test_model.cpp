#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "saloha/model.hpp"

using namespace saloha;

namespace {

// Receivers of every node point along +x; transmitter j at xs[j] on the line y = 50.
NetworkRealization line_network(std::vector<double> xs, double r = 1.0) {
  std::vector<Point> tx;
  for (double x : xs) tx.push_back({x, 50.0});
  return NetworkRealization(100.0, tx, std::vector<double>(xs.size(), 0.0), r);
}

NetworkRealization random_network(std::size_t n, std::uint64_t seed, double L = 10.0) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Point> tx;
  std::vector<double> ang;
  for (std::size_t i = 0; i < n; ++i) {
    tx.push_back({L * u(gen), L * u(gen)});
    ang.push_back(2.0 * M_PI * u(gen));
  }
  return NetworkRealization(L, tx, ang, 1.0, seed);
}

ModelParams unit_threshold() {
  ModelParams p;
  p.T = 1.0;
  return p;
}

}  // namespace

TEST_CASE("b_coeff examples") {
  ModelParams p;
  CHECK(b_coeff({0, 0}, {1, 0}, p) == doctest::Approx(0.1));
  CHECK(b_coeff({0, 0}, {0, 2}, p) == doctest::Approx(1.6));
  p.r = 2.5;
  p.T = 7.0;
  CHECK(b_coeff({0, 0}, {0, 2.5}, p) == doctest::Approx(1.0 / 7.0));
  CHECK_THROWS_AS(b_coeff({1, 1}, {1, 1}, p), std::domain_error);
}

TEST_CASE("ModelParams validation names the field") {
  ModelParams p;
  CHECK_NOTHROW(p.validate());
  p.beta = 2.0;
  CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("beta"), std::invalid_argument);
  p = ModelParams{};
  p.W = -1.0;
  CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("W"), std::invalid_argument);
}

TEST_CASE("receivers sit at distance r along the angle") {
  const auto net = random_network(50, 3);
  for (std::size_t i = 0; i < net.size(); ++i)
    CHECK(distance(net.transmitters()[i], net.receivers()[i]) == doctest::Approx(1.0));
  CHECK_THROWS_AS(NetworkRealization(1.0, {{2.0, 0.5}}, {0.0}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(NetworkRealization(1.0, {{0.5, 0.5}}, {}, 1.0), std::invalid_argument);
}

TEST_CASE("success_prob examples") {
  const ModelParams p = unit_threshold();
  const auto single = line_network({50.0});
  CHECK(success_prob(0, single, {{1.0}}, p) == 1.0);

  // X_2 at distance 1 from y_1 = (51, 50): b_21 = 1.
  const auto two = line_network({50.0, 52.0});
  CHECK(success_prob(0, two, {{0.3, 1.0}}, p) == doctest::Approx(0.5));

  // b_21 = 0.5 needs distance 0.5^{1/4}.
  const auto two_b = line_network({50.0, 51.0 + std::pow(0.5, 0.25)});
  CHECK(success_prob(0, two_b, {{0.3, 0.75}}, p) == doctest::Approx(0.5));

  ModelParams noisy = p;
  noisy.W = 0.2;
  noisy.mu = 2.0;
  CHECK(success_prob(0, single, {{1.0}}, noisy) == doctest::Approx(std::exp(-2.0 * 1.0 * 0.2)));
}

TEST_CASE("log_throughput examples") {
  const ModelParams p = unit_threshold();
  const auto single = line_network({50.0});
  CHECK(log_throughput(0, single, {{1.0}}, p) == 0.0);
  CHECK(log_throughput(0, single, {{0.0}}, p) == -std::numeric_limits<double>::infinity());
  const auto two = line_network({50.0, 52.0});
  CHECK(log_throughput(0, two, {{0.5, 1.0}}, p) == doctest::Approx(std::log(0.25)));
}

TEST_CASE("success_prob properties on random realizations") {
  ModelParams p;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto net = random_network(30, seed);
    std::mt19937_64 gen(seed + 100);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    MapAssignment maps;
    for (std::size_t i = 0; i < net.size(); ++i) maps.maps.push_back(u(gen));
    const double q0 = success_prob(0, net, maps, p);

    // Monotone in every other p_j.
    for (std::size_t j = 1; j < net.size(); ++j) {
      MapAssignment up = maps;
      up.maps[j] = std::min(1.0, up.maps[j] + 0.1);
      CHECK(success_prob(0, net, up, p) <= q0 + 1e-15);
    }
    // Monotone in W.
    ModelParams noisy = p;
    noisy.W = 0.01;
    CHECK(success_prob(0, net, maps, noisy) <= q0);

    // Translation invariance.
    std::vector<Point> shifted;
    for (Point x : net.transmitters()) shifted.push_back(x + Point{5.0, 3.0});
    const std::vector<double> angles(net.receiver_angles().begin(), net.receiver_angles().end());
    const NetworkRealization moved(20.0, shifted, angles, 1.0);
    CHECK(success_prob(0, moved, maps, p) == doctest::Approx(q0).epsilon(1e-12));

    // Removing a node never decreases q_0.
    std::vector<Point> fewer(net.transmitters().begin(), net.transmitters().end() - 1);
    std::vector<double> fewer_angles(angles.begin(), angles.end() - 1);
    MapAssignment fewer_maps{std::vector<double>(maps.maps.begin(), maps.maps.end() - 1)};
    const NetworkRealization smaller(10.0, fewer, fewer_angles, 1.0);
    CHECK(success_prob(0, smaller, fewer_maps, p) >= q0);

    // Constant p: q nonincreasing in p.
    double prev = 1.0;
    for (double c : {0.1, 0.3, 0.5, 0.7, 0.9, 1.0}) {
      const double q = success_prob(0, net, {std::vector<double>(net.size(), c)}, p);
      CHECK(q <= prev);
      prev = q;
    }
  }
}

TEST_CASE("log_success_prob matches the direct product") {
  ModelParams p;
  const auto net = random_network(40, 9);
  MapAssignment maps{std::vector<double>(net.size(), 0.4)};
  for (std::size_t i = 0; i < 5; ++i) {
    double prod = 1.0;
    for (std::size_t j = 0; j < net.size(); ++j) {
      if (j == i) continue;
      const double b = std::pow(distance(net.transmitters()[j], net.receivers()[i]), 4) / 10.0;
      prod *= 1.0 - 0.4 / (1.0 + b);
    }
    CHECK(std::exp(log_success_prob(i, net, maps, p)) == doctest::Approx(prod).epsilon(1e-12));
  }
}

#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "saloha/analytic.hpp"
#include "saloha/map_solver.hpp"
#include "saloha/simulator.hpp"

using namespace saloha;
using namespace saloha::sim;

namespace {

SimConfig small_config(StoppingSetSpec spec, std::size_t realizations) {
  SimConfig cfg;
  cfg.spec = spec;
  cfg.realizations = realizations;
  return cfg;
}

}  // namespace

TEST_CASE("rng streams are reproducible and distinct") {
  Rng a(7, 3), b(7, 3), c(7, 4), d(8, 3);
  for (int k = 0; k < 10; ++k) {
    const double x = a.uniform();
    CHECK(x == b.uniform());
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
  }
  CHECK(Rng(7, 3).uniform() != c.uniform());
  CHECK(Rng(7, 3).uniform() != d.uniform());
  Rng e(1, 1);
  double sum = 0.0;
  for (int k = 0; k < 200000; ++k) sum += e.exponential();
  CHECK(sum / 200000 == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("sample_realization") {
  SimConfig cfg;
  cfg.N = 2;
  const auto a = sample_realization(cfg, 4);
  const auto b = sample_realization(cfg, 4);
  REQUIRE(a.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(a.transmitters()[i] == b.transmitters()[i]);
    CHECK(a.receiver_angles()[i] == b.receiver_angles()[i]);
  }
  CHECK_FALSE(sample_realization(cfg, 5).transmitters()[0] == a.transmitters()[0]);

  // Inner-window intensity over 1000 baseline realizations.
  SimConfig base;
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t r = 0; r < 1000; ++r) {
    const auto net = sample_realization(base, r);
    std::size_t inner = 0;
    for (std::size_t i = 0; i < net.size(); ++i) {
      inner += in_inner_window(net.transmitters()[i], base.L, base.inner_fraction);
      CHECK(distance(net.transmitters()[i], net.receivers()[i]) == doctest::Approx(base.params.r));
    }
    const double dens = static_cast<double>(inner) / (20.0 * 20.0);
    sum += dens;
    sum2 += dens * dens;
  }
  const double mean = sum / 1000;
  const double se = std::sqrt((sum2 / 1000 - mean * mean) / 999);
  CHECK(std::abs(mean - 0.25) < 3.0 * se);

  SimConfig pois;
  pois.poisson_count = true;
  double total = 0.0;
  for (std::size_t r = 0; r < 200; ++r) total += static_cast<double>(sample_realization(pois, r).size());
  CHECK(std::abs(total / 200 - 400.0) < 3.0 * std::sqrt(400.0 / 200));
}

TEST_CASE("SimConfig validation") {
  SimConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.N = 1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = SimConfig{};
  cfg.inner_fraction = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  const auto f = SimConfig::for_intensity(0.1, 40.0);
  CHECK(f.N == 160);
  CHECK(f.params.lambda == 0.1);
}

TEST_CASE("assign_maps") {
  ModelParams p;
  SimConfig cfg;
  cfg.N = 60;
  cfg.L = 15.0;
  const auto net = sample_realization(cfg, 0);
  const double psi0 = closed_form_empty(p);
  for (double m : assign_maps(net, StoppingSetSpec::empty(), p).maps) CHECK(m == doctest::Approx(psi0).epsilon(1e-11));

  ModelParams half = p;
  half.T = 2.0;
  const NetworkRealization two(10.0, {{4.0, 5.0}, {6.0, 5.0}}, {0.0, std::numbers::pi}, 1.0);
  for (double m : assign_maps(two, StoppingSetSpec::full_plane(), half).maps)
    CHECK(m == doctest::Approx(0.75).epsilon(1e-11));

  // Nearest receiver: MAP nondecreasing in R_1 within the realization.
  const auto maps = assign_maps(net, StoppingSetSpec::nearest(1), p).maps;
  std::vector<std::pair<double, double>> by_r1;
  for (std::size_t i = 0; i < net.size(); ++i) by_r1.push_back({kth_nearest_receiver_distance(i, net, 1), maps[i]});
  std::sort(by_r1.begin(), by_r1.end());
  for (std::size_t k = 1; k < by_r1.size(); ++k) CHECK(by_r1[k].second >= by_r1[k - 1].second - 1e-12);
}

TEST_CASE("compute_metrics examples") {
  ModelParams p;
  const NetworkRealization one(10.0, {{5.0, 5.0}}, {0.0}, 1.0);
  const auto m1 = compute_metrics(one, {{1.0}}, p, 0.5);
  CHECK(m1.inner_nodes == 1);
  CHECK(m1.aggregate_throughput == 1.0);
  CHECK(m1.mean_log_throughput == 0.0);
  CHECK(m1.density_throughput == doctest::Approx(1.0 / 25.0));

  ModelParams half = p;
  half.T = 2.0;
  const NetworkRealization two(10.0, {{4.0, 5.0}, {6.0, 5.0}}, {0.0, std::numbers::pi}, 1.0);
  const auto m2 = compute_metrics(two, {{0.75, 0.75}}, half, 0.5);
  CHECK(m2.inner_nodes == 2);
  CHECK(m2.aggregate_throughput == doctest::Approx(0.75));
  CHECK(m2.mean_log_throughput == doctest::Approx(std::log(0.375)));

  const NetworkRealization edge(10.0, {{0.5, 0.5}}, {0.0}, 1.0);
  CHECK(compute_metrics(edge, {{1.0}}, p, 0.5).inner_nodes == 0);
}

TEST_CASE("summarize") {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  const auto s = summarize(v);
  CHECK(s.mean == 2.5);
  CHECK(s.std_error == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
  CHECK(s.n == 4);
}

TEST_CASE("run is reproducible and orders information structures") {
  const auto a = run(small_config(StoppingSetSpec::nearest(1), 300), 16);
  const auto b = run(small_config(StoppingSetSpec::nearest(1), 300), 16);
  CHECK(a.mean_log_throughput.mean == b.mean_log_throughput.mean);
  CHECK(a.map_ccdf.ccdf == b.map_ccdf.ccdf);
  CHECK_NOTHROW(a.map_ccdf.validate());
  CHECK(a.empty_windows == 0);

  const auto e = run(small_config(StoppingSetSpec::empty(), 300), 16);
  const auto f = run(small_config(StoppingSetSpec::full_plane(), 300), 16);
  auto above = [](const Statistic& x, const Statistic& y) {
    return x.mean - y.mean > -2.0 * std::hypot(x.std_error, y.std_error);
  };
  CHECK(above(f.mean_log_throughput, a.mean_log_throughput));
  CHECK(above(a.mean_log_throughput, e.mean_log_throughput));
  // Nearest-receiver knowledge beats none on throughput density, significantly.
  CHECK(a.density_throughput.mean - e.density_throughput.mean >
        2.0 * std::hypot(a.density_throughput.std_error, e.density_throughput.std_error));
  CHECK(a.theta(0.25).mean == doctest::Approx(0.25 * a.mean_log_throughput.mean));
}

TEST_CASE("empirical disk CCDF matches the analytic law") {
  ModelParams p;
  const auto emp = run(small_config(StoppingSetSpec::disk(3.0), 300), 10).map_ccdf;
  const auto ana = analytic::map_distribution(StoppingSetSpec::disk(3.0), p, 10);
  for (std::size_t k = 0; k < 10; ++k) CHECK(std::abs(emp.ccdf[k] - ana.ccdf[k]) < 0.02);
  CHECK(std::abs(emp.atom_at_one - ana.atom_at_one) < 0.02);
}

TEST_CASE("extra receiver experiment") {
  SimConfig cfg;
  cfg.realizations = 2000;
  const auto disk3 = StoppingSetSpec::disk(3.0);
  const auto none = empirical_extra_receiver_ccdf(cfg, std::numeric_limits<double>::infinity(), disk3, 10);
  const auto far = empirical_extra_receiver_ccdf(cfg, 100.0, disk3, 10);
  CHECK(none.ccdf == far.ccdf);  // common random numbers, receiver outside S
  const auto ana = analytic::map_distribution(disk3, cfg.params, 10);
  for (std::size_t k = 0; k < 10; ++k) CHECK(std::abs(none.ccdf[k] - ana.ccdf[k]) < 0.03);

  const auto full = StoppingSetSpec::full_plane();
  const auto t1 = empirical_extra_receiver_ccdf(cfg, 1.0, full, 10);
  const auto t10 = empirical_extra_receiver_ccdf(cfg, 10.0, full, 10);
  for (std::size_t k = 0; k < 10; ++k) CHECK(t1.ccdf[k] <= t10.ccdf[k] + 1e-12);
  CHECK_THROWS_AS(empirical_extra_receiver_ccdf(cfg, 0.0, full, 10), std::invalid_argument);
}

TEST_CASE("acknowledgement path-loss estimator") {
  ModelParams p;
  Rng rng(3, 0);
  double sum = 0.0;
  for (int k = 0; k < 100000; ++k) sum += ack_pathloss_estimate(2.0, 1, p, rng);
  CHECK(sum / 100000 == doctest::Approx(16.0).epsilon(0.01));
  std::size_t good = 0;
  for (int k = 0; k < 1000; ++k) good += std::abs(ack_pathloss_estimate(2.0, 10000, p, rng) / 16.0 - 1.0) < 0.05;
  CHECK(good >= 990);
  CHECK_THROWS_AS(ack_pathloss_estimate(2.0, 0, p, rng), std::invalid_argument);
}

TEST_CASE("sweeps") {
  SimConfig base = small_config(StoppingSetSpec::disk(2.0), 50);
  const std::vector<double> one{2.0};
  const auto rows = run_sweep(base, SweepVariable::Radius, one, 8);
  REQUIRE(rows.size() == 1);
  REQUIRE(rows[0].report);
  CHECK(rows[0].report->aggregate_throughput.mean == run(base, 8).aggregate_throughput.mean);

  const std::vector<double> lambdas{0.1, 0.5};
  const auto lrows = run_sweep(base, SweepVariable::Lambda, lambdas, 8);
  CHECK(lrows[0].cfg.N == 160);
  CHECK(lrows[1].cfg.N == 800);

  const std::vector<double> ks{1.0, 1.5};
  const auto krows = run_sweep(small_config(StoppingSetSpec::nearest(1), 20), SweepVariable::K, ks, 8);
  CHECK(krows[0].report.has_value());
  CHECK_FALSE(krows[1].report.has_value());
  CHECK_FALSE(krows[1].error.empty());
}

TEST_CASE("slot simulation reproduces the success probability") {
  ModelParams p;
  SimConfig cfg;
  cfg.N = 30;
  cfg.L = 10.0;
  const auto net = sample_realization(cfg, 2);
  const auto maps = assign_maps(net, StoppingSetSpec::full_plane(), p);
  Rng rng(9, 0);
  const std::size_t slots = 20000;
  const auto frac = simulate_slots(net, maps, p, slots, rng);
  for (std::size_t i = 0; i < net.size(); ++i) {
    const double q = success_prob(i, net, maps, p);
    const double n = maps.maps[i] * slots;
    CHECK(std::abs(frac[i] - q) < 5.0 * std::sqrt(q * (1 - q) / n) + 1e-3);
  }
}

// Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "saloha/analytic.hpp"
#include "saloha/config.hpp"
#include "saloha/experiments.hpp"
#include "saloha/map_solver.hpp"
#include "saloha/simulator.hpp"
#include "saloha/stopping_set.hpp"

using namespace saloha;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Sum of per-node log throughputs: the finite-window PF objective.
double pf_objective(const NetworkRealization& net, const MapAssignment& maps, const ModelParams& p) {
  double s = 0.0;
  for (std::size_t i = 0; i < net.size(); ++i) s += log_throughput(i, net, maps, p);
  return s;
}

double sup_distance(const analytic::MapDistribution& a, const analytic::MapDistribution& b) {
  double d = std::abs(a.atom_at_one - b.atom_at_one);
  for (std::size_t k = 0; k < a.grid.size(); ++k) d = std::max(d, std::abs(a.ccdf[k] - b.ccdf[k]));
  return d;
}

Outcome closed_form_consistency() {
  double worst = 0.0;
  for (double lambda : {0.02, 0.1, 0.25, 0.5, 1.0}) {
    ModelParams p;
    p.lambda = lambda;
    const LocalView v{{}, 0.0};
    worst = std::max(worst, std::abs(solve_map(v, p).psi - closed_form_empty(p)));
  }
  return {worst < 1e-8, fmt("max |psi - closed form| = %.3e (tol 1e-8)", worst)};
}

Outcome quadrature_oracle() {
  ModelParams p;
  double worst = 0.0;
  for (int a = 0; a < 10; ++a) {
    const double psi = 0.05 + 0.1 * a;  // 0.05 .. 0.95
    for (int b = 0; b < 10; ++b) {
      const double x = 0.1 * std::pow(300.0, b / 9.0);  // 0.1 .. 30, log spaced
      const double closed = tail_integral(psi, x, p);
      const double quad = tail_integral_quadrature(psi, x, p);
      worst = std::max(worst, std::abs(closed - quad) / std::abs(quad));
    }
  }
  return {worst < 1e-8, fmt("max relative gap = %.3e over 10x10 grid (tol 1e-8)", worst)};
}

Outcome finite_window_optimality() {
  ModelParams p;
  sim::SimConfig cfg;
  cfg.L = 14.0;
  cfg.N = 50;
  cfg.seed = 301;
  double worst_residual = 0.0;
  double worst_gain = -std::numeric_limits<double>::infinity();
  std::size_t free_nodes = 0;
  for (std::size_t k = 0; k < 100; ++k) {
    const auto net = sim::sample_realization(cfg, k);
    const auto maps = solve_finite_window(net, p);
    const auto tx = net.transmitters();
    const auto rx = net.receivers();
    for (std::size_t i = 0; i < net.size(); ++i) {
      const double pi = maps.maps[i];
      if (pi >= 1.0) continue;
      ++free_nodes;
      double F = 0.0;
      for (std::size_t j = 0; j < net.size(); ++j)
        if (j != i) F += 1.0 / (b_coeff(tx[i], rx[j], p) + 1.0 - pi);
      worst_residual = std::max(worst_residual, std::abs(1.0 / pi - F));
    }
    const double base = pf_objective(net, maps, p);
    for (std::size_t i = 0; i < net.size(); ++i) {
      for (double delta : {-1e-3, 1e-3}) {
        const double moved = maps.maps[i] + delta;
        if (!(moved > 0.0 && moved <= 1.0)) continue;
        MapAssignment m = maps;
        m.maps[i] = moved;
        worst_gain = std::max(worst_gain, pf_objective(net, m, p) - base);
      }
    }
  }
  const bool ok = free_nodes > 0 && worst_residual < 1e-10 && worst_gain <= 1e-9;
  return {ok, fmt("max residual = %.3e over %zu free nodes (tol 1e-10), max perturbation gain = %.3e "
                  "(tol 1e-9)",
                  worst_residual, free_nodes, worst_gain)};
}

Outcome threshold_bridge() {
  ModelParams p;
  sim::SimConfig cfg;
  cfg.seed = 401;
  sim::Rng rng(401, 7);
  const std::vector<StoppingSetSpec> specs{
      StoppingSetSpec::empty(),        StoppingSetSpec::disk(1.5),
      StoppingSetSpec::disk(3.0),      StoppingSetSpec::nearest(1),
      StoppingSetSpec::nearest(3),     StoppingSetSpec::nearest_capped(2, 2.5),
      StoppingSetSpec::full_plane()};
  std::size_t checked = 0, mismatches = 0, near_boundary = 0;
  for (std::size_t n = 0; n < 1000; ++n) {
    const auto& spec = specs[n % specs.size()];
    const auto net = sim::sample_realization(cfg, n / 50);
    const auto i = static_cast<std::size_t>(rng.uniform() * static_cast<double>(net.size()));
    const LocalView v = local_view(i, net, spec, p);
    const double psi = solve_map(v, p).psi;
    // Half the thresholds are uniform, half sit within 1e-3 of psi.
    double rho = n % 2 == 0 ? rng.uniform() : psi + (2.0 * rng.uniform() - 1.0) * 1e-3;
    rho = std::clamp(rho, 1e-12, 1.0);
    if (std::abs(psi - rho) < 1e-9) continue;
    if (std::abs(psi - rho) < 1e-3) ++near_boundary;
    double J = 0.0;
    for (double b : v.observed_b) J += rho / (b + 1.0 - rho);
    const double I = analytic::i_integral(rho, v.outer_radius, p);
    mismatches += (psi > rho) != (J < 1.0 - I);
    ++checked;
  }
  return {checked >= 990 && mismatches == 0,
          fmt("%zu mismatches in %zu nodes (%zu within 1e-3 of psi)", mismatches, checked, near_boundary)};
}

Outcome extra_receiver_and_disk_laws() {
  ModelParams p;
  sim::SimConfig cfg;  // L=40, N=400, lambda=0.25, beta=4, T=10, 1000 realizations
  cfg.seed = 501;
  const auto full = StoppingSetSpec::full_plane();
  const auto f1 = sim::empirical_extra_receiver_ccdf(cfg, 1.0, full, 512);
  const auto f10 = sim::empirical_extra_receiver_ccdf(cfg, 10.0, full, 512);
  // CDF order f_1 >= f_10 is CCDF order ccdf_1 <= ccdf_10.
  double excess = f1.atom_at_one - f10.atom_at_one - 2.0 * std::hypot(f1.atom_error, f10.atom_error);
  for (std::size_t k = 0; k < f1.grid.size(); ++k)
    excess = std::max(excess, f1.ccdf[k] - f10.ccdf[k] - 2.0 * std::hypot(f1.error[k], f10.error[k]));

  cfg.spec = StoppingSetSpec::disk(3.0);
  const auto emp = sim::run(cfg, 512).map_ccdf;
  const auto ana = analytic::map_distribution(cfg.spec, p, 512);
  const double sup = sup_distance(ana, emp);
  return {excess <= 0.0 && sup < 0.02,
          fmt("f_1 vs f_10 worst excess over 2 se = %.4f (need <= 0), Disk(3) sup distance = %.4f (tol 0.02)",
              excess, sup)};
}

Outcome nearest_law() {
  ModelParams p;
  sim::SimConfig cfg;
  cfg.seed = 601;
  const auto spec = StoppingSetSpec::nearest(1);
  std::vector<double> psis;
  for (std::size_t k = 0; k < cfg.realizations; ++k) {
    const auto net = sim::sample_realization(cfg, k);
    const auto maps = sim::assign_maps(net, spec, p);
    const auto tx = net.transmitters();
    for (std::size_t i = 0; i < net.size(); ++i)
      if (sim::in_inner_window(tx[i], cfg.L, cfg.inner_fraction)) psis.push_back(maps.maps[i]);
  }
  const double n = static_cast<double>(psis.size());
  double sup = 0.0;
  for (int a = 1; a <= 9; ++a) {
    const double rho = 0.1 * a;
    const double emp = std::count_if(psis.begin(), psis.end(), [&](double v) { return v > rho; }) / n;
    sup = std::max(sup, std::abs(emp - analytic::map_ccdf_nearest(rho, p)));
  }
  const double atom = std::count(psis.begin(), psis.end(), 1.0) / n;
  sup = std::max(sup, std::abs(atom - analytic::map_ccdf_nearest(1.0, p)));
  return {sup < 0.02, fmt("sup distance = %.4f over rho=0.1..0.9 and the atom, %zu nodes (tol 0.02)", sup,
                          psis.size())};
}

Outcome convergence() {
  ModelParams p;
  const std::vector<double> ladder{1, 2, 4, 8, 16};
  // Tail term: the mean-field pressure beyond R, largest at psi = 1.
  auto tail = [&](double R) { return tail_integral(1.0, R / p.r, p); };

  sim::SimConfig cfg;
  cfg.seed = 701;
  cfg.realizations = 20;
  std::vector<double> max_gap(ladder.size(), 0.0);
  std::vector<std::vector<double>> theta_gap(ladder.size());
  std::vector<double> theta_full_per;
  for (std::size_t k = 0; k < cfg.realizations; ++k) {
    const auto net = sim::sample_realization(cfg, k);
    const auto full = solve_finite_window(net, p);
    const double full_ml = sim::compute_metrics(net, full, p, cfg.inner_fraction).mean_log_throughput;
    theta_full_per.push_back(p.lambda * full_ml);
    const auto tx = net.transmitters();
    for (std::size_t m = 0; m < ladder.size(); ++m) {
      const auto maps = sim::assign_maps(net, StoppingSetSpec::disk(ladder[m]), p);
      for (std::size_t i = 0; i < net.size(); ++i)
        if (sim::in_inner_window(tx[i], cfg.L, cfg.inner_fraction))
          max_gap[m] = std::max(max_gap[m], std::abs(maps.maps[i] - full.maps[i]));
      const double ml = sim::compute_metrics(net, maps, p, cfg.inner_fraction).mean_log_throughput;
      theta_gap[m].push_back(p.lambda * (ml - full_ml));
    }
  }
  bool monotone = true;
  for (std::size_t m = 1; m < ladder.size(); ++m) monotone = monotone && max_gap[m] <= max_gap[m - 1];

  // Largest ladder radius whose tail is below 1e-4, if any.
  std::string ladder_clause = "no ladder radius has tail < 1e-4";
  bool ladder_ok = true;
  for (std::size_t m = ladder.size(); m-- > 0;) {
    if (tail(ladder[m]) < 1e-4) {
      ladder_ok = max_gap[m] < 1e-3;
      ladder_clause = fmt("gap %.2e at R=%g", max_gap[m], ladder[m]);
      break;
    }
  }

  // The clause at the radius where the tail does drop below 1e-4: tagged nodes
  // at the centre of large Poisson discs, compared with full observation.
  const double R_star = std::ceil(numerics::bisect([&](double R) { return tail(R) - 1e-4; }, 16.0, 1e4, 1e-6));
  const double disc = R_star + 60.0;
  double far_gap = 0.0;
  for (std::uint64_t k = 0; k < 20; ++k) {
    sim::Rng rng(702, k);
    std::poisson_distribution<std::size_t> count(p.lambda * kPi * disc * disc);
    const std::size_t n = count(rng.engine());
    std::vector<Point> rx;
    rx.reserve(n + 1);
    rx.push_back({p.r, 0.0});  // the tagged node's own receiver
    for (std::size_t j = 0; j < n; ++j) {
      const double rad = disc * std::sqrt(rng.uniform());
      const double a = 2.0 * kPi * rng.uniform();
      const double phi = 2.0 * kPi * rng.uniform();
      rx.push_back({rad * std::cos(a) + p.r * std::cos(phi), rad * std::sin(a) + p.r * std::sin(phi)});
    }
    const Point o{0.0, 0.0};
    const double ball = solve_map(local_view_from_receivers(o, rx, 0, StoppingSetSpec::disk(R_star), p), p).psi;
    const double all = solve_map(local_view_from_receivers(o, rx, 0, StoppingSetSpec::full_plane(), p), p).psi;
    far_gap = std::max(far_gap, std::abs(ball - all));
  }
  const bool far_ok = far_gap < 1e-3;

  const auto full_theta = sim::summarize(theta_full_per);
  std::vector<double> theta_diff;
  for (const auto& g : theta_gap) {
    const auto s = sim::summarize(g);
    theta_diff.push_back(s.mean);
  }
  const auto last = sim::summarize(theta_gap.back());
  // Distance shrinks along the ladder and ends within 2 se of the full estimate.
  const bool theta_ok = std::abs(theta_diff.back()) <= std::abs(theta_diff.front()) &&
                        std::abs(last.mean) <= 2.0 * std::hypot(last.std_error, full_theta.std_error);

  std::string gaps;
  for (double g : max_gap) gaps += fmt("%.2e ", g);
  std::string dtheta;
  for (double d : theta_diff) dtheta += fmt("%+.4f ", d);
  return {monotone && ladder_ok && far_ok && theta_ok,
          fmt("max gaps %s(monotone=%d); tail(16)=%.2e, %s; R*=%g: gap %.2e (tol 1e-3); "
              "Theta(B0(R))-Theta(full) %s(se %.4f)",
              gaps.c_str(), monotone, tail(16.0), ladder_clause.c_str(), R_star, far_gap, dtheta.c_str(),
              full_theta.std_error)};
}

Outcome throughput_ordering() {
  struct Row {
    sim::Statistic full, nearest, empty;
  };
  auto measure = [](double lambda) {
    Row row;
    auto cfg = sim::SimConfig::for_intensity(lambda);
    cfg.seed = 801;
    cfg.spec = StoppingSetSpec::full_plane();
    row.full = sim::run(cfg, 10).aggregate_throughput;
    cfg.spec = StoppingSetSpec::nearest(1);
    row.nearest = sim::run(cfg, 10).aggregate_throughput;
    cfg.spec = StoppingSetSpec::empty();
    row.empty = sim::run(cfg, 10).aggregate_throughput;
    return row;
  };
  const Row lo = measure(0.1);
  const Row hi = measure(1.0);
  const double fraction = (lo.nearest.mean - lo.empty.mean) / (lo.full.mean - lo.empty.mean);
  const bool full_sig = lo.full.mean - lo.empty.mean > 2.0 * std::hypot(lo.full.std_error, lo.empty.std_error);
  const bool near_sig =
      lo.nearest.mean - lo.empty.mean > 2.0 * std::hypot(lo.nearest.std_error, lo.empty.std_error);
  const double gain_lo = lo.full.mean - lo.empty.mean;
  const double gain_hi = hi.full.mean - hi.empty.mean;
  return {fraction >= 0.5 && full_sig && near_sig && gain_hi < gain_lo,
          fmt("lambda=0.1: full %.3f, nearest %.3f, empty %.3f, gap fraction %.3f (need >= 0.5), "
              "significant full=%d nearest=%d; full-empty gain %.3f at lambda=0.1 vs %.3f at lambda=1",
              lo.full.mean, lo.nearest.mean, lo.empty.mean, fraction, full_sig, near_sig, gain_lo, gain_hi)};
}

Outcome ack_estimator() {
  ModelParams p;
  sim::Rng rng(901, 0);
  const double d = 3.0;
  const double truth = std::pow(d, p.beta);
  std::size_t good = 0;
  for (int t = 0; t < 1000; ++t)
    good += std::abs(sim::ack_pathloss_estimate(d, 10000, p, rng) / truth - 1.0) < 0.05;
  return {good >= 990, fmt("%zu of 1000 trials within 5%% (need >= 990)", good)};
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism() {
  const auto dir = std::filesystem::temp_directory_path() / "saloha_acceptance";
  std::filesystem::remove_all(dir);
  std::string csv[2], text[2];
  for (int run = 0; run < 2; ++run) {
    const auto path = dir / ("run" + std::to_string(run)) / "validate.csv";
    const auto config = cli::parse_config(
        std::vector<std::string>{"validate", "--seed", "11", "--output", path.string()});
    std::ostringstream out;
    cli::run(config, out);
    csv[run] = slurp(path);
    text[run] = out.str();
  }
  std::filesystem::remove_all(dir);
  const bool ok = !csv[0].empty() && csv[0] == csv[1] && text[0] == text[1];
  return {ok, fmt("two validate runs: %zu-byte CSVs %s", csv[0].size(), ok ? "identical" : "differ")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"closed-form consistency", closed_form_consistency},
      {"quadrature oracle", quadrature_oracle},
      {"finite-window optimality", finite_window_optimality},
      {"threshold-event bridge", threshold_bridge},
      {"MAP law with extra receiver and disk law", extra_receiver_and_disk_laws},
      {"nearest-receiver law", nearest_law},
      {"convergence in the disk radius", convergence},
      {"aggregate throughput ordering", throughput_ordering},
      {"acknowledgement path-loss estimator", ack_estimator},
      {"validate determinism", determinism}};
  int failures = 0;
  for (std::size_t c = 0; c < criteria.size(); ++c) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[c].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += !o.passed;
    std::printf("%s %zu %s: %s [%.1f s]\n", o.passed ? "PASS" : "FAIL", c + 1, criteria[c].first.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}

#include "saloha/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "saloha/analytic.hpp"
#include "saloha/csv.hpp"
#include "saloha/map_solver.hpp"
#include "saloha/simulator.hpp"

namespace saloha::cli {

namespace {

using csv::format_number;

numerics::QuadConfig quad_config(const ExperimentConfig& config) {
  numerics::QuadConfig q;
  q.fourier_tail_tol = config.fourier_tail_tol;
  return q;
}

sim::SimConfig sim_for(const ExperimentConfig& config, const StoppingSetSpec& spec) {
  sim::SimConfig s = config.sim;
  s.params = config.params;
  s.spec = spec;
  s.seed = config.seed;
  return s;
}

bool has_formula(const StoppingSetSpec& spec) {
  return spec.is_deterministic() || (spec.kind() == StoppingSetKind::NearestK && spec.k() == 1);
}

std::string variable_name(sim::SweepVariable v) {
  switch (v) {
    case sim::SweepVariable::Lambda: return "lambda";
    case sim::SweepVariable::Radius: return "radius";
    case sim::SweepVariable::K: return "k";
  }
  return "unknown";
}

void add_report_rows(csv::Table& table, const std::string& spec, const std::string& variable,
                     double grid_value, const sim::MetricsReport& rep, double lambda,
                     SweepMetric metric) {
  auto add = [&](const char* name, const sim::Statistic& s) {
    table.add_row(csv::stats_row(spec, variable, grid_value, name, s.mean, s.std_error, s.n));
  };
  const bool all = metric == SweepMetric::All;
  if (all || metric == SweepMetric::Aggregate) add("aggregate_throughput", rep.aggregate_throughput);
  if (all || metric == SweepMetric::Density) add("density_throughput", rep.density_throughput);
  if (all || metric == SweepMetric::MeanLog) add("mean_log_throughput", rep.mean_log_throughput);
  if (all || metric == SweepMetric::Theta) add("theta", rep.theta(lambda));
  if (all) {
    table.add_row(csv::stats_row(spec, variable, grid_value, "empty_windows",
                                 static_cast<double>(rep.empty_windows), 0.0,
                                 rep.per_realization.size() + rep.empty_windows));
  }
}

int run_solve(const ExperimentConfig& config, std::ostream& out) {
  csv::Table table({"spec", "node", "x", "y", "psi", "saturated"});
  for (const auto& spec : config.specs) {
    const std::string name = spec.to_string();
    if (spec.kind() == StoppingSetKind::Empty) {
      const SolveResult r = solve_map(LocalView{{}, 0.0}, config.params);
      table.add_row({name, "typical", "0", "0", format_number(r.psi), r.saturated ? "1" : "0"});
      out << name << " psi=" << format_number(r.psi);
      if (config.params.beta == 4.0)
        out << " closed_form=" << format_number(closed_form_empty(config.params));
      out << '\n';
      continue;
    }
    const sim::SimConfig s = sim_for(config, spec);
    const NetworkRealization net = sim::sample_realization(s, 0);
    const MapAssignment maps = sim::assign_maps(net, spec, config.params, s.solve_tol);
    std::size_t saturated = 0;
    double sum = 0.0;
    const auto tx = net.transmitters();
    for (std::size_t i = 0; i < net.size(); ++i) {
      const bool sat = maps.maps[i] == 1.0;
      saturated += sat;
      sum += maps.maps[i];
      table.add_row({name, std::to_string(i), format_number(tx[i].x), format_number(tx[i].y),
                     format_number(maps.maps[i]), sat ? "1" : "0"});
    }
    out << name << " nodes=" << net.size()
        << " mean_psi=" << format_number(net.size() ? sum / static_cast<double>(net.size()) : 0.0)
        << " saturated=" << saturated << '\n';
  }
  table.write_file(config.output_path);
  return 0;
}

int run_ccdf(const ExperimentConfig& config, std::ostream& out) {
  const StoppingSetSpec& spec = config.specs.front();
  const auto q = quad_config(config);
  analytic::MapDistribution dist;
  if (config.extra_distance) {
    const double t = *config.extra_distance;
    const bool analytic_route = !config.empirical && (spec.kind() == StoppingSetKind::Empty ||
                                                      spec.kind() == StoppingSetKind::Disk);
    if (analytic_route) {
      dist.grid = analytic::uniform_grid(config.rho_grid);
      for (double rho : dist.grid) {
        const auto e = analytic::extra_receiver_ccdf(rho, {t, 0.0}, spec, config.params, q);
        dist.ccdf.push_back(e.value);
        dist.error.push_back(e.error);
      }
      const auto atom = analytic::extra_receiver_ccdf(1.0, {t, 0.0}, spec, config.params, q);
      dist.atom_at_one = atom.value;
      dist.atom_error = atom.error;
    } else {
      dist = sim::empirical_extra_receiver_ccdf(sim_for(config, spec), t, spec, config.rho_grid);
    }
  } else if (!config.empirical && has_formula(spec)) {
    dist = analytic::map_distribution(spec, config.params, config.rho_grid, q);
  } else {
    dist = sim::run(sim_for(config, spec), config.rho_grid).map_ccdf;
  }
  csv::distribution_table(dist).write_file(config.output_path);
  out << spec.to_string() << ' '
      << (dist.source == analytic::DistributionSource::Analytic ? "analytic" : "empirical")
      << " points=" << dist.grid.size() << " atom=" << format_number(dist.atom_at_one) << '\n';
  return 0;
}

int run_utility(const ExperimentConfig& config, std::ostream& out) {
  csv::Table table(csv::stats_header());
  const double lambda = config.params.lambda;
  for (const auto& spec : config.specs) {
    const std::string name = spec.to_string();
    const bool analytic_route = !config.empirical && (spec.kind() == StoppingSetKind::Empty ||
                                                      spec.kind() == StoppingSetKind::Disk);
    if (analytic_route) {
      const auto u = analytic::mean_utility(spec, config.params, config.rho_grid, quad_config(config));
      table.add_row(csv::stats_row(name, "lambda", lambda, "theta", u.value, u.error, config.rho_grid));
      table.add_row(csv::stats_row(name, "lambda", lambda, "map_term", u.map_term, u.error,
                                   config.rho_grid));
      table.add_row(csv::stats_row(name, "lambda", lambda, "interference_term",
                                   u.interference_term, u.error, config.rho_grid));
      out << name << " theta=" << format_number(u.value) << " error=" << format_number(u.error)
          << " (analytic)\n";
    } else {
      const auto rep = sim::run(sim_for(config, spec), config.rho_grid);
      const auto th = rep.theta(lambda);
      table.add_row(csv::stats_row(name, "lambda", lambda, "theta", th.mean, th.std_error, th.n));
      out << name << " theta=" << format_number(th.mean) << " stderr=" << format_number(th.std_error)
          << " (empirical)\n";
    }
  }
  table.write_file(config.output_path);
  return 0;
}

int run_simulate(const ExperimentConfig& config, std::ostream& out) {
  csv::Table table(csv::stats_header());
  for (const auto& spec : config.specs) {
    const auto rep = sim::run(sim_for(config, spec), config.rho_grid);
    add_report_rows(table, spec.to_string(), "lambda", config.params.lambda, rep,
                    config.params.lambda, SweepMetric::All);
    out << spec.to_string() << " aggregate=" << format_number(rep.aggregate_throughput.mean)
        << " theta=" << format_number(rep.theta(config.params.lambda).mean)
        << " realizations=" << rep.mean_log_throughput.n << '\n';
  }
  table.write_file(config.output_path);
  return 0;
}

int run_sweep_command(const ExperimentConfig& config, std::ostream& out) {
  csv::Table table(csv::stats_header());
  const SweepRange& range = *config.sweep;
  const auto values = range.values();
  const std::string var = variable_name(range.variable);
  int failures = 0;
  for (const auto& spec : config.specs) {
    const auto rows = sim::run_sweep(sim_for(config, spec), range.variable, values, config.rho_grid);
    for (const auto& row : rows) {
      const std::string name = row.cfg.spec.to_string();
      if (!row.report) {
        ++failures;
        out << name << ' ' << var << '=' << format_number(row.value) << " failed: " << row.error << '\n';
        table.add_row(csv::stats_row(name, var, row.value, "error",
                                     std::numeric_limits<double>::quiet_NaN(), 0.0, 0));
        continue;
      }
      add_report_rows(table, name, var, row.value, *row.report, row.cfg.params.lambda, config.metric);
    }
    out << spec.to_string() << " swept " << rows.size() << " values of " << var << '\n';
  }
  table.write_file(config.output_path);
  return failures == 0 ? 0 : 1;
}

double sup_distance(const analytic::MapDistribution& a, const analytic::MapDistribution& b) {
  double d = std::abs(a.atom_at_one - b.atom_at_one);
  for (std::size_t k = 0; k < a.ccdf.size(); ++k) d = std::max(d, std::abs(a.ccdf[k] - b.ccdf[k]));
  return d;
}

}  // namespace

std::vector<CheckResult> run_validation(const ExperimentConfig& config) {
  std::vector<CheckResult> checks;
  const ModelParams& params = config.params;
  const auto q = quad_config(config);
  constexpr std::size_t kGrid = 10;

  {
    const SolveResult r = solve_map(LocalView{{}, 0.0}, params);
    CheckResult c{"empty_fixed_point", "empty", r.residual, 1e-8, false};
    if (params.beta == 4.0) {
      c.name = "empty_closed_form";
      c.value = std::abs(r.psi - closed_form_empty(params));
    }
    c.passed = c.value < c.tolerance;
    checks.push_back(c);
  }
  if (params.beta == 4.0) {
    double worst = 0.0;
    for (double psi : {0.1, 0.3, 0.5, 0.7, 0.9})
      for (double x : {0.5, 1.0, 2.0, 4.0, 8.0}) {
        const double a = tail_integral(psi, x, params, q);
        const double b = tail_integral_quadrature(psi, x, params, q);
        worst = std::max(worst, std::abs(a - b) / std::abs(a));
      }
    checks.push_back({"tail_closed_form", "none", worst, 1e-8, worst < 1e-8});
  }
  for (const auto& spec : {StoppingSetSpec::disk(3.0), StoppingSetSpec::nearest(1)}) {
    const auto analytic_dist = analytic::map_distribution(spec, params, kGrid, q);
    const auto empirical = sim::run(sim_for(config, spec), kGrid).map_ccdf;
    const double d = sup_distance(analytic_dist, empirical);
    checks.push_back({"ccdf_sup_distance", spec.to_string(), d, 0.02, d < 0.02});
  }
  {
    const auto full = StoppingSetSpec::full_plane();
    const auto s = sim_for(config, full);
    const auto near = sim::empirical_extra_receiver_ccdf(s, 1.0, full, kGrid);
    const auto far = sim::empirical_extra_receiver_ccdf(s, 10.0, full, kGrid);
    // f_1 >= f_10 as CDFs: the CCDF with the near receiver may not exceed the far one.
    double excess = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < kGrid; ++k)
      excess = std::max(excess, near.ccdf[k] - far.ccdf[k] - 2.0 * std::hypot(near.error[k], far.error[k]));
    checks.push_back({"extra_receiver_order", full.to_string(), excess, 0.0, excess <= 0.0});
  }
  {
    sim::Rng rng(config.seed, 0x61636bULL);
    constexpr std::size_t kTrials = 1000;
    std::size_t good = 0;
    const double d = params.r;
    const double truth = std::pow(d, params.beta);
    for (std::size_t i = 0; i < kTrials; ++i)
      good += std::abs(sim::ack_pathloss_estimate(d, 10000, params, rng) / truth - 1.0) < 0.05;
    const double frac = static_cast<double>(good) / kTrials;
    checks.push_back({"ack_estimator_coverage", "none", frac, 0.99, frac >= 0.99});
  }
  return checks;
}

int run(const ExperimentConfig& config, std::ostream& out) {
  switch (config.command) {
    case Command::Solve: return run_solve(config, out);
    case Command::Ccdf: return run_ccdf(config, out);
    case Command::Utility: return run_utility(config, out);
    case Command::Simulate: return run_simulate(config, out);
    case Command::Sweep: return run_sweep_command(config, out);
    case Command::Validate: break;
  }
  const auto checks = run_validation(config);
  csv::Table table({"check", "spec", "value", "tolerance", "status"});
  bool all = true;
  for (const auto& c : checks) {
    all = all && c.passed;
    const char* status = c.passed ? "PASS" : "FAIL";
    table.add_row({c.name, c.spec, format_number(c.value), format_number(c.tolerance), status});
    out << status << ' ' << c.name << " spec=" << c.spec << " value=" << format_number(c.value)
        << " tolerance=" << format_number(c.tolerance) << '\n';
  }
  table.write_file(config.output_path);
  return all ? 0 : 1;
}

}  // namespace saloha::cli

#include "saloha/config.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>

namespace saloha::cli {

namespace {

const std::map<std::string, Command> kCommands = {
    {"solve", Command::Solve},       {"ccdf", Command::Ccdf},   {"utility", Command::Utility},
    {"simulate", Command::Simulate}, {"sweep", Command::Sweep}, {"validate", Command::Validate}};

const std::map<std::string, SweepMetric> kMetrics = {{"aggregate", SweepMetric::Aggregate},
                                                     {"density", SweepMetric::Density},
                                                     {"mean_log", SweepMetric::MeanLog},
                                                     {"theta", SweepMetric::Theta},
                                                     {"all", SweepMetric::All}};

double parse_double(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || !std::isfinite(v))
    throw ConfigError("--" + key + ": not a number: '" + text + "'");
  return v;
}

// A scalar value, or lo:hi for a sweep over this variable.
struct ScalarOrRange {
  double value = 0.0;
  std::optional<std::pair<double, double>> range;
};

ScalarOrRange parse_scalar_or_range(const std::string& key, const std::string& text) {
  ScalarOrRange out;
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    out.value = parse_double(key, text);
    return out;
  }
  const double lo = parse_double(key, text.substr(0, colon));
  const double hi = parse_double(key, text.substr(colon + 1));
  if (!(lo < hi)) throw ConfigError("--" + key + ": range '" + text + "' needs lo < hi");
  out.range = std::make_pair(lo, hi);
  out.value = lo;
  return out;
}

}  // namespace

std::string command_name(Command c) {
  for (const auto& [name, cmd] : kCommands)
    if (cmd == c) return name;
  return "unknown";
}

std::vector<double> SweepRange::values() const {
  std::vector<double> v;
  if (points == 1) {
    v.push_back(lo);
  } else {
    for (std::size_t i = 0; i < points; ++i)
      v.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1));
  }
  if (variable == sim::SweepVariable::K) {
    for (double& x : v) x = std::round(x);
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  return v;
}

std::vector<StoppingSetSpec> parse_spec_list(const std::string& text) {
  std::vector<std::string> tokens;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto end = comma == std::string::npos ? text.size() : comma;
    std::string tok = text.substr(start, end - start);
    tok.erase(0, tok.find_first_not_of(' '));
    tok.erase(tok.find_last_not_of(' ') + 1);
    if (tok.rfind("R=", 0) == 0 && !tokens.empty() && tokens.back().rfind("nearestcap:", 0) == 0)
      tokens.back() += "," + tok;
    else
      tokens.push_back(tok);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  std::vector<StoppingSetSpec> specs;
  for (const auto& tok : tokens) {
    try {
      specs.push_back(StoppingSetSpec::parse(tok));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("--specs: ") + e.what());
    }
  }
  return specs;
}

ExperimentConfig parse_config(const std::vector<std::string>& args) {
  CLI::App app{"Proportionally fair spatial Aloha: MAP solver, analytic laws and simulation",
               "saloha"};
  app.set_config("--config", "", "key = value file; flags override it");
  app.allow_config_extras(CLI::config_extras_mode::error);

  std::string command;
  std::string spec_text;
  std::string specs_text;
  std::string lambda_text;
  std::string radius_text;
  std::string k_text;
  std::string metric = "aggregate";
  std::string output;
  ExperimentConfig cfg;
  std::size_t points = 10;
  double t = 0.0;

  app.add_option("command", command, "solve | ccdf | utility | simulate | sweep | validate")
      ->check(CLI::IsMember({"solve", "ccdf", "utility", "simulate", "sweep", "validate"}));
  app.add_option("--spec", spec_text, "stopping set: empty, disk:R=, nearest:k=, nearestcap:k=,R=, full");
  app.add_option("--specs", specs_text, "comma-separated stopping sets (sweep, validate)");
  app.add_option("--lambda", lambda_text, "node density, or lo:hi for a sweep");
  app.add_option("--radius", radius_text, "sweep range lo:hi over the disk radius");
  app.add_option("--k", k_text, "sweep range lo:hi over the neighbour count");
  app.add_option("--points", points, "number of sweep values");
  app.add_option("--metric", metric, "sweep statistic: aggregate, density, mean_log, theta, all");
  app.add_option("--r", cfg.params.r, "link distance");
  app.add_option("--T", cfg.params.T, "SINR threshold");
  app.add_option("--beta", cfg.params.beta, "path-loss exponent");
  app.add_option("--mu", cfg.params.mu, "inverse mean fading");
  app.add_option("--W", cfg.params.W, "noise variance");
  app.add_option("--L", cfg.sim.L, "window side");
  auto* n_opt = app.add_option("--N", cfg.sim.N, "node count");
  app.add_option("--realizations", cfg.sim.realizations, "Monte Carlo realizations");
  app.add_option("--inner-fraction", cfg.sim.inner_fraction, "side of the inner window over L");
  app.add_flag("--poisson", cfg.sim.poisson_count, "Poisson node count");
  app.add_option("--seed", cfg.seed, "base seed");
  app.add_option("--rho-grid", cfg.rho_grid, "CCDF grid size");
  auto* t_opt = app.add_option("--t", t, "distance of an extra receiver (ccdf)");
  app.add_flag("--empirical", cfg.empirical, "use the simulator even when a formula exists");
  app.add_option("--tail-tol", cfg.fourier_tail_tol, "Fourier tail tolerance");
  app.add_option("--output", output, "CSV output path");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested(app.help());
  } catch (const CLI::ParseError& e) {
    throw ConfigError(e.what());
  }

  if (command.empty()) throw ConfigError("command: missing (one of solve, ccdf, utility, simulate, sweep, validate)");
  cfg.command = kCommands.at(command);

  const auto m = kMetrics.find(metric);
  if (m == kMetrics.end()) throw ConfigError("--metric: unknown value '" + metric + "'");
  cfg.metric = m->second;

  if (!spec_text.empty() && !specs_text.empty())
    throw ConfigError("--spec and --specs: give only one");
  if (!spec_text.empty()) {
    try {
      cfg.specs = {StoppingSetSpec::parse(spec_text)};
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("--spec: ") + e.what());
    }
  } else if (!specs_text.empty()) {
    cfg.specs = parse_spec_list(specs_text);
  }
  if (cfg.specs.empty()) throw ConfigError("--specs: empty list");

  std::vector<SweepRange> ranges;
  auto take = [&](const std::string& key, const std::string& text, sim::SweepVariable var) {
    if (text.empty()) return std::optional<double>{};
    const auto v = parse_scalar_or_range(key, text);
    if (v.range) ranges.push_back({var, v.range->first, v.range->second, points});
    return v.range ? std::optional<double>{} : std::optional<double>{v.value};
  };
  const auto lambda = take("lambda", lambda_text, sim::SweepVariable::Lambda);
  if (take("radius", radius_text, sim::SweepVariable::Radius))
    throw ConfigError("--radius: expects a range lo:hi");
  if (take("k", k_text, sim::SweepVariable::K)) throw ConfigError("--k: expects a range lo:hi");
  if (ranges.size() > 1) throw ConfigError("sweep: only one of --lambda, --radius, --k may be a range");
  if (!ranges.empty()) {
    if (cfg.command != Command::Sweep)
      throw ConfigError("--" + std::string(ranges[0].variable == sim::SweepVariable::Lambda ? "lambda"
                                           : ranges[0].variable == sim::SweepVariable::Radius ? "radius"
                                                                                               : "k") +
                        ": ranges are only valid for sweep");
    if (points == 0) throw ConfigError("--points: must be positive");
    cfg.sweep = ranges[0];
  }
  if (cfg.command == Command::Sweep && !cfg.sweep)
    throw ConfigError("sweep: needs one of --lambda, --radius, --k as lo:hi");
  if (cfg.sweep && cfg.sweep->variable == sim::SweepVariable::Lambda && !(cfg.sweep->lo > 0.0))
    throw ConfigError("--lambda: range must be positive");

  if (lambda) cfg.params.lambda = *lambda;
  if (lambda && n_opt->count() == 0)
    cfg.sim.N = static_cast<std::size_t>(std::llround(cfg.params.lambda * cfg.sim.L * cfg.sim.L));
  if (t_opt->count() > 0) {
    if (!(t > 0.0)) throw ConfigError("--t: must be positive");
    cfg.extra_distance = t;
  }
  if (cfg.rho_grid == 0) throw ConfigError("--rho-grid: must be positive");
  if (!(cfg.fourier_tail_tol > 0.0)) throw ConfigError("--tail-tol: must be positive");

  cfg.sim.params = cfg.params;
  cfg.sim.spec = cfg.specs.front();
  cfg.sim.seed = cfg.seed;
  try {
    cfg.params.validate();
    cfg.sim.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  if (!output.empty()) {
    cfg.output_path = output;
  } else {
    const char* dir = std::getenv("SALOHA_OUTPUT_DIR");
    cfg.output_path = std::filesystem::path(dir && *dir ? dir : ".") / (command + ".csv");
  }
  return cfg;
}

ExperimentConfig parse_config(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return parse_config(args);
}

}  // namespace saloha::cli

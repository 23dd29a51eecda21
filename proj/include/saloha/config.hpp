#pragma once

/// \file
/// Command-line and config-file parsing for the `saloha` tool. Options come
/// from flags and an optional `--config` file of `key = value` lines (keys are
/// the long flag names); flags override the file.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "saloha/model.hpp"
#include "saloha/simulator.hpp"
#include "saloha/stopping_set.hpp"

namespace saloha::cli {

enum class Command { Solve, Ccdf, Utility, Simulate, Sweep, Validate };

std::string command_name(Command c);

enum class SweepMetric { Aggregate, Density, MeanLog, Theta, All };

struct SweepRange {
  sim::SweepVariable variable = sim::SweepVariable::Lambda;
  double lo = 0.0;
  double hi = 0.0;
  std::size_t points = 10;

  /// `points` values from lo to hi inclusive; K values are rounded and deduplicated.
  std::vector<double> values() const;
};

struct ExperimentConfig {
  Command command = Command::Simulate;
  ModelParams params;
  std::vector<StoppingSetSpec> specs{StoppingSetSpec::full_plane()};
  sim::SimConfig sim;
  std::size_t rho_grid = 512;
  /// Distance of an extra receiver for `ccdf`.
  std::optional<double> extra_distance;
  /// Force the simulator even where an analytic route exists.
  bool empirical = false;
  std::optional<SweepRange> sweep;
  SweepMetric metric = SweepMetric::Aggregate;
  double fourier_tail_tol = 1e-6;
  std::filesystem::path output_path;
  std::uint64_t seed = 1;
};

/// Parse failure; the message names the offending key or value.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// `--help` was given; what() holds the usage text.
class HelpRequested : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses argv-style arguments (without the program name). The default output
/// path is $SALOHA_OUTPUT_DIR (or the working directory) / <command>.csv.
/// When --lambda is given without --N, N = round(lambda L^2).
ExperimentConfig parse_config(const std::vector<std::string>& args);

ExperimentConfig parse_config(int argc, const char* const* argv);

/// Splits a comma-separated spec list, re-attaching `R=` tokens to the
/// preceding `nearestcap:k=` entry.
std::vector<StoppingSetSpec> parse_spec_list(const std::string& text);

}  // namespace saloha::cli

#pragma once

/// \file
/// Command dispatch for the `saloha` tool. Every command writes one CSV to
/// config.output_path and a short summary to `out`.
///
/// CSV contracts:
///   solve              spec,node,x,y,psi,saturated
///   ccdf               rho,ccdf,error   (last row: atom,P(psi=1),error)
///   utility, simulate,
///   sweep              spec,variable,grid_value,statistic,value,stderr,n
///   validate           check,spec,value,tolerance,status

#include <iosfwd>
#include <string>
#include <vector>

#include "saloha/config.hpp"

namespace saloha::cli {

struct CheckResult {
  std::string name;
  std::string spec;
  double value = 0.0;      ///< measured discrepancy (or the statistic tested)
  double tolerance = 0.0;
  bool passed = false;
};

/// Analytic-vs-empirical checks run by `validate`, in a fixed order.
std::vector<CheckResult> run_validation(const ExperimentConfig& config);

/// Runs the command. Returns the process exit status: 0 on success, 1 when a
/// validation check fails. Throws on IO or numerical failure.
int run(const ExperimentConfig& config, std::ostream& out);

}  // namespace saloha::cli

#pragma once

/// \file
/// Proportionally fair medium access probabilities. A transmitter with local
/// view (observed b_j, outer radius x) uses the unique psi in (0, 1) solving
///
///   1/psi = sum_j 1/(1 + b_j - psi) + C(psi, x/r),
///   C(psi, x) = 2 pi lambda r^2 Int_x^inf s / (s^beta/T + 1 - psi) ds,
///
/// when the throttling pressure a = sum_j 1/b_j + C(1, x/r) exceeds 1, and
/// transmits in every slot (psi = 1) otherwise.

#include <cstddef>

#include "saloha/model.hpp"
#include "saloha/numerics.hpp"
#include "saloha/stopping_set.hpp"

namespace saloha {

inline constexpr double kDefaultSolveTol = 1e-12;

struct SolveResult {
  double psi = 1.0;
  bool saturated = true;
  double residual = 0.0;  ///< |1/psi - F(psi)|, 0 when saturated
  int iterations = 0;
};

/// C(psi, x): expected throttling from unobserved receivers beyond x r.
/// Closed form for beta = 4, adaptive quadrature otherwise. Throws
/// std::domain_error for psi = 1 with x = 0 (divergent at the origin).
double tail_integral(double psi, double x, const ModelParams& params,
                     const numerics::QuadConfig& cfg = {});

/// Quadrature route for C(psi, x) regardless of beta.
double tail_integral_quadrature(double psi, double x, const ModelParams& params,
                                const numerics::QuadConfig& cfg = {});

/// d C(psi, x) / d psi.
double tail_integral_derivative(double psi, double x, const ModelParams& params,
                                const numerics::QuadConfig& cfg = {});

/// Right-hand side F(psi, S) of the fixed-point equation. +inf at psi = 1 when
/// the view has outer radius 0.
double rhs_F(double psi, const LocalView& view, const ModelParams& params,
             const numerics::QuadConfig& cfg = {});

/// a = sum_j 1/b_j + 2 pi lambda r^2 T x^{2-beta}/(beta-2); +inf when x = 0.
double threshold_a(const LocalView& view, const ModelParams& params);

/// Optimal MAP for one local view. `tol` bounds both the bracket width and the
/// residual of the fixed-point equation.
SolveResult solve_map(const LocalView& view, const ModelParams& params,
                      double tol = kDefaultSolveTol, const numerics::QuadConfig& cfg = {});

/// psi for the empty stopping set at beta = 4:
/// (sqrt(1 + 4 alpha^2) - 1)/(2 alpha^2), alpha = pi^2 lambda r^2 sqrt(T)/2.
double closed_form_empty(const ModelParams& params);

/// Finite-window optimum: each p_i solves 1/p = sum_{j != i} 1/(1 + b_ij - p)
/// with b_ij = |X_i - y_j|^beta/(T r^beta), saturating at 1 when
/// sum_j 1/b_ij <= 1.
MapAssignment solve_finite_window(const NetworkRealization& net, const ModelParams& params,
                                  double tol = kDefaultSolveTol);

/// Per-node detail of solve_finite_window.
SolveResult solve_finite_window_node(std::size_t i, const NetworkRealization& net,
                                     const ModelParams& params, double tol = kDefaultSolveTol);

}  // namespace saloha

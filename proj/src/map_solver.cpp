#include "saloha/map_solver.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

namespace saloha {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_psi(double psi, const char* who) {
  if (!(psi >= 0.0 && psi <= 1.0)) {
    throw std::domain_error(std::string(who) + ": psi must lie in [0, 1]");
  }
}

// 2 pi lambda r^2 T x^{2-beta} / (beta - 2): the tail at psi = 1.
double saturated_tail(double x, const ModelParams& params) {
  return 2.0 * std::numbers::pi * params.lambda * params.r * params.r * params.T *
         std::pow(x, 2.0 - params.beta) / (params.beta - 2.0);
}

// Knee of s / (s^beta/T + 1 - psi): where the power-law tail takes over.
double knee(double psi, const ModelParams& params) {
  return std::pow(params.T * std::max(1.0 - psi, 1e-3), 1.0 / params.beta);
}

// Sum over observed receivers and its psi-derivative.
std::pair<double, double> observed_terms(double psi, const std::vector<double>& bs) {
  double f = 0.0;
  double df = 0.0;
  for (double b : bs) {
    const double inv = 1.0 / (1.0 + b - psi);
    f += inv;
    df += inv * inv;
  }
  return {f, df};
}

SolveResult solve_from_parts(const std::vector<double>& bs, double outer_radius,
                             const ModelParams& params, double tol,
                             const numerics::QuadConfig& cfg) {
  if (!(tol > 0.0)) throw std::invalid_argument("solve_map: tol must be > 0");
  double a = 0.0;
  for (double b : bs) a += 1.0 / b;
  const double x = outer_radius / params.r;
  const bool has_tail = std::isfinite(outer_radius);
  if (has_tail) a += (x > 0.0) ? saturated_tail(x, params) : kInf;
  if (a <= 1.0) return SolveResult{1.0, true, 0.0, 0};

  auto fdf = [&](double psi) -> std::pair<double, double> {
    auto [f, df] = observed_terms(psi, bs);
    if (has_tail) {
      if (psi >= 1.0 && x == 0.0) return {-kInf, -kInf};
      f += tail_integral(psi, x, params, cfg);
      df += tail_integral_derivative(psi, x, params, cfg);
    }
    return {1.0 / psi - f, -1.0 / (psi * psi) - df};
  };

  // F is increasing with F(psi) <= 2 F(0) on [0, 1/2], so g(lo) > 0 at lo = F(0)/4.
  const double f0 = observed_terms(0.0, bs).first + (has_tail ? tail_integral(0.0, x, params, cfg) : 0.0);
  const double lo = std::min(0.5, 0.25 / f0);
  const auto root = numerics::find_decreasing_root(fdf, lo, 1.0, tol, tol);
  return SolveResult{root.root, false, root.residual, root.iterations};
}

}  // namespace

double tail_integral_quadrature(double psi, double x, const ModelParams& params,
                                const numerics::QuadConfig& cfg) {
  check_psi(psi, "tail_integral");
  if (!(x >= 0.0)) throw std::domain_error("tail_integral: x must be >= 0");
  if (std::isinf(x)) return 0.0;
  if (psi == 1.0 && x == 0.0) {
    throw std::domain_error("tail_integral: divergent at psi = 1 with x = 0");
  }
  const double beta = params.beta;
  const double T = params.T;
  const double eps = 1.0 - psi;
  auto integrand = [beta, T, eps](double s) { return s / (std::pow(s, beta) / T + eps); };
  const auto est = numerics::integrate_semi_infinite(integrand, x, cfg, knee(psi, params));
  return 2.0 * std::numbers::pi * params.lambda * params.r * params.r * est.value;
}

double tail_integral(double psi, double x, const ModelParams& params,
                     const numerics::QuadConfig& cfg) {
  check_psi(psi, "tail_integral");
  if (!(x >= 0.0)) throw std::domain_error("tail_integral: x must be >= 0");
  if (std::isinf(x)) return 0.0;
  if (psi == 1.0) {
    if (x == 0.0) throw std::domain_error("tail_integral: divergent at psi = 1 with x = 0");
    return saturated_tail(x, params);
  }
  if (params.beta != 4.0) return tail_integral_quadrature(psi, x, params, cfg);
  // pi lambda r^2 sqrt(T)/sqrt(1-psi) * (pi/2 - atan(x^2/sqrt(T(1-psi)))),
  // with pi/2 - atan(z) written as atan2(1, z) to keep precision for large z.
  const double eps = 1.0 - psi;
  const double z = x * x / std::sqrt(params.T * eps);
  return std::numbers::pi * params.lambda * params.r * params.r * std::sqrt(params.T / eps) *
         std::atan2(1.0, z);
}

double tail_integral_derivative(double psi, double x, const ModelParams& params,
                                const numerics::QuadConfig& cfg) {
  check_psi(psi, "tail_integral_derivative");
  if (std::isinf(x)) return 0.0;
  const double eps = 1.0 - psi;
  if (eps == 0.0) {
    if (x == 0.0) return kInf;
    // 2 pi lambda r^2 T^2 x^{2-2 beta}/(2 beta - 2)
    return 2.0 * std::numbers::pi * params.lambda * params.r * params.r * params.T * params.T *
           std::pow(x, 2.0 - 2.0 * params.beta) / (2.0 * params.beta - 2.0);
  }
  if (params.beta == 4.0) {
    const double a = std::numbers::pi * params.lambda * params.r * params.r * std::sqrt(params.T);
    const double z = x * x / std::sqrt(params.T * eps);
    return a / (2.0 * eps * std::sqrt(eps)) * (std::atan2(1.0, z) - z / (1.0 + z * z));
  }
  const double beta = params.beta;
  const double T = params.T;
  auto integrand = [beta, T, eps](double s) {
    const double d = std::pow(s, beta) / T + eps;
    return s / (d * d);
  };
  const auto est = numerics::integrate_semi_infinite(integrand, x, cfg, knee(psi, params));
  return 2.0 * std::numbers::pi * params.lambda * params.r * params.r * est.value;
}

double rhs_F(double psi, const LocalView& view, const ModelParams& params,
             const numerics::QuadConfig& cfg) {
  check_psi(psi, "rhs_F");
  double f = observed_terms(psi, view.observed_b).first;
  if (std::isfinite(view.outer_radius)) {
    if (psi == 1.0 && view.outer_radius == 0.0) return kInf;
    f += tail_integral(psi, view.outer_radius / params.r, params, cfg);
  }
  return f;
}

double threshold_a(const LocalView& view, const ModelParams& params) {
  double a = 0.0;
  for (double b : view.observed_b) a += 1.0 / b;
  if (std::isfinite(view.outer_radius)) {
    if (view.outer_radius == 0.0) return kInf;
    a += saturated_tail(view.outer_radius / params.r, params);
  }
  return a;
}

SolveResult solve_map(const LocalView& view, const ModelParams& params, double tol,
                      const numerics::QuadConfig& cfg) {
  return solve_from_parts(view.observed_b, view.outer_radius, params, tol, cfg);
}

double closed_form_empty(const ModelParams& params) {
  if (params.beta != 4.0) throw std::domain_error("closed_form_empty: requires beta = 4");
  const double alpha = std::numbers::pi * std::numbers::pi * params.lambda * params.r * params.r *
                       std::sqrt(params.T) / 2.0;
  const double a2 = alpha * alpha;
  // (sqrt(1 + 4 a2) - 1)/(2 a2) rewritten as 2/(sqrt(1 + 4 a2) + 1) to avoid cancellation.
  return 2.0 / (std::sqrt(1.0 + 4.0 * a2) + 1.0);
}

SolveResult solve_finite_window_node(std::size_t i, const NetworkRealization& net,
                                     const ModelParams& params, double tol) {
  if (i >= net.size()) throw std::out_of_range("solve_finite_window_node: bad node index");
  const Point xi = net.transmitters()[i];
  const auto rx = net.receivers();
  std::vector<double> bs;
  bs.reserve(net.size());
  for (std::size_t j = 0; j < rx.size(); ++j) {
    if (j == i) continue;
    const double d2 = squared_distance(xi, rx[j]);
    if (d2 == 0.0) throw std::domain_error("solve_finite_window: receiver on a transmitter");
    bs.push_back(b_from_squared_distance(d2, params));
  }
  return solve_from_parts(bs, kInf, params, tol, numerics::QuadConfig{});
}

MapAssignment solve_finite_window(const NetworkRealization& net, const ModelParams& params,
                                  double tol) {
  if (net.size() == 0) throw std::invalid_argument("solve_finite_window: empty realization");
  MapAssignment out;
  out.maps.resize(net.size());
  for (std::size_t i = 0; i < net.size(); ++i) {
    out.maps[i] = solve_finite_window_node(i, net, params, tol).psi;
  }
  return out;
}

}  // namespace saloha

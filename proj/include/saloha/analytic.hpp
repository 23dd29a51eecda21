#pragma once

/// \file
/// Law of the optimal MAP psi of the typical node.
///
/// For a stopping set S, psi > rho exactly when
///
///   J(rho, S) = sum_{y in S} rho/(|y|^beta/(T r^beta) + 1 - rho)  <  1 - I(rho, S),
///
/// where the sum runs over the receivers of the other nodes and I is the mean
/// contribution of the receivers outside S. For deterministic S the receivers
/// in S form a Poisson process, so J is a Poisson shot noise whose law is
/// recovered from its Laplace transform by Fourier inversion.

#include <complex>
#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "saloha/model.hpp"
#include "saloha/numerics.hpp"
#include "saloha/stopping_set.hpp"

namespace saloha::analytic {

enum class DistributionSource { Analytic, Empirical };

/// CCDF of psi on a grid of (0, 1) plus the atom at 1.
struct MapDistribution {
  std::vector<double> grid;   ///< ascending, inside (0, 1)
  std::vector<double> ccdf;   ///< P(psi > grid[k])
  std::vector<double> error;  ///< quadrature error bound or standard error per point
  double atom_at_one = 0.0;   ///< P(psi = 1)
  double atom_error = 0.0;
  DistributionSource source = DistributionSource::Analytic;

  /// Checks sizes, ranges and monotonicity up to `slack`. Throws std::logic_error.
  void validate(double slack = 0.0) const;
};

/// (k - 1/2)/n for k = 1..n.
std::vector<double> uniform_grid(std::size_t n);

/// I(rho, B0(x)) = rho C(rho, x/r): mean pressure from receivers beyond
/// distance `outer_radius`. 0 for an infinite radius. Throws
/// std::domain_error at rho = 1 with outer_radius = 0.
double i_integral(double rho, double outer_radius, const ModelParams& params,
                  const numerics::QuadConfig& cfg = {});

/// Response of one receiver at distance d: rho/(d^beta/(T r^beta) + 1 - rho).
double response(double rho, double d, const ModelParams& params);

/// J(rho, S) for one deterministic S (Empty, Disk or FullPlane). Keeps a cache
/// of quadrature rules, so reuse one object for many evaluations.
class ShotNoise {
 public:
  /// Throws std::invalid_argument for random stopping sets.
  ShotNoise(double rho, const StoppingSetSpec& spec, const ModelParams& params,
            const numerics::QuadConfig& cfg = {});

  /// E[exp(-s J)] for Re s >= 0 through the radial integral in t = |y|^2.
  std::complex<double> laplace(std::complex<double> s) const;

  /// Same transform for beta = 4 through the substitution
  /// v = a/sqrt(t^2 + a^2), a = sqrt((1 - rho) T) r^2, which gives
  ///   log L(s) = -pi lambda a Int_{v_R}^1 (1 - exp(-s rho v^2/(1 - rho)))/(v^2 sqrt(1 - v^2)) dv,
  /// evaluated with v = sin(phi). Requires rho < 1 and beta = 4.
  std::complex<double> laplace_vr(std::complex<double> s) const;

  /// E[exp(-i w J)] through the transform in the response variable (the
  /// route used for inversion).
  std::complex<double> characteristic(double w) const;

  /// P(J = 0) = exp(-lambda |S|).
  double atom() const { return atom_; }

  /// Mean and variance of J.
  double mean() const { return mean_; }
  double variance() const { return variance_; }

  /// P(J < c) for each threshold.
  std::vector<numerics::Estimate> cdf(std::span<const double> thresholds) const;

  double rho() const { return rho_; }

  /// P(g(U) < c) for one receiver placed uniformly in a disk S.
  double single_receiver_cdf(double c) const;

  /// P(g(U1) + g(U2) < c) for two independent such receivers.
  numerics::Estimate two_receiver_cdf(double c) const;

 private:
  struct Spectral {
    std::complex<double> exponent;   // Int_S (1 - e^{-iwg}) dt
    std::complex<double> receivers;  // Int_S e^{-iwg} dt (disks only)
  };
  Spectral spectral(double w) const;
  std::complex<double> density(std::complex<double> g, std::complex<double> d) const;
  double t_of_g(double g) const;
  std::complex<double> lower_piece(double w, double g0) const;
  std::complex<double> oscillatory(double w, double alpha, double gamma, bool singular_top) const;
  std::complex<double> radial_exponent(std::complex<double> s) const;
  std::complex<double> vr_exponent(std::complex<double> s) const;
  std::complex<double> saturated_exponent(std::complex<double> s) const;
  const numerics::GaussRule& rule(int n) const;
  double upper_tail_bound(double c) const;

  double rho_;
  StoppingSetSpec spec_;
  ModelParams params_;
  numerics::QuadConfig cfg_;
  double scaled_T_;   // T r^beta
  double radius_sq_;  // R^2, +inf for the plane, 0 for the empty set
  double g_min_ = 0.0;  // response at the rim of S
  double g_max_ = 0.0;  // response at the origin, rho/(1 - rho)
  double atom_ = 1.0;
  double mean_ = 0.0;
  double variance_ = 0.0;
  mutable std::map<int, numerics::GaussRule> rules_;
};

/// Free-function form of ShotNoise::laplace.
std::complex<double> laplace_shot_noise(std::complex<double> s, double rho,
                                        const StoppingSetSpec& spec, const ModelParams& params,
                                        const numerics::QuadConfig& cfg = {});

/// P(psi > rho) for Empty, Disk or FullPlane; rho = 1 gives P(psi = 1).
numerics::Estimate map_ccdf_deterministic(double rho, const StoppingSetSpec& spec,
                                          const ModelParams& params,
                                          const numerics::QuadConfig& cfg = {});

/// xi(rho) = inf{x >= 0 : response(rho, x) + I(rho, B0(x)) < 1}.
double xi_threshold(double rho, const ModelParams& params, const numerics::QuadConfig& cfg = {});

/// P(psi > rho) under S = B0(R1) (nearest receiver): exp(-lambda pi xi(rho)^2).
double map_ccdf_nearest(double rho, const ModelParams& params,
                        const numerics::QuadConfig& cfg = {});

/// Threshold shift caused by an extra receiver at distance `distance`:
/// response(rho, distance) if the receiver lies in S, else 0.
double extra_receiver_shift(double rho, double distance, const StoppingSetSpec& spec,
                            const ModelParams& params);

/// P(psi > rho) with an extra receiver at t, for Empty or Disk. Random sets and
/// the plane are only available empirically (see the simulator).
numerics::Estimate extra_receiver_ccdf(double rho, Point t, const StoppingSetSpec& spec,
                                       const ModelParams& params,
                                       const numerics::QuadConfig& cfg = {});

/// Full CCDF on uniform_grid(grid_size) plus the atom. Empty, Disk and
/// FullPlane use Fourier inversion, NearestK with k = 1 the xi law.
MapDistribution map_distribution(const StoppingSetSpec& spec, const ModelParams& params,
                                 std::size_t grid_size = 512,
                                 const numerics::QuadConfig& cfg = {});

struct UtilityEstimate {
  double value = 0.0;  ///< Theta^S = map_term + interference_term
  double error = 0.0;  ///< discretisation plus quadrature error bound
  double map_term = 0.0;           ///< lambda E[log psi]
  double interference_term = 0.0;  ///< lambda E[log q]
};

/// Mean PF utility per unit area,
///   Theta = lambda Int log(u) f(du)
///         + lambda^2 Int_t Int_u log(1 - u/(1 + |t|^beta/(T r^beta))) f_t(du) dt,
/// for Empty or Disk. Throws std::runtime_error when the error bound exceeds
/// `max_error`.
UtilityEstimate mean_utility(const StoppingSetSpec& spec, const ModelParams& params,
                             std::size_t grid_size = 512, const numerics::QuadConfig& cfg = {},
                             double max_error = 1e-2);

}  // namespace saloha::analytic

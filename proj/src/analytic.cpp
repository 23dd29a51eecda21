#include "saloha/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "saloha/map_solver.hpp"

namespace saloha::analytic {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = std::numbers::pi;
using cplx = std::complex<double>;

void check_rho(double rho, const char* who) {
  if (!(rho >= 0.0 && rho <= 1.0)) {
    throw std::domain_error(std::string(who) + ": rho must lie in [0, 1]");
  }
}

// 1 - exp(-z) without cancellation for small |z|.
cplx one_minus_exp(cplx z) {
  if (std::abs(z) < 1e-3) return z * (1.0 - z / 2.0 * (1.0 - z / 3.0 * (1.0 - z / 4.0)));
  return 1.0 - std::exp(-z);
}

// Composite Gauss-Legendre over [a, b] with `panels` equal panels.
template <class F>
cplx composite(F&& f, double a, double b, int panels, const numerics::GaussRule& rule) {
  const double h = (b - a) / panels;
  cplx sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + h * (p + 0.5);
    cplx part = 0.0;
    for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
      part += rule.weights[j] * f(mid + 0.5 * h * rule.nodes[j]);
    }
    sum += part * (0.5 * h);
  }
  return sum;
}

// Panels such that the phase |s| * amplitude moves by at most pi per panel.
int panel_count(double phase_range) {
  return 1 + static_cast<int>(std::ceil(phase_range / kPi));
}

constexpr int kRuleOrder = 12;

bool is_supported(const StoppingSetSpec& spec) {
  return spec.kind() == StoppingSetKind::Empty || spec.kind() == StoppingSetKind::Disk ||
         spec.kind() == StoppingSetKind::FullPlane;
}

double outer_radius_of(const StoppingSetSpec& spec) {
  switch (spec.kind()) {
    case StoppingSetKind::Empty:
      return 0.0;
    case StoppingSetKind::Disk:
      return spec.radius();
    case StoppingSetKind::FullPlane:
      return kInf;
    default:
      throw std::invalid_argument("analytic: random stopping set " + spec.to_string() +
                                  " has no analytic law; use the simulator");
  }
}

// Stieltjes sum of h against the law given by a CCDF on `grid` plus an atom
// at 1. Cells are [0, g_1], [g_k, g_{k+1}], [g_n, 1); h is evaluated at cell
// midpoints. Returns the sum and a bound from the spread of h over each cell
// and from the CCDF errors.
struct CellLaw {
  std::vector<double> lo, hi, mid, mass;
};

CellLaw cells_from_ccdf(const std::vector<double>& grid, const std::vector<double>& ccdf,
                        double atom) {
  CellLaw law;
  const std::size_t n = grid.size();
  law.lo.reserve(n + 1);
  double prev_x = 0.0;
  double prev_g = 1.0;
  for (std::size_t k = 0; k <= n; ++k) {
    const double x = (k < n) ? grid[k] : 1.0;
    const double g = (k < n) ? ccdf[k] : atom;
    law.lo.push_back(prev_x);
    law.hi.push_back(x);
    law.mid.push_back(0.5 * (prev_x + x));
    law.mass.push_back(prev_g - g);
    prev_x = x;
    prev_g = g;
  }
  return law;
}

}  // namespace

void MapDistribution::validate(double slack) const {
  auto fail = [](const std::string& why) { throw std::logic_error("MapDistribution: " + why); };
  if (grid.size() != ccdf.size() || grid.size() != error.size()) fail("size mismatch");
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!(grid[k] > 0.0 && grid[k] < 1.0)) fail("grid point outside (0, 1)");
    if (k > 0 && !(grid[k] > grid[k - 1])) fail("grid not ascending");
    if (!(ccdf[k] >= -slack && ccdf[k] <= 1.0 + slack)) fail("ccdf outside [0, 1]");
    if (k > 0 && ccdf[k] > ccdf[k - 1] + slack) fail("ccdf increasing");
  }
  if (!(atom_at_one >= -slack && atom_at_one <= 1.0 + slack)) fail("atom outside [0, 1]");
  if (!ccdf.empty() && ccdf.back() + slack < atom_at_one) fail("ccdf below the atom at one");
}

std::vector<double> uniform_grid(std::size_t n) {
  if (n == 0) throw std::invalid_argument("uniform_grid: n must be > 0");
  std::vector<double> g(n);
  for (std::size_t k = 0; k < n; ++k) g[k] = (static_cast<double>(k) + 0.5) / static_cast<double>(n);
  return g;
}

double i_integral(double rho, double outer_radius, const ModelParams& params,
                  const numerics::QuadConfig& cfg) {
  check_rho(rho, "i_integral");
  if (!(outer_radius >= 0.0)) throw std::domain_error("i_integral: outer radius must be >= 0");
  if (rho == 0.0 || std::isinf(outer_radius)) return 0.0;
  if (rho == 1.0 && outer_radius == 0.0) {
    throw std::domain_error("i_integral: divergent at rho = 1 with outer radius 0");
  }
  return rho * tail_integral(rho, outer_radius / params.r, params, cfg);
}

double response(double rho, double d, const ModelParams& params) {
  check_rho(rho, "response");
  if (rho == 0.0) return 0.0;
  const double b = std::pow(d, params.beta) / params.scaled_threshold();
  if (b == 0.0 && rho == 1.0) return kInf;
  return rho / (b + 1.0 - rho);
}

// ---------------------------------------------------------------------------
// ShotNoise

ShotNoise::ShotNoise(double rho, const StoppingSetSpec& spec, const ModelParams& params,
                     const numerics::QuadConfig& cfg)
    : rho_(rho), spec_(spec), params_(params), cfg_(cfg) {
  check_rho(rho, "ShotNoise");
  params.validate();
  cfg.validate();
  const double outer = outer_radius_of(spec);
  radius_sq_ = outer * outer;
  scaled_T_ = params.scaled_threshold();
  atom_ = std::exp(-params.lambda * kPi * radius_sq_);
  g_max_ = (rho == 1.0) ? kInf : rho / (1.0 - rho);
  g_min_ = std::isinf(radius_sq_)
               ? 0.0
               : rho * scaled_T_ / (std::pow(radius_sq_, 0.5 * params.beta) + (1.0 - rho) * scaled_T_);
  if (rho == 0.0 || radius_sq_ == 0.0) {
    atom_ = 1.0;
    return;
  }
  if (rho == 1.0) {
    mean_ = kInf;
    variance_ = kInf;
    return;
  }
  // Moments of a Poisson shot noise: lambda pi Int g and lambda pi Int g^2 in t = |y|^2.
  const double beta = params.beta;
  const double A = scaled_T_;
  const double eps = 1.0 - rho;
  auto g = [=](double t) { return rho * A / (std::pow(t, 0.5 * beta) + eps * A); };
  const double knee = std::pow(eps * A, 2.0 / beta);
  auto moment = [&](auto&& fn) {
    if (std::isfinite(radius_sq_)) return numerics::integrate(fn, 0.0, radius_sq_, cfg).value;
    // t = knee v^{-gamma}, gamma = 2/(beta - 2): bounded integrand near v = 0.
    const double gamma = 2.0 / (beta - 2.0);
    auto tail = [&](double v) {
      if (v == 0.0) return 0.0;
      const double t = knee * std::pow(v, -gamma);
      return fn(t) * (gamma * t / v);
    };
    return numerics::integrate(fn, 0.0, knee, cfg).value +
           numerics::integrate(tail, 0.0, 1.0, cfg).value;
  };
  mean_ = params.lambda * kPi * moment([&](double t) { return g(t); });
  variance_ = params.lambda * kPi * moment([&](double t) {
                const double v = g(t);
                return v * v;
              });
}

const numerics::GaussRule& ShotNoise::rule(int n) const {
  auto it = rules_.find(n);
  if (it == rules_.end()) it = rules_.emplace(n, numerics::gauss_legendre(n)).first;
  return it->second;
}

// Int_0^{R^2} (1 - exp(-s g(t))) dt with g(t) = rho A/(t^{beta/2} + (1 - rho) A).
cplx ShotNoise::radial_exponent(cplx s) const {
  const double beta = params_.beta;
  const double A = scaled_T_;
  const double eps = 1.0 - rho_;
  const double rho = rho_;
  auto integrand = [=](double t) -> cplx {
    return one_minus_exp(s * (rho * A / (std::pow(t, 0.5 * beta) + eps * A)));
  };
  const double knee = std::pow(eps * A, 2.0 / beta);
  numerics::QuadConfig inner = cfg_;
  inner.max_intervals = std::max<std::size_t>(inner.max_intervals, 400000);
  if (std::isfinite(radius_sq_)) {
    std::vector<double> bp{0.0};
    if (knee < radius_sq_) bp.push_back(knee);
    bp.push_back(radius_sq_);
    return numerics::integrate_breakpoints<cplx>(integrand, std::span<const double>(bp), inner)
        .value;
  }
  // t = knee v^{-gamma}, gamma = 2/(beta - 2), makes the tail integrand bounded near v = 0.
  const double gamma = 2.0 / (beta - 2.0);
  auto tail = [=](double v) -> cplx {
    if (v == 0.0) return 0.0;
    const double t = knee * std::pow(v, -gamma);
    return integrand(t) * (gamma * t / v);
  };
  const cplx head = numerics::integrate<cplx>(integrand, 0.0, knee, inner).value;
  return head + numerics::integrate<cplx>(tail, 0.0, 1.0, inner).value;
}

// beta = 4: a Int_{phi_R}^{pi/2} (1 - exp(-s k sin^2 phi))/sin^2 phi dphi,
// k = rho/(1 - rho), sin phi_R = v_R = a/sqrt(R^4 + a^2).
cplx ShotNoise::vr_exponent(cplx s) const {
  const double eps = 1.0 - rho_;
  const double a = std::sqrt(eps * scaled_T_);
  const double k = rho_ / eps;
  const double v_r = std::isinf(radius_sq_) ? 0.0 : a / std::hypot(radius_sq_, a);
  const double phi_r = std::asin(v_r);
  const cplx sk = s * k;
  auto f = [sk](double phi) -> cplx {
    const double sn = std::sin(phi);
    const double s2 = sn * sn;
    if (s2 == 0.0) return sk;
    return one_minus_exp(sk * s2) / s2;
  };
  const int panels = panel_count(std::abs(sk) * (1.0 - v_r * v_r) * 0.5);
  return a * composite(f, phi_r, 0.5 * kPi, panels, rule(kRuleOrder));
}

// rho = 1: g(t) = A t^{-beta/2}. Int_0^inf (1 - exp(-s A t^{-beta/2})) dt
// = Gamma(1 - delta) (s A)^delta with delta = 2/beta, minus the part beyond R^2.
cplx ShotNoise::saturated_exponent(cplx s) const {
  const double beta = params_.beta;
  const double A = scaled_T_;
  const double delta = 2.0 / beta;
  const cplx whole = std::tgamma(1.0 - delta) * std::pow(s * A, delta);
  if (std::isinf(radius_sq_)) return whole;
  const double R2 = radius_sq_;
  if (beta == 4.0) {
    // t = R^2/v: R^2 Int_0^1 (1 - exp(-s A v^2/R^4))/v^2 dv.
    const cplx z = s * (A / (R2 * R2));
    auto f = [z](double v) -> cplx {
      if (v == 0.0) return z;
      return one_minus_exp(z * (v * v)) / (v * v);
    };
    const int panels = panel_count(std::abs(z) * 2.0);
    return whole - R2 * composite(f, 0.0, 1.0, panels, rule(kRuleOrder));
  }
  const double gamma = 2.0 / (beta - 2.0);
  auto tail = [=](double v) -> cplx {
    if (v == 0.0) return 0.0;
    const double t = R2 * std::pow(v, -gamma);
    return one_minus_exp(s * (A * std::pow(t, -0.5 * beta))) * (gamma * t / v);
  };
  numerics::QuadConfig inner = cfg_;
  return whole - numerics::integrate<cplx>(tail, 0.0, 1.0, inner).value;
}

// ---------------------------------------------------------------------------
// Transform in the response variable g. With m(g) = -dt/dg the receivers in S
// contribute Int (1 - e^{-iwg}) m(g) dg over [g(R^2), g(0)]. Oscillatory parts
// Int e^{-iwg} m(g) dg are taken along the steepest-descent paths g = x - iy
// from both end points once the phase range is large, so the cost does not
// grow with w.

cplx ShotNoise::density(cplx g, cplx d) const {
  const double beta = params_.beta;
  const double A = scaled_T_;
  const cplx z = (rho_ == 1.0) ? A / g : (1.0 - rho_) * A * d / g;
  return (2.0 / beta) * std::pow(z, 2.0 / beta - 1.0) * (rho_ * A) / (g * g);
}

double ShotNoise::t_of_g(double g) const {
  const double A = scaled_T_;
  const double z = (rho_ == 1.0) ? A / g : (1.0 - rho_) * A * (g_max_ - g) / g;
  return std::pow(std::max(z, 0.0), 2.0 / params_.beta);
}

// Int_0^{g0} (1 - e^{-iwg}) m(g) dg with g = g0 s^p, p = beta/(beta - 2),
// which makes the integrand bounded at s = 0.
cplx ShotNoise::lower_piece(double w, double g0) const {
  const double p = params_.beta / (params_.beta - 2.0);
  auto f = [&](double s) -> cplx {
    const double sp = std::pow(s, p);
    const double g = g0 * sp;
    if (g == 0.0) return 0.0;
    return one_minus_exp(cplx(0.0, w * g)) * density(g, g_max_ - g) * (g0 * p * sp / s);
  };
  return composite(f, 0.0, 1.0, panel_count(w * g0 * p / 2.0), rule(kRuleOrder));
}

// Int_alpha^gamma e^{-iwg} m(g) dg. When `singular_top`, gamma = g(0) and m has
// an integrable (gamma - g)^{2/beta - 1} singularity there.
cplx ShotNoise::oscillatory(double w, double alpha, double gamma, bool singular_top) const {
  constexpr double kSwitch = 40.0;  // phase range above which paths are deformed
  constexpr double kDecay = 45.0;   // e^{-45} truncates the path integrals
  const double width = gamma - alpha;
  const double q = singular_top ? 0.5 * params_.beta : 1.0;
  if (w * width < kSwitch) {
    // g = gamma - width s^q.
    auto f = [&](double s) -> cplx {
      const double sq = std::pow(s, q);
      const double g = gamma - width * sq;
      const double d = singular_top ? width * sq : g_max_ - g;
      return std::polar(1.0, -w * g) * density(g, d) * (width * q * sq / s);
    };
    // m spans several decades between the end points, so refine adaptively.
    return numerics::integrate<cplx>(f, 0.0, 1.0, cfg_).value;
  }
  const cplx I(0.0, 1.0);
  numerics::QuadConfig inner = cfg_;
  // The path integrands are smooth and positive-weighted; 1e-8 relative moves the
  // inverted CDF by far less than the frequency-tail tolerance.
  inner.rel_tol = std::max(cfg_.rel_tol, 1e-8);
  // From alpha: g = alpha - iy, y = x/w.
  auto from_alpha = [&](double x) -> cplx {
    const double y = x / w;
    return std::exp(-x) * density(cplx(alpha, -y), cplx(g_max_ - alpha, y));
  };
  const cplx a_part = numerics::integrate<cplx>(from_alpha, 0.0, kDecay, inner).value / w;
  cplx top;
  if (singular_top) {
    // g = gamma - iy, y = s^q, so that d = iy and the singularity cancels.
    const double s_max = std::pow(kDecay / w, 1.0 / q);
    auto from_gamma = [&](double s) -> cplx {
      const double y = std::pow(s, q);
      return std::exp(-w * y) * density(cplx(gamma, -y), cplx(0.0, y)) * (q * y / s);
    };
    top = numerics::integrate<cplx>(from_gamma, 0.0, s_max, inner).value;
  } else {
    auto from_gamma = [&](double x) -> cplx {
      const double y = x / w;
      return std::exp(-x) * density(cplx(gamma, -y), cplx(g_max_ - gamma, y));
    };
    top = numerics::integrate<cplx>(from_gamma, 0.0, kDecay, inner).value / w;
  }
  return -I * std::polar(1.0, -w * alpha) * a_part + I * std::polar(1.0, -w * gamma) * top;
}

ShotNoise::Spectral ShotNoise::spectral(double w) const {
  if (!(w > 0.0)) throw std::domain_error("ShotNoise::spectral: w must be > 0");
  const bool disk = std::isfinite(radius_sq_);
  if (rho_ < 1.0) {
    if (disk) {
      const cplx m = oscillatory(w, g_min_, g_max_, true);
      return {radius_sq_ - m, m};
    }
    const double g0 = std::min(0.5 * g_max_, 1.0 / w);
    return {lower_piece(w, g0) + t_of_g(g0) - oscillatory(w, g0, g_max_, true), 0.0};
  }
  const double delta = 2.0 / params_.beta;
  const cplx whole = std::tgamma(1.0 - delta) * std::pow(cplx(0.0, w * scaled_T_), delta);
  if (!disk) return {whole, 0.0};
  // Subtract the receivers beyond R (g below g_min).
  cplx beyond;
  if (w * g_min_ <= 1.0) {
    beyond = lower_piece(w, g_min_);
  } else {
    const double g0 = 1.0 / w;
    beyond = lower_piece(w, g0) + (t_of_g(g0) - radius_sq_) - oscillatory(w, g0, g_min_, false);
  }
  const cplx e = whole - beyond;
  return {e, radius_sq_ - e};
}

std::complex<double> ShotNoise::characteristic(double w) const {
  if (w == 0.0 || rho_ == 0.0 || radius_sq_ == 0.0) return 1.0;
  if (w < 0.0) return std::conj(characteristic(-w));
  return std::exp(-params_.lambda * kPi * spectral(w).exponent);
}

cplx ShotNoise::laplace(cplx s) const {
  if (s.real() < 0.0) throw std::domain_error("ShotNoise::laplace: Re s must be >= 0");
  if (s == 0.0 || rho_ == 0.0 || radius_sq_ == 0.0) return 1.0;
  const cplx e = (rho_ == 1.0) ? saturated_exponent(s) : radial_exponent(s);
  return std::exp(-params_.lambda * kPi * e);
}

cplx ShotNoise::laplace_vr(cplx s) const {
  if (params_.beta != 4.0) throw std::domain_error("ShotNoise::laplace_vr: requires beta = 4");
  if (rho_ >= 1.0) throw std::domain_error("ShotNoise::laplace_vr: requires rho < 1");
  if (s.real() < 0.0) throw std::domain_error("ShotNoise::laplace_vr: Re s must be >= 0");
  if (s == 0.0 || rho_ == 0.0 || radius_sq_ == 0.0) return 1.0;
  return std::exp(-params_.lambda * kPi * vr_exponent(s));
}

double ShotNoise::single_receiver_cdf(double c) const {
  if (!(c > 0.0)) return 0.0;
  // g(t) < c  <=>  t^{beta/2} > rho A/c - (1 - rho) A.
  const double A = scaled_T_;
  const double edge = rho_ * A / c - (1.0 - rho_) * A;
  const double t_c = edge > 0.0 ? std::pow(edge, 2.0 / params_.beta) : 0.0;
  return std::clamp(1.0 - t_c / radius_sq_, 0.0, 1.0);
}

numerics::Estimate ShotNoise::two_receiver_cdf(double c) const {
  if (!(c > 0.0)) return {};
  // (1/R^2) Int_0^{R^2} F1(c - g(t)) dt, split where c - g(t) crosses the
  // kinks of F1 (g(R^2) and g(0)) and where it reaches 0.
  const double A = scaled_T_;
  const double beta = params_.beta;
  const double eps = 1.0 - rho_;
  auto g = [&](double t) {
    const double tp = std::pow(t, 0.5 * beta);
    return tp == 0.0 && eps == 0.0 ? kInf : rho_ * A / (tp + eps * A);
  };
  auto t_of = [&](double y) {  // g(t) = y
    if (!(y > 0.0)) return kInf;
    const double edge = rho_ * A / y - eps * A;
    return edge > 0.0 ? std::pow(edge, 2.0 / beta) : 0.0;
  };
  std::vector<double> bp{0.0, radius_sq_};
  for (double y : {c, c - g(radius_sq_), c - g(0.0)}) {
    const double t = t_of(y);
    if (t > 0.0 && t < radius_sq_) bp.push_back(t);
  }
  std::sort(bp.begin(), bp.end());
  bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
  auto integrand = [&](double t) { return single_receiver_cdf(c - g(t)); };
  const auto r = numerics::integrate_breakpoints<double>(integrand, std::span<const double>(bp), cfg_);
  return {r.value / radius_sq_, r.error / radius_sq_};
}

// Chernoff bound P(J >= c) <= min_theta exp(-theta c) E[exp(theta J)], with
// theta on a doubling grid. The moment generating function is finite because
// g <= rho/(1 - rho); returns 1 when rho = 1 or c does not exceed the mean.
double ShotNoise::upper_tail_bound(double c) const {
  if (!std::isfinite(g_max_) || !(c > mean_)) return 1.0;
  double best = 0.0;  // log of the bound
  for (double theta = 1.0 / c; theta * g_max_ <= 600.0; theta *= 2.0) {
    const double log_mgf = -params_.lambda * kPi * radial_exponent(cplx(-theta, 0.0)).real();
    const double log_bound = log_mgf - theta * c;
    if (log_bound > best && best < 0.0) break;
    best = std::min(best, log_bound);
  }
  return std::exp(best);
}

std::vector<numerics::Estimate> ShotNoise::cdf(std::span<const double> thresholds) const {
  std::vector<numerics::Estimate> out(thresholds.size());
  if (atom_ >= 1.0) {
    for (std::size_t k = 0; k < thresholds.size(); ++k) {
      out[k] = {thresholds[k] > 0.0 ? 1.0 : 0.0, 0.0};
    }
    return out;
  }
  // Thresholds far in the upper tail need no inversion; this matters when J is
  // small next to c, where the transform decays only beyond w ~ 1/g_max.
  {
    std::vector<double> open;
    std::vector<std::size_t> index;
    for (std::size_t k = 0; k < thresholds.size(); ++k) {
      const double bound = thresholds[k] > 0.0 ? upper_tail_bound(thresholds[k]) : 1.0;
      if (bound <= 1e-2 * cfg_.fourier_tail_tol) {
        out[k] = {1.0, bound};
      } else {
        open.push_back(thresholds[k]);
        index.push_back(k);
      }
    }
    if (open.size() < thresholds.size()) {
      if (!open.empty()) {
        const auto rest = cdf(open);
        for (std::size_t j = 0; j < open.size(); ++j) out[index[j]] = rest[j];
      }
      return out;
    }
  }
  double scale = 1.0;
  // Oscillation rate of the transform; GK15 panels resolve about a quarter of a
  // period of the largest likely value of J.
  if (std::isfinite(mean_)) scale = std::clamp(0.25 * (mean_ + 4.0 * std::sqrt(variance_)), 1.0, 1e3);

  if (std::isinf(radius_sq_)) {
    numerics::CharacteristicFn cf = [&](double w) {
      return characteristic(w);
    };
    return numerics::fourier_cdf(cf, thresholds, atom_, cfg_, scale);
  }

  // Disk: J is compound Poisson with Lambda = lambda pi R^2 receivers on
  // average. The terms with at most two receivers are handled directly; the
  // transform of the rest is p0 (e^z - 1 - z - z^2/2) with
  // z = lambda pi Int_0^{R^2} e^{-iwg(t)} dt.
  const double Lambda = params_.lambda * kPi * radius_sq_;
  const double p0 = atom_;
  numerics::CharacteristicFn rest = [&](double w) {
    if (w < 0.0) throw std::logic_error("ShotNoise: negative frequency");
    const cplx z = (w == 0.0) ? cplx(Lambda) : params_.lambda * kPi * spectral(w).receivers;
    if (std::abs(z) < 1.0) {
      cplx term = z * z * z / 6.0;
      cplx sum = term;
      for (int n = 4; n < 40 && std::abs(term) > 1e-18 * std::abs(sum); ++n) {
        term *= z / static_cast<double>(n);
        sum += term;
      }
      return p0 * sum;
    }
    return std::exp(z - Lambda) - p0 * (1.0 + z + 0.5 * z * z);
  };
  const double rest_mass =
      std::max(0.0, -std::expm1(-Lambda) - p0 * Lambda * (1.0 + 0.5 * Lambda));
  const auto tail = numerics::fourier_measure_cdf(rest, thresholds, rest_mass, cfg_, scale);
  for (std::size_t k = 0; k < thresholds.size(); ++k) {
    const double c = thresholds[k];
    if (!(c > 0.0)) continue;
    const auto pair = two_receiver_cdf(c);
    const double p = p0 + p0 * Lambda * single_receiver_cdf(c) +
                     0.5 * p0 * Lambda * Lambda * pair.value + tail[k].value;
    out[k] = {std::clamp(p, 0.0, 1.0), tail[k].error + 0.5 * p0 * Lambda * Lambda * pair.error};
  }
  return out;
}

std::complex<double> laplace_shot_noise(std::complex<double> s, double rho,
                                        const StoppingSetSpec& spec, const ModelParams& params,
                                        const numerics::QuadConfig& cfg) {
  return ShotNoise(rho, spec, params, cfg).laplace(s);
}

// ---------------------------------------------------------------------------
// Distributions

namespace {

// 1 - I(rho, S): the room left for the shot noise.
double shot_noise_room(double rho, const StoppingSetSpec& spec, const ModelParams& params,
                       const numerics::QuadConfig& cfg) {
  const double outer = outer_radius_of(spec);
  if (rho == 1.0 && outer == 0.0) return -kInf;
  return 1.0 - i_integral(rho, outer, params, cfg);
}

}  // namespace

numerics::Estimate map_ccdf_deterministic(double rho, const StoppingSetSpec& spec,
                                          const ModelParams& params,
                                          const numerics::QuadConfig& cfg) {
  check_rho(rho, "map_ccdf_deterministic");
  if (!is_supported(spec)) outer_radius_of(spec);  // throws
  if (rho == 0.0) return {1.0, 0.0};
  const double room = shot_noise_room(rho, spec, params, cfg);
  if (!(room > 0.0)) return {0.0, 0.0};
  const std::array<double, 1> c{room};
  return ShotNoise(rho, spec, params, cfg).cdf(c).front();
}

double xi_threshold(double rho, const ModelParams& params, const numerics::QuadConfig& cfg) {
  check_rho(rho, "xi_threshold");
  if (rho == 0.0) return 0.0;
  auto h = [&](double x) {
    if (x == 0.0 && rho == 1.0) return kInf;
    return response(rho, x, params) + rho * tail_integral(rho, x / params.r, params, cfg);
  };
  if (h(0.0) < 1.0) return 0.0;
  double hi = params.r;
  while (!(h(hi) < 1.0)) {
    hi *= 2.0;
    if (hi > 1e12 * params.r) throw std::runtime_error("xi_threshold: no upper bracket");
  }
  // h is decreasing: keep h(lo) >= 1 > h(hi).
  double lo = 0.0;
  const double tol = 1e-13 * hi;
  while (hi - lo > tol) {
    const double m = lo + 0.5 * (hi - lo);
    if (m <= lo || m >= hi) break;
    if (h(m) < 1.0) {
      hi = m;
    } else {
      lo = m;
    }
  }
  return hi;
}

double map_ccdf_nearest(double rho, const ModelParams& params, const numerics::QuadConfig& cfg) {
  const double xi = xi_threshold(rho, params, cfg);
  return std::exp(-params.lambda * kPi * xi * xi);
}

double extra_receiver_shift(double rho, double distance, const StoppingSetSpec& spec,
                            const ModelParams& params) {
  check_rho(rho, "extra_receiver_shift");
  const double outer = outer_radius_of(spec);
  if (!(distance < outer)) return 0.0;
  return response(rho, distance, params);
}

numerics::Estimate extra_receiver_ccdf(double rho, Point t, const StoppingSetSpec& spec,
                                       const ModelParams& params,
                                       const numerics::QuadConfig& cfg) {
  check_rho(rho, "extra_receiver_ccdf");
  if (spec.kind() != StoppingSetKind::Empty && spec.kind() != StoppingSetKind::Disk) {
    throw std::invalid_argument("extra_receiver_ccdf: " + spec.to_string() +
                                " is only available empirically");
  }
  if (rho == 0.0) return {1.0, 0.0};
  const double room = shot_noise_room(rho, spec, params, cfg) -
                      extra_receiver_shift(rho, std::hypot(t.x, t.y), spec, params);
  if (!(room > 0.0)) return {0.0, 0.0};
  const std::array<double, 1> c{room};
  return ShotNoise(rho, spec, params, cfg).cdf(c).front();
}

MapDistribution map_distribution(const StoppingSetSpec& spec, const ModelParams& params,
                                 std::size_t grid_size, const numerics::QuadConfig& cfg) {
  MapDistribution d;
  d.grid = uniform_grid(grid_size);
  d.ccdf.resize(grid_size);
  d.error.assign(grid_size, 0.0);
  d.source = DistributionSource::Analytic;
  if (spec.kind() == StoppingSetKind::NearestK && spec.k() == 1) {
    for (std::size_t k = 0; k < grid_size; ++k) d.ccdf[k] = map_ccdf_nearest(d.grid[k], params, cfg);
    d.atom_at_one = map_ccdf_nearest(1.0, params, cfg);
    return d;
  }
  if (!is_supported(spec)) {
    throw std::invalid_argument("map_distribution: " + spec.to_string() +
                                " is only available empirically");
  }
  for (std::size_t k = 0; k < grid_size; ++k) {
    const auto e = map_ccdf_deterministic(d.grid[k], spec, params, cfg);
    d.ccdf[k] = e.value;
    d.error[k] = e.error;
  }
  const auto atom = map_ccdf_deterministic(1.0, spec, params, cfg);
  d.atom_at_one = atom.value;
  d.atom_error = atom.error;
  return d;
}

// ---------------------------------------------------------------------------
// Mean utility

namespace {

// Stieltjes sum of h over a cell law; h must be monotone on each cell.
numerics::Estimate stieltjes(const CellLaw& law, double atom, double h_at_one,
                             const std::vector<double>& h_mid, const std::vector<double>& h_lo,
                             const std::vector<double>& h_hi, const std::vector<double>& ccdf_err,
                             double atom_err) {
  numerics::Estimate out;
  for (std::size_t c = 0; c < law.mass.size(); ++c) {
    out.value += law.mass[c] * h_mid[c];
    out.error += std::abs(law.mass[c]) * 0.5 * std::abs(h_hi[c] - h_lo[c]);
  }
  if (atom > 0.0) out.value += atom * h_at_one;
  // Summation by parts: an error e_k in the CCDF at grid point k moves mass
  // between the cells on either side of it.
  for (std::size_t k = 0; k < ccdf_err.size(); ++k) {
    out.error += ccdf_err[k] * std::abs(h_mid[k + 1] - h_mid[k]);
  }
  out.error += atom_err * std::abs(h_at_one - h_mid.back());
  return out;
}

UtilityEstimate empty_utility(const ModelParams& params, const numerics::QuadConfig& cfg) {
  const double psi = solve_map(LocalView{}, params, kDefaultSolveTol, cfg).psi;
  const double A = params.scaled_threshold();
  const double beta = params.beta;
  auto integrand = [=](double tau) {
    return 2.0 * kPi * tau * std::log1p(-psi / (1.0 + std::pow(tau, beta) / A));
  };
  const auto q = numerics::integrate_semi_infinite(integrand, 0.0, cfg, std::pow(A, 1.0 / beta));
  UtilityEstimate u;
  u.map_term = params.lambda * std::log(psi);
  u.interference_term = params.lambda * params.lambda * q.value;
  u.value = u.map_term + u.interference_term;
  u.error = params.lambda * params.lambda * q.error;
  return u;
}

}  // namespace

UtilityEstimate mean_utility(const StoppingSetSpec& spec, const ModelParams& params,
                             std::size_t grid_size, const numerics::QuadConfig& cfg,
                             double max_error) {
  params.validate();
  if (spec.kind() == StoppingSetKind::Empty) return empty_utility(params, cfg);
  if (spec.kind() != StoppingSetKind::Disk) {
    throw std::invalid_argument("mean_utility: " + spec.to_string() +
                                " needs the empirical estimate (simulator)");
  }
  const double R = spec.radius();
  const double A = params.scaled_threshold();
  const double beta = params.beta;
  const double lambda = params.lambda;

  // Radial nodes for the extra receiver inside the disk: GK15 on 4 panels.
  constexpr int kPanels = 4;
  static constexpr std::array<double, 8> xgk{0.991455371120812639206854697526329,
                                             0.949107912342758524526189684047851,
                                             0.864864423359769072789712788640926,
                                             0.741531185599394439863864773280788,
                                             0.586087235467691130294144845693013,
                                             0.405845151377397166906606412076961,
                                             0.207784955007898467600689403773245,
                                             0.000000000000000000000000000000000};
  static constexpr std::array<double, 8> wgk{0.022935322010529224963732008058970,
                                             0.063092092629978553290700663189204,
                                             0.104790010322250183839876322541518,
                                             0.140653259715525918745189590510238,
                                             0.169004726639267902826583426598550,
                                             0.190350578064785409913256402421014,
                                             0.204432940075298892414161999234649,
                                             0.209482141084727828012999174891714};
  static constexpr std::array<double, 4> wg{0.129484966168869693270611432679082,
                                            0.279705391489276667901467771423780,
                                            0.381830050505118944950369775488975,
                                            0.417959183673469387755102040816327};
  std::vector<double> tau, w_kron, w_gauss;
  for (int p = 0; p < kPanels; ++p) {
    const double a = R * p / kPanels;
    const double half = 0.5 * R / kPanels;
    const double c = a + half;
    for (int j = 0; j < 15; ++j) {
      const int idx = j < 7 ? j : (j == 7 ? 7 : 14 - j);
      const double x = j < 7 ? -xgk[idx] : (j == 7 ? 0.0 : xgk[idx]);
      tau.push_back(c + half * x);
      w_kron.push_back(half * wgk[idx]);
      // Gauss nodes are the odd-indexed Kronrod nodes (xgk[1], xgk[3], ...).
      w_gauss.push_back(idx % 2 == 1 ? half * wg[idx / 2] : (idx == 7 ? half * wg[3] : 0.0));
    }
  }
  const std::size_t m = tau.size();

  // CCDFs of psi (index 0) and psi_tau (1..m) on the grid, plus atoms.
  const auto grid = uniform_grid(grid_size);
  std::vector<std::vector<double>> ccdf(m + 1, std::vector<double>(grid_size));
  std::vector<std::vector<double>> err(m + 1, std::vector<double>(grid_size));
  std::vector<double> atom(m + 1), atom_err(m + 1);
  std::vector<double> thresholds(m + 1);
  auto fill = [&](double rho, std::size_t k, bool is_atom) {
    const double room = shot_noise_room(rho, spec, params, cfg);
    thresholds[0] = room;
    for (std::size_t j = 0; j < m; ++j) thresholds[j + 1] = room - response(rho, tau[j], params);
    const auto est = ShotNoise(rho, spec, params, cfg).cdf(thresholds);
    for (std::size_t j = 0; j <= m; ++j) {
      if (is_atom) {
        atom[j] = est[j].value;
        atom_err[j] = est[j].error;
      } else {
        ccdf[j][k] = est[j].value;
        err[j][k] = est[j].error;
      }
    }
  };
  for (std::size_t k = 0; k < grid_size; ++k) fill(grid[k], k, false);
  fill(1.0, 0, true);

  // lambda E[log psi].
  const CellLaw base = cells_from_ccdf(grid, ccdf[0], atom[0]);
  const std::size_t cells = base.mass.size();
  std::vector<double> h_mid(cells), h_lo(cells), h_hi(cells);
  for (std::size_t c = 0; c < cells; ++c) {
    h_mid[c] = std::log(base.mid[c]);
    h_lo[c] = std::log(c == 0 ? base.mid[c] : base.lo[c]);
    h_hi[c] = std::log(base.hi[c]);
  }
  const auto map_part = stieltjes(base, atom[0], 0.0, h_mid, h_lo, h_hi, err[0], atom_err[0]);
  // The first cell has no finite lower end for log; charge its whole mass.
  const double first_cell = std::abs(base.mass[0] * h_mid[0]);

  // Extra receiver outside the disk: f_t = f, radial integral from R to inf.
  auto outside = [&](double u) {
    if (u == 0.0) return numerics::Estimate{};
    auto integrand = [=](double t) {
      return 2.0 * kPi * t * std::log1p(-u / (1.0 + std::pow(t, beta) / A));
    };
    return numerics::integrate_semi_infinite(integrand, R, cfg, std::max(R, std::pow(A, 1.0 / beta)));
  };
  double quad_err = 0.0;
  std::vector<double> k_mid(cells), k_lo(cells), k_hi(cells);
  for (std::size_t c = 0; c < cells; ++c) {
    const auto em = outside(base.mid[c]);
    const auto el = outside(base.lo[c]);
    const auto eh = outside(base.hi[c]);
    k_mid[c] = em.value;
    k_lo[c] = el.value;
    k_hi[c] = eh.value;
    quad_err += std::abs(base.mass[c]) * em.error;
  }
  const auto k_one = outside(1.0);
  const auto out_part = stieltjes(base, atom[0], k_one.value, k_mid, k_lo, k_hi, err[0], atom_err[0]);

  // Extra receiver inside the disk at distance tau_j.
  double in_kron = 0.0;
  double in_gauss = 0.0;
  double in_err = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const double t = tau[j];
    const double damp = 1.0 + std::pow(t, beta) / A;
    const CellLaw law = cells_from_ccdf(grid, ccdf[j + 1], atom[j + 1]);
    std::vector<double> g_mid(cells), g_lo(cells), g_hi(cells);
    for (std::size_t c = 0; c < cells; ++c) {
      g_mid[c] = std::log1p(-law.mid[c] / damp);
      g_lo[c] = std::log1p(-law.lo[c] / damp);
      g_hi[c] = std::log1p(-law.hi[c] / damp);
    }
    const double g_one = std::log1p(-1.0 / damp);
    const auto h = stieltjes(law, atom[j + 1], g_one, g_mid, g_lo, g_hi, err[j + 1], atom_err[j + 1]);
    const double weight = 2.0 * kPi * t;
    in_kron += w_kron[j] * weight * h.value;
    in_gauss += w_gauss[j] * weight * h.value;
    in_err += w_kron[j] * weight * h.error;
  }
  in_err += std::abs(in_kron - in_gauss);

  UtilityEstimate u;
  u.map_term = lambda * map_part.value;
  u.interference_term = lambda * lambda * (in_kron + out_part.value);
  u.value = u.map_term + u.interference_term;
  u.error = lambda * (map_part.error + first_cell) +
            lambda * lambda * (in_err + out_part.error + quad_err + k_one.error);
  if (u.error > max_error) {
    throw std::runtime_error("mean_utility: error bound " + std::to_string(u.error) +
                             " exceeds tolerance; refine the rho grid");
  }
  return u;
}

}  // namespace saloha::analytic

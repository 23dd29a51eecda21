#include "saloha/numerics.hpp"

#include <numbers>

namespace saloha::numerics {

void QuadConfig::validate() const {
  if (!(rel_tol > 0.0)) throw std::invalid_argument("QuadConfig: rel_tol must be > 0");
  if (!(abs_tol > 0.0)) throw std::invalid_argument("QuadConfig: abs_tol must be > 0");
  if (max_depth < 10) throw std::invalid_argument("QuadConfig: max_depth must be >= 10");
  if (!(fourier_tail_tol > 0.0)) {
    throw std::invalid_argument("QuadConfig: fourier_tail_tol must be > 0");
  }
  if (max_intervals < 16) throw std::invalid_argument("QuadConfig: max_intervals too small");
  if (!(fourier_max_w > 0.0)) throw std::invalid_argument("QuadConfig: fourier_max_w must be > 0");
}

Estimate integrate(const std::function<double(double)>& f, double a, double b,
                   const QuadConfig& cfg) {
  auto r = integrate<double>(f, a, b, cfg);
  return {r.value, r.error};
}

Estimate integrate_semi_infinite(const std::function<double(double)>& g, double x0,
                                 const QuadConfig& cfg, double split) {
  if (!(x0 >= 0.0) || !std::isfinite(x0)) {
    throw std::invalid_argument("integrate_semi_infinite: x0 must be finite and >= 0");
  }
  const double s_split = std::max(x0, split > 0.0 ? split : 1.0);
  Estimate out;
  if (s_split > x0) {
    out = integrate(g, x0, s_split, cfg);
  }
  // s = 1/u maps [s_split, inf) onto (0, 1/s_split].
  auto mapped = [&g](double u) {
    const double s = 1.0 / u;
    return g(s) * s * s;
  };
  const Estimate tail = integrate(mapped, 0.0, 1.0 / s_split, cfg);
  out.value += tail.value;
  out.error += tail.error;
  return out;
}

std::complex<double> integrate_complex(const std::function<std::complex<double>(double)>& f,
                                       double a, double b, const QuadConfig& cfg,
                                       double* error) {
  auto r = integrate<std::complex<double>>(f, a, b, cfg);
  if (error != nullptr) *error = r.error;
  return r.value;
}

GaussRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged node.
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

namespace {

double sinc(double x) {
  if (std::abs(x) < 1e-4) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

// Adds the integral of `f` over [lo, hi] split into panels of width <= `width`,
// each refined adaptively to abs tolerance proportional to its length.
std::valarray<double> integrate_panels(const std::function<std::valarray<double>(double)>& f,
                                       double lo, double hi, double width, double abs_tol,
                                       const QuadConfig& cfg, double& error) {
  constexpr std::size_t kMaxPanels = 4096;
  std::size_t panels = static_cast<std::size_t>(std::ceil((hi - lo) / width));
  panels = std::clamp<std::size_t>(panels, 1, kMaxPanels);
  const double h = (hi - lo) / static_cast<double>(panels);
  QuadConfig local = cfg;
  local.abs_tol = abs_tol / static_cast<double>(panels);
  std::valarray<double> sum;
  for (std::size_t p = 0; p < panels; ++p) {
    const double a = lo + h * static_cast<double>(p);
    const double b = (p + 1 == panels) ? hi : a + h;
    auto r = integrate<std::valarray<double>>(f, a, b, local);
    if (sum.size() == 0) {
      sum = r.value;
    } else {
      sum += r.value;
    }
    error += r.error;
  }
  return sum;
}

}  // namespace

namespace {

// (1/pi) Int_0^inf Re[nu(w) (e^{iwc} - 1)/(iw)] dw for each threshold c > 0,
// where nu is the Fourier transform of a finite measure without atom at 0.
std::vector<Estimate> invert_measure(const CharacteristicFn& cf, const std::vector<double>& active,
                                     const QuadConfig& cfg, double frequency_scale) {
  const double c_max = *std::max_element(active.begin(), active.end());
  const double scale = std::max({1.0, c_max, frequency_scale});
  const double width = 0.5 * std::numbers::pi / scale;
  const std::size_t n = active.size();

  auto integrand = [&](double w) {
    const std::complex<double> nu = cf(w);
    std::valarray<double> v(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double c = active[k];
      const double half = 0.5 * w * c;
      // (e^{iwc} - 1)/(iw) = c e^{iwc/2} sinc(wc/2)
      const std::complex<double> kernel = c * sinc(half) * std::polar(1.0, half);
      v[k] = (nu * kernel).real() / std::numbers::pi;
    }
    return v;
  };
  const std::function<std::valarray<double>(double)> fn = integrand;

  const double octave_tol = 0.1 * cfg.fourier_tail_tol;
  double quad_error = 0.0;
  double w_hi = 32.0 * width;
  std::valarray<double> total = integrate_panels(fn, 0.0, w_hi, width, octave_tol, cfg, quad_error);

  int quiet_octaves = 0;
  double last_octave = 0.0;
  while (quiet_octaves < 2) {
    if (w_hi > cfg.fourier_max_w) {
      throw QuadratureError("fourier_cdf: frequency tail did not converge", total[0],
                            last_octave);
    }
    std::valarray<double> octave =
        integrate_panels(fn, w_hi, 2.0 * w_hi, width, octave_tol, cfg, quad_error);
    total += octave;
    last_octave = detail::magnitude(octave);
    quiet_octaves = (last_octave < cfg.fourier_tail_tol) ? quiet_octaves + 1 : 0;
    w_hi *= 2.0;
  }
  std::vector<Estimate> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = {total[k], quad_error + last_octave};
  return out;
}

constexpr double kClampBand = 1e-4;

}  // namespace

std::vector<Estimate> fourier_measure_cdf(const CharacteristicFn& cf,
                                          std::span<const double> thresholds, double mass,
                                          const QuadConfig& cfg, double frequency_scale) {
  cfg.validate();
  if (!(mass >= 0.0) || !std::isfinite(mass)) {
    throw std::invalid_argument("fourier_measure_cdf: mass must be finite and >= 0");
  }
  if (std::abs(cf(0.0) - mass) > 1e-9 * std::max(1.0, mass)) {
    throw std::invalid_argument("fourier_measure_cdf: transform at w = 0 must equal the mass");
  }
  std::vector<Estimate> out(thresholds.size());
  std::vector<double> active;
  std::vector<std::size_t> slot;
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    const double c = thresholds[i];
    if (std::isnan(c)) throw std::invalid_argument("fourier_measure_cdf: NaN threshold");
    if (c > 0.0) {
      active.push_back(c);
      slot.push_back(i);
    }
  }
  if (active.empty() || mass == 0.0) return out;
  const auto raw = invert_measure(cf, active, cfg, frequency_scale);
  for (std::size_t k = 0; k < raw.size(); ++k) {
    const double p = raw[k].value;
    if (p < -kClampBand || p > mass + kClampBand) {
      throw QuadratureError("fourier_measure_cdf: inversion left [0, mass] beyond tolerance", p,
                            raw[k].error);
    }
    out[slot[k]] = {std::clamp(p, 0.0, mass), raw[k].error};
  }
  return out;
}

std::vector<Estimate> fourier_cdf(const CharacteristicFn& cf, std::span<const double> thresholds,
                                  double atom_at_zero, const QuadConfig& cfg,
                                  double frequency_scale) {
  cfg.validate();
  if (!(atom_at_zero >= 0.0 && atom_at_zero <= 1.0)) {
    throw std::invalid_argument("fourier_cdf: atom_at_zero must lie in [0, 1]");
  }
  if (std::abs(cf(0.0) - 1.0) > 1e-9) {
    throw std::invalid_argument("fourier_cdf: characteristic function must equal 1 at w = 0");
  }
  std::vector<Estimate> out(thresholds.size());
  std::vector<double> active;
  std::vector<std::size_t> slot;
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    const double c = thresholds[i];
    if (std::isnan(c)) throw std::invalid_argument("fourier_cdf: NaN threshold");
    if (c <= 0.0) {
      out[i] = {0.0, 0.0};  // X >= 0, so P(X < c) = 0
    } else {
      active.push_back(c);
      slot.push_back(i);
    }
  }
  if (active.empty()) return out;
  if (atom_at_zero >= 1.0) {
    for (std::size_t k : slot) out[k] = {1.0, 0.0};
    return out;
  }
  const double p0 = atom_at_zero;
  const CharacteristicFn centered = [&](double w) {
    const std::complex<double> phi = cf(w);
    if (std::abs(phi) > 1.0 + 1e-9) {
      throw std::invalid_argument("fourier_cdf: |phi(w)| > 1 at w = " + std::to_string(w));
    }
    return phi - p0;
  };
  const auto raw = invert_measure(centered, active, cfg, frequency_scale);
  for (std::size_t k = 0; k < raw.size(); ++k) {
    const double p = p0 + raw[k].value;
    if (p < -kClampBand || p > 1.0 + kClampBand) {
      throw QuadratureError("fourier_cdf: inversion left [0, 1] beyond tolerance", p,
                            raw[k].error);
    }
    out[slot[k]] = {std::clamp(p, 0.0, 1.0), raw[k].error};
  }
  return out;
}

Estimate fourier_inversion(const CharacteristicFn& cf, double threshold, const QuadConfig& cfg,
                           double atom_at_zero, double frequency_scale) {
  const std::array<double, 1> t{threshold};
  return fourier_cdf(cf, t, atom_at_zero, cfg, frequency_scale).front();
}

}  // namespace saloha::numerics

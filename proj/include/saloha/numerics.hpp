#pragma once

/// \file
/// Numerical kernels: bracketed root finding, adaptive Gauss-Kronrod
/// quadrature on finite and semi-infinite intervals, and CDF recovery from a
/// characteristic function by Parseval inversion.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <valarray>
#include <vector>

namespace saloha::numerics {

struct QuadConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  int max_depth = 50;
  double fourier_tail_tol = 1e-6;
  /// Hard cap on the number of live subintervals of one adaptive integral.
  std::size_t max_intervals = 200000;
  /// Parseval inversion gives up when the frequency cut-off passes this.
  double fourier_max_w = 1e7;

  void validate() const;
};

/// A value together with an absolute error estimate.
struct Estimate {
  double value = 0.0;
  double error = 0.0;
};

/// Thrown when an adaptive scheme cannot meet its tolerance. Carries the best
/// estimate obtained so far.
class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double partial, double error)
      : std::runtime_error(what), partial_(partial), error_(error) {}
  double partial() const noexcept { return partial_; }
  double error() const noexcept { return error_; }

 private:
  double partial_;
  double error_;
};

/// Thrown when a root finder is handed an interval without a sign change.
class BracketError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// ---------------------------------------------------------------------------
// Root finding

/// Plain bisection. Requires f(lo) and f(hi) of opposite sign; the returned
/// point is within `tol` of a sign change of f.
template <class F>
double bisect(F&& f, double lo, double hi, double tol, int max_iter = 200) {
  if (!(tol > 0.0)) throw std::invalid_argument("bisect: tol must be > 0");
  if (lo > hi) std::swap(lo, hi);
  double f_lo = f(lo);
  const double f_hi = f(hi);
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  if (std::signbit(f_lo) == std::signbit(f_hi) || std::isnan(f_lo) || std::isnan(f_hi)) {
    throw BracketError("bisect: no sign change on [" + std::to_string(lo) + ", " +
                       std::to_string(hi) + "]");
  }
  for (int it = 0; it < max_iter && hi - lo > 2.0 * tol; ++it) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    const double f_mid = f(mid);
    if (f_mid == 0.0) return mid;
    if (std::signbit(f_mid) == std::signbit(f_lo)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return lo + 0.5 * (hi - lo);
}

struct RootResult {
  double root = 0.0;
  double residual = 0.0;  ///< |f(root)|
  int iterations = 0;
};

/// Bracketed Newton iteration with bisection fallback for a function that is
/// strictly decreasing on [lo, hi] with f(lo) > 0 > f(hi). `fdf(x)` returns
/// {f(x), f'(x)}. Stops once the bracket is narrower than `xtol` and
/// |f| <= `ftol`, or when the bracket cannot shrink in floating point.
template <class FdF>
RootResult find_decreasing_root(FdF&& fdf, double lo, double hi, double xtol, double ftol,
                                int max_iter = 200) {
  if (!(xtol > 0.0) || !(ftol > 0.0)) {
    throw std::invalid_argument("find_decreasing_root: tolerances must be > 0");
  }
  const auto [f_lo, d_lo] = fdf(lo);
  const auto [f_hi, d_hi] = fdf(hi);
  (void)d_lo;
  (void)d_hi;
  if (!(f_lo > 0.0) || !(f_hi < 0.0)) {
    throw BracketError("find_decreasing_root: expected f(lo) > 0 > f(hi)");
  }
  double x = lo + 0.5 * (hi - lo);
  RootResult out;
  for (int it = 1; it <= max_iter; ++it) {
    const auto [fx, dfx] = fdf(x);
    out.iterations = it;
    out.root = x;
    out.residual = std::abs(fx);
    if (fx == 0.0) return out;
    if (fx > 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    if (hi - lo <= xtol && out.residual <= ftol) return out;
    double next = (dfx < 0.0 && std::isfinite(dfx)) ? x - fx / dfx : lo - 1.0;
    if (!(next > lo && next < hi)) next = lo + 0.5 * (hi - lo);
    if (next <= lo || next >= hi) return out;  // bracket exhausted at machine precision
    x = next;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Quadrature

namespace detail {

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(const std::complex<double>& v) { return std::abs(v); }
inline double magnitude(const std::valarray<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Kronrod 15-point nodes on [0,1] (symmetric), with the embedded 7-point Gauss rule.
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class V>
struct Segment {
  double a;
  double b;
  V value;
  double error;
  int depth;
};

template <class V, class F>
Segment<V> kronrod15(F& f, double a, double b, int depth) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  V f_center = f(center);
  V kronrod = f_center * kKronrodWeights[7];
  V gauss = f_center * kGaussWeights[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kKronrodNodes[j];
    V pair = f(center - dx) + f(center + dx);
    kronrod = kronrod + pair * kKronrodWeights[j];
    if (j % 2 == 1) gauss = gauss + pair * kGaussWeights[j / 2];
  }
  kronrod = kronrod * half;
  gauss = gauss * half;
  const double err = magnitude(V(kronrod - gauss));
  return Segment<V>{a, b, kronrod, err, depth};
}

}  // namespace detail

template <class V>
struct QuadResult {
  V value;
  double error = 0.0;
};

/// Globally adaptive Gauss-Kronrod (7/15) integration of f over the union of
/// consecutive intervals given by `breakpoints`. The interval with the largest
/// error estimate is halved until the summed estimate falls below
/// max(abs_tol, rel_tol * |I|). Works for any value type with +, scalar * and
/// a detail::magnitude overload (double, complex, valarray).
template <class V, class F>
QuadResult<V> integrate_breakpoints(F&& f, std::span<const double> breakpoints,
                                    const QuadConfig& cfg) {
  using Seg = detail::Segment<V>;
  if (breakpoints.size() < 2) throw std::invalid_argument("integrate: need >= 2 breakpoints");
  auto cmp = [](const Seg& l, const Seg& r) {
    if (l.error != r.error) return l.error < r.error;
    return l.a > r.a;  // deterministic tie-break
  };
  std::priority_queue<Seg, std::vector<Seg>, decltype(cmp)> open(cmp);
  std::vector<Seg> closed;

  V total{};
  double total_err = 0.0;
  bool first = true;
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    if (breakpoints[i + 1] == breakpoints[i]) continue;
    Seg s = detail::kronrod15<V>(f, breakpoints[i], breakpoints[i + 1], 0);
    total = first ? s.value : V(total + s.value);
    first = false;
    total_err += s.error;
    open.push(std::move(s));
  }
  if (first) {
    V zero = f(breakpoints[0]) * 0.0;
    return {zero, 0.0};
  }

  constexpr double kRoundoff = 50.0 * std::numeric_limits<double>::epsilon();
  auto tolerance = [&] { return std::max(cfg.abs_tol, cfg.rel_tol * detail::magnitude(total)); };

  bool depth_exhausted = false;
  while (total_err > tolerance() && !open.empty()) {
    Seg worst = open.top();
    open.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (worst.error <= kRoundoff * detail::magnitude(worst.value) || mid <= worst.a ||
        mid >= worst.b) {
      closed.push_back(std::move(worst));
      continue;
    }
    if (worst.depth >= cfg.max_depth) {
      depth_exhausted = true;
      closed.push_back(std::move(worst));
      continue;
    }
    if (open.size() + closed.size() + 2 > cfg.max_intervals) {
      throw QuadratureError("integrate: interval budget exhausted",
                            detail::magnitude(total), total_err);
    }
    Seg left = detail::kronrod15<V>(f, worst.a, mid, worst.depth + 1);
    Seg right = detail::kronrod15<V>(f, mid, worst.b, worst.depth + 1);
    total = total + (left.value + right.value) - worst.value;
    total_err += left.error + right.error - worst.error;
    open.push(std::move(left));
    open.push(std::move(right));
  }

  // Re-sum in a fixed order so rounding does not depend on the refinement path.
  std::vector<Seg> all = std::move(closed);
  while (!open.empty()) {
    all.push_back(open.top());
    open.pop();
  }
  std::sort(all.begin(), all.end(), [](const Seg& l, const Seg& r) { return l.a < r.a; });
  V sum = all.front().value;
  double err = all.front().error;
  for (std::size_t i = 1; i < all.size(); ++i) {
    sum = sum + all[i].value;
    err += all[i].error;
  }
  if (depth_exhausted && err > std::max(cfg.abs_tol, cfg.rel_tol * detail::magnitude(sum))) {
    throw QuadratureError("integrate: maximum subdivision depth reached",
                          detail::magnitude(sum), err);
  }
  return {sum, err};
}

template <class V, class F>
QuadResult<V> integrate(F&& f, double a, double b, const QuadConfig& cfg) {
  const std::array<double, 2> bp{a, b};
  return integrate_breakpoints<V>(std::forward<F>(f), std::span<const double>(bp), cfg);
}

/// Scalar adaptive integral over [a, b].
Estimate integrate(const std::function<double(double)>& f, double a, double b,
                   const QuadConfig& cfg = {});

/// Integral of g over [x0, inf). The part beyond `split` (at least x0) is
/// mapped to a finite interval with s = 1/u. `split` should sit near the
/// scale where g turns into its power-law tail.
Estimate integrate_semi_infinite(const std::function<double(double)>& g, double x0,
                                 const QuadConfig& cfg = {}, double split = 1.0);

/// Complex-valued variant of integrate().
std::complex<double> integrate_complex(const std::function<std::complex<double>(double)>& f,
                                       double a, double b, const QuadConfig& cfg,
                                       double* error = nullptr);

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussRule gauss_legendre(int n);

// ---------------------------------------------------------------------------
// Parseval inversion

/// Characteristic function in the convention phi(w) = E[exp(-i w X)].
using CharacteristicFn = std::function<std::complex<double>(double)>;

/// P(X < c) for each threshold c, for a nonnegative random variable X with
/// characteristic function `cf` and a known atom P(X = 0) = `atom_at_zero`.
///
/// The atom is split off and the remainder inverted with
///   P(X < c) = p0 + (1/pi) Int_0^inf Re[(phi(w) - p0) (e^{iwc} - 1)/(iw)] dw,
/// whose integrand tends to (1 - p0) c at w = 0. The cut-off is doubled until
/// two consecutive octaves each contribute less than cfg.fourier_tail_tol.
/// `frequency_scale` bounds the oscillation rate of phi and sets the initial
/// panel width. Results within 1e-4 outside [0, 1] are clamped; larger
/// excursions throw QuadratureError.
std::vector<Estimate> fourier_cdf(const CharacteristicFn& cf, std::span<const double> thresholds,
                                  double atom_at_zero, const QuadConfig& cfg = {},
                                  double frequency_scale = 1.0);

/// mu([0, c)) for each threshold, for a finite measure mu on (0, inf) of
/// total mass `mass` given its transform nu(w) = Int exp(-i w x) mu(dx).
/// Same truncation rule as fourier_cdf; results are clamped into [0, mass]
/// within 1e-4.
std::vector<Estimate> fourier_measure_cdf(const CharacteristicFn& cf,
                                          std::span<const double> thresholds, double mass,
                                          const QuadConfig& cfg = {},
                                          double frequency_scale = 1.0);

/// Single-threshold form of fourier_cdf().
Estimate fourier_inversion(const CharacteristicFn& cf, double threshold,
                           const QuadConfig& cfg = {}, double atom_at_zero = 0.0,
                           double frequency_scale = 1.0);

}  // namespace saloha::numerics

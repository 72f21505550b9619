#include "nis/special_functions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace nis {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = 1e-300;
constexpr int kMaxIterations = 10000;

// ln of the common prefactor x^a e^-x / Gamma(a).
double log_gamma_prefactor(double a, double x) {
  return a * std::log(x) - x - std::lgamma(a);
}

double lower_gamma_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < kMaxIterations; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) {
      return sum * std::exp(log_gamma_prefactor(a, x));
    }
  }
  throw ConvergenceError("regularized_gamma_p: series did not converge");
}

// Modified Lentz evaluation of the continued fraction for Q(a, x).
double upper_gamma_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIterations; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) {
      return std::exp(log_gamma_prefactor(a, x)) * h;
    }
  }
  throw ConvergenceError("regularized_gamma_q: continued fraction did not converge");
}

void check_gamma_args(double shape, double x) {
  if (!(shape > 0.0) || !std::isfinite(shape)) {
    throw std::domain_error("incomplete gamma: shape must be positive and finite");
  }
  if (!(x >= 0.0)) throw std::domain_error("incomplete gamma: x must be >= 0");
}

double gamma_pdf_unit_scale(double a, double x) {
  return std::exp((a - 1.0) * std::log(x) - x - std::lgamma(a));
}

// Safeguarded Newton on a monotone residual. `increasing` tells which way
// the residual moves with x so the bracket can be maintained.
template <typename Residual>
double solve_incomplete_gamma(double a, Residual residual, bool increasing) {
  double lo = 0.0;
  double hi = std::max(1.0, 2.0 * a);
  auto below_root = [&](double f) { return increasing ? f < 0.0 : f > 0.0; };
  for (int i = 0; below_root(residual(hi)); ++i) {
    if (i > 2000) throw ConvergenceError("inverse incomplete gamma: no upper bracket");
    lo = hi;
    hi *= 2.0;
  }

  double x = std::clamp(a, lo, hi);
  if (x <= lo || x >= hi) x = 0.5 * (lo + hi);
  for (int iter = 0; iter < 500; ++iter) {
    const double f = residual(x);
    if (f == 0.0) return x;
    if (below_root(f)) lo = x; else hi = x;

    const double slope = (increasing ? 1.0 : -1.0) * gamma_pdf_unit_scale(a, x);
    double next = x - f / slope;
    if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 4.0 * kEps * x || hi - lo <= 4.0 * kEps * hi) {
      return next;
    }
    x = next;
  }
  throw ConvergenceError("inverse incomplete gamma: iteration limit reached");
}

}  // namespace

double log_gamma(double x) { return std::lgamma(x); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("normal_quantile: p must lie in (0, 1)");
  if (p == 0.5) return 0.0;
  // Rational starting point on the smaller tail, then Halley steps on
  // whichever tail of the CDF keeps relative precision.
  const bool upper = p > 0.5;
  const double tail = upper ? 1.0 - p : p;
  const double t = std::sqrt(-2.0 * std::log(tail));
  double x = -(t - (2.515517 + t * (0.802853 + t * 0.010328)) /
                       (1.0 + t * (1.432788 + t * (0.189269 + t * 0.001308))));
  for (int i = 0; i < 50; ++i) {
    const double err = normal_cdf(x) - tail;
    const double u = err / std::exp(log_normal_pdf(x));
    const double step = u / (1.0 + 0.5 * x * u);
    x -= step;
    if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(x))) break;
  }
  return upper ? -x : x;
}

double log_normal_pdf(double x) {
  return -0.5 * x * x - 0.5 * std::log(2.0 * std::numbers::pi);
}

double regularized_gamma_p(double shape, double x) {
  check_gamma_args(shape, x);
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < shape + 1.0) return lower_gamma_series(shape, x);
  return 1.0 - upper_gamma_fraction(shape, x);
}

double regularized_gamma_q(double shape, double x) {
  check_gamma_args(shape, x);
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < shape + 1.0) return 1.0 - lower_gamma_series(shape, x);
  return upper_gamma_fraction(shape, x);
}

double inverse_regularized_gamma_p(double shape, double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("inverse_regularized_gamma_p: p must lie in (0, 1)");
  }
  check_gamma_args(shape, 0.0);
  if (p > 0.5) return inverse_regularized_gamma_q(shape, 1.0 - p);
  return solve_incomplete_gamma(
      shape, [&](double x) { return regularized_gamma_p(shape, x) - p; }, true);
}

double inverse_regularized_gamma_q(double shape, double q) {
  if (!(q > 0.0 && q < 1.0)) {
    throw std::domain_error("inverse_regularized_gamma_q: q must lie in (0, 1)");
  }
  check_gamma_args(shape, 0.0);
  if (q > 0.5) return inverse_regularized_gamma_p(shape, 1.0 - q);
  return solve_incomplete_gamma(
      shape, [&](double x) { return regularized_gamma_q(shape, x) - q; }, false);
}

double log_bessel_i(double order, double x) {
  if (!(order >= 0.0) || !(x >= 0.0) || !std::isfinite(order) || !std::isfinite(x)) {
    throw std::domain_error("log_bessel_i: order and argument must be finite and >= 0");
  }
  if (x == 0.0) {
    return order == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
  }

  // Ratio of consecutive terms is (x/2)^2 / ((k+1)(k+1+order)); the largest
  // term sits where that ratio crosses one. Terms are built outward from
  // there by that ratio, relative to the peak term.
  const double quarter_x2 = 0.25 * x * x;
  const double peak = std::floor(0.5 * (std::sqrt(order * order + x * x) - order));
  const double log_peak = (2.0 * peak + order) * std::log(0.5 * x) - std::lgamma(peak + 1.0) -
                          std::lgamma(peak + order + 1.0);

  constexpr double kStop = 1e-18;
  double sum = 1.0;
  double t = 1.0;
  for (double k = peak;; k += 1.0) {
    t *= quarter_x2 / ((k + 1.0) * (k + 1.0 + order));
    sum += t;
    if (t < kStop * sum) break;
    if (k - peak > 1e7) throw ConvergenceError("log_bessel_i: upper tail did not converge");
  }
  t = 1.0;
  for (double k = peak; k >= 1.0; k -= 1.0) {
    t *= k * (k + order) / quarter_x2;
    sum += t;
    if (t < kStop * sum) break;
  }
  return log_peak + std::log(sum);
}

double log_sum_exp(std::span<const double> values) {
  double max_value = -std::numeric_limits<double>::infinity();
  for (double v : values) max_value = std::max(max_value, v);
  if (!std::isfinite(max_value)) return max_value;
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - max_value);
  return max_value + std::log(sum);
}

}  // namespace nis

#pragma once

#include <span>
#include <stdexcept>

namespace nis {

/// Thrown when an iterative special-function evaluation fails to converge.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double log_gamma(double x);

/// Standard normal CDF, evaluated through erfc so both tails keep full
/// relative precision.
double normal_cdf(double x);

/// Inverse of normal_cdf for p in (0, 1); std::domain_error otherwise.
double normal_quantile(double p);

/// Standard normal log-density.
double log_normal_pdf(double x);

/// Regularized lower incomplete gamma P(a, x).
double regularized_gamma_p(double shape, double x);

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x), computed
/// directly so the upper tail keeps relative precision.
double regularized_gamma_q(double shape, double x);

/// x such that P(shape, x) = p. Throws std::domain_error for p outside
/// (0, 1) and ConvergenceError if the safeguarded Newton iteration stalls.
double inverse_regularized_gamma_p(double shape, double p);

/// x such that Q(shape, x) = q; preferred over the P form when q is small.
double inverse_regularized_gamma_q(double shape, double q);

/// ln I_order(x) for order >= 0 and x >= 0.
///
/// Sums the power series in log space, starting from its largest term and
/// walking outward until the tail drops below double precision. All terms
/// are positive so there is no cancellation, and the work grows like
/// sqrt(x) rather than x. ln I_0(0) = 0; ln I_v(0) = -inf for v > 0.
double log_bessel_i(double order, double x);

/// ln(sum exp(values)); -inf for an empty span or all -inf entries.
double log_sum_exp(std::span<const double> values);

}  // namespace nis

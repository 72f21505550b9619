#include "nis/polar.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "nis/special_functions.hpp"

namespace nis {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> x) { return std::sqrt(dot(x, x)); }

PolarPoint to_polar(std::span<const double> x) {
  const double r = norm(x);
  if (!(r > 0.0)) throw std::domain_error("to_polar: zero vector has no direction");
  PolarPoint p{r, Vector(x.begin(), x.end())};
  for (double& v : p.a) v /= r;
  return p;
}

Vector from_polar(const PolarPoint& p) {
  Vector x(p.a);
  for (double& v : x) v *= p.r;
  return x;
}

double log_uniform_sphere(std::size_t dim) {
  const double half = 0.5 * static_cast<double>(dim);
  return log_gamma(half) - std::log(2.0) - half * std::log(std::numbers::pi);
}

double log_std_normal_polar(double r, std::size_t dim) {
  if (!(r > 0.0)) throw std::domain_error("log_std_normal_polar: radius must be positive");
  const double d = static_cast<double>(dim);
  const double log_chi = (d - 1.0) * std::log(r) - 0.5 * r * r -
                         (0.5 * d - 1.0) * std::log(2.0) - log_gamma(0.5 * d);
  return log_chi + log_uniform_sphere(dim);
}

Vector sample_std_normal(std::size_t dim, RngStream& rng) {
  Vector x(dim);
  for (double& v : x) v = rng.normal();
  return x;
}

Vector sample_unit_vector(std::size_t dim, RngStream& rng) {
  for (;;) {
    Vector x = sample_std_normal(dim, rng);
    const double r = norm(x);
    if (r > 0.0) {
      for (double& v : x) v /= r;
      return x;
    }
  }
}

}  // namespace nis

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "nis/rng.hpp"

namespace nis {

using Vector = std::vector<double>;

/// x = r * a with r > 0 and a on the unit sphere.
struct PolarPoint {
  double r = 0.0;
  Vector a;

  [[nodiscard]] std::size_t dim() const noexcept { return a.size(); }
};

/// Throws std::domain_error for the zero vector.
PolarPoint to_polar(std::span<const double> x);

Vector from_polar(const PolarPoint& p);

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> x);

/// Log-density of the standard normal in polar coordinates: a chi(d)
/// radius times the uniform density on the unit (d-1)-sphere, both with
/// respect to dr and surface measure. The importance density uses the same
/// measure, so f/q ratios are measure-free.
double log_std_normal_polar(double r, std::size_t dim);
inline double log_std_normal_polar(const PolarPoint& p) {
  return log_std_normal_polar(p.r, p.dim());
}

/// ln of the uniform density on the unit (d-1)-sphere, -ln|S^{d-1}|.
double log_uniform_sphere(std::size_t dim);

Vector sample_std_normal(std::size_t dim, RngStream& rng);

/// Uniformly distributed unit vector in R^dim.
Vector sample_unit_vector(std::size_t dim, RngStream& rng);

}  // namespace nis

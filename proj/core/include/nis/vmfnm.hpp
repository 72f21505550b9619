#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "nis/polar.hpp"
#include "nis/rng.hpp"

namespace nis {

/// One von Mises-Fisher-Nakagami component: weight pi, Nakagami shape m and
/// spread omega for the radius, vMF mean direction mu and concentration
/// kappa for the direction.
struct VmfnComponent {
  double pi = 1.0;
  double m = 0.5;
  double omega = 1.0;
  Vector mu;
  double kappa = 0.0;

  friend bool operator==(const VmfnComponent&, const VmfnComponent&) = default;
};

struct VmfnmParams {
  std::vector<VmfnComponent> components;

  [[nodiscard]] std::size_t size() const noexcept { return components.size(); }
  [[nodiscard]] std::size_t dim() const noexcept {
    return components.empty() ? 0 : components.front().mu.size();
  }

  /// Throws std::invalid_argument when any component invariant is broken
  /// or the weights do not sum to one within `tolerance`.
  void validate(double tolerance = 1e-10) const;

  friend bool operator==(const VmfnmParams&, const VmfnmParams&) = default;
};

/// Dense row-major N x K matrix of responsibilities.
class PosteriorMatrix {
 public:
  PosteriorMatrix() = default;
  PosteriorMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  /// One-hot matrix: row i has a 1 in column labels[i].
  static PosteriorMatrix one_hot(std::span<const std::size_t> labels, std::size_t cols);

  [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
  [[nodiscard]] std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t i, std::size_t k) { return data_[i * cols_ + k]; }
  double operator()(std::size_t i, std::size_t k) const { return data_[i * cols_ + k]; }

  [[nodiscard]] std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  [[nodiscard]] std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }

  [[nodiscard]] std::vector<double> column_sums() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// --- densities ------------------------------------------------------------

/// ln C_d(kappa); the kappa = 0 limit is the uniform sphere density.
double log_vmf_normaliser(std::size_t dim, double kappa);
double log_density_vmf(std::span<const double> a, std::span<const double> mu, double kappa);
double log_density_nakagami(double r, double m, double omega);
double log_density_mixture(const PolarPoint& p, const VmfnmParams& params);

/// Per-component constants cached for repeated evaluation.
class MixtureDensity {
 public:
  explicit MixtureDensity(const VmfnmParams& params);

  [[nodiscard]] std::size_t size() const noexcept { return terms_.size(); }
  [[nodiscard]] const VmfnmParams& params() const noexcept { return *params_; }

  /// ln(pi_k f_vMFN(p; nu_k)) for every k, written to `out` (size K).
  void component_log_densities(const PolarPoint& p, std::span<double> out) const;

  [[nodiscard]] double log_density(const PolarPoint& p) const;

  /// ln f_vMFNM(p) and the posterior row for p, in one pass.
  double log_density_and_posterior(const PolarPoint& p, std::span<double> posterior_row) const;

 private:
  struct Terms {
    double log_weight;
    double log_radial_norm;
    double radial_power;  // 2m - 1
    double radial_rate;   // m / omega
    double log_vmf_norm;
    double kappa;
  };
  const VmfnmParams* params_;
  std::vector<Terms> terms_;
};

// --- sampling -------------------------------------------------------------

/// Exact vMF draw (Wood's rejection scheme, rotated onto mu).
Vector sample_vmf(std::span<const double> mu, double kappa, RngStream& rng);

/// r = sqrt(X), X ~ Gamma(shape m, scale omega / m).
double sample_nakagami(double m, double omega, RngStream& rng);

struct LabeledPoint {
  PolarPoint point;
  std::size_t component = 0;
};

std::vector<LabeledPoint> sample_mixture(const VmfnmParams& params, std::size_t n,
                                         RngStream& rng);

// --- EM --------------------------------------------------------------------

PosteriorMatrix posterior(std::span<const PolarPoint> points, const VmfnmParams& params);

struct EmOptions {
  std::size_t max_iterations = 500;
  double relative_tolerance = 1e-5;
  /// Upper limit on the mean resultant length fed to the kappa update.
  double resultant_cap = 0.95;
  /// Components with less responsibility mass than this are dropped.
  double empty_mass = 1e-12;
  /// Nakagami shape bounds. The moment estimator is unbounded when the
  /// radii of a component are (nearly) identical.
  double min_shape = 0.5;
  double max_shape = 1e6;
};

struct EmResult {
  VmfnmParams params;
  PosteriorMatrix posterior;
  /// Objective (mean log-likelihood) after each M-step.
  std::vector<double> objective_trace;
  /// For each surviving component, the column of the initial posterior it
  /// descends from.
  std::vector<std::size_t> origin;
  /// Initial-posterior columns dropped for lack of responsibility mass.
  std::vector<std::size_t> dropped;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Fits a vMFNM to unweighted samples starting from `initial_posterior`.
/// Runs M-step / E-step pairs until the objective changes by less than
/// relative_tolerance * |objective|; if the iteration cap fires first, the
/// best-objective parameters are returned.
EmResult em_fit(std::span<const PolarPoint> points, const PosteriorMatrix& initial_posterior,
                const EmOptions& options = {});

// --- importance-weighted corrections ----------------------------------------

/// ln f(r, a) - ln f_vMFNM(r, a) for each point, f the standard normal in
/// polar coordinates.
std::vector<double> log_importance_ratios(std::span<const PolarPoint> points,
                                          const VmfnmParams& params);

/// Replaces each pi_k by sum_i w_i gamma_ik / sum_i w_i. Other parameters
/// are copied unchanged. Throws std::runtime_error when all weights vanish.
VmfnmParams weight_correction(std::span<const double> log_ratios, const VmfnmParams& params,
                              const PosteriorMatrix& posterior);
VmfnmParams weight_correction(std::span<const PolarPoint> points, const VmfnmParams& params,
                              const PosteriorMatrix& posterior);

/// alpha_k = sum_i w_i gamma0_ik / sum_i w_i with gamma0 the chain membership.
std::vector<double> chain_weights(std::span<const double> log_ratios,
                                  const PosteriorMatrix& membership);
std::vector<double> chain_weights(std::span<const PolarPoint> points,
                                  const PosteriorMatrix& membership, const VmfnmParams& params);

}  // namespace nis

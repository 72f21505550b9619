#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace nis {

/// Deterministic performance function over d-dimensional standard normal
/// space. Failure is g(x) >= 0. Implementations are immutable and safe to
/// evaluate concurrently.
class PerformanceModel {
 public:
  virtual ~PerformanceModel() = default;

  [[nodiscard]] virtual std::size_t dim() const = 0;
  [[nodiscard]] virtual std::string name() const = 0;
  [[nodiscard]] virtual double evaluate(std::span<const double> x) const = 0;

  /// Same answer as evaluate(x) >= 0. Models with an expensive evaluate may
  /// override this with a cheap screen that decides most points early.
  [[nodiscard]] virtual bool is_failure(std::span<const double> x) const {
    return evaluate(x) >= 0.0;
  }
};

using ModelPtr = std::shared_ptr<const PerformanceModel>;

/// Counts performance evaluations. Monotone; never reset during a run.
class EvalCounter {
 public:
  void increment() noexcept { count_.fetch_add(1, std::memory_order_relaxed); }
  [[nodiscard]] std::uint64_t count() const noexcept {
    return count_.load(std::memory_order_relaxed);
  }

 private:
  std::atomic<std::uint64_t> count_{0};
};

/// A model together with the counter charged for every evaluation. Each
/// algorithm run owns one of these.
class CountedModel {
 public:
  explicit CountedModel(ModelPtr model);

  [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
  [[nodiscard]] const PerformanceModel& model() const noexcept { return *model_; }
  [[nodiscard]] std::uint64_t evaluations() const noexcept { return counter_.count(); }

  double evaluate(std::span<const double> x) const;
  bool is_failure(std::span<const double> x) const;

 private:
  ModelPtr model_;
  std::size_t dim_;
  mutable EvalCounter counter_;
};

// --- marginal transforms -------------------------------------------------

/// Maps a standard normal variate to a target marginal distribution.
struct MarginalTransform {
  enum class Kind { normal, lognormal, gamma_via_cdf };

  Kind kind = Kind::normal;
  double p1 = 0.0;  // normal: mean; lognormal: lambda; gamma: shape
  double p2 = 1.0;  // normal: std;  lognormal: zeta;   gamma: rate

  static MarginalTransform normal(double mean, double stddev);
  /// Exact moment matching: zeta^2 = ln(1 + cov^2), lambda = ln(mean) - zeta^2 / 2.
  static MarginalTransform lognormal(double mean, double cov);
  static MarginalTransform gamma(double shape, double rate);

  [[nodiscard]] double apply(double z) const;
};

// --- benchmark performance functions --------------------------------------

double eval_piecewise_linear(std::span<const double> x);
double eval_meatball(std::span<const double> x);

/// Two-degree-of-freedom mass spring system driven on the second mass.
///
/// Units: masses in kg (2000 each), stiffnesses in N/m (lognormal, mean
/// 2.5e5, CoV 0.2), forcing 2000 sin(11 t) N, displacement threshold
/// 0.024 m. These make the natural frequencies straddle the 11 rad/s
/// forcing and reproduce the crude Monte Carlo reference of about 2.5e-5.
///
/// The response is modal superposition of the closed-form damped
/// single-degree-of-freedom solutions (2 % modal damping, zero initial
/// conditions). The peak of the first-mass displacement is searched on a
/// 0.005 s grid over [0, 20] s and refined by a parabolic fit around the
/// best grid point.
double eval_tdof(std::span<const double> x);

/// Peak first-mass displacement for given stiffnesses (N/m).
double tdof_peak_displacement(double k1, double k2);

/// Upper bound on the peak first-mass displacement (sum of modal transient
/// and steady-state amplitudes). Cheap; used to screen safe points.
double tdof_peak_bound(double k1, double k2);

/// Road-holding performance of a passive vehicle suspension. Inputs map
/// to (c, c_k, k) = (424, 1480, 47) + 10 x. All constants are in cm-based
/// units, so the speed enters as 1000 cm/s. For k < 0 the expression is
/// positive (failure); k == 0 exactly returns -inf.
double eval_vehicle(std::span<const double> x);

/// Large portfolio loss count minus b*n + epsilon. Input length n + 2.
double eval_portfolio(std::span<const double> x, std::size_t n, double b,
                      double epsilon = 1e-9);

/// F_Gamma^{-1}(F_N(z)) for Gamma(shape, rate), evaluated on whichever
/// tail keeps precision.
double gamma_quantile_of_normal(double z, double shape, double rate);

// --- model objects ----------------------------------------------------------

class PiecewiseLinearModel final : public PerformanceModel {
 public:
  std::size_t dim() const override { return 2; }
  std::string name() const override { return "pwl"; }
  double evaluate(std::span<const double> x) const override;
};

class MeatballModel final : public PerformanceModel {
 public:
  std::size_t dim() const override { return 2; }
  std::string name() const override { return "meatball"; }
  double evaluate(std::span<const double> x) const override;
};

class TwoDofModel final : public PerformanceModel {
 public:
  std::size_t dim() const override { return 2; }
  std::string name() const override { return "tdof"; }
  double evaluate(std::span<const double> x) const override;
  bool is_failure(std::span<const double> x) const override;
};

class VehicleSuspensionModel final : public PerformanceModel {
 public:
  std::size_t dim() const override { return 3; }
  std::string name() const override { return "vehicle"; }
  double evaluate(std::span<const double> x) const override;
};

class PortfolioLossModel final : public PerformanceModel {
 public:
  PortfolioLossModel(std::size_t obligors, double loss_fraction, double epsilon = 1e-9);

  std::size_t dim() const override { return obligors_ + 2; }
  std::string name() const override;
  double evaluate(std::span<const double> x) const override;

  [[nodiscard]] std::size_t obligors() const noexcept { return obligors_; }
  [[nodiscard]] double loss_fraction() const noexcept { return loss_fraction_; }
  [[nodiscard]] double epsilon() const noexcept { return epsilon_; }

 private:
  std::size_t obligors_;
  double loss_fraction_;
  double epsilon_;
};

/// g(x) = x_1 - beta: a single-niche analytic reference with P_F = Phi(-beta).
class HalfSpaceModel final : public PerformanceModel {
 public:
  HalfSpaceModel(std::size_t dim, double beta);
  std::size_t dim() const override { return dim_; }
  std::string name() const override { return "halfspace"; }
  double evaluate(std::span<const double> x) const override;

 private:
  std::size_t dim_;
  double beta_;
};

/// Embeds a base model in a higher dimension with the same failure
/// probability: z_i = s^{-1/2} * (sum of the i-th block of s inputs).
class LiftedModel final : public PerformanceModel {
 public:
  LiftedModel(ModelPtr base, std::size_t target_dim);

  std::size_t dim() const override { return target_dim_; }
  std::string name() const override;
  double evaluate(std::span<const double> x) const override;
  bool is_failure(std::span<const double> x) const override;

  [[nodiscard]] std::vector<double> project(std::span<const double> x) const;

 private:
  ModelPtr base_;
  std::size_t target_dim_;
  std::size_t block_;
};

/// Returns `model` unchanged when target_dim equals its dimension, else a
/// LiftedModel. Throws std::invalid_argument if target_dim is not a
/// positive multiple of model->dim().
ModelPtr lift_dimension(ModelPtr model, std::size_t target_dim);

/// Registry lookup: "pwl", "meatball", "tdof", "vehicle", "portfolio-30",
/// "portfolio-100", "portfolio-250", "halfspace". lifted_dim = 0 keeps the
/// native dimension; for "halfspace" it is the dimension itself (default 2).
ModelPtr make_model(const std::string& name, std::size_t lifted_dim = 0);

std::vector<std::string> registered_models();

}  // namespace nis

#include "nis/performance_models.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "nis/special_functions.hpp"

namespace nis {

namespace {

void require_dim(std::span<const double> x, std::size_t expected, const char* who) {
  if (x.size() != expected) {
    throw std::invalid_argument(std::string(who) + ": expected input of dimension " +
                                std::to_string(expected) + ", got " +
                                std::to_string(x.size()));
  }
}

// --- two degree of freedom system ---

constexpr double kTdofMass = 2000.0;         // kg, both masses
constexpr double kTdofForce = 2000.0;        // N
constexpr double kTdofOmega = 11.0;          // rad/s
constexpr double kTdofDamping = 0.02;        // modal damping ratio
constexpr double kTdofThreshold = 0.024;     // m
constexpr double kTdofHorizon = 20.0;        // s
constexpr double kTdofStep = 0.005;          // s
constexpr int kTdofSteps = 4000;             // kTdofHorizon / kTdofStep

const MarginalTransform& tdof_stiffness_transform() {
  static const MarginalTransform t = MarginalTransform::lognormal(2.5e5, 0.2);
  return t;
}

struct ModalTerm {
  double participation;  // first-mass component of the mass-normalised mode
  double omega;
  double omega_d;
  double sin_coeff;      // steady state A sin(Wt)
  double cos_coeff;      // steady state B cos(Wt)
  double transient_cos;  // C
  double transient_sin;  // E
};

std::array<ModalTerm, 2> tdof_modes(double k1, double k2) {
  if (!std::isfinite(k1) || !std::isfinite(k2) || !(k1 > 0.0) || !(k2 > 0.0)) {
    throw std::domain_error("tdof: stiffnesses must be finite and positive");
  }
  // Eigenproblem of M^-1 K with M = m I, K = [[k1 + k2, -k2], [-k2, k2]].
  const double a11 = (k1 + k2) / kTdofMass;
  const double a12 = -k2 / kTdofMass;
  const double a22 = k2 / kTdofMass;
  const double mean = 0.5 * (a11 + a22);
  const double radius = std::hypot(0.5 * (a11 - a22), a12);
  const std::array<double, 2> eigenvalues = {mean - radius, mean + radius};

  std::array<ModalTerm, 2> modes{};
  const double scale = 1.0 / std::sqrt(kTdofMass);
  for (int j = 0; j < 2; ++j) {
    const double lambda = eigenvalues[j];
    double v0 = a12;
    double v1 = lambda - a11;
    const double len = std::hypot(v0, v1);
    v0 /= len;
    v1 /= len;

    const double omega = std::sqrt(lambda);
    const double zeta = kTdofDamping;
    const double forcing = v1 * scale * kTdofForce;
    const double detuning = lambda - kTdofOmega * kTdofOmega;
    const double damping_term = 2.0 * zeta * omega * kTdofOmega;
    const double denom = detuning * detuning + damping_term * damping_term;

    ModalTerm& m = modes[j];
    m.participation = v0 * scale;
    m.omega = omega;
    m.omega_d = omega * std::sqrt(1.0 - zeta * zeta);
    m.sin_coeff = forcing * detuning / denom;
    m.cos_coeff = -forcing * damping_term / denom;
    // Zero displacement and velocity at t = 0.
    m.transient_cos = -m.cos_coeff;
    m.transient_sin = (zeta * omega * m.transient_cos - m.sin_coeff * kTdofOmega) / m.omega_d;
  }
  return modes;
}

double tdof_displacement_at(const std::array<ModalTerm, 2>& modes, double t) {
  double r = 0.0;
  for (const ModalTerm& m : modes) {
    const double decay = std::exp(-kTdofDamping * m.omega * t);
    r += m.participation *
         (decay * (m.transient_cos * std::cos(m.omega_d * t) +
                   m.transient_sin * std::sin(m.omega_d * t)) +
          m.sin_coeff * std::sin(kTdofOmega * t) + m.cos_coeff * std::cos(kTdofOmega * t));
  }
  return r;
}

constexpr double kVehicleSpeed = 1000.0;  // cm/s (10 m/s)

}  // namespace

// --- counted model --------------------------------------------------------

CountedModel::CountedModel(ModelPtr model) : model_(std::move(model)) {
  if (!model_) throw std::invalid_argument("CountedModel: null model");
  dim_ = model_->dim();
}

double CountedModel::evaluate(std::span<const double> x) const {
  counter_.increment();
  return model_->evaluate(x);
}

bool CountedModel::is_failure(std::span<const double> x) const {
  counter_.increment();
  return model_->is_failure(x);
}

// --- marginal transforms ----------------------------------------------------

MarginalTransform MarginalTransform::normal(double mean, double stddev) {
  return {Kind::normal, mean, stddev};
}

MarginalTransform MarginalTransform::lognormal(double mean, double cov) {
  const double zeta = std::sqrt(std::log1p(cov * cov));
  return {Kind::lognormal, std::log(mean) - 0.5 * zeta * zeta, zeta};
}

MarginalTransform MarginalTransform::gamma(double shape, double rate) {
  return {Kind::gamma_via_cdf, shape, rate};
}

double MarginalTransform::apply(double z) const {
  switch (kind) {
    case Kind::normal:
      return p1 + p2 * z;
    case Kind::lognormal:
      return std::exp(p1 + p2 * z);
    case Kind::gamma_via_cdf:
      return gamma_quantile_of_normal(z, p1, p2);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double gamma_quantile_of_normal(double z, double shape, double rate) {
  // Work on the smaller tail. Phi underflows below z ~ -38; the smallest
  // normal double stands in for it there.
  const double tail = std::max(normal_cdf(-std::abs(z)), std::numeric_limits<double>::min());
  const double unit = z > 0.0 ? inverse_regularized_gamma_q(shape, tail)
                              : inverse_regularized_gamma_p(shape, tail);
  return unit / rate;
}

// --- performance functions ----------------------------------------------------

double eval_piecewise_linear(std::span<const double> x) {
  require_dim(x, 2, "eval_piecewise_linear");
  const double g1 = x[0] > 3.5 ? 4.0 - x[0] : 0.85 - 0.1 * x[0];
  const double g2 = x[1] > 2.0 ? 0.5 - 0.1 * x[1] : 2.3 - x[1];
  return -std::min(g1, g2);
}

double eval_meatball(std::span<const double> x) {
  require_dim(x, 2, "eval_meatball");
  const double u1 = 4.0 * (x[0] + 2.0) * (x[0] + 2.0) / 9.0 + x[1] * x[1] / 25.0;
  const double u2 = (x[0] - 2.5) * (x[0] - 2.5) / 4.0 + (x[1] - 0.5) * (x[1] - 0.5) / 25.0;
  return -30.0 / (u1 * u1 + 1.0) - 20.0 / (u2 * u2 + 1.0) + 5.0;
}

double tdof_peak_bound(double k1, double k2) {
  const auto modes = tdof_modes(k1, k2);
  std::complex<double> steady{0.0, 0.0};
  double bound = 0.0;
  for (const ModalTerm& m : modes) {
    steady += m.participation * std::complex<double>(m.cos_coeff, -m.sin_coeff);
    bound += std::abs(m.participation) * std::hypot(m.transient_cos, m.transient_sin);
  }
  return bound + std::abs(steady);
}

double tdof_peak_displacement(double k1, double k2) {
  const auto modes = tdof_modes(k1, k2);

  // r1(t_i) = Re(sum_j p_j (C_j - i E_j) rho_j^i + S sigma^i)
  std::array<std::complex<double>, 2> transient{};
  std::array<std::complex<double>, 2> rotation{};
  std::complex<double> steady{0.0, 0.0};
  for (int j = 0; j < 2; ++j) {
    const ModalTerm& m = modes[j];
    transient[j] = m.participation * std::complex<double>(m.transient_cos, -m.transient_sin);
    rotation[j] = std::exp(std::complex<double>(-kTdofDamping * m.omega, m.omega_d) * kTdofStep);
    steady += m.participation * std::complex<double>(m.cos_coeff, -m.sin_coeff);
  }
  const std::complex<double> steady_rotation =
      std::exp(std::complex<double>(0.0, kTdofOmega * kTdofStep));

  double best = -std::numeric_limits<double>::infinity();
  int best_index = 0;
  double before_best = 0.0;
  double after_best = 0.0;
  double previous = 0.0;
  bool capture_next = false;
  for (int i = 0; i <= kTdofSteps; ++i) {
    const double r = (transient[0] + transient[1] + steady).real();
    if (capture_next) {
      after_best = r;
      capture_next = false;
    }
    if (r > best) {
      best = r;
      best_index = i;
      before_best = previous;
      capture_next = true;
    }
    previous = r;
    transient[0] *= rotation[0];
    transient[1] *= rotation[1];
    steady *= steady_rotation;
  }

  if (best_index > 0 && best_index < kTdofSteps) {
    const double curvature = before_best - 2.0 * best + after_best;
    if (curvature < 0.0) {
      const double offset = 0.5 * (before_best - after_best) / curvature;
      const double t = (best_index + std::clamp(offset, -1.0, 1.0)) * kTdofStep;
      best = std::max(best, tdof_displacement_at(modes, t));
    }
  }
  return best;
}

double eval_tdof(std::span<const double> x) {
  require_dim(x, 2, "eval_tdof");
  const auto& t = tdof_stiffness_transform();
  return tdof_peak_displacement(t.apply(x[0]), t.apply(x[1])) - kTdofThreshold;
}

double eval_vehicle(std::span<const double> x) {
  require_dim(x, 3, "eval_vehicle");
  constexpr double kRoughness = 1.0;  // A
  constexpr double kB0 = 0.27;
  constexpr double kBodyMass = 3.2633;   // M, kg s^2/cm
  constexpr double kGravity = 981.0;     // G, cm/s^2
  constexpr double kWheelMass = 0.8158;  // m, kg s^2/cm

  const double c = 424.0 + 10.0 * x[0];
  const double ck = 1480.0 + 10.0 * x[1];
  const double k = 47.0 + 10.0 * x[2];
  if (k == 0.0) return -std::numeric_limits<double>::infinity();

  const double prefactor = std::numbers::pi * kRoughness * kVehicleSpeed * kWheelMass /
                           (kB0 * kGravity * kGravity * k);
  const double mismatch = ck / (kBodyMass + kWheelMass) - c / kBodyMass;
  const double bracket = mismatch * mismatch + c * c / (kBodyMass * kWheelMass) +
                         ck * k * k / (kBodyMass * kBodyMass * kWheelMass);
  return 1.0 - prefactor * bracket;
}

double eval_portfolio(std::span<const double> x, std::size_t n, double b, double epsilon) {
  require_dim(x, n + 2, "eval_portfolio");
  constexpr double kCorrelation = 0.25;  // q
  const double idiosyncratic = 3.0 * std::sqrt(1.0 - kCorrelation * kCorrelation);
  const double shock = gamma_quantile_of_normal(x[1], 6.0, 6.0);
  const double inv_sqrt_shock = 1.0 / std::sqrt(shock);
  const double threshold = 0.5 * std::sqrt(static_cast<double>(n));

  std::size_t losses = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const double z = (kCorrelation * x[0] + idiosyncratic * x[j + 2]) * inv_sqrt_shock;
    if (z >= threshold) ++losses;
  }
  return static_cast<double>(losses) - b * static_cast<double>(n) - epsilon;
}

// --- model objects -------------------------------------------------------------

double PiecewiseLinearModel::evaluate(std::span<const double> x) const {
  return eval_piecewise_linear(x);
}

double MeatballModel::evaluate(std::span<const double> x) const { return eval_meatball(x); }

double TwoDofModel::evaluate(std::span<const double> x) const { return eval_tdof(x); }

bool TwoDofModel::is_failure(std::span<const double> x) const {
  require_dim(x, 2, "TwoDofModel::is_failure");
  const auto& t = tdof_stiffness_transform();
  const double k1 = t.apply(x[0]);
  const double k2 = t.apply(x[1]);
  if (tdof_peak_bound(k1, k2) < kTdofThreshold) return false;
  return tdof_peak_displacement(k1, k2) - kTdofThreshold >= 0.0;
}

double VehicleSuspensionModel::evaluate(std::span<const double> x) const {
  return eval_vehicle(x);
}

PortfolioLossModel::PortfolioLossModel(std::size_t obligors, double loss_fraction,
                                       double epsilon)
    : obligors_(obligors), loss_fraction_(loss_fraction), epsilon_(epsilon) {
  if (obligors == 0) throw std::invalid_argument("PortfolioLossModel: n must be positive");
}

std::string PortfolioLossModel::name() const {
  return "portfolio-" + std::to_string(obligors_);
}

double PortfolioLossModel::evaluate(std::span<const double> x) const {
  return eval_portfolio(x, obligors_, loss_fraction_, epsilon_);
}

HalfSpaceModel::HalfSpaceModel(std::size_t dim, double beta) : dim_(dim), beta_(beta) {
  if (dim == 0) throw std::invalid_argument("HalfSpaceModel: dimension must be positive");
}

double HalfSpaceModel::evaluate(std::span<const double> x) const {
  require_dim(x, dim_, "HalfSpaceModel");
  return x[0] - beta_;
}

LiftedModel::LiftedModel(ModelPtr base, std::size_t target_dim)
    : base_(std::move(base)), target_dim_(target_dim) {
  if (!base_) throw std::invalid_argument("LiftedModel: null base model");
  const std::size_t d = base_->dim();
  if (target_dim == 0 || target_dim % d != 0) {
    throw std::invalid_argument("lift_dimension: target dimension " + std::to_string(target_dim) +
                                " is not a positive multiple of " + std::to_string(d));
  }
  block_ = target_dim / d;
}

std::string LiftedModel::name() const {
  return base_->name() + "@" + std::to_string(target_dim_);
}

std::vector<double> LiftedModel::project(std::span<const double> x) const {
  require_dim(x, target_dim_, "LiftedModel");
  const double scale = 1.0 / std::sqrt(static_cast<double>(block_));
  std::vector<double> z(base_->dim(), 0.0);
  for (std::size_t i = 0; i < z.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < block_; ++j) s += x[i * block_ + j];
    z[i] = scale * s;
  }
  return z;
}

double LiftedModel::evaluate(std::span<const double> x) const {
  return base_->evaluate(project(x));
}

bool LiftedModel::is_failure(std::span<const double> x) const {
  return base_->is_failure(project(x));
}

ModelPtr lift_dimension(ModelPtr model, std::size_t target_dim) {
  if (!model) throw std::invalid_argument("lift_dimension: null model");
  if (target_dim == model->dim()) return model;
  return std::make_shared<LiftedModel>(std::move(model), target_dim);
}

ModelPtr make_model(const std::string& name, std::size_t lifted_dim) {
  ModelPtr base;
  if (name == "pwl") {
    base = std::make_shared<PiecewiseLinearModel>();
  } else if (name == "meatball") {
    base = std::make_shared<MeatballModel>();
  } else if (name == "tdof") {
    base = std::make_shared<TwoDofModel>();
  } else if (name == "vehicle") {
    base = std::make_shared<VehicleSuspensionModel>();
  } else if (name == "portfolio-30") {
    base = std::make_shared<PortfolioLossModel>(30, 0.45);
  } else if (name == "portfolio-100") {
    base = std::make_shared<PortfolioLossModel>(100, 0.25);
  } else if (name == "portfolio-250") {
    base = std::make_shared<PortfolioLossModel>(250, 0.25);
  } else if (name == "halfspace") {
    return std::make_shared<HalfSpaceModel>(lifted_dim == 0 ? 2 : lifted_dim, 3.0);
  } else {
    throw std::invalid_argument("unknown model '" + name + "'");
  }
  if (lifted_dim == 0) return base;
  return lift_dimension(std::move(base), lifted_dim);
}

std::vector<std::string> registered_models() {
  return {"pwl",          "meatball",      "tdof",          "vehicle",
          "portfolio-30", "portfolio-100", "portfolio-250", "halfspace"};
}

}  // namespace nis

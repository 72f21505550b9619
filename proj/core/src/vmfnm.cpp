#include "nis/vmfnm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "nis/special_functions.hpp"

namespace nis {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kUnitTolerance = 1e-12;

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

double log_nakagami_norm(double m, double omega) {
  return std::numbers::ln2 + m * std::log(m / omega) - log_gamma(m);
}

}  // namespace

void VmfnmParams::validate(double tolerance) const {
  require(!components.empty(), "vmfnm: mixture has no components");
  const std::size_t d = dim();
  require(d >= 2, "vmfnm: dimension must be at least 2");
  double total = 0.0;
  for (const auto& c : components) {
    require(c.mu.size() == d, "vmfnm: mean directions differ in dimension");
    require(c.pi >= 0.0 && c.pi <= 1.0, "vmfnm: weight outside [0, 1]");
    require(c.m >= 0.5, "vmfnm: Nakagami shape below 0.5");
    require(c.omega > 0.0, "vmfnm: Nakagami spread must be positive");
    require(c.kappa >= 0.0 && std::isfinite(c.kappa), "vmfnm: invalid concentration");
    require(std::abs(norm(c.mu) - 1.0) <= kUnitTolerance, "vmfnm: mean direction is not unit length");
    total += c.pi;
  }
  require(std::abs(total - 1.0) <= tolerance, "vmfnm: weights do not sum to one");
}

PosteriorMatrix PosteriorMatrix::one_hot(std::span<const std::size_t> labels, std::size_t cols) {
  PosteriorMatrix out(labels.size(), cols);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    require(labels[i] < cols, "one_hot: label out of range");
    out(i, labels[i]) = 1.0;
  }
  return out;
}

std::vector<double> PosteriorMatrix::column_sums() const {
  std::vector<double> sums(cols_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t k = 0; k < cols_; ++k) sums[k] += (*this)(i, k);
  return sums;
}

// --- densities ----------------------------------------------------------------

double log_vmf_normaliser(std::size_t dim, double kappa) {
  require(dim >= 2, "log_vmf_normaliser: dimension must be at least 2");
  require(kappa >= 0.0, "log_vmf_normaliser: negative concentration");
  if (kappa == 0.0) return log_uniform_sphere(dim);
  const double half = 0.5 * static_cast<double>(dim);
  return (half - 1.0) * std::log(kappa) - half * std::log(2.0 * std::numbers::pi) -
         log_bessel_i(half - 1.0, kappa);
}

double log_density_vmf(std::span<const double> a, std::span<const double> mu, double kappa) {
  require(a.size() == mu.size(), "log_density_vmf: dimension mismatch");
  require(std::abs(norm(a) - 1.0) <= kUnitTolerance && std::abs(norm(mu) - 1.0) <= kUnitTolerance,
          "log_density_vmf: directions must be unit vectors");
  return log_vmf_normaliser(mu.size(), kappa) + kappa * dot(mu, a);
}

double log_density_nakagami(double r, double m, double omega) {
  require(m >= 0.5 && omega > 0.0 && std::isfinite(omega), "log_density_nakagami: need m >= 0.5, omega > 0");
  require(r >= 0.0, "log_density_nakagami: negative radius");
  if (r == 0.0) return m == 0.5 ? log_nakagami_norm(m, omega) : kNegInf;
  return log_nakagami_norm(m, omega) + (2.0 * m - 1.0) * std::log(r) - (m / omega) * r * r;
}

MixtureDensity::MixtureDensity(const VmfnmParams& params) : params_(&params) {
  terms_.reserve(params.size());
  const std::size_t d = params.dim();
  for (const auto& c : params.components) {
    terms_.push_back({c.pi > 0.0 ? std::log(c.pi) : kNegInf, log_nakagami_norm(c.m, c.omega),
                      2.0 * c.m - 1.0, c.m / c.omega, log_vmf_normaliser(d, c.kappa), c.kappa});
  }
}

void MixtureDensity::component_log_densities(const PolarPoint& p, std::span<double> out) const {
  const double log_r = std::log(p.r);
  const double r2 = p.r * p.r;
  for (std::size_t k = 0; k < terms_.size(); ++k) {
    const Terms& t = terms_[k];
    if (t.log_weight == kNegInf) {
      out[k] = kNegInf;
      continue;
    }
    const double radial = t.log_radial_norm + t.radial_power * log_r - t.radial_rate * r2;
    const double angular = t.log_vmf_norm + t.kappa * dot(params_->components[k].mu, p.a);
    out[k] = t.log_weight + radial + angular;
  }
}

double MixtureDensity::log_density(const PolarPoint& p) const {
  std::vector<double> logs(terms_.size());
  component_log_densities(p, logs);
  return log_sum_exp(logs);
}

double MixtureDensity::log_density_and_posterior(const PolarPoint& p,
                                                 std::span<double> posterior_row) const {
  component_log_densities(p, posterior_row);
  const double total = log_sum_exp(posterior_row);
  if (total == kNegInf) {
    // Every component assigns zero density; fall back to the prior weights.
    for (std::size_t k = 0; k < terms_.size(); ++k)
      posterior_row[k] = params_->components[k].pi;
    return total;
  }
  for (double& v : posterior_row) v = std::exp(v - total);
  return total;
}

double log_density_mixture(const PolarPoint& p, const VmfnmParams& params) {
  return MixtureDensity(params).log_density(p);
}

// --- sampling -----------------------------------------------------------------

Vector sample_vmf(std::span<const double> mu, double kappa, RngStream& rng) {
  const std::size_t d = mu.size();
  require(d >= 2, "sample_vmf: dimension must be at least 2");
  if (kappa == 0.0) return sample_unit_vector(d, rng);

  const double dm1 = static_cast<double>(d - 1);
  const double b = dm1 / (2.0 * kappa + std::sqrt(4.0 * kappa * kappa + dm1 * dm1));
  const double x0 = (1.0 - b) / (1.0 + b);
  // 1 - x0^2 written without cancellation.
  const double one_minus_x0_sq = 4.0 * b / ((1.0 + b) * (1.0 + b));
  const double c = kappa * x0 + dm1 * std::log(one_minus_x0_sq);

  double w = 0.0;
  for (;;) {
    const double z = rng.beta(0.5 * dm1, 0.5 * dm1);
    w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
    const double u = rng.uniform();
    if (kappa * w + dm1 * std::log(1.0 - x0 * w) - c >= std::log(u)) break;
  }

  // Draw around e1, then reflect e1 onto mu.
  const Vector v = sample_unit_vector(d - 1, rng);
  const double s = std::sqrt(std::max(0.0, 1.0 - w * w));
  Vector y(d);
  y[0] = w;
  for (std::size_t i = 1; i < d; ++i) y[i] = s * v[i - 1];

  Vector u(mu.begin(), mu.end());
  for (double& ui : u) ui = -ui;
  u[0] += 1.0;
  const double uu = dot(u, u);
  if (uu > 1e-30) {
    const double scale = 2.0 * dot(u, y) / uu;
    for (std::size_t i = 0; i < d; ++i) y[i] -= scale * u[i];
  }
  return y;
}

double sample_nakagami(double m, double omega, RngStream& rng) {
  return std::sqrt(rng.gamma(m, omega / m));
}

std::vector<LabeledPoint> sample_mixture(const VmfnmParams& params, std::size_t n,
                                         RngStream& rng) {
  require(params.size() > 0, "sample_mixture: mixture has no components");
  std::vector<double> cumulative(params.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    acc += params.components[k].pi;
    cumulative[k] = acc;
  }
  std::vector<LabeledPoint> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.uniform() * acc;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    std::size_t k = static_cast<std::size_t>(it - cumulative.begin());
    if (k >= params.size()) k = params.size() - 1;
    // Never land on a zero-weight component through rounding.
    while (params.components[k].pi <= 0.0 && k > 0) --k;
    const VmfnComponent& c = params.components[k];
    LabeledPoint lp;
    lp.point.r = sample_nakagami(c.m, c.omega, rng);
    lp.point.a = sample_vmf(c.mu, c.kappa, rng);
    lp.component = k;
    out.push_back(std::move(lp));
  }
  return out;
}

// --- EM -----------------------------------------------------------------------

PosteriorMatrix posterior(std::span<const PolarPoint> points, const VmfnmParams& params) {
  MixtureDensity density(params);
  PosteriorMatrix gamma(points.size(), params.size());
  for (std::size_t i = 0; i < points.size(); ++i)
    density.log_density_and_posterior(points[i], gamma.row(i));
  return gamma;
}

namespace {

struct MStepResult {
  VmfnmParams params;
  std::vector<std::size_t> kept;  // columns of the input posterior that survived
};

MStepResult m_step(std::span<const PolarPoint> points, const PosteriorMatrix& gamma,
                   const VmfnmParams* previous, const EmOptions& opt) {
  const std::size_t n = points.size();
  const std::size_t d = points.front().dim();
  const double dd = static_cast<double>(d);
  MStepResult out;
  double total_mass = 0.0;

  for (std::size_t k = 0; k < gamma.cols(); ++k) {
    double mass = 0.0;
    double mu2 = 0.0;
    double mu4 = 0.0;
    Vector resultant(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double g = gamma(i, k);
      if (g == 0.0) continue;
      const PolarPoint& p = points[i];
      const double r2 = p.r * p.r;
      mass += g;
      mu2 += g * r2;
      mu4 += g * r2 * r2;
      for (std::size_t j = 0; j < d; ++j) resultant[j] += g * p.a[j];
    }
    if (mass < opt.empty_mass) continue;

    VmfnComponent c;
    c.pi = mass;
    const double length = norm(resultant);
    if (length > 0.0) {
      c.mu = resultant;
      for (double& v : c.mu) v /= length;
    } else if (previous != nullptr) {
      c.mu = previous->components[k].mu;
    } else {
      c.mu.assign(d, 0.0);
      c.mu[0] = 1.0;
    }
    const double rbar = std::min(length / mass, opt.resultant_cap);
    c.kappa = rbar * (dd - rbar * rbar) / (1.0 - rbar * rbar);

    mu2 /= mass;
    mu4 /= mass;
    c.omega = mu2;
    const double spread = mu4 - mu2 * mu2;
    double shape = spread > 0.0 ? mu2 * mu2 / spread : opt.max_shape;
    if (!(shape <= opt.max_shape)) shape = opt.max_shape;
    c.m = std::max(shape, opt.min_shape);

    total_mass += mass;
    out.params.components.push_back(std::move(c));
    out.kept.push_back(k);
  }
  if (out.params.components.empty())
    throw std::runtime_error("em_fit: every component lost its responsibility mass");
  for (auto& c : out.params.components) c.pi /= total_mass;
  return out;
}

double e_step(std::span<const PolarPoint> points, const VmfnmParams& params,
              PosteriorMatrix& gamma) {
  MixtureDensity density(params);
  gamma = PosteriorMatrix(points.size(), params.size());
  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i)
    total += density.log_density_and_posterior(points[i], gamma.row(i));
  return total / static_cast<double>(points.size());
}

}  // namespace

EmResult em_fit(std::span<const PolarPoint> points, const PosteriorMatrix& initial_posterior,
                const EmOptions& options) {
  require(!points.empty(), "em_fit: no samples");
  require(initial_posterior.rows() == points.size(), "em_fit: posterior row count mismatch");
  require(initial_posterior.cols() >= 1, "em_fit: posterior has no columns");
  require(options.max_iterations >= 1, "em_fit: iteration cap must be positive");
  const std::size_t d = points.front().dim();
  require(d >= 2, "em_fit: dimension must be at least 2");
  for (const auto& p : points) require(p.dim() == d && p.r > 0.0, "em_fit: malformed sample");

  EmResult result;
  result.origin.resize(initial_posterior.cols());
  for (std::size_t k = 0; k < result.origin.size(); ++k) result.origin[k] = k;

  PosteriorMatrix gamma = initial_posterior;
  VmfnmParams params;
  double previous_objective = 0.0;
  double best_objective = kNegInf;
  VmfnmParams best_params;
  PosteriorMatrix best_gamma;
  std::vector<std::size_t> best_origin;

  for (std::size_t iter = 1; iter <= options.max_iterations; ++iter) {
    MStepResult step = m_step(points, gamma, iter == 1 ? nullptr : &params, options);
    if (step.kept.size() != result.origin.size()) {
      std::vector<std::size_t> origin;
      std::size_t next_kept = 0;
      for (std::size_t k = 0; k < result.origin.size(); ++k) {
        if (next_kept < step.kept.size() && step.kept[next_kept] == k) {
          origin.push_back(result.origin[k]);
          ++next_kept;
        } else {
          result.dropped.push_back(result.origin[k]);
        }
      }
      result.origin = std::move(origin);
    }
    params = std::move(step.params);
    const double objective = e_step(points, params, gamma);
    result.objective_trace.push_back(objective);
    result.iterations = iter;

    if (objective > best_objective || best_params.components.empty()) {
      best_objective = objective;
      best_params = params;
      best_gamma = gamma;
      best_origin = result.origin;
    }
    if (iter > 1 &&
        std::abs(objective - previous_objective) < options.relative_tolerance * std::abs(objective)) {
      result.converged = true;
      break;
    }
    previous_objective = objective;
  }

  if (result.converged) {
    result.params = std::move(params);
    result.posterior = std::move(gamma);
  } else {
    result.params = std::move(best_params);
    result.posterior = std::move(best_gamma);
    result.origin = std::move(best_origin);
  }
  return result;
}

// --- importance-weighted corrections ------------------------------------------

std::vector<double> log_importance_ratios(std::span<const PolarPoint> points,
                                          const VmfnmParams& params) {
  MixtureDensity density(params);
  std::vector<double> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i)
    out[i] = log_std_normal_polar(points[i]) - density.log_density(points[i]);
  return out;
}

namespace {

// Weights exp(l_i - max l), so the largest is one. Throws when no weight is
// finite and positive.
std::vector<double> scaled_weights(std::span<const double> log_ratios) {
  double top = kNegInf;
  for (double v : log_ratios)
    if (!std::isnan(v)) top = std::max(top, v);
  if (!std::isfinite(top))
    throw std::runtime_error("importance weights are all zero or unbounded");
  std::vector<double> w(log_ratios.size());
  for (std::size_t i = 0; i < w.size(); ++i)
    w[i] = std::isnan(log_ratios[i]) ? 0.0 : std::exp(log_ratios[i] - top);
  return w;
}

std::vector<double> weighted_column_shares(std::span<const double> log_ratios,
                                           const PosteriorMatrix& gamma) {
  require(log_ratios.size() == gamma.rows(), "weight correction: size mismatch");
  const std::vector<double> w = scaled_weights(log_ratios);
  std::vector<double> shares(gamma.cols(), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    total += w[i];
    for (std::size_t k = 0; k < gamma.cols(); ++k) shares[k] += w[i] * gamma(i, k);
  }
  for (double& s : shares) s /= total;
  return shares;
}

}  // namespace

VmfnmParams weight_correction(std::span<const double> log_ratios, const VmfnmParams& params,
                              const PosteriorMatrix& posterior) {
  require(posterior.cols() == params.size(), "weight_correction: column count mismatch");
  const std::vector<double> shares = weighted_column_shares(log_ratios, posterior);
  VmfnmParams out = params;
  for (std::size_t k = 0; k < out.size(); ++k) out.components[k].pi = shares[k];
  return out;
}

VmfnmParams weight_correction(std::span<const PolarPoint> points, const VmfnmParams& params,
                              const PosteriorMatrix& posterior) {
  return weight_correction(log_importance_ratios(points, params), params, posterior);
}

std::vector<double> chain_weights(std::span<const double> log_ratios,
                                  const PosteriorMatrix& membership) {
  return weighted_column_shares(log_ratios, membership);
}

std::vector<double> chain_weights(std::span<const PolarPoint> points,
                                  const PosteriorMatrix& membership, const VmfnmParams& params) {
  return chain_weights(log_importance_ratios(points, params), membership);
}

}  // namespace nis

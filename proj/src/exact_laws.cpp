#include "sbp/exact_laws.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "sbp/quadrature.hpp"

namespace sbp {

namespace {

constexpr double kLogTiny = -745.0;

double log_f_nk(unsigned n, unsigned k, double u) {
  // log n + log C(n-1, k-1) + (n-k) log u + (k-1) log(1-u)
  const double logc = std::log(static_cast<double>(n)) + std::lgamma(static_cast<double>(n)) -
                      std::lgamma(static_cast<double>(k)) -
                      std::lgamma(static_cast<double>(n - k + 1));
  double acc = logc;
  if (n != k) acc += (n - k) * std::log(u);
  if (k != 1) acc += (k - 1) * std::log1p(-u);
  return acc;
}

void check_nk(unsigned n, unsigned k) {
  if (n == 0 || k == 0 || k > n)
    throw std::domain_error("order-statistic density: need 1 <= k <= n");
}

}  // namespace

double f_nk_density(unsigned n, unsigned k, double u) {
  check_nk(n, k);
  if (u < 0.0 || u > 1.0) return 0.0;
  if (u == 0.0) return k == n ? static_cast<double>(n) : 0.0;
  if (u == 1.0) return k == 1 ? static_cast<double>(n) : 0.0;
  const double l = log_f_nk(n, k, u);
  return l < kLogTiny ? 0.0 : std::exp(l);
}

double marginal_density(const DistributionModel& model, unsigned n, unsigned k,
                        double x) {
  check_nk(n, k);
  if (!model.has_density())
    throw capability_error("marginal_density: " + model.name() + " has no density");
  if (!(x > 0.0)) return 0.0;
  const double fx = model.density(x);
  if (!(fx > 0.0)) return 0.0;

  const double ystar = model.laplace_inv(0.5);
  const auto log_integrand = [&](double y) {
    const double u = model.laplace(y);
    if (u <= 0.0 || u >= 1.0) {
      // phi(0) = 1 exactly; the u = 1 endpoint carries density only for k = 1
      if (u >= 1.0 && k == 1) return log_f_nk(n, k, 1.0 - 1e-16) - x * y;
      return -std::numeric_limits<double>::infinity();
    }
    return log_f_nk(n, k, u) - x * y;
  };

  // Probe for the maximum so the shifted integrand is O(1).
  double peak = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 32; ++i)
    peak = std::max(peak, log_integrand(ystar * i / 32.0));
  for (double y = ystar; ; y *= 2.0) {
    const double l = log_integrand(y);
    peak = std::max(peak, l);
    if ((l < peak - 60.0 && y > ystar * 4.0) || y > 1e12) break;
  }
  if (peak == -std::numeric_limits<double>::infinity()) return 0.0;

  const auto shifted = [&](double y) {
    const double l = log_integrand(y) - peak;
    return l < kLogTiny ? 0.0 : std::exp(l);
  };
  const double integral = integrate_semi_infinite(shifted, 0.0, ystar);
  if (!(integral > 0.0)) return 0.0;
  const double log_result = std::log(x) + std::log(fx) + peak + std::log(integral);
  return log_result < kLogTiny ? 0.0 : std::exp(log_result);
}

double joint_density_first_k(const DistributionModel& model, unsigned n, unsigned k,
                             const std::vector<double>& x) {
  check_nk(n, k);
  if (x.size() != k)
    throw std::invalid_argument("joint_density_first_k: x must have k entries");
  if (!model.has_density())
    throw capability_error("joint_density_first_k: " + model.name() + " has no density");
  for (double v : x)
    if (!(v > 0.0)) return 0.0;

  // tail sums c_j = x_j + ... + x_k
  std::vector<double> tail(k);
  double acc = 0.0;
  for (std::size_t j = k; j-- > 0;) {
    acc += x[j];
    tail[j] = acc;
  }

  double log_pref = std::lgamma(static_cast<double>(n) + 1.0) -
                    std::lgamma(static_cast<double>(n - k) + 1.0);
  for (double v : x) {
    const double fv = model.density(v);
    if (!(fv > 0.0)) return 0.0;
    log_pref += std::log(v) + std::log(fv);
  }

  double integral;
  if (k == n) {
    double log_prod = 0.0;
    for (double c : tail) log_prod -= std::log(c);
    integral = std::exp(log_prod);
  } else {
    if (!model.has_convolution_density())
      throw capability_error("joint_density_first_k: " + model.name() +
                             " has no convolution densities");
    const unsigned m = n - k;
    const auto f = [&](double s) {
      const double nu = model.convolution_density(m, s);
      if (!(nu > 0.0)) return 0.0;
      double prod = nu;
      for (double c : tail) prod /= (c + s);
      return prod;
    };
    const double split = std::max(m * model.mean(), 1e-3);
    integral = integrate_semi_infinite(f, 0.0, split);
  }
  const double log_result = log_pref + std::log(integral);
  return log_result < kLogTiny ? 0.0 : std::exp(log_result);
}

double SuccessiveLaw::density_ratio(double x) const { return std::exp(-x * y) / u; }

double SuccessiveLaw::fu_density(double x) const {
  return density_ratio(x) * model->density(x);
}

double SuccessiveLaw::fu_cdf(double x) const {
  if (!(x > 0.0)) return 0.0;
  if (gamma_params)
    return boost::math::gamma_p(gamma_params->a, (gamma_params->rate + y) * x);
  return fu_cdf_by_quadrature(*model, u, x);
}

double SuccessiveLaw::gu_density(double x) const {
  return x * fu_density(x) / mu_u;
}

double SuccessiveLaw::gu_mean() const {
  if (gamma_params) return (gamma_params->a + 1.0) / (gamma_params->rate + y);
  return gu_mean_by_quadrature(*model, u);
}

double SuccessiveLaw::gu_variance() const {
  if (gamma_params) {
    const double scale = 1.0 / (gamma_params->rate + y);
    return (gamma_params->a + 1.0) * scale * scale;
  }
  return gu_variance_by_quadrature(*model, u);
}

SuccessiveLaw successive_law(const DistributionModel& model, double u) {
  if (!(u > 0.0) || u > 1.0)
    throw std::domain_error("successive_law: u must lie in (0, 1]");
  SuccessiveLaw law;
  law.u = u;
  law.y = model.laplace_inv(u);
  law.mu_u = -model.laplace_deriv(law.y) / u;
  law.model = &model;
  if (const auto* g = dynamic_cast<const GammaModel*>(&model))
    law.gamma_params = TailPower{g->shape(), g->rate()};
  return law;
}

double fu_cdf_by_quadrature(const DistributionModel& model, double u, double x) {
  if (!model.has_density())
    throw capability_error("fu_cdf: " + model.name() + " has no density");
  if (!(x > 0.0)) return 0.0;
  const double y = model.laplace_inv(u);
  const auto f = [&](double t) { return std::exp(-t * y) * model.density(t) / u; };
  return integrate_singular(f, 0.0, x);
}

double gu_mean_by_quadrature(const DistributionModel& model, double u) {
  if (!model.has_density())
    throw capability_error("gu_mean: " + model.name() + " has no density");
  const double y = model.laplace_inv(u);
  const double mu = -model.laplace_deriv(y) / u;
  const auto f = [&](double t) {
    return t * t * std::exp(-t * y) * model.density(t) / (u * mu);
  };
  return integrate_semi_infinite(f, 0.0, std::max(model.mean(), 1e-3));
}

double gu_variance_by_quadrature(const DistributionModel& model, double u) {
  if (!model.has_density())
    throw capability_error("gu_variance: " + model.name() + " has no density");
  const double y = model.laplace_inv(u);
  const double mu = -model.laplace_deriv(y) / u;
  const double mean = gu_mean_by_quadrature(model, u);
  const auto f = [&](double t) {
    return t * t * t * std::exp(-t * y) * model.density(t) / (u * mu);
  };
  const double second = integrate_semi_infinite(f, 0.0, std::max(model.mean(), 1e-3));
  return second - mean * mean;
}

double integral_gu_mean(const DistributionModel& model, double u) {
  const auto f = [&](double s) { return successive_law(model, s).gu_mean(); };
  return integrate_singular(f, 0.0, u);
}

double integral_gu_variance(const DistributionModel& model, double u) {
  const auto f = [&](double s) { return successive_law(model, s).gu_variance(); };
  return integrate_singular(f, 0.0, u);
}

MeanFunctionReport mean_function_m(const DistributionModel& model, double u) {
  const SuccessiveLaw law = successive_law(model, u);
  MeanFunctionReport r{};
  r.integral_of_gu_means = integral_gu_mean(model, u);
  r.u_times_mu = u * law.mu_u;
  r.mu_alone = law.mu_u;
  return r;
}

IntegralIdentityReport integral_identity_residual(const DistributionModel& model,
                                                  double u,
                                                  const std::vector<double>& x_grid) {
  if (!model.has_density())
    throw capability_error("integral_identity_residual: " + model.name() +
                           " has no density");
  if (!(u > 0.0) || u > 1.0)
    throw std::domain_error("integral_identity_residual: u must lie in (0, 1]");
  IntegralIdentityReport rep{0.0, 0.0};
  const SuccessiveLaw law_u = successive_law(model, u);
  for (double x : x_grid) {
    if (!(x > 0.0)) throw std::domain_error("integral_identity_residual: x must be positive");
    const double fx = model.density(x);
    const auto g_s = [&](double s) {
      const double ys = model.laplace_inv(s);
      // density of G_s at x: x e^{-x y_s} f(x) / (-phi'(y_s)).  The numerator
      // decays exponentially in y_s while -phi' decays at worst polynomially,
      // so once e^{-x y_s} underflows the ratio is zero; skip the division
      // before -phi' underflows too and turns the quotient into NaN.
      const double num = std::exp(-x * ys);
      if (num == 0.0) return 0.0;
      const double dphi = model.laplace_deriv(ys);
      return x * num * fx / (-dphi);
    };
    const double lhs = integrate_singular(g_s, 0.0, u);
    const double rhs_base = law_u.density_ratio(x) * fx;  // f(u,x) f(x)
    rep.residual_c_one = std::max(rep.residual_c_one, std::abs(lhs - rhs_base));
    rep.residual_c_u = std::max(rep.residual_c_u, std::abs(lhs - u * rhs_base));
  }
  return rep;
}

OdeResidualReport evolution_ode_residual(const DistributionModel& model, double u,
                                         double x) {
  if (!(u > 0.0) || u >= 1.0)
    throw std::domain_error("evolution_ode_residual: u must lie in (0, 1)");
  const double h = 1e-5 * u;
  const auto uf = [&](double s) {
    // u f(u,x) = e^{-x phi^{-1}(u)}
    return std::exp(-x * model.laplace_inv(s));
  };
  const double d = (uf(u + h) - uf(u - h)) / (2.0 * h);
  const SuccessiveLaw law = successive_law(model, u);
  const double rhs = x * law.density_ratio(x) / law.mu_u;
  OdeResidualReport rep{};
  rep.derivative = d;
  rep.residual_plus = std::abs(d - rhs);
  rep.residual_minus = std::abs(d + rhs);
  return rep;
}

}  // namespace sbp

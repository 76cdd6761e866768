#pragma once

#include <optional>
#include <vector>

#include "sbp/distribution.hpp"

namespace sbp {

// Density at u of the k-th LARGEST of n i.i.d. uniforms:
//   n * C(n-1, k-1) * u^{n-k} * (1-u)^{k-1}.
// Evaluated in the log domain, so it stays finite for large n.
double f_nk_density(unsigned n, unsigned k, double u);

// Marginal density of the k-th pick of a size-biased permutation of n i.i.d.
// draws:  x f(x) * int_0^inf e^{-xy} f_{n,k}(phi(y)) dy.
// Quadrature splits at y* = phi^{-1}(1/2) with an exponential tail transform;
// the integrand is rescaled by its probed maximum so large-n evaluation stays
// in range; underflow (below e^{-745}) returns 0.
double marginal_density(const DistributionModel& model, unsigned n, unsigned k,
                        double x);

// Joint density of the first k picks (x_1, ..., x_k):
//   n!/(n-k)! * prod_j x_j f(x_j) * int_0^inf nu_{n-k}(s) prod_j (x_j + ... + x_k + s)^{-1} ds,
// with the k = n convention that the integral collapses to s = 0.
double joint_density_first_k(const DistributionModel& model, unsigned n, unsigned k,
                             const std::vector<double>& x);

// The successive-sampling law F_u (dF_u/dF = e^{-x phi^{-1}(u)} / u) and its
// size-biased companion G_u (dG_u = x dF_u / mu_u). mu_u = -phi'(y)/u is the
// mean of F_u. Closed forms are used for gamma models (F_u = gamma(a, rate + y),
// G_u = gamma(a+1, rate + y)); anything else goes through quadrature.
struct SuccessiveLaw {
  double u = 1.0;
  double y = 0.0;     // phi^{-1}(u)
  double mu_u = 0.0;  // -phi'(y)/u
  const DistributionModel* model = nullptr;

  double density_ratio(double x) const;  // f(u, x) = e^{-xy}/u
  double fu_density(double x) const;
  double fu_cdf(double x) const;
  double gu_density(double x) const;
  double gu_mean() const;
  double gu_variance() const;

  std::optional<TailPower> gamma_params;  // set when the model is gamma
};

SuccessiveLaw successive_law(const DistributionModel& model, double u);

// Quadrature-only versions, kept separate so tests can pin the closed forms
// against the generic path.
double fu_cdf_by_quadrature(const DistributionModel& model, double u, double x);
double gu_mean_by_quadrature(const DistributionModel& model, double u);
double gu_variance_by_quadrature(const DistributionModel& model, double u);

// int_0^u mean(G_s) ds and int_0^u var(G_s) ds: the centering and variance
// profile of the partial-sum process of the reversed permutation.
double integral_gu_mean(const DistributionModel& model, double u);
double integral_gu_variance(const DistributionModel& model, double u);

// The three candidate readings of the mean function m(u); the first is the
// self-consistent one and the first two agree identically.
struct MeanFunctionReport {
  double integral_of_gu_means;  // int_0^u mean(G_s) ds
  double u_times_mu;            // u * mu_u
  double mu_alone;              // mu_u
};

MeanFunctionReport mean_function_m(const DistributionModel& model, double u);

// Residuals of int_0^u g_s(x) ds = c * f(u,x) f(x) for both normalizations
// c = 1 and c = u, maximized over the probe grid. Exactly one candidate is
// expected to vanish (c = u).
struct IntegralIdentityReport {
  double residual_c_one;
  double residual_c_u;
};

IntegralIdentityReport integral_identity_residual(const DistributionModel& model,
                                                  double u,
                                                  const std::vector<double>& x_grid);

// Residuals of the evolution identity d/du [u f(u,x)] = sign * x f(u,x)/mu_u
// for sign in {+, -}; derivative by central difference with h = 1e-5 * u.
// Exactly one candidate is expected to vanish (+).
struct OdeResidualReport {
  double residual_plus;
  double residual_minus;
  double derivative;  // the finite-difference value itself
};

OdeResidualReport evolution_ode_residual(const DistributionModel& model, double u,
                                         double x);

}  // namespace sbp

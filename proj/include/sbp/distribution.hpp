#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sbp/random.hpp"

namespace sbp {

// Thrown when an operation needs a capability the model does not have
// (e.g. a density for an atomic distribution, or k-fold convolution
// densities outside the gamma family).
class capability_error : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Tail behaviour F(x) ~ rate^a x^a / Gamma(a+1) as x -> 0, equivalently
// laplace(y) ~ rate^a / y^a as y -> infinity. Carried by models for which
// the small-value power is known; it drives the coupling limit objects.
struct TailPower {
  double a;
  double rate;
};

// A positive distribution exposed through the quantities the samplers and
// exact laws need: density/cdf/quantile, the Laplace transform phi and its
// derivative and inverse, the mean, and (when available) k-fold convolution
// densities.
class DistributionModel {
 public:
  virtual ~DistributionModel() = default;

  virtual std::string name() const = 0;

  virtual bool has_density() const { return false; }
  virtual double density(double /*x*/) const {
    throw capability_error(name() + " has no density");
  }

  virtual double cdf(double x) const = 0;
  virtual double quantile(double p) const = 0;

  // phi(y) = E exp(-yX) and phi'(y); y >= 0 always valid.
  virtual double laplace(double y) const = 0;
  virtual double laplace_deriv(double y) const = 0;

  // phi^{-1}(u) for u in (0,1]; default is the numeric bracketing inversion.
  virtual double laplace_inv(double u) const;

  virtual double mean() const = 0;

  virtual bool has_convolution_density() const { return false; }
  // Density of the k-fold i.i.d. sum at s.
  virtual double convolution_density(unsigned /*k*/, double /*s*/) const {
    throw capability_error(name() + " has no convolution densities");
  }

  virtual std::optional<TailPower> tail_power() const { return std::nullopt; }

  // One draw. Default is the quantile transform; models may override with a
  // dedicated sampler (the gamma model does).
  virtual double sample(RandomStream& rng) const { return quantile(rng.uniform01()); }
};

// Numeric inversion of phi: doubling upper bracket, then bisection until
// |phi(y) - u| <= 1e-12 * u. Errors on u <= 0 or u > 1; u = 1 maps to 0.
double laplace_inv_numeric(const DistributionModel& model, double u);

// n i.i.d. draws via model.sample().
std::vector<double> sample_iid(const DistributionModel& model, std::size_t n,
                               RandomStream& rng);

class GammaModel : public DistributionModel {
 public:
  GammaModel(double shape, double rate);

  std::string name() const override;
  bool has_density() const override { return true; }
  double density(double x) const override;
  double log_density(double x) const;
  double cdf(double x) const override;
  double quantile(double p) const override;
  double laplace(double y) const override;
  double laplace_deriv(double y) const override;
  double laplace_inv(double u) const override;
  double mean() const override;
  double variance() const;
  bool has_convolution_density() const override { return true; }
  double convolution_density(unsigned k, double s) const override;
  std::optional<TailPower> tail_power() const override;
  double sample(RandomStream& rng) const override;

  double shape() const { return shape_; }
  double rate() const { return rate_; }

 private:
  double shape_;
  double rate_;
};

class DiscreteModel : public DistributionModel {
 public:
  // Atoms as (value, weight); values positive and distinct, weights positive
  // and summing to 1 within 1e-9.
  explicit DiscreteModel(std::vector<std::pair<double, double>> atoms);

  std::string name() const override;
  double cdf(double x) const override;
  double quantile(double p) const override;
  double laplace(double y) const override;
  double laplace_deriv(double y) const override;
  double mean() const override;
  double sample(RandomStream& rng) const override;

  const std::vector<std::pair<double, double>>& atoms() const { return atoms_; }

 private:
  std::vector<std::pair<double, double>> atoms_;
};

// Parses "gamma:a=2,rate=1" or "discrete:1@0.5,2@0.5". Parse errors name the
// offending token.
std::unique_ptr<DistributionModel> parse_model_spec(const std::string& spec);

}  // namespace sbp

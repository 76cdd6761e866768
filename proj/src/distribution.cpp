#include "sbp/distribution.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace sbp {

double DistributionModel::laplace_inv(double u) const {
  return laplace_inv_numeric(*this, u);
}

double laplace_inv_numeric(const DistributionModel& model, double u) {
  if (!(u > 0.0) || u > 1.0)
    throw std::domain_error("laplace_inv: u must lie in (0, 1], got " + std::to_string(u));
  if (u == 1.0) return 0.0;
  // phi is strictly decreasing from phi(0)=1; double the bracket until it
  // straddles u, then bisect.
  double hi = 1.0;
  while (model.laplace(hi) > u) {
    hi *= 2.0;
    if (hi > 1e300) throw std::runtime_error("laplace_inv: bracket overflow");
  }
  double lo = hi * 0.5 >= 1.0 ? hi * 0.5 : 0.0;
  const double tol = 1e-12 * u;
  for (int it = 0; it < 500; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double v = model.laplace(mid);
    if (std::abs(v - u) <= tol) return mid;
    (v > u ? lo : hi) = mid;
    if (hi - lo <= 1e-16 * (1.0 + mid)) return mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<double> sample_iid(const DistributionModel& model, std::size_t n,
                               RandomStream& rng) {
  std::vector<double> out(n);
  for (auto& x : out) x = model.sample(rng);
  return out;
}

GammaModel::GammaModel(double shape, double rate) : shape_(shape), rate_(rate) {
  if (!(shape > 0.0)) throw std::invalid_argument("gamma: shape must be positive");
  if (!(rate > 0.0)) throw std::invalid_argument("gamma: rate must be positive");
}

std::string GammaModel::name() const {
  std::ostringstream os;
  os << "gamma(a=" << shape_ << ",rate=" << rate_ << ")";
  return os.str();
}

double GammaModel::log_density(double x) const {
  if (!(x > 0.0)) return -std::numeric_limits<double>::infinity();
  return shape_ * std::log(rate_) + (shape_ - 1.0) * std::log(x) - rate_ * x -
         std::lgamma(shape_);
}

double GammaModel::density(double x) const {
  if (!(x > 0.0)) {
    if (x == 0.0 && shape_ < 1.0) return std::numeric_limits<double>::infinity();
    if (x == 0.0 && shape_ == 1.0) return rate_;
    return 0.0;
  }
  const double l = log_density(x);
  return l < -745.0 ? 0.0 : std::exp(l);
}

double GammaModel::cdf(double x) const {
  if (!(x > 0.0)) return 0.0;
  return boost::math::gamma_p(shape_, rate_ * x);
}

double GammaModel::quantile(double p) const {
  if (p < 0.0 || p >= 1.0) {
    if (p == 0.0) return 0.0;
    throw std::domain_error("gamma quantile: p must lie in [0, 1)");
  }
  return boost::math::gamma_p_inv(shape_, p) / rate_;
}

double GammaModel::laplace(double y) const {
  if (!(y > -rate_)) throw std::domain_error("gamma laplace: y must exceed -rate");
  return std::pow(rate_ / (rate_ + y), shape_);
}

double GammaModel::laplace_deriv(double y) const {
  return -shape_ / (rate_ + y) * laplace(y);
}

double GammaModel::laplace_inv(double u) const {
  if (!(u > 0.0) || u > 1.0)
    throw std::domain_error("laplace_inv: u must lie in (0, 1], got " + std::to_string(u));
  return rate_ * (std::pow(u, -1.0 / shape_) - 1.0);
}

double GammaModel::mean() const { return shape_ / rate_; }

double GammaModel::variance() const { return shape_ / (rate_ * rate_); }

double GammaModel::convolution_density(unsigned k, double s) const {
  if (k == 0) throw std::domain_error("convolution_density: k must be >= 1");
  if (!(s > 0.0)) return 0.0;
  const double ka = k * shape_;
  const double l = ka * std::log(rate_) + (ka - 1.0) * std::log(s) - rate_ * s -
                   std::lgamma(ka);
  return l < -745.0 ? 0.0 : std::exp(l);
}

std::optional<TailPower> GammaModel::tail_power() const {
  return TailPower{shape_, rate_};
}

double GammaModel::sample(RandomStream& rng) const {
  return rng.gamma(shape_, rate_);
}

DiscreteModel::DiscreteModel(std::vector<std::pair<double, double>> atoms)
    : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw std::invalid_argument("discrete: needs at least one atom");
  std::sort(atoms_.begin(), atoms_.end());
  double total = 0.0;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    const auto& [v, w] = atoms_[i];
    if (!(v > 0.0)) throw std::invalid_argument("discrete: atom values must be positive");
    if (!(w > 0.0)) throw std::invalid_argument("discrete: atom weights must be positive");
    if (i > 0 && v == atoms_[i - 1].first)
      throw std::invalid_argument("discrete: atom values must be distinct");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument("discrete: weights must sum to 1, got " + std::to_string(total));
}

std::string DiscreteModel::name() const {
  std::ostringstream os;
  os << "discrete(";
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    if (i) os << ",";
    os << atoms_[i].first << "@" << atoms_[i].second;
  }
  os << ")";
  return os.str();
}

double DiscreteModel::cdf(double x) const {
  double acc = 0.0;
  for (const auto& [v, w] : atoms_) {
    if (v <= x) acc += w;
    else break;
  }
  return acc;
}

double DiscreteModel::quantile(double p) const {
  if (p < 0.0 || p > 1.0) throw std::domain_error("discrete quantile: p outside [0, 1]");
  double acc = 0.0;
  for (const auto& [v, w] : atoms_) {
    acc += w;
    if (acc >= p) return v;
  }
  return atoms_.back().first;
}

double DiscreteModel::laplace(double y) const {
  double acc = 0.0;
  for (const auto& [v, w] : atoms_) acc += w * std::exp(-y * v);
  return acc;
}

double DiscreteModel::laplace_deriv(double y) const {
  double acc = 0.0;
  for (const auto& [v, w] : atoms_) acc -= w * v * std::exp(-y * v);
  return acc;
}

double DiscreteModel::mean() const {
  double acc = 0.0;
  for (const auto& [v, w] : atoms_) acc += w * v;
  return acc;
}

double DiscreteModel::sample(RandomStream& rng) const {
  const double u = rng.uniform01();
  double acc = 0.0;
  for (const auto& [v, w] : atoms_) {
    acc += w;
    if (u <= acc) return v;
  }
  return atoms_.back().first;
}

namespace {

double parse_number(const std::string& token, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(token, &pos);
    if (pos != token.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("model spec: cannot parse " + what + " from token '" +
                                token + "'");
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(cur);
  return parts;
}

}  // namespace

std::unique_ptr<DistributionModel> parse_model_spec(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string body = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (kind == "gamma") {
    double a = std::numeric_limits<double>::quiet_NaN();
    double rate = std::numeric_limits<double>::quiet_NaN();
    for (const auto& part : split(body, ',')) {
      const auto eq = part.find('=');
      if (eq == std::string::npos)
        throw std::invalid_argument("model spec: expected key=value, got token '" + part + "'");
      const std::string key = part.substr(0, eq);
      const std::string val = part.substr(eq + 1);
      if (key == "a") a = parse_number(val, "gamma shape");
      else if (key == "rate" || key == "lambda") rate = parse_number(val, "gamma rate");
      else throw std::invalid_argument("model spec: unknown gamma key in token '" + part + "'");
    }
    if (std::isnan(a)) throw std::invalid_argument("model spec: gamma needs token 'a=...'");
    if (std::isnan(rate)) throw std::invalid_argument("model spec: gamma needs token 'rate=...'");
    return std::make_unique<GammaModel>(a, rate);
  }
  if (kind == "discrete") {
    std::vector<std::pair<double, double>> atoms;
    for (const auto& part : split(body, ',')) {
      const auto at = part.find('@');
      if (at == std::string::npos)
        throw std::invalid_argument("model spec: expected value@weight, got token '" + part + "'");
      atoms.emplace_back(parse_number(part.substr(0, at), "atom value"),
                         parse_number(part.substr(at + 1), "atom weight"));
    }
    return std::make_unique<DiscreteModel>(std::move(atoms));
  }
  throw std::invalid_argument("model spec: unknown model kind '" + kind + "'");
}

}  // namespace sbp

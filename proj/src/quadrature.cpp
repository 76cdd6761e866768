#include "sbp/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <stdexcept>

namespace sbp {

namespace {
boost::math::quadrature::tanh_sinh<double>& tanh_sinh_instance() {
  // node tables are cached inside the integrator; one per thread
  thread_local boost::math::quadrature::tanh_sinh<double> integrator(15);
  return integrator;
}
}  // namespace

double integrate(const std::function<double(double)>& f, double lo, double hi,
                 const QuadratureOptions& opts) {
  if (!(lo <= hi)) throw std::invalid_argument("integrate: lo > hi");
  if (lo == hi) return 0.0;
  double error = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      f, lo, hi, opts.max_levels, opts.rel_tol, &error);
}

double integrate_singular(const std::function<double(double)>& f, double lo,
                          double hi, const QuadratureOptions& opts) {
  if (!(lo <= hi)) throw std::invalid_argument("integrate_singular: lo > hi");
  if (lo == hi) return 0.0;
  double error = 0.0, l1 = 0.0;
  return tanh_sinh_instance().integrate(f, lo, hi, opts.rel_tol, &error, &l1);
}

double integrate_semi_infinite(const std::function<double(double)>& f,
                               double lo, double split,
                               const QuadratureOptions& opts) {
  if (!(split > lo)) throw std::invalid_argument("integrate_semi_infinite: split <= lo");
  const double bulk = integrate(f, lo, split, opts);
  const auto tail = [&](double v) {
    const double y = split - std::log1p(-v);
    return f(y) / (1.0 - v);
  };
  return bulk + integrate_singular(tail, 0.0, 1.0, opts);
}

}  // namespace sbp

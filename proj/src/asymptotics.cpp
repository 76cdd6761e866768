#include "sbp/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/special_functions/gamma.hpp>

#include "sbp/quadrature.hpp"

namespace sbp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_shape(double a) {
  if (!(a > 0.0) || !(a <= 100.0))
    throw std::invalid_argument("shape parameter a must be in (0, 100]");
}

// Mass of the region (0, s) x (T, inf) under the pair-process mean measure.
// With x0 = (Gamma(a+1) s / T)^(1/a) the closed form is
//   s (1 - exp(-x0)) - T P(a+1, x0),
// where P is the regularized lower incomplete gamma function.
double strip_mass(double a, double s, double T) {
  if (!(s > 0.0)) return 0.0;
  if (std::isinf(s)) return kInf;
  if (!(T > 0.0)) return s;
  if (std::isinf(T)) return 0.0;
  const double g1 = boost::math::tgamma(a + 1.0);
  const double x0 = std::pow(g1 * s / T, 1.0 / a);
  return s * (-std::expm1(-x0)) - T * boost::math::gamma_p(a + 1.0, x0);
}

// Mass of (0, s) x (t0, t1); s may be infinite, and so may t1.
double mass_below(double a, double s, double t0, double t1) {
  if (std::isinf(s)) return t1 - t0;  // the t-marginal is Lebesgue
  return strip_mass(a, s, t0) - strip_mass(a, s, t1);
}

}  // namespace

double mu_density(double a, double s, double t) {
  check_shape(a);
  if (!(s > 0.0) || !(t > 0.0))
    throw std::domain_error("mu_density needs s > 0 and t > 0");
  const double g1 = boost::math::tgamma(a + 1.0);
  const double x0 = std::pow(g1 * s / t, 1.0 / a);
  return (1.0 / a) * std::pow(g1, 1.0 / a) * std::pow(s / t, 1.0 / a) *
         std::exp(-x0);
}

double mu_intensity(double a, double s, double t) {
  return mu_density(a, s, t) / t;
}

double rect_mass(double a, double s0, double s1, double t0, double t1) {
  check_shape(a);
  if (!(s0 >= 0.0) || !(s1 > s0) || !(t0 >= 0.0) || !(t1 > t0))
    throw std::domain_error("rect_mass needs 0 <= s0 < s1 and 0 <= t0 < t1");
  if (std::isinf(s1) && std::isinf(t1)) return kInf;
  return mass_below(a, s1, t0, t1) - mass_below(a, s0, t0, t1);
}

double rect_mass_by_quadrature(double a, double s0, double s1, double t0,
                               double t1) {
  check_shape(a);
  if (!(s0 >= 0.0) || !(s1 > s0) || !(t0 >= 0.0) || !(t1 > t0) ||
      std::isinf(t1))
    throw std::domain_error(
        "rect_mass_by_quadrature needs 0 <= s0 < s1, 0 <= t0 < t1 < inf");
  const double g1 = boost::math::tgamma(a + 1.0);
  // The s-mass of the slice at level t below s equals P(a+1, x0(s, t)), so
  // the rectangle mass is a single integral over t.
  auto slice = [&](double s, double t) {
    if (std::isinf(s)) return 1.0;
    if (s <= 0.0) return 0.0;
    const double x0 = std::pow(g1 * s / t, 1.0 / a);
    return boost::math::gamma_p(a + 1.0, x0);
  };
  QuadratureOptions opt;
  opt.rel_tol = 1e-12;
  return integrate(
      [&](double t) { return slice(s1, t) - slice(s0, t); },
      t0, t1, opt);
}

ConditionalLaw kj_conditional_law(double a, std::size_t j, double s,
                                  double r) {
  check_shape(a);
  if (j < 1) throw std::domain_error("kj_conditional_law needs j >= 1");
  if (!(s > 0.0) || !(r > 0.0))
    throw std::domain_error("kj_conditional_law needs s > 0 and r > 0");
  const double g1 = boost::math::tgamma(a + 1.0);
  const double t = g1 * s * std::pow(r, -a);
  ConditionalLaw law;
  law.binomial_trials = j - 1;
  // Literal closed forms.
  const double lower = boost::math::tgamma(a) * boost::math::gamma_p(a, r);
  law.p_closed = a * std::pow(s, 2.0 / a - 2.0) * std::pow(r, a - 2.0) * lower;
  law.poisson_mean_closed =
      a * s * std::pow(r, -a) * boost::math::tgamma(a) *
      boost::math::gamma_q(a, r);
  // Mass-ratio route.  The success probability compares the mass of
  // (0,s) x (0,t) with the full band (0,s) x (0,inf), whose mass is s; the
  // Poisson mean is the mass of (s,inf) x (0,t).
  law.p_from_mass = (s - strip_mass(a, s, t)) / s;
  law.poisson_mean_from_mass = (t - s) + strip_mass(a, s, t);
  const double pd = std::abs(law.p_closed - law.p_from_mass);
  const double md =
      std::abs(law.poisson_mean_closed - law.poisson_mean_from_mass);
  law.closed_in_range =
      pd <= 1e-8 * std::max(1.0, std::abs(law.p_from_mass)) &&
      md <= 1e-8 * std::max(1.0, std::abs(law.poisson_mean_from_mass));
  return law;
}

ConditionalLaw jk_conditional_law(double a, std::size_t k, double t,
                                  double r) {
  check_shape(a);
  if (k < 1) throw std::domain_error("jk_conditional_law needs k >= 1");
  if (!(t > 0.0) || !(r > 0.0))
    throw std::domain_error("jk_conditional_law needs t > 0 and r > 0");
  const double g1 = boost::math::tgamma(a + 1.0);
  const double s = t * std::pow(r, a) / g1;
  ConditionalLaw law;
  law.binomial_trials = k - 1;
  const double lower = boost::math::tgamma(a) * boost::math::gamma_p(a, r);
  law.p_closed = std::pow(g1, 1.0 - 2.0 / a) * a *
                 std::pow(t, 2.0 / a - 2.0) * std::pow(r, a - 1.0 / a) *
                 lower;
  law.poisson_mean_closed =
      t * (std::pow(r, a) / g1 - boost::math::gamma_p(a, r));
  // Mass-ratio route.  Success probability: mass of (0,s) x (0,t) against the
  // slab (0,inf) x (0,t), whose mass is t (the only finite normalization
  // available for this conditioning).  Poisson mean: mass of (0,s) x (t,inf).
  law.p_from_mass = (s - strip_mass(a, s, t)) / t;
  law.poisson_mean_from_mass = strip_mass(a, s, t);
  const double pd = std::abs(law.p_closed - law.p_from_mass);
  const double md =
      std::abs(law.poisson_mean_closed - law.poisson_mean_from_mass);
  law.closed_in_range =
      pd <= 1e-8 * std::max(1.0, std::abs(law.p_from_mass)) &&
      md <= 1e-8 * std::max(1.0, std::abs(law.poisson_mean_from_mass));
  return law;
}

namespace {

// Integrands for the a = 1 rank distributions.  With the tying exponential r,
// the bottom-rank trial success probability is p~ = 1/(r + exp(-r)) and the
// t-rank success probability is p = r/(r + exp(-r)); the mixing weights are
// the gamma(2,1) density r exp(-r) and, after marginalizing the gamma mean
// out, exp(-r).
double quad_full(const std::function<double(double)>& f) {
  QuadratureOptions opt;
  opt.rel_tol = 1e-12;
  return integrate_singular(f, 0.0, 1.0, opt) +
         integrate_semi_infinite(f, 1.0, 8.0, opt);
}

}  // namespace

double k1_pmf(std::size_t k) {
  if (k < 1) throw std::domain_error("k1_pmf needs k >= 1");
  return quad_full([k](double r) {
    const double denom = r + std::exp(-r);
    const double p = r / denom;
    const double logq = -r - std::log(denom);
    return p * std::exp(static_cast<double>(k - 1) * logq - r);
  });
}

double j1_pmf(std::size_t j) {
  if (j < 1) throw std::domain_error("j1_pmf needs j >= 1");
  return quad_full([j](double r) {
    const double denom = r + std::exp(-r);
    const double pt = 1.0 / denom;
    if (j == 1) return pt * r * std::exp(-r);
    // q~ = (r + exp(-r) - 1)/denom; r + expm1(-r) keeps precision near 0.
    const double num = r + std::expm1(-r);
    if (num <= 0.0) return 0.0;
    const double logq = std::log(num) - std::log(denom);
    return pt * std::exp(static_cast<double>(j - 1) * logq) * r *
           std::exp(-r);
  });
}

namespace {

// Sum_{i<=cap} p q^(i-1) = 1 - q^cap and
// Sum_{i<=cap} i p q^(i-1) = (1 - q^cap (1 + cap p)) / p, folded into the
// mixing quadrature so that very large caps cost one integral.
double partial_sum_term(double logq, double cap) {
  const double e = cap * logq;
  return e < -745.0 ? 1.0 : 1.0 - std::exp(e);
}

double partial_mean_term(double p, double logq, double cap) {
  const double w = cap * p;
  if (w < 1e-6) return p * cap * (cap + 1.0) * 0.5;  // series limit
  const double e = cap * logq;
  const double qn = e < -745.0 ? 0.0 : std::exp(e);
  return (1.0 - qn * (1.0 + w)) / p;
}

}  // namespace

double k1_partial_sum(std::size_t cap) {
  if (cap < 1) throw std::domain_error("cap must be >= 1");
  const double n = static_cast<double>(cap);
  return quad_full([n](double r) {
    const double denom = r + std::exp(-r);
    const double logq = -r - std::log(denom);
    return partial_sum_term(logq, n) * std::exp(-r);
  });
}

double k1_partial_mean(std::size_t cap) {
  if (cap < 1) throw std::domain_error("cap must be >= 1");
  const double n = static_cast<double>(cap);
  return quad_full([n](double r) {
    const double denom = r + std::exp(-r);
    const double p = r / denom;
    const double logq = -r - std::log(denom);
    return partial_mean_term(p, logq, n) * std::exp(-r);
  });
}

double j1_partial_sum(std::size_t cap) {
  if (cap < 1) throw std::domain_error("cap must be >= 1");
  const double n = static_cast<double>(cap);
  return quad_full([n](double r) {
    const double denom = r + std::exp(-r);
    const double num = r + std::expm1(-r);
    if (num <= 0.0) return 0.0;
    const double logq = std::log(num) - std::log(denom);
    return partial_sum_term(logq, n) * r * std::exp(-r);
  });
}

double j1_partial_mean(std::size_t cap) {
  if (cap < 1) throw std::domain_error("cap must be >= 1");
  const double n = static_cast<double>(cap);
  return quad_full([n](double r) {
    const double denom = r + std::exp(-r);
    const double pt = 1.0 / denom;
    const double num = r + std::expm1(-r);
    if (num <= 0.0) return pt * r * std::exp(-r);  // q = 0: first term only
    const double logq = std::log(num) - std::log(denom);
    return partial_mean_term(pt, logq, n) * r * std::exp(-r);
  });
}

double j1_mean() {
  // E(J_1 | r) = r + exp(-r) mixed against the gamma(2,1) density.
  return quad_full(
      [](double r) { return (r + std::exp(-r)) * r * std::exp(-r); });
}

double last_pick_min_integrand(double u) {
  if (!(u >= 0.0) || !(u <= 1.0))
    throw std::domain_error("integrand argument must lie in [0, 1]");
  if (u == 0.0) return 0.0;
  if (u == 1.0) return 1.0;
  return u / (u - std::log(u));
}

double prob_last_pick_is_min() {
  QuadratureOptions opt;
  opt.rel_tol = 1e-12;
  return 1.0 - integrate_singular(
                   [](double u) { return last_pick_min_integrand(u); }, 0.0,
                   1.0, opt);
}

namespace {

// Cap on the expected number of extra points sampled beyond the
// deterministic t-block; the block is grown until the strip mass under the
// certification level drops below this.
constexpr double kExtraMeanCap = 0.25;
constexpr std::size_t kMaxInstantiated = std::size_t(1) << 22;

struct PairPoint {
  double t = 0.0;
  double s = 0.0;
};

}  // namespace

LimitProcess limit_process(double a, std::size_t k_max, double eps,
                           RandomStream& rng, double s_floor) {
  check_shape(a);
  if (k_max < 1) throw std::invalid_argument("k_max must be >= 1");
  if (!(eps > 0.0) || !(eps < 0.5))
    throw std::invalid_argument("eps must lie in (0, 0.5)");
  if (!(s_floor >= 0.0) || std::isinf(s_floor))
    throw std::invalid_argument("s_floor must be finite and >= 0");

  const double g1 = boost::math::tgamma(a + 1.0);
  std::vector<PairPoint> pts;
  double t_acc = 0.0;
  auto grow = [&](std::size_t target) {
    pts.reserve(target);
    while (pts.size() < target) {
      t_acc += rng.exponential();
      const double g = rng.gamma(a + 1.0);
      pts.push_back({t_acc, t_acc * std::pow(g, a) / g1});
    }
  };
  grow(std::max<std::size_t>(16, k_max));

  double s_star = s_floor;
  for (std::size_t i = 0; i < k_max; ++i) s_star = std::max(s_star, pts[i].s);

  double bound = strip_mass(a, s_star, pts.back().t);
  while (bound > kExtraMeanCap) {
    if (pts.size() * 2 > kMaxInstantiated)
      throw std::runtime_error(
          "limit_process: resource cap reached before the residual mass "
          "dropped below " +
          std::to_string(kExtraMeanCap) + " (achieved " +
          std::to_string(bound) + ", requested eps " + std::to_string(eps) +
          ")");
    grow(pts.size() * 2);
    bound = strip_mass(a, s_star, pts.back().t);
  }
  const std::size_t base = pts.size();
  const double t_base = pts.back().t;

  // Every remaining point of the process with S below s_star: their count is
  // Poisson(bound) by restriction, their t-coordinates follow the normalized
  // strip tail, and each s given t follows the slice law below s_star.
  const std::size_t n_extra = rng.poisson(bound);
  std::vector<PairPoint> extras(n_extra);
  for (std::size_t i = 0; i < n_extra; ++i) {
    const double target = bound * rng.uniform01();
    double lo = t_base;
    double hi = 2.0 * t_base;
    while (strip_mass(a, s_star, hi) > target) hi *= 2.0;
    for (int it = 0; it < 200 && (hi - lo) > 1e-13 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (strip_mass(a, s_star, mid) > target ? lo : hi) = mid;
    }
    const double t = 0.5 * (lo + hi);
    const double x_cap = std::pow(g1 * s_star / t, 1.0 / a);
    const double cap = boost::math::gamma_p(a + 1.0, x_cap);
    const double x =
        boost::math::gamma_p_inv(a + 1.0, cap * rng.uniform01());
    extras[i] = {t, t * std::pow(x, a) / g1};
  }
  std::sort(extras.begin(), extras.end(),
            [](const PairPoint& l, const PairPoint& r) { return l.t < r.t; });

  // t-ranks of the extras: between consecutive extras the process contains
  // only points with S >= s_star, a Poisson count equal to the gap's t-length
  // minus its below-s_star strip mass.
  std::vector<std::size_t> extra_rank(n_extra);
  {
    double prev_t = t_base;
    double prev_strip = bound;
    std::size_t skipped = 0;
    for (std::size_t i = 0; i < n_extra; ++i) {
      const double cur_strip = strip_mass(a, s_star, extras[i].t);
      const double gap = (extras[i].t - prev_t) - (prev_strip - cur_strip);
      skipped += rng.poisson(std::max(gap, 0.0));
      extra_rank[i] = base + i + 1 + skipped;
      prev_t = extras[i].t;
      prev_strip = cur_strip;
    }
  }

  LimitProcess out;
  out.a = a;
  out.base_points = base;
  out.s_star = s_star;
  out.expected_extras = bound;
  out.extra_count = n_extra;
  out.truncation_bound = 0.0;
  out.s.reserve(base + n_extra);
  out.t.reserve(base + n_extra);
  for (const auto& p : pts) {
    out.s.push_back(p.s);
    out.t.push_back(p.t);
  }
  for (const auto& p : extras) {
    out.s.push_back(p.s);
    out.t.push_back(p.t);
  }

  out.j.resize(k_max);
  for (std::size_t k = 0; k < k_max; ++k) {
    const double sk = pts[k].s;
    std::size_t below = 0;
    for (std::size_t i = 0; i < out.s.size(); ++i)
      if (out.s[i] < sk) ++below;
    out.j[k] = below + 1;
  }

  std::vector<std::pair<double, std::size_t>> pool;
  pool.reserve(base + n_extra);
  for (std::size_t i = 0; i < base; ++i) pool.emplace_back(pts[i].s, i + 1);
  for (std::size_t i = 0; i < n_extra; ++i)
    pool.emplace_back(extras[i].s, extra_rank[i]);
  std::sort(pool.begin(), pool.end());
  out.k.resize(k_max);
  for (std::size_t jdx = 0; jdx < k_max; ++jdx) out.k[jdx] = pool[jdx].second;
  return out;
}

LimitSample limit_sbp_sample(double a, double rate, std::size_t k_max,
                             RandomStream& rng) {
  check_shape(a);
  if (!(rate > 0.0)) throw std::invalid_argument("rate must be > 0");
  if (k_max < 1) throw std::invalid_argument("k_max must be >= 1");
  LimitSample out;
  out.xi_rev.resize(k_max);
  double t_acc = 0.0;
  for (std::size_t k = 0; k < k_max; ++k) {
    t_acc += rng.exponential();
    out.xi_rev[k] = std::pow(t_acc, 1.0 / a) * rng.gamma(a + 1.0) / rate;
  }
  out.xi_sorted = out.xi_rev;
  std::sort(out.xi_sorted.begin(), out.xi_sorted.end());
  return out;
}

J1K1Draw simulate_j1_k1(double a, RandomStream& rng) {
  const LimitProcess proc = limit_process(a, 1, 1e-6, rng);
  J1K1Draw d;
  d.j1 = proc.j[0];
  d.k1 = proc.k[0];
  d.instantiated = proc.base_points;
  return d;
}

}  // namespace sbp

#include "sbp/stick_breaking.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace sbp {

StickChain stick_chain(const SbpSample& sample) {
  const std::size_t n = sample.values.size();
  StickChain c;
  c.totals = sample.remaining_totals;
  c.ratios.resize(n > 0 ? n - 1 : 0);
  for (std::size_t k = 0; k + 1 < n; ++k)
    c.ratios[k] = sample.values[k] / sample.remaining_totals[k];
  return c;
}

double transition_density(const DistributionModel& model, unsigned n, unsigned k,
                          double t, double s) {
  if (n < 2) throw std::domain_error("transition_density: need n >= 2");
  if (k < 1 || k > n - 1) throw std::domain_error("transition_density: need 1 <= k <= n-1");
  if (!model.has_convolution_density())
    throw capability_error(model.name() + " has no convolution densities");
  if (!(t > 0.0)) throw std::domain_error("transition_density: t must be positive");
  if (!(s > 0.0) || s >= t) return 0.0;
  const unsigned m = n - k;  // items remaining after the pick
  const double denom = model.convolution_density(m + 1, t);
  if (denom <= 0.0) return 0.0;
  return (m + 1) * ((t - s) / t) * model.convolution_density(1, t - s) *
         model.convolution_density(m, s) / denom;
}

std::vector<double> patil_taillie_sample(double a, double rate, std::size_t n,
                                         RandomStream& rng) {
  if (!(a > 0.0) || !(rate > 0.0))
    throw std::invalid_argument("patil_taillie_sample: a and rate must be positive");
  if (n == 0) throw std::invalid_argument("patil_taillie_sample: n must be >= 1");
  std::vector<double> x(n);
  double remaining = rng.gamma(a * static_cast<double>(n), rate);
  for (std::size_t k = 1; k < n; ++k) {
    const double b = rng.beta(a + 1.0, a * static_cast<double>(n - k));
    x[k - 1] = remaining * b;
    remaining *= (1.0 - b);
  }
  x[n - 1] = remaining;
  return x;
}

std::vector<double> reverse_representation_sample(double a, double rate,
                                                  std::size_t n, RandomStream& rng) {
  if (!(a > 0.0) || !(rate > 0.0))
    throw std::invalid_argument("reverse_representation_sample: a and rate must be positive");
  if (n == 0) throw std::invalid_argument("reverse_representation_sample: n must be >= 1");
  std::vector<double> u(n);
  for (auto& v : u) v = rng.uniform01();
  std::sort(u.begin(), u.end(), std::greater<>());
  std::vector<double> x(n);
  for (std::size_t k = 0; k < n; ++k)
    x[k] = std::pow(u[k], 1.0 / a) * rng.gamma(a + 1.0, rate);
  return x;
}

std::vector<double> gem_sample(const GemParams& params, std::size_t k, RandomStream& rng) {
  const double alpha = params.alpha;
  const double theta = params.theta;
  if (k == 0) throw std::invalid_argument("gem_sample: k must be >= 1");
  if (alpha >= 1.0) throw std::invalid_argument("gem_sample: alpha must be < 1");
  std::vector<double> w(k);
  if (alpha >= 0.0) {
    if (!(theta > -alpha))
      throw std::invalid_argument("gem_sample: need theta > -alpha when 0 <= alpha < 1");
    for (std::size_t i = 1; i <= k; ++i)
      w[i - 1] = rng.beta(1.0 - alpha, theta + static_cast<double>(i) * alpha);
  } else {
    const double a = -alpha;
    const double n_real = theta / a;
    const double n_round = std::round(n_real);
    if (n_round < 1.0 || std::abs(theta - n_round * a) > 1e-9 * std::max(1.0, std::abs(theta)))
      throw std::invalid_argument(
          "gem_sample: alpha < 0 requires theta = n * (-alpha) for an integer n >= 1");
    const auto n = static_cast<std::size_t>(n_round);
    if (k > n) throw std::invalid_argument("gem_sample: k exceeds n = theta/(-alpha)");
    for (std::size_t i = 1; i <= k; ++i) {
      // beta(1+a, (n-i)a); at i = n the second parameter is 0 and W_n = 1.
      w[i - 1] = (i == n) ? 1.0 : rng.beta(1.0 + a, a * static_cast<double>(n - i));
    }
  }
  std::vector<double> p(k);
  double stick = 1.0;
  for (std::size_t i = 0; i < k; ++i) {
    p[i] = stick * w[i];
    stick *= (1.0 - w[i]);
  }
  return p;
}

namespace {

// Distance correlation with double-centered distance matrices; O(m^2) space
// and time, which is why callers thin their replicas to `pair_cap` first.
struct DcorWorkspace {
  std::size_t m = 0;
  std::vector<double> A;  // centered |x_i - x_j|
  std::vector<double> B;  // centered |y_i - y_j|
  double a_var = 0.0, b_var = 0.0;
};

void center_distance_matrix(const std::vector<double>& v, std::vector<double>& out) {
  const std::size_t m = v.size();
  out.assign(m * m, 0.0);
  std::vector<double> row_mean(m, 0.0);
  double grand = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double d = std::abs(v[i] - v[j]);
      out[i * m + j] = d;
      row_mean[i] += d;
    }
    grand += row_mean[i];
    row_mean[i] /= static_cast<double>(m);
  }
  grand /= static_cast<double>(m) * static_cast<double>(m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      out[i * m + j] += grand - row_mean[i] - row_mean[j];
}

DcorWorkspace make_workspace(const std::vector<double>& x, const std::vector<double>& y) {
  DcorWorkspace ws;
  ws.m = x.size();
  center_distance_matrix(x, ws.A);
  center_distance_matrix(y, ws.B);
  const std::size_t mm = ws.m * ws.m;
  for (std::size_t t = 0; t < mm; ++t) {
    ws.a_var += ws.A[t] * ws.A[t];
    ws.b_var += ws.B[t] * ws.B[t];
  }
  ws.a_var /= static_cast<double>(mm);
  ws.b_var /= static_cast<double>(mm);
  return ws;
}

double dcor_with_permutation(const DcorWorkspace& ws, const std::vector<std::size_t>& pi) {
  const std::size_t m = ws.m;
  double cov = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = &ws.A[i * m];
    const double* brow = &ws.B[pi[i] * m];
    for (std::size_t j = 0; j < m; ++j) cov += arow[j] * brow[pi[j]];
  }
  cov /= static_cast<double>(m) * static_cast<double>(m);
  const double denom = std::sqrt(ws.a_var * ws.b_var);
  if (denom <= 0.0) return 0.0;
  const double r2 = cov / denom;
  return r2 > 0.0 ? std::sqrt(r2) : 0.0;
}

}  // namespace

IndependenceProbe lukacs_independence_probe(const DistributionModel& model,
                                            std::size_t n, std::size_t replicas,
                                            RandomStream& rng, double level,
                                            std::size_t pair_cap, int permutations) {
  IndependenceProbe probe;
  probe.level = level;
  probe.replicas = replicas;
  if (n == 0) throw std::invalid_argument("lukacs_independence_probe: n must be >= 1");
  if (n == 1) {
    probe.applicable = false;  // the ratio is identically 1
    return probe;
  }
  if (replicas < 16) throw std::invalid_argument("lukacs_independence_probe: too few replicas");

  std::vector<double> totals(replicas), fractions(replicas);
  std::vector<double> draw(n);
  for (std::size_t r = 0; r < replicas; ++r) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      draw[i] = model.sample(rng);
      total += draw[i];
    }
    const double target = rng.uniform01() * total;
    double acc = 0.0;
    double picked = draw[n - 1];
    for (std::size_t i = 0; i < n; ++i) {
      acc += draw[i];
      if (target <= acc) {
        picked = draw[i];
        break;
      }
    }
    totals[r] = total;
    fractions[r] = picked / total;
  }

  // Uniform thinning keeps the subsample i.i.d.
  const std::size_t m = std::min(pair_cap, replicas);
  const std::size_t stride = replicas / m;
  std::vector<double> xs(m), ys(m);
  for (std::size_t i = 0; i < m; ++i) {
    xs[i] = totals[i * stride];
    ys[i] = fractions[i * stride];
  }
  probe.pairs_used = m;

  const DcorWorkspace ws = make_workspace(xs, ys);
  std::vector<std::size_t> pi(m);
  std::iota(pi.begin(), pi.end(), 0);
  probe.statistic = dcor_with_permutation(ws, pi);

  std::vector<double> null_stats(static_cast<std::size_t>(permutations));
  for (auto& stat : null_stats) {
    // Fisher-Yates shuffle from the probe's own stream.
    for (std::size_t i = m - 1; i > 0; --i) {
      const auto j = static_cast<std::size_t>(rng.uniform01() * static_cast<double>(i + 1));
      std::swap(pi[i], pi[j <= i ? j : i]);
    }
    stat = dcor_with_permutation(ws, pi);
  }
  std::sort(null_stats.begin(), null_stats.end());
  const auto cut = static_cast<std::size_t>(
      std::ceil((1.0 - level) * static_cast<double>(permutations + 1))) - 1;
  probe.perm_quantile = null_stats[std::min(cut, null_stats.size() - 1)];
  std::size_t exceed = 0;
  for (double stat : null_stats)
    if (stat >= probe.statistic) ++exceed;
  const double p_value = static_cast<double>(1 + exceed) / static_cast<double>(permutations + 1);
  probe.dependent = p_value <= level;
  return probe;
}

}  // namespace sbp

#pragma once

#include <cstddef>
#include <vector>

#include "sbp/distribution.hpp"
#include "sbp/random.hpp"
#include "sbp/sampler.hpp"

namespace sbp {

// Remaining-total chain extracted from a sample: totals[k] (k = 0..n-1) is
// the total before pick k+1 is removed, and ratios[k] = values[k] / totals[k]
// for k = 0..n-2 (the final ratio is identically 1 and is not stored).
struct StickChain {
  std::vector<double> totals;
  std::vector<double> ratios;
};

StickChain stick_chain(const SbpSample& sample);

// One-step transition density of the remaining-total Markov chain: the
// density at s of the total after pick k, given the total t before pick k
// (k = 1..n-1 picks out of n items, 0 < s < t):
//   (n-k+1) * ((t-s)/t) * nu_1(t-s) * nu_{n-k}(s) / nu_{n-k+1}(t)
// where nu_j is the j-fold convolution density of the model. Requires a
// model with convolution densities (the gamma family).
double transition_density(const DistributionModel& model, unsigned n, unsigned k,
                          double t, double s);

// Stick-breaking representation of a gamma(a, rate) size-biased permutation:
//   X[k] = g0 * B_k * prod_{i<k} (1 - B_i),  X[n] = g0 * prod_{i<n} (1 - B_i),
// with g0 ~ gamma(n*a, rate) and B_k ~ beta(a+1, (n-k)*a), all independent.
// Returns the values (X[1], ..., X[n]).
std::vector<double> patil_taillie_sample(double a, double rate, std::size_t n,
                                         RandomStream& rng);

// Reverse representation: the picks satisfy X[k] = U_(k)^{1/a} * g_k with
// U_(1) >= ... >= U_(n) the decreasing order statistics of n uniforms and
// g_k i.i.d. gamma(a+1, rate), independent of the uniforms.
std::vector<double> reverse_representation_sample(double a, double rate,
                                                  std::size_t n, RandomStream& rng);

// GEM(alpha, theta) residual-allocation fractions P_1..P_k:
//   P_j = W_j * prod_{i<j} (1 - W_i),  W_i ~ beta(1 - alpha, theta + i*alpha).
// Valid regions: 0 <= alpha < 1 with theta > -alpha, or alpha = -a < 0 with
// theta = n*a for an integer n >= 1 (then k <= n and W_n = 1). The latter is
// the normalized gamma stick-breaking law above.
struct GemParams {
  double alpha;
  double theta;
};

std::vector<double> gem_sample(const GemParams& params, std::size_t k, RandomStream& rng);

// Empirical independence probe between T_n = sum X_i and the first-pick
// fraction X_n[1]/T_n: distance correlation on a thinned subsample (cap
// `pair_cap`) with a permutation calibration at the given level. For the
// gamma family the pair is independent; any other model with finite mean is
// expected to show dependence (the converse characterization).
struct IndependenceProbe {
  bool applicable = true;   // false for n = 1 (ratio degenerate at 1)
  double statistic = 0.0;   // distance correlation on the subsample
  double perm_quantile = 0.0;  // permutation critical value at `level`
  double level = 0.01;
  bool dependent = false;
  std::size_t pairs_used = 0;
  std::size_t replicas = 0;
};

IndependenceProbe lukacs_independence_probe(const DistributionModel& model,
                                            std::size_t n, std::size_t replicas,
                                            RandomStream& rng, double level = 0.01,
                                            std::size_t pair_cap = 1024,
                                            int permutations = 199);

}  // namespace sbp

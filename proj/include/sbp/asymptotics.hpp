#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "sbp/random.hpp"

namespace sbp {

// Limit objects for the tail of a size-biased permutation of n i.i.d. draws
// whose distribution has density varying regularly at 0 with exponent a - 1
// (gamma(a, rate) is the canonical case).  After scaling, the pair
// (last picks, smallest order statistics) converges to a functional of a
// planar Poisson process, and the objects below simulate and describe that
// process exactly.
//
// Construction: points are built t-first.  T_(1) < T_(2) < ... are the
// arrivals of a unit-rate Poisson process on (0, inf); each T_(k) carries an
// independent mark g_k ~ gamma(a + 1, 1) and the companion coordinate
// S_k = T_(k) * g_k^a / Gamma(a + 1).  The pair list {(S_k, T_(k))} is a
// Poisson process on the quadrant whose two marginals are both Lebesgue.
// Rank statistics of interest:
//   J_k = rank of S_k among all S values (the limit of the position, counted
//         from the bottom, that the k-th-from-last pick occupies among the
//         increasing order statistics),
//   K_j = t-rank of the j-th smallest S value (the limit of how many picks
//         from the end one must look back to find the j-th smallest value).

struct LimitProcess {
  double a = 1.0;
  // instantiated points, in increasing-t order: the deterministic block of
  // t-smallest points first, then any extra points sampled below the
  // certification level s_star beyond that block.
  std::vector<double> s;
  std::vector<double> t;
  std::size_t base_points = 0;     // size of the deterministic t-block
  double s_star = 0.0;             // certification level for rank queries
  double expected_extras = 0.0;    // Poisson mean of points beyond the block with S < s_star
  std::size_t extra_count = 0;     // realized number of such points
  std::vector<std::size_t> j;      // J_1..J_k_max (1-based ranks)
  std::vector<std::size_t> k;      // K_1..K_k_max (1-based t-ranks)
  // Upper bound on the probability that any reported rank differs from the
  // rank in the full (infinite) process.  The sampler accounts for all points
  // that could influence the reported prefixes, so this is exactly zero.
  double truncation_bound = 0.0;
};

// Simulate the limiting Poisson pair process and the rank prefixes
// J_1..J_k_max and K_1..K_k_max.  `eps` is the tolerated truncation
// probability; the construction is exact, so the reported bound is 0 <= eps,
// but eps also caps the resources the sampler may spend (a growth stage that
// would exceed ~4 million instantiated points throws std::runtime_error
// naming the achieved bound).  `s_floor` optionally raises the certification
// level so that counting queries below a fixed s are exact as well.
LimitProcess limit_process(double a, std::size_t k_max, double eps,
                           RandomStream& rng, double s_floor = 0.0);

// One draw of the scaled last picks in reverse order together with their
// increasing rearrangement:
//   xi_rev[k]  = T_(k)^(1/a) * g_k / rate            (k-th pick from the end)
//   xi_sorted  = the same values sorted increasingly  (smallest scaled values)
struct LimitSample {
  std::vector<double> xi_rev;
  std::vector<double> xi_sorted;
};

LimitSample limit_sbp_sample(double a, double rate, std::size_t k_max,
                             RandomStream& rng);

// Mean measure of the pair process over the rectangle (s0,s1) x (t0,t1),
// closed form.  Either upper endpoint may be +infinity; the result is
// +infinity only when both are.
double rect_mass(double a, double s0, double s1, double t0, double t1);

// Same mass by one-dimensional quadrature in t (finite t1 required);
// independent cross-check of the closed form.
double rect_mass_by_quadrature(double a, double s0, double s1, double t0,
                               double t1);

// Density written multiplicatively against ds dt/t: the function
//   (1/a) Gamma(a+1)^(1/a) (s/t)^(1/a) exp(-(Gamma(a+1) s / t)^(1/a)).
// Integrating mu_density(s,t)/t ds dt over a rectangle reproduces rect_mass.
double mu_density(double a, double s, double t);

// The plain Lebesgue intensity, mu_density / t.
double mu_intensity(double a, double s, double t);

// Conditional law of the companion rank given one point of the process.
// Given the point (s, t) with t = Gamma(a+1) s r^(-a)  (r is the exponential
// variable tying the pair together), the companion rank minus one is
// binomial with the number of trials fixed by the query rank and a success
// probability p; the number of *total* candidate points is Poisson with mean
// `poisson_mean`.  Two variants are reported: `closed` evaluates literal
// closed-form expressions for (p, mean); `from_mass` derives both from
// rectangle masses of the mean measure.  They agree only where the closed
// forms are written for the parameter range in which they were derived;
// `closed_in_range` flags that.
struct ConditionalLaw {
  std::size_t binomial_trials = 0;
  double p_closed = 0.0;
  double p_from_mass = 0.0;
  double poisson_mean_closed = 0.0;
  double poisson_mean_from_mass = 0.0;
  bool closed_in_range = true;
};

// Law of K_j given S_j = s and the tying exponential r (so t is determined).
ConditionalLaw kj_conditional_law(double a, std::size_t j, double s, double r);

// Law of J_k given T_(k) = t and the tying exponential r (so s is determined).
ConditionalLaw jk_conditional_law(double a, std::size_t k, double t, double r);

// Exact distributions of K_1 and J_1 for a = 1, by quadrature over the tying
// exponential.  K_1 is the number of picks from the end needed to see the
// overall smallest value; J_1 is the bottom-rank of the last pick.
double k1_pmf(std::size_t k);
double j1_pmf(std::size_t j);

// Partial sums and partial expectations, Sum_{i<=cap} pmf(i) and
// Sum_{i<=cap} i*pmf(i), computed by folding the geometric partial sums in
// closed form inside a single quadrature (cap may be very large).
double k1_partial_sum(std::size_t cap);
double k1_partial_mean(std::size_t cap);
double j1_partial_sum(std::size_t cap);
double j1_partial_mean(std::size_t cap);

// E(J_1) = 9/4 for a = 1, by quadrature of the closed-form conditional mean.
double j1_mean();

// P(the last pick is the overall smallest value) in the limit (a = 1):
// 1 - integral_0^1 u/(u - log u) du = P(K_1 = 1) = P(J_1 = 1).
double prob_last_pick_is_min();
// The integrand u/(u - log u), exposed for endpoint and monotonicity tests.
double last_pick_min_integrand(double u);

// Fast path for Monte Carlo on the pair (J_1, K_1): one exact draw.
struct J1K1Draw {
  std::size_t j1 = 0;
  std::size_t k1 = 0;
  std::size_t instantiated = 0;
};

J1K1Draw simulate_j1_k1(double a, RandomStream& rng);

}  // namespace sbp

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sbp/distribution.hpp"

namespace sbp {

// Result of one statistical or numerical check.  `statistic` is compared
// against `threshold` (direction depends on the test and is stated in
// `details`), `seed` is the exact seed the check consumed, and `details`
// carries auxiliary numbers (p-values, per-point diagnostics).  Reports are
// fully determined by their inputs: no timing or environment data is stored,
// so serialized reports are byte-identical across reruns.
struct TestReport {
  std::string test_name;
  double statistic = 0.0;
  double threshold = 0.0;
  long long n_samples = 0;
  std::uint64_t seed = 0;
  bool passed = false;
  nlohmann::json details = nlohmann::json::object();
};

nlohmann::json report_to_json(const TestReport& report);

// Kolmogorov asymptotic survival function P(sup |B| > x) of the Brownian
// bridge sup norm.
double kolmogorov_asymptotic_sf(double x);

// Exact finite-n cdf P(D_n <= d) of the one-sample KS statistic.
double ks_exact_cdf(std::size_t n, double d);

// p-value of an observed one-sample statistic: exact for n < 1000,
// asymptotic beyond.
double ks_p_value(std::size_t n, double d);

// sup_x |edf(x) - cdf(x)| over the sample.
double ks_statistic(std::vector<double> samples,
                    const std::function<double(double)>& cdf);

// One-sample KS test of `samples` against `cdf` at the given level.  The
// threshold is the critical value of D at that level (exact or asymptotic to
// match ks_p_value); passed means statistic <= threshold.
TestReport ks_one_sample(const std::string& name, std::vector<double> samples,
                         const std::function<double(double)>& cdf,
                         double level, std::uint64_t seed);

// Two-sample KS test with the asymptotic threshold
// c(level) sqrt((m+n)/(mn)), c(level) = sqrt(-log(level/2)/2).
TestReport ks_two_sample(const std::string& name, std::vector<double> first,
                         std::vector<double> second, double level,
                         std::uint64_t seed);

// Pearson chi-square against given cell probabilities.  Cells with expected
// count below 5 are pooled (smallest merged first) before the statistic is
// formed; passed means statistic <= chi-square quantile at 1 - level.
TestReport chi_square_counts(const std::string& name,
                             const std::vector<std::uint64_t>& counts,
                             const std::vector<double>& probs, double level,
                             std::uint64_t seed);

// Distributional identities connecting beta and gamma draws.
//  first_pick: beta(a + 1, (n-1) a) * gamma(n a, rate)
//                  ==  beta(n a, 1) * gamma(a + 1, rate)
//              with (p1, p2) = (a, n); both sides are laws of the first
//              size-biased pick of n gamma(a, rate) draws, written once via
//              the stick ratio and once via the largest-uniform form.
//  consecutive_ratio:
//              (1 - beta(a+1, a+b)) / beta(a+1, a+b) * beta(a+1, b)
//                  ==  gamma(a+1, rate) / gamma'(a+1, rate) * beta(a+b, 1)
//              with (p1, p2) = (a, b), all factors independent; both sides
//              are laws of the ratio between consecutive size-biased picks,
//              and the rate cancels on the right.
enum class BetaGammaIdentity { first_pick, consecutive_ratio };

// Exact check: compares the closed-form moments of both sides at the given
// orders through lgamma arithmetic; statistic is the worst relative
// discrepancy, threshold 1e-10.  consecutive_ratio involves the inverse
// moment E[beta^-m] and E[gamma^-m], finite only for m < a + 1; larger
// orders raise a domain error.
TestReport beta_gamma_moment_check(BetaGammaIdentity identity, double p1,
                                   double p2, double rate,
                                   const std::vector<int>& orders);

// Sampled check: n draws of each side, two-sample KS at the given level.
TestReport beta_gamma_sampled_check(BetaGammaIdentity identity, double p1,
                                    double p2, double rate, std::size_t n,
                                    double level, std::uint64_t seed);

// Glivenko-Cantelli check for the tail of one size-biased permutation: the
// empirical cdf of the last floor(n u) picks against the residual law F_u.
// The sup distance is exact (evaluated at the jump points), the threshold is
// 3 sqrt(log(2/0.01) / (2 floor(n u))).
TestReport gc_sup_distance(const std::string& name,
                           const DistributionModel& model, double u,
                           std::size_t n, std::uint64_t seed);

// Same check on a fixed value array (for triangular-array inputs such as
// quantile grids); the model only supplies the residual law F_u.
TestReport gc_sup_distance_fixed(const std::string& name,
                                 const DistributionModel& model, double u,
                                 const std::vector<double>& values,
                                 std::uint64_t seed);

// Functional-CLT moment check for the scaled tail-sum process
// xi_n(u) = (1/n) sum of the last floor(n u) picks.  For each u in the grid
// the replica mean must sit within 4 standard errors of the limit mean
// m(u) = integral_0^u mu(G_s) ds, and n times the replica variance must lie
// within 15 percent of the asymptotic variance
//   m2(u) - m(u)^2 - 2 g(u) m(u) (1-u) + g(u)^2 u (1-u),
// where m2(u) = integral_0^u E[G_s^2] ds and g(u) = mu(G_u).  The first two
// terms alone would be the fixed-key-threshold variance; the last two project
// out the constraint that exactly floor(n u) items remain.  The integrated
// G-variance integral_0^u sigma^2(G_s) ds (the spread left after conditioning
// on all key times) is reported alongside for reference.
TestReport fclt_mean_variance_check(const std::string& name,
                                    const DistributionModel& model,
                                    const std::vector<double>& u_grid,
                                    std::size_t n, std::size_t replicas,
                                    std::uint64_t seed);

// A named, seedable check: receives its derived seed and the per-test level.
struct SuiteTest {
  std::string name;
  std::function<TestReport(std::uint64_t seed, double level)> fn;
};

struct SuiteResult {
  nlohmann::json report;
  bool all_passed = false;
};

// Runs the checks in order, seeding test i with derive_seed(master_seed, i).
// With `bonferroni` the level is split evenly across the tests.  The JSON
// report lists tests sorted by name and contains no timing fields.
SuiteResult run_suite(const std::string& suite_name,
                      const std::vector<SuiteTest>& tests,
                      std::uint64_t master_seed, double level,
                      bool bonferroni);

}  // namespace sbp

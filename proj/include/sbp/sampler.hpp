#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <vector>

#include "sbp/random.hpp"

namespace sbp {

// One size-biased permutation of a fixed positive weight vector: picks are
// made sequentially with probability proportional to weight among the items
// not yet picked.
//
// Conventions: pick_order[k] is the 0-based source index of pick k+1;
// values[k] = source[pick_order[k]]; remaining_totals[k] is the sum of the
// values not yet picked BEFORE pick k+1 is removed, i.e. remaining_totals[0]
// is the full sum and remaining_totals[n-1] equals the last value.
struct SbpSample {
  std::vector<double> source;
  std::vector<std::size_t> pick_order;
  std::vector<double> values;
  std::vector<double> remaining_totals;
};

// Sequential cumulative-weight inversion, O(n^2). The direct transcription of
// the definition; kept as the oracle for the keys method.
SbpSample sbp_by_definition(const std::vector<double>& weights, RandomStream& rng);

// Exponential-keys coupling, O(n log n): keys Y_i = E_i / x_i with E_i i.i.d.
// standard exponential; sorting keys increasingly yields a size-biased
// permutation. Ties (measure zero, but possible in floating point) resolve by
// original index. Default method.
SbpSample sbp_by_exponential_keys(const std::vector<double>& weights, RandomStream& rng);

// Exact law on all n! pick orders via the telescoping product
// P(order) = prod_k x_{order_k} / (remaining total). Requires n <= 10.
// Keys are 0-based pick-order vectors.
std::map<std::vector<std::size_t>, double> exact_sbp_law(const std::vector<double>& weights);

// Increasing order statistics; ties keep original-index order.
std::vector<double> order_statistics(const std::vector<double>& values);

// J and K = J^{-1} as 1-based ranks: J[k-1] is the rank, among the increasing
// order statistics of the source, of the k-th pick counted from the END of
// the permutation (k = 1 is the last pick). Ties rank by original index.
struct CouplingPermutation {
  std::vector<std::size_t> J;
  std::vector<std::size_t> K;
};

CouplingPermutation coupling_permutation(const SbpSample& sample);

// Chooses m positions 1 <= a_1 < ... < a_m <= n uniformly without
// replacement and returns (values[a_1], ..., values[a_m]) repackaged as an
// SbpSample of length m (the invariance property: this is again a size-biased
// permutation of the selected items).
SbpSample nested_subsample(const SbpSample& sample, std::size_t m, RandomStream& rng);

// CSV rows "replica,k,value,source_index" (k and source_index 1-based),
// values with 17 significant digits.
void write_samples_csv(std::ostream& os, const std::vector<SbpSample>& replicas);

}  // namespace sbp

#include "sbp/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace sbp {

namespace {

void validate_weights(const std::vector<double>& weights) {
  if (weights.empty()) throw std::invalid_argument("sbp: weight vector is empty");
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w))
      throw std::invalid_argument("sbp: weights must be positive and finite");
  }
}

SbpSample assemble(const std::vector<double>& weights,
                   std::vector<std::size_t> pick_order) {
  SbpSample s;
  s.source = weights;
  s.pick_order = std::move(pick_order);
  const std::size_t n = weights.size();
  s.values.resize(n);
  for (std::size_t k = 0; k < n; ++k) s.values[k] = weights[s.pick_order[k]];
  // Suffix sums keep remaining_totals[n-1] exactly equal to the last value.
  s.remaining_totals.assign(n, 0.0);
  double acc = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    acc += s.values[k];
    s.remaining_totals[k] = acc;
  }
  return s;
}

}  // namespace

SbpSample sbp_by_definition(const std::vector<double>& weights, RandomStream& rng) {
  validate_weights(weights);
  const std::size_t n = weights.size();
  std::vector<std::size_t> alive(n);
  std::iota(alive.begin(), alive.end(), 0);
  double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<std::size_t> order;
  order.reserve(n);
  for (std::size_t step = 0; step + 1 < n; ++step) {
    const double target = rng.uniform01() * total;
    double acc = 0.0;
    std::size_t chosen = alive.size() - 1;  // guards against roundoff at the top end
    for (std::size_t i = 0; i < alive.size(); ++i) {
      acc += weights[alive[i]];
      if (target <= acc) {
        chosen = i;
        break;
      }
    }
    order.push_back(alive[chosen]);
    total -= weights[alive[chosen]];
    alive.erase(alive.begin() + static_cast<std::ptrdiff_t>(chosen));
  }
  order.push_back(alive.front());
  return assemble(weights, std::move(order));
}

SbpSample sbp_by_exponential_keys(const std::vector<double>& weights, RandomStream& rng) {
  validate_weights(weights);
  const std::size_t n = weights.size();
  std::vector<std::pair<double, std::size_t>> keys(n);
  for (std::size_t i = 0; i < n; ++i) keys[i] = {rng.exponential() / weights[i], i};
  std::sort(keys.begin(), keys.end());  // pair order resolves key ties by index
  std::vector<std::size_t> order(n);
  for (std::size_t k = 0; k < n; ++k) order[k] = keys[k].second;
  return assemble(weights, std::move(order));
}

std::map<std::vector<std::size_t>, double> exact_sbp_law(const std::vector<double>& weights) {
  validate_weights(weights);
  const std::size_t n = weights.size();
  if (n > 10) throw std::domain_error("exact_sbp_law: n must be <= 10");
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::map<std::vector<std::size_t>, double> law;
  do {
    double p = 1.0;
    double remaining = total;
    for (std::size_t k = 0; k < n; ++k) {
      p *= weights[perm[k]] / remaining;
      remaining -= weights[perm[k]];
    }
    law.emplace(perm, p);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return law;
}

std::vector<double> order_statistics(const std::vector<double>& values) {
  std::vector<double> out = values;
  std::stable_sort(out.begin(), out.end());
  return out;
}

CouplingPermutation coupling_permutation(const SbpSample& sample) {
  const std::size_t n = sample.source.size();
  // rank_of[i] = 1-based rank of source item i among increasing order
  // statistics, ties broken by original index.
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return sample.source[a] < sample.source[b];
  });
  std::vector<std::size_t> rank_of(n);
  for (std::size_t r = 0; r < n; ++r) rank_of[idx[r]] = r + 1;

  CouplingPermutation cp;
  cp.J.resize(n);
  cp.K.resize(n);
  for (std::size_t k = 1; k <= n; ++k) {
    const std::size_t source_index = sample.pick_order[n - k];
    cp.J[k - 1] = rank_of[source_index];
  }
  for (std::size_t k = 1; k <= n; ++k) cp.K[cp.J[k - 1] - 1] = k;
  return cp;
}

SbpSample nested_subsample(const SbpSample& sample, std::size_t m, RandomStream& rng) {
  const std::size_t n = sample.values.size();
  if (m == 0 || m > n) throw std::invalid_argument("nested_subsample: need 1 <= m <= n");
  // Floyd's algorithm for a uniform m-subset of {0, ..., n-1}.
  std::vector<std::size_t> positions;
  positions.reserve(m);
  for (std::size_t j = n - m; j < n; ++j) {
    const std::size_t t = static_cast<std::size_t>(rng.uniform01() * static_cast<double>(j + 1));
    const std::size_t candidate = t <= j ? t : j;
    if (std::find(positions.begin(), positions.end(), candidate) == positions.end())
      positions.push_back(candidate);
    else
      positions.push_back(j);
  }
  std::sort(positions.begin(), positions.end());
  std::vector<double> picked(m);
  for (std::size_t i = 0; i < m; ++i) picked[i] = sample.values[positions[i]];

  SbpSample out;
  out.source = picked;  // the selected items, in their picked order
  out.pick_order.resize(m);
  std::iota(out.pick_order.begin(), out.pick_order.end(), 0);
  out.values = picked;
  out.remaining_totals.assign(m, 0.0);
  double acc = 0.0;
  for (std::size_t k = m; k-- > 0;) {
    acc += out.values[k];
    out.remaining_totals[k] = acc;
  }
  return out;
}

void write_samples_csv(std::ostream& os, const std::vector<SbpSample>& replicas) {
  os << "replica,k,value,source_index\n";
  char buf[64];
  for (std::size_t r = 0; r < replicas.size(); ++r) {
    const auto& s = replicas[r];
    for (std::size_t k = 0; k < s.values.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", s.values[k]);
      os << (r + 1) << ',' << (k + 1) << ',' << buf << ',' << (s.pick_order[k] + 1)
         << '\n';
    }
  }
}

}  // namespace sbp

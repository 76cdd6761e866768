#pragma once

#include <cmath>
#include <functional>

namespace sbp {

// Thin wrappers over adaptive quadrature backends, tuned for the integrals in
// this codebase: 1e-10 absolute / 1e-8 relative unless a caller tightens them.
struct QuadratureOptions {
  double rel_tol = 1e-10;
  int max_levels = 15;
};

// Adaptive Gauss-Kronrod on a finite interval.
double integrate(const std::function<double(double)>& f, double lo, double hi,
                 const QuadratureOptions& opts = {});

// tanh-sinh on a finite interval; robust to integrable endpoint singularities.
double integrate_singular(const std::function<double(double)>& f, double lo,
                          double hi, const QuadratureOptions& opts = {});

// Integral over (lo, infinity) of an eventually exponentially-decaying
// integrand, split at `split` (must be > lo): Gauss-Kronrod on the bulk
// [lo, split], then the tail transform y = split - log(1 - v) mapping the
// remainder onto v in (0,1), handled by tanh-sinh because the transform can
// leave an integrable endpoint singularity at v -> 1.
double integrate_semi_infinite(const std::function<double(double)>& f,
                               double lo, double split,
                               const QuadratureOptions& opts = {});

}  // namespace sbp

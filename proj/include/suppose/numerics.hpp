#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace suppose::numerics {

/// Gauss-Legendre nodes and weights on [-1, 1].
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int order);

/// Composite Simpson rule with `intervals` (rounded up to even) subintervals.
double simpson(const std::function<double(double)>& f, double a, double b, std::size_t intervals);

/// Residual callback for least squares: fills r (size m) for parameters p.
using ResidualFn = std::function<void(std::span<const double> p, std::span<double> r)>;

struct LsqOptions {
  int max_iterations = 200;
  double initial_lambda = 1e-3;
  double gradient_tol = 1e-14;
  double step_tol = 1e-13;
  double cost_tol = 1e-16;
};

struct LsqResult {
  std::vector<double> params;
  double cost = 0.0;  // sum of squared residuals
  int iterations = 0;
  bool converged = false;
};

/// Damped Gauss-Newton (Levenberg-Marquardt) with a central-difference Jacobian.
LsqResult levenberg_marquardt(const ResidualFn& fn, std::vector<double> p0, std::size_t m,
                              const LsqOptions& opts = {});

/// 64-bit mixer used to derive independent RNG streams from (seed, tags...).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

using Rng = std::mt19937_64;

}  // namespace suppose::numerics

#include "suppose/numerics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace suppose::numerics {

std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int order) {
  if (order < 1) throw std::invalid_argument("quadrature order must be >= 1");
  const auto n = static_cast<std::size_t>(order);
  std::vector<double> x(n), w(n);
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(n) + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (std::size_t k = 1; k <= n; ++k) {
        const double p3 = p2;
        p2 = p1;
        const auto kd = static_cast<double>(k);
        p1 = ((2.0 * kd - 1.0) * z * p2 - (kd - 1.0) * p3) / kd;
      }
      // p1 = P_n(z), p2 = P_{n-1}(z)
      dp = static_cast<double>(n) * (z * p1 - p2) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    w[n - 1 - i] = w[i];
  }
  return {x, w};
}

double simpson(const std::function<double(double)>& f, double a, double b, std::size_t intervals) {
  std::size_t n = std::max<std::size_t>(2, intervals + (intervals % 2));
  const double h = (b - a) / static_cast<double>(n);
  double s = f(a) + f(b);
  for (std::size_t i = 1; i < n; ++i) s += f(a + h * static_cast<double>(i)) * ((i % 2) ? 4.0 : 2.0);
  return s * h / 3.0;
}

namespace {

double sq_norm(const std::vector<double>& r) {
  double s = 0.0;
  for (double v : r) s += v * v;
  return s;
}

Eigen::MatrixXd jacobian(const ResidualFn& fn, const std::vector<double>& p, std::size_t m) {
  const std::size_t n = p.size();
  Eigen::MatrixXd J(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  std::vector<double> q = p, rp(m), rm(m);
  for (std::size_t j = 0; j < n; ++j) {
    const double h = 6e-6 * std::max(std::abs(p[j]), 1e-3);
    q[j] = p[j] + h;
    fn(q, rp);
    q[j] = p[j] - h;
    fn(q, rm);
    q[j] = p[j];
    for (std::size_t i = 0; i < m; ++i)
      J(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (rp[i] - rm[i]) / (2.0 * h);
  }
  return J;
}

}  // namespace

LsqResult levenberg_marquardt(const ResidualFn& fn, std::vector<double> p, std::size_t m,
                              const LsqOptions& opts) {
  const std::size_t n = p.size();
  std::vector<double> r(m), trial_r(m);
  fn(p, r);
  double cost = sq_norm(r);
  LsqResult res;
  if (!std::isfinite(cost)) {
    res.params = p;
    res.cost = cost;
    return res;
  }

  double lambda = opts.initial_lambda;
  Eigen::MatrixXd J = jacobian(fn, p, m);
  int it = 0;
  for (; it < opts.max_iterations; ++it) {
    Eigen::Map<const Eigen::VectorXd> rv(r.data(), static_cast<Eigen::Index>(m));
    const Eigen::MatrixXd A = J.transpose() * J;
    const Eigen::VectorXd g = J.transpose() * rv;
    if (g.lpNorm<Eigen::Infinity>() <= opts.gradient_tol * std::max(1.0, cost)) {
      res.converged = true;
      break;
    }
    bool accepted = false;
    for (int inner = 0; inner < 40 && !accepted; ++inner) {
      Eigen::MatrixXd Ad = A;
      for (Eigen::Index d = 0; d < Ad.rows(); ++d) Ad(d, d) += lambda * std::max(A(d, d), 1e-12);
      const Eigen::VectorXd delta = Ad.ldlt().solve(-g);
      std::vector<double> trial(n);
      double step = 0.0, scale = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        trial[j] = p[j] + delta(static_cast<Eigen::Index>(j));
        step += delta(static_cast<Eigen::Index>(j)) * delta(static_cast<Eigen::Index>(j));
        scale += p[j] * p[j];
      }
      fn(trial, trial_r);
      const double trial_cost = sq_norm(trial_r);
      if (std::isfinite(trial_cost) && trial_cost <= cost) {
        const double drop = cost - trial_cost;
        p = std::move(trial);
        r = trial_r;
        cost = trial_cost;
        lambda = std::max(lambda / 3.0, 1e-12);
        accepted = true;
        if (std::sqrt(step) <= opts.step_tol * (std::sqrt(scale) + opts.step_tol) ||
            drop <= opts.cost_tol * std::max(cost, 1e-300)) {
          res.converged = true;
        }
      } else {
        lambda *= 4.0;
        if (lambda > 1e16) break;
      }
    }
    if (!accepted) {
      res.converged = true;  // no descent direction left at working precision
      break;
    }
    if (res.converged) break;
    J = jacobian(fn, p, m);
  }
  res.params = p;
  res.cost = cost;
  res.iterations = it;
  return res;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  auto splitmix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return splitmix(splitmix(splitmix(seed) ^ a) ^ (b * 0xd1b54a32d192ed03ULL));
}

}  // namespace suppose::numerics

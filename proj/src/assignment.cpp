#include "suppose/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "suppose/signal.hpp"

namespace suppose {

namespace {

void check(const CostMatrix& c) {
  if (c.cost.size() != c.n * c.n) throw InputError("cost matrix is not square");
  for (double v : c.cost)
    if (!std::isfinite(v)) throw InputError("cost matrix has non-finite entries");
}

double total(const CostMatrix& c, const std::vector<std::size_t>& col) {
  double s = 0.0;
  for (std::size_t i = 0; i < c.n; ++i) s += c(i, col[i]);
  return s;
}

}  // namespace

Assignment hungarian(const CostMatrix& c) {
  check(c);
  const std::size_t n = c.n;
  Assignment out;
  if (n == 0) return out;
  constexpr double inf = std::numeric_limits<double>::infinity();
  // 1-based arrays; p[j] is the row matched to column j, column 0 is the virtual root.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      const double* row = c.cost.data() + (i0 - 1) * n;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = row[j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  out.column_of_row.assign(n, 0);
  for (std::size_t j = 1; j <= n; ++j) out.column_of_row[p[j] - 1] = j - 1;
  out.cost = total(c, out.column_of_row);
  return out;
}

Assignment auction(const CostMatrix& c, double rel_excess) {
  check(c);
  const std::size_t n = c.n;
  Assignment out;
  if (n == 0) return out;
  if (!(rel_excess > 0.0)) return hungarian(c);
  constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
  const double max_cost = *std::max_element(c.cost.begin(), c.cost.end());
  const double min_cost = *std::min_element(c.cost.begin(), c.cost.end());
  const double range = max_cost - min_cost;
  if (range == 0.0) {
    out.column_of_row.resize(n);
    std::iota(out.column_of_row.begin(), out.column_of_row.end(), 0);
    out.cost = total(c, out.column_of_row);
    return out;
  }
  // Maximize benefit -cost: rows bid for columns.
  std::vector<double> price(n, 0.0);
  std::vector<std::size_t> owner(n), col_of(n);
  double eps = range / 4.0;
  const double eps_floor = range * 1e-12;
  for (;;) {
    std::fill(owner.begin(), owner.end(), none);
    std::fill(col_of.begin(), col_of.end(), none);
    std::vector<std::size_t> queue(n);
    std::iota(queue.begin(), queue.end(), 0);
    while (!queue.empty()) {
      const std::size_t i = queue.back();
      queue.pop_back();
      const double* row = c.cost.data() + i * n;
      double best = -std::numeric_limits<double>::infinity(), second = best;
      std::size_t bj = 0;
      for (std::size_t j = 0; j < n; ++j) {
        const double val = -row[j] - price[j];
        if (val > best) {
          second = best;
          best = val;
          bj = j;
        } else if (val > second) {
          second = val;
        }
      }
      const double incr = (n > 1 ? best - second : 0.0) + eps;
      price[bj] += incr;
      if (owner[bj] != none) {
        col_of[owner[bj]] = none;
        queue.push_back(owner[bj]);
      }
      owner[bj] = i;
      col_of[i] = bj;
    }
    const double cost = total(c, col_of);
    // eps-complementary slackness gives cost <= optimum + n eps.
    const double slack = static_cast<double>(n) * eps;
    if (slack * (1.0 + rel_excess) <= rel_excess * cost || eps <= eps_floor) {
      out.column_of_row = col_of;
      out.cost = cost;
      out.exact = false;
      out.max_excess = slack;
      return out;
    }
    eps /= 5.0;
  }
}

Assignment brute_force_assignment(const CostMatrix& c) {
  check(c);
  if (c.n > 10) throw InputError("brute-force assignment limited to n <= 10");
  std::vector<std::size_t> perm(c.n);
  std::iota(perm.begin(), perm.end(), 0);
  Assignment best;
  best.column_of_row = perm;
  best.cost = total(c, perm);
  while (std::next_permutation(perm.begin(), perm.end())) {
    const double v = total(c, perm);
    if (v < best.cost) {
      best.cost = v;
      best.column_of_row = perm;
    }
  }
  return best;
}

Assignment solve_assignment(const CostMatrix& c, std::size_t exact_limit) {
  return c.n <= exact_limit ? hungarian(c) : auction(c);
}

}  // namespace suppose

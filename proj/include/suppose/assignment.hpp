#pragma once

#include <cstddef>
#include <vector>

namespace suppose {

/// Square cost matrix stored row-major.
struct CostMatrix {
  std::size_t n = 0;
  std::vector<double> cost;

  double operator()(std::size_t i, std::size_t j) const { return cost[i * n + j]; }
};

struct Assignment {
  std::vector<std::size_t> column_of_row;  // row i is matched to column column_of_row[i]
  double cost = 0.0;
  bool exact = true;
  double max_excess = 0.0;  // certified upper bound on cost - optimum (0 when exact)
};

/// Minimum-cost perfect matching, O(n^3) shortest augmenting paths with potentials.
Assignment hungarian(const CostMatrix& c);

/// Forward auction with epsilon scaling. Stops once the result is certified to
/// exceed the optimum by at most `rel_excess` of the optimum.
Assignment auction(const CostMatrix& c, double rel_excess = 0.05);

/// Exhaustive minimum over all n! permutations (small n only).
Assignment brute_force_assignment(const CostMatrix& c);

/// hungarian() up to `exact_limit` rows, auction() above.
Assignment solve_assignment(const CostMatrix& c, std::size_t exact_limit = 2000);

}  // namespace suppose

#pragma once

#include <cmath>
#include <vector>

#include "suppose/irf.hpp"
#include "suppose/signal.hpp"

namespace testing_support {

inline suppose::SampledSignal sample(const suppose::IrfModel& irf, const suppose::PixelGrid& g,
                                     const std::vector<suppose::Point>& sources, double alpha,
                                     double background = 0.0) {
  std::vector<double> v(g.size(), background);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const suppose::Point x = g.center(i);
    for (const suppose::Point& a : sources) v[i] += alpha * irf({x[0] - a[0], x[1] - a[1]});
  }
  return {g, v};
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

}  // namespace testing_support

#include <cmath>
#include <random>

#include "doctest.h"
#include "suppose/assignment.hpp"
#include "suppose/evaluation.hpp"

using namespace suppose;

TEST_CASE("matched sigma equals the factorial minimum on small instances") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + trial % 8;
    std::vector<Point> a(n), b(n);
    for (std::size_t k = 0; k < n; ++k) {
      a[k] = {u(rng), u(rng)};
      b[k] = {u(rng), u(rng)};
    }
    const CostMatrix c = squared_distance_costs(a, b);
    const Assignment brute = brute_force_assignment(c);
    const Assignment hung = hungarian(c);
    CHECK(hung.cost == doctest::Approx(brute.cost).epsilon(1e-12));
    const MatchedSigma ms = matched_sigma(a, b);
    CHECK(ms.sigma * ms.sigma * static_cast<double>(n) == doctest::Approx(brute.cost).epsilon(1e-12));
  }
}

TEST_CASE("matched sigma of identical and relabeled sets") {
  const std::vector<Point> a{{1.0, 2.0}, {3.0, 1.0}, {0.5, 0.5}, {7.0, 7.0}};
  const MatchedSigma same = matched_sigma(a, a);
  CHECK(same.sigma == 0.0);
  CHECK(same.assignment == std::vector<std::size_t>{0, 1, 2, 3});
  std::vector<Point> rev(a.rbegin(), a.rend());
  CHECK(matched_sigma(a, rev).sigma == 0.0);
  CHECK_THROWS_AS(matched_sigma(a, std::vector<Point>{{0.0, 0.0}}), InputError);
}

TEST_CASE("optimal matching is no worse than the identity pairing") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<Point> a(50), b(50);
  double ident = 0.0;
  for (std::size_t k = 0; k < 50; ++k) {
    a[k] = {nd(rng), nd(rng)};
    b[k] = {nd(rng), nd(rng)};
    ident += std::pow(a[k][0] - b[k][0], 2) + std::pow(a[k][1] - b[k][1], 2);
  }
  CHECK(matched_sigma(a, b).sigma <= std::sqrt(ident / 50.0));
}

TEST_CASE("auction stays within its certified excess") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 30.0);
  const std::size_t n = 300;
  std::vector<Point> a(n), b(n);
  for (std::size_t k = 0; k < n; ++k) {
    a[k] = {u(rng), u(rng)};
    b[k] = {u(rng), u(rng)};
  }
  const CostMatrix c = squared_distance_costs(a, b);
  const Assignment exact = hungarian(c);
  const Assignment approx = auction(c, 0.05);
  CHECK(approx.cost >= exact.cost - 1e-9);
  CHECK(approx.cost - exact.cost <= approx.max_excess + 1e-9);
  CHECK(approx.cost <= 1.05 * exact.cost + 1e-9);
}

TEST_CASE("histograms conserve counts") {
  const PixelGrid g = PixelGrid::image(20, 20, 1.0);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-0.5, 19.5);
  std::vector<Point> s(333);
  for (Point& p : s) p = {u(rng), u(rng)};
  for (int level = -2; level <= 5; ++level) CHECK(histogram_level(s, g, level).total() == s.size());

  const std::vector<Point> same(17, Point{4.3, 8.8});
  for (int level = -2; level <= 5; ++level) {
    const Histogram h = histogram_level(same, g, level);
    CHECK(h.occupied() == 1);
    CHECK(h.counts[0] == 17);
  }
  const Histogram h = histogram_level(s, g, 1);
  const GroundTruth gt = h.intensities(2.5);
  CHECK(gt.total() == doctest::Approx(2.5 * 333.0));
}

TEST_CASE("smoothed render conserves mass and reduces to a histogram") {
  const PixelGrid g = PixelGrid::line(30, 0.5);
  SourceSet s{{{3.1, 0.0}, {3.2, 0.0}, {7.7, 0.0}, {10.05, 0.0}}, 2.0, g};
  const SampledSignal delta = render_smoothed(s, g);
  CHECK(delta.sum() == doctest::Approx(8.0));
  const Histogram h = histogram_sources(s.positions, g, {0.5, 0.5});
  for (std::size_t b = 0; b < h.occupied(); ++b)
    CHECK(delta.values[static_cast<std::size_t>(h.bins[b][0])] == doctest::Approx(2.0 * h.counts[b]));

  const auto box = [](Point x) { return std::abs(x[0]) <= 0.6 ? 1.0 : 0.0; };
  CHECK(render_smoothed(s, g, box).sum() == doctest::Approx(8.0).epsilon(1e-12));
}

TEST_CASE("lobe statistics") {
  const LineSpec l1{{0.0, 0.0}, {0.0, 1.0}}, l2{{2.0, 0.0}, {0.0, 1.0}};
  std::vector<Point> on;
  for (int k = 0; k < 10; ++k) {
    on.push_back({0.0, static_cast<double>(k)});
    on.push_back({2.0, static_cast<double>(k)});
  }
  const auto st = line_lobe_stats(on, l1, l2);
  CHECK(st[0].count == 10);
  CHECK(st[1].count == 10);
  CHECK(st[0].stddev == doctest::Approx(0.0));
  CHECK(st[1].mean_offset == doctest::Approx(0.0));
}

TEST_CASE("lobe spread is invariant under rotating the analysis axes") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> nd(0.0, 0.4);
  const std::vector<Point> base_centers{{0.0, 0.0}, {5.0, 0.0}};
  std::vector<Point> cloud;
  for (const Point& c : base_centers)
    for (int k = 0; k < 4000; ++k) cloud.push_back({c[0] + nd(rng), c[1] + nd(rng)});
  const auto ref = line_lobe_stats(cloud, {{0.0, 0.0}, {0.0, 1.0}}, {{5.0, 0.0}, {0.0, 1.0}});
  for (double th : {0.3, 0.9, 1.4}) {
    const double c = std::cos(th), s = std::sin(th);
    std::vector<Point> rot;
    for (const Point& p : cloud) rot.push_back({c * p[0] - s * p[1], s * p[0] + c * p[1]});
    const LineSpec r1{{0.0, 0.0}, {-s, c}}, r2{{5.0 * c, 5.0 * s}, {-s, c}};
    const auto st = line_lobe_stats(rot, r1, r2);
    for (int k = 0; k < 2; ++k) CHECK(std::abs(st[k].stddev / ref[k].stddev - 1.0) <= 0.05);
  }
}

TEST_CASE("clusters along x") {
  const std::vector<Point> s{{1.0, 0.0}, {1.1, 0.0}, {1.2, 0.0}, {5.0, 0.0}, {5.1, 0.0}};
  const std::vector<double> lines{1.05, 5.0, 9.0};
  const auto near = nearest_line_clusters(s, lines);
  CHECK(near.size() == 3);
  CHECK(near[0].count == 3);
  CHECK(near[0].centroid == doctest::Approx(1.1));
  CHECK(near[2].count == 0);

  const PixelGrid g = PixelGrid::line(100, 0.1);
  const auto runs = contiguous_clusters(s, g, 0.1);
  CHECK(runs.size() == 2);
  CHECK(runs[0].count == 3);
  CHECK(runs[1].centroid == doctest::Approx(5.05));
}

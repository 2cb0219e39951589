#include <cmath>
#include <numbers>

#include "doctest.h"
#include "helpers.hpp"
#include "suppose/forward_model.hpp"
#include "suppose/synth.hpp"

using namespace suppose;

namespace {

double gauss1(double x, double s) { return std::exp(-0.5 * x * x / (s * s)) / (s * std::sqrt(2.0 * std::numbers::pi)); }

}  // namespace

TEST_CASE("pixelating a constant leaves it unchanged") {
  const PixelatedIrf p = pixelate_irf([](Point) { return 3.5; }, 2, {1.0, 1.0});
  CHECK(p({0.3, -0.2}) == doctest::Approx(3.5).epsilon(1e-14));
}

TEST_CASE("pixelation quadrature matches a dense Riemann sum") {
  const double s = 1.435;
  const PixelatedIrf p = pixelate_irf([s](Point x) { return gauss1(x[0], s); }, 1, {1.0, 1.0});
  const std::size_t n = 1000000;
  for (double x0 : {0.0, 0.8, 2.3}) {
    double riemann = 0.0;
    for (std::size_t i = 0; i < n; ++i) riemann += gauss1(x0 - 0.5 + (static_cast<double>(i) + 0.5) / n, s);
    riemann /= static_cast<double>(n);
    CHECK(std::abs(p({x0, 0.0}) - riemann) / riemann < 1e-8);
  }
}

TEST_CASE("pixelation keeps symmetry") {
  const PixelatedIrf p = pixelate_irf([](Point x) { return gauss1(x[0], 1.1); }, 1, {1.0, 1.0});
  for (double x : {0.25, 1.0, 2.7}) CHECK(std::abs(p({x, 0.0}) - p({-x, 0.0})) < 1e-12);
}

TEST_CASE("single source at a node equals the shifted response") {
  const IrfModel irf = IrfModel::gaussian_halo_2d(1.0, 0.2, 0.003, 0.5, 3.9);
  const PixelGrid g = PixelGrid::image(15, 15, 1.0);
  SourceSet s{{{7.0, 6.0}}, 1.0, g};
  const SampledSignal m = evaluate_model(s, irf, g, BackgroundMode::None);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Point x = g.center(i);
    CHECK(std::abs(m.values[i] - irf({x[0] - 7.0, x[1] - 6.0})) < 1e-12);
  }
}

TEST_CASE("coincident sources double the field") {
  const IrfModel irf = IrfModel::asymmetric_1d(1.0, 2.0, 1.0);
  const PixelGrid g = PixelGrid::line(40, 0.25, -5.0);
  const SampledSignal one = evaluate_model(SourceSet{{{0.3, 0.0}}, 1.0, g}, irf, g, BackgroundMode::None);
  const SampledSignal two =
      evaluate_model(SourceSet{{{0.3, 0.0}, {0.3, 0.0}}, 1.0, g}, irf, g, BackgroundMode::None);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(two.values[i] == doctest::Approx(2.0 * one.values[i]).epsilon(1e-14));
}

TEST_CASE("model is linear in the source set") {
  const IrfModel irf = IrfModel::gaussian_2d(1.435);
  const PixelGrid g = PixelGrid::image(12, 10, 1.0);
  const std::vector<Point> a{{2.2, 3.1}, {5.5, 4.0}}, b{{8.1, 7.7}, {3.3, 3.3}, {6.0, 1.0}};
  std::vector<Point> ab = a;
  ab.insert(ab.end(), b.begin(), b.end());
  for (BackgroundMode mode : {BackgroundMode::None, BackgroundMode::UnknownConstant}) {
    const SampledSignal sa = evaluate_model(SourceSet{a, 2.5, g}, irf, g, mode);
    const SampledSignal sb = evaluate_model(SourceSet{b, 2.5, g}, irf, g, mode);
    const SampledSignal sab = evaluate_model(SourceSet{ab, 2.5, g}, irf, g, mode);
    for (std::size_t i = 0; i < g.size(); ++i)
      CHECK(std::abs(sab.values[i] - sa.values[i] - sb.values[i]) <= 1e-10 * std::abs(sab.values[i]) + 1e-14);
  }
}

TEST_CASE("deviation response sums to zero") {
  const IrfModel irf = IrfModel::gaussian_halo_2d(1.0, 0.2, 0.003, 0.5, 3.9);
  const PixelGrid g = PixelGrid::image(21, 17, 1.0);
  const CenteredKernel k(irf, g, BackgroundMode::UnknownConstant);
  double sum = 0.0, abs_sum = 0.0;
  for (double v : k.samples()) {
    sum += v;
    abs_sum += std::abs(v);
  }
  CHECK(std::abs(sum) <= 1e-9 * abs_sum);

  const SampledSignal m =
      evaluate_model(SourceSet{{{4.2, 9.9}, {12.0, 3.3}}, 3.0, g}, irf, g, BackgroundMode::UnknownConstant);
  double ms = 0.0, ma = 0.0;
  for (double v : m.values) {
    ms += v;
    ma += std::abs(v);
  }
  CHECK(std::abs(ms) <= 1e-9 * ma);
}

TEST_CASE("asymmetric response width and parity") {
  const IrfModel sym = IrfModel::asymmetric_1d(1.0, 1.5, 1.5);
  const IrfModel asym = IrfModel::asymmetric_1d(1.0, 2.0, 1.0);
  CHECK(sym.has_parity());
  CHECK_FALSE(asym.has_parity());
  CHECK(sym.width() > 0.0);
  const IrfModel sp = spectrometer_irf();
  CHECK(sp.width() == doctest::Approx(1.23).epsilon(1e-6));
}

TEST_CASE("two-line fixture renders to the stated peak and background") {
  TwoLineParams p;
  p.noise = NoiseModel::none();
  const Scenario sc = make_two_line_scene(p);
  const SceneRender r = render_scene(sc);
  CHECK(r.clean.max() == doctest::Approx(60000.0).epsilon(1e-12));
  CHECK(r.truth.size() == 142);

  const SampledSignal model = evaluate_model(SourceSet{r.truth.support, r.truth.intensities[0], sc.grid}, sc.irf,
                                             sc.grid, BackgroundMode::None);
  for (std::size_t i = 0; i < sc.grid.size(); ++i)
    CHECK(model.values[i] + 20000.0 == doctest::Approx(r.clean.values[i]).epsilon(1e-12));
}

TEST_CASE("line separation of the two-line fixture") {
  const auto [x1, x2] = two_line_positions(TwoLineParams{});
  CHECK(x2 - x1 == doctest::Approx(144.0 / 68.0).epsilon(1e-12));
}

TEST_CASE("single spectral line equals the scaled shifted response") {
  const IrfModel irf = spectrometer_irf();
  const PixelGrid g = PixelGrid::line(64, 0.22, 580.0);
  const Scenario sc = make_spectral_scene({{586.0, 700.0}}, irf, g, NoiseModel::none());
  const SceneRender r = render_scene(sc);
  for (std::size_t i = 0; i < g.size(); ++i)
    CHECK(r.signal.values[i] == doctest::Approx(700.0 * irf({g.center(i)[0] - 586.0, 0.0})).epsilon(1e-12));
}

TEST_CASE("seeded noise is reproducible and averages out") {
  const Scenario sc = na_doublet_scene(4);
  const SceneRender a = render_scene(sc), b = render_scene(sc);
  CHECK(a.signal.values == b.signal.values);

  std::vector<double> mean(sc.grid.size(), 0.0);
  const int reps = 1000;
  for (int s = 0; s < reps; ++s) {
    const SceneRender r = render_scene(sc, static_cast<std::uint64_t>(s + 100));
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += r.signal.values[i] / reps;
  }
  for (std::size_t i = 0; i < mean.size(); ++i) {
    const double sd = sc.noise.stddev(a.clean.values[i]);
    CHECK(std::abs(mean[i] - a.clean.values[i]) < 3.0 * sd / std::sqrt(static_cast<double>(reps)));
  }
}

#include <algorithm>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "suppose/ga.hpp"
#include "suppose/objective.hpp"
#include "suppose/synth.hpp"

using namespace suppose;
using testing_support::sample;

namespace {

const IrfModel kIrf1 = IrfModel::asymmetric_1d(1.0, 1.2, 1.2);

}  // namespace

TEST_CASE("self-fit has zero chi2") {
  const PixelGrid g = PixelGrid::image(16, 16, 1.0);
  const IrfModel irf = IrfModel::gaussian_2d(1.435);
  const std::vector<Point> src{{5.3, 6.1}, {9.7, 8.2}, {7.0, 7.0}};
  const SampledSignal s = sample(irf, g, src, 1000.0);
  const ObjectiveContext ctx(s, irf, BackgroundMode::None);
  double norm = 0.0;
  for (double v : s.values) norm += v * v;
  CHECK(chi_squared(SourceSet{src, 1000.0, g}, ctx) <= 1e-8 * norm);
}

TEST_CASE("chi2 change after moving one source matches direct recomputation") {
  const PixelGrid g = PixelGrid::image(16, 16, 1.0);
  const IrfModel irf = IrfModel::gaussian_2d(1.435);
  const std::vector<Point> src{{5.3, 6.1}, {9.7, 8.2}};
  const SampledSignal s = sample(irf, g, src, 1000.0);
  const ObjectiveContext ctx(s, irf, BackgroundMode::None);
  std::vector<Point> moved = src;
  moved[1][0] += 1.0;
  const SampledSignal m = sample(irf, g, moved, 1000.0);
  double direct = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) direct += (s.values[i] - m.values[i]) * (s.values[i] - m.values[i]);
  CHECK(chi_squared(SourceSet{moved, 1000.0, g}, ctx) == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("chi2 does not depend on source order") {
  const PixelGrid g = PixelGrid::line(48, 0.5);
  const SampledSignal s = sample(kIrf1, g, {{10.0, 0.0}, {13.0, 0.0}}, 5.0, 1.0);
  const ObjectiveContext ctx(s, kIrf1, BackgroundMode::UnknownConstant);
  std::vector<Point> p{{9.1, 0.0}, {12.4, 0.0}, {14.2, 0.0}, {3.3, 0.0}};
  const double a = chi_squared(SourceSet{p, 2.0, g}, ctx);
  std::reverse(p.begin(), p.end());
  CHECK(chi_squared(SourceSet{p, 2.0, g}, ctx) == doctest::Approx(a).epsilon(1e-12));
}

TEST_CASE("fitness") {
  CHECK(fitness(0.0, 1.0) == 1.0);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1e6);
  for (int t = 0; t < 100; ++t) {
    const double a = u(rng), b = u(rng);
    if (a < b) CHECK(fitness(a, 10.0) > fitness(b, 10.0));
  }
}

TEST_CASE("alpha refit recovers an exact scale") {
  const PixelGrid g = PixelGrid::line(64, 0.5);
  const std::vector<Point> src{{12.0, 0.0}, {16.5, 0.0}};
  const SampledSignal s = sample(kIrf1, g, src, 2.0, 7.0);
  const ObjectiveContext ctx(s, kIrf1, BackgroundMode::UnknownConstant);
  CHECK(refit_alpha(std::span<const Point>(src), ctx) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("alpha refit matches a dense scan") {
  const Scenario sc = na_doublet_scene(2);
  const SceneRender r = render_scene(sc);
  const ObjectiveContext ctx(r.signal, sc.irf, BackgroundMode::UnknownConstant);
  const std::vector<Point> pos{{588.9, 0.0}, {589.1, 0.0}, {589.0, 0.0}, {589.6, 0.0}, {589.5, 0.0}};
  const double a_star = refit_alpha(std::span<const Point>(pos), ctx);
  const std::vector<double> u = ctx.basis(pos);
  const std::size_t steps = 10000;
  double best = 1e300;
  std::size_t best_k = 0;
  for (std::size_t k = 0; k <= steps; ++k) {
    const double a = a_star * (0.5 + static_cast<double>(k) / steps);
    const double c = ctx.chi_squared_from_basis(u, a);
    if (c < best) {
      best = c;
      best_k = k;
    }
  }
  CHECK(best_k == steps / 2);
}

TEST_CASE("alpha refit rejects a vanishing basis") {
  const PixelGrid g = PixelGrid::line(32, 1.0);
  const SampledSignal s = sample(kIrf1, g, {{10.0, 0.0}}, 1.0);
  const ObjectiveContext ctx(s, kIrf1, BackgroundMode::UnknownConstant);
  const std::vector<Point> far{{1e6, 0.0}};
  CHECK_THROWS_AS(refit_alpha(std::span<const Point>(far), ctx), InputError);
}

TEST_CASE("initial family from a single peak lands on its pixel") {
  const PixelGrid g = PixelGrid::line(32, 1.0);
  const SampledSignal s = sample(kIrf1, g, {{14.2, 0.0}}, 10.0);
  const ObjectiveContext ctx(s, kIrf1, BackgroundMode::None);
  const Population pop = build_initial_family(ctx, 1, 10.0, 1, 0.0, 5);
  CHECK(pop[0].positions[0][0] == doctest::Approx(14.0));
}

TEST_CASE("initial family is reproducible and beats random placement") {
  const Scenario sc = make_two_line_scene();
  const SceneRender r = render_scene(sc);
  const ObjectiveContext ctx(r.signal, sc.irf, BackgroundMode::UnknownConstant);
  const double alpha0 = r.truth.total() / 461.0;
  const Population a = build_initial_family(ctx, 461, alpha0, 50, 0.5, 9);
  const Population b = build_initial_family(ctx, 461, alpha0, 50, 0.5, 9);
  for (std::size_t l = 0; l < a.size(); ++l) {
    CHECK(a[l].positions == b[l].positions);
    CHECK(a[l].chi2 == b[l].chi2);
  }
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> ux(-0.5, 24.5);
  Individual rnd;
  for (int k = 0; k < 461; ++k) rnd.positions.push_back({ux(rng), ux(rng)});
  evaluate(rnd, ctx, alpha0);
  CHECK(a[best_index(a)].chi2 < rnd.chi2);
}

TEST_CASE("full elitism leaves the population unchanged") {
  const PixelGrid g = PixelGrid::line(40, 1.0);
  const SampledSignal s = sample(kIrf1, g, {{15.0, 0.0}, {22.0, 0.0}}, 10.0);
  const ObjectiveContext ctx(s, kIrf1, BackgroundMode::None);
  Population pop = build_initial_family(ctx, 4, 5.0, 8, 0.5, 1);
  std::vector<std::vector<Point>> before;
  for (const Individual& i : pop) before.push_back(i.positions);
  GaConfig cfg;
  cfg.population = 8;
  cfg.elite = 8;
  cfg.crossover = 8;
  cfg.mutation = 8;
  double alpha = 5.0;
  step_generation(pop, ctx, cfg, alpha, 0);
  std::vector<std::vector<Point>> after;
  for (const Individual& i : pop) after.push_back(i.positions);
  std::sort(before.begin(), before.end());
  std::sort(after.begin(), after.end());
  CHECK(before == after);
}

TEST_CASE("best chi2 never increases across a generation") {
  const Scenario sc = na_doublet_scene(1);
  const SceneRender r = render_scene(sc);
  const ObjectiveContext ctx(r.signal, sc.irf, BackgroundMode::UnknownConstant);
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    GaConfig cfg;
    cfg.population = 20;
    cfg.crossover = 12;
    cfg.mutation = 12;
    cfg.mutated_fraction = 0.3;
    cfg.seed = seed;
    Population pop = build_initial_family(ctx, 6, 200.0, cfg.population, 0.5, seed);
    double alpha = 200.0;
    for (std::size_t gen = 0; gen < 5; ++gen) {
      const double before = pop[best_index(pop)].chi2;
      step_generation(pop, ctx, cfg, alpha, gen);
      CHECK(pop[best_index(pop)].chi2 <= before);
    }
  }
}

TEST_CASE("GA run trace is monotone and stops at the noise floor on exact data") {
  const PixelGrid g = PixelGrid::line(32, 1.0);
  const SampledSignal s = sample(kIrf1, g, {{12.0, 0.0}, {18.0, 0.0}}, 10.0);
  const ObjectiveContext ctx(s, kIrf1, BackgroundMode::None);
  GaConfig cfg;
  cfg.population = 40;
  cfg.crossover = 20;
  cfg.mutation = 20;
  cfg.mutated_fraction = 0.5;
  cfg.max_generations = 5000;
  cfg.noise_floor = 1e-6;
  cfg.stall_window = 5000;
  const GaRunRecord rec = run_ga(ctx, 2, 10.0, cfg);
  for (std::size_t k = 1; k < rec.best_chi2.size(); ++k) CHECK(rec.best_chi2[k] <= rec.best_chi2[k - 1]);
  CHECK(rec.stop_reason == StopReason::NoiseFloor);
  CHECK(rec.best_chi2_final <= 1.02e-6);
}

TEST_CASE("GA matches exhaustive grid search on a two-source toy") {
  const PixelGrid g = PixelGrid::line(32, 1.0);
  const std::vector<Point> truth{{13.3, 0.0}, {17.85, 0.0}};
  const double alpha = 10.0;
  const SampledSignal s = sample(kIrf1, g, truth, alpha);
  const ObjectiveContext ctx(s, kIrf1, BackgroundMode::None);

  // Exhaustive search over positions quantized at d_p / 8.
  const double cell = 1.0 / 8.0;
  const int steps = 32 * 8;
  std::vector<std::vector<double>> single(steps);
  for (int i = 0; i < steps; ++i) single[i] = ctx.basis(std::vector<Point>{{-0.5 + i * cell, 0.0}});
  double best = 1e300;
  int bi = 0, bj = 0;
  std::vector<double> u(g.size());
  for (int i = 0; i < steps; ++i)
    for (int j = i; j < steps; ++j) {
      for (std::size_t p = 0; p < g.size(); ++p) u[p] = single[i][p] + single[j][p];
      const double c = ctx.chi_squared_from_basis(u, alpha);
      if (c < best) {
        best = c;
        bi = i;
        bj = j;
      }
    }

  GaConfig cfg;
  cfg.population = 40;
  cfg.crossover = 20;
  cfg.mutation = 20;
  cfg.mutated_fraction = 0.5;
  cfg.max_generations = 3000;
  cfg.seed = 4;
  const GaRunRecord rec = run_ga(ctx, 2, alpha, cfg);
  std::vector<double> xs{rec.best.positions[0][0], rec.best.positions[1][0]};
  std::sort(xs.begin(), xs.end());
  CHECK(std::abs(xs[0] - (-0.5 + bi * cell)) <= cell);
  CHECK(std::abs(xs[1] - (-0.5 + bj * cell)) <= cell);
  CHECK(rec.best_chi2_final <= best);
}

TEST_CASE("GA runs are bit-reproducible") {
  const Scenario sc = na_doublet_scene(1);
  const SceneRender r = render_scene(sc);
  const ObjectiveContext ctx(r.signal, sc.irf, BackgroundMode::UnknownConstant);
  GaConfig cfg;
  cfg.max_generations = 200;
  cfg.seed = 21;
  const GaRunRecord a = run_ga(ctx, 5, 250.0, cfg);
  const GaRunRecord b = run_ga(ctx, 5, 250.0, cfg);
  CHECK(a.best.positions == b.best.positions);
  CHECK(a.best_chi2 == b.best_chi2);
  CHECK(a.best.alpha == b.best.alpha);
}

TEST_CASE("GA configuration validation") {
  GaConfig cfg;
  cfg.elite = cfg.population;
  CHECK_THROWS_AS(cfg.validate(), InputError);
  cfg = GaConfig{};
  cfg.mutated_fraction = 0.0;
  CHECK_THROWS_AS(cfg.validate(), InputError);
  cfg = GaConfig{};
  cfg.mutation = cfg.population + 1;
  CHECK_THROWS_AS(cfg.validate(), InputError);
}

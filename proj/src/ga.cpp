#include "suppose/ga.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "suppose/numerics.hpp"

namespace suppose {

using numerics::mix_seed;
using numerics::Rng;

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::NoiseFloor: return "noise-floor";
    case StopReason::Stalled: return "stalled";
    case StopReason::MaxGenerations: return "max-generations";
  }
  return "unknown";
}

void GaConfig::validate() const {
  if (population < 2) throw InputError("GA population must hold at least 2 individuals");
  if (elite < 1 || elite >= population) throw InputError("GA elite count must satisfy 1 <= ne < M");
  if (crossover > population || mutation > population)
    throw InputError("GA crossover/mutation counts cannot exceed the population");
  if (!(mutated_fraction > 0.0 && mutated_fraction <= 1.0))
    throw InputError("GA mutated fraction must lie in (0, 1]");
  if (!(mutation_scale > 0.0)) throw InputError("GA mutation scale must be positive");
  if (!(initial_spread >= 0.0)) throw InputError("GA initial spread must be >= 0");
  if (max_generations < 1) throw InputError("GA needs at least one generation");
  if (!(fitness_offset_fraction >= 0.0)) throw InputError("fitness offset fraction must be >= 0");
}

namespace {

// Seeds for the per-generation streams. Tag 0 drives selection of crossover and
// mutation slots; tags >= 1 are per slot (mutation) or per pair (crossover).
constexpr std::uint64_t kSelectionTag = 0;
constexpr std::uint64_t kMutationTag = 1ULL << 32;
constexpr std::uint64_t kCrossTag = 2ULL << 32;

std::size_t argmax_lowest(const std::vector<double>& t) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < t.size(); ++i)
    if (t[i] > t[best]) best = i;
  return best;
}

double median(std::vector<double> v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    m = 0.5 * (m + lower);
  }
  return m;
}

// First k entries of a random permutation of [0, n).
std::vector<std::size_t> draw_distinct(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  k = std::min(k, n);
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(k);
  return idx;
}

void evaluate_all(Population& pop, const std::vector<std::size_t>& which, const ObjectiveContext& ctx,
                  double alpha) {
  const auto count = static_cast<std::ptrdiff_t>(which.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t j = 0; j < count; ++j) evaluate(pop[which[static_cast<std::size_t>(j)]], ctx, alpha);
}

}  // namespace

void evaluate(Individual& ind, const ObjectiveContext& ctx, double alpha) {
  ind.basis = ctx.basis(ind.positions);
  ind.chi2 = ctx.chi_squared_from_basis(ind.basis, alpha);
}

Population build_initial_family(const ObjectiveContext& ctx, std::size_t n_sources, double alpha0,
                                std::size_t population, double spread, std::uint64_t seed) {
  if (n_sources < 1 || population < 1) throw InputError("initial family needs N >= 1 and M >= 1");
  const PixelGrid& grid = ctx.grid();
  const int dim = grid.dim;
  const double sd = spread * ctx.irf().width() / 2.0;
  const bool dev = uses_deviation(ctx.mode());
  const std::size_t n = grid.size();

  Population pop(population);
  const auto count = static_cast<std::ptrdiff_t>(population);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t l = 0; l < count; ++l) {
    Rng rng(mix_seed(seed, 0xfa11ULL, static_cast<std::uint64_t>(l)));
    std::normal_distribution<double> jitter(0.0, 1.0);
    Individual& ind = pop[static_cast<std::size_t>(l)];
    std::vector<double> t = ctx.target().values;
    std::vector<double> contrib(n);
    ind.positions.reserve(n_sources);
    ind.basis.assign(n, 0.0);
    for (std::size_t k = 0; k < n_sources; ++k) {
      const Point b = grid.center(argmax_lowest(t));
      Point a = b;
      for (int ax = 0; ax < dim; ++ax) a[ax] += sd * jitter(rng);
      ind.positions.push_back(a);
      std::fill(contrib.begin(), contrib.end(), 0.0);
      ctx.renderer().add_source(a, 1.0, contrib);
      ctx.renderer().add_source(a, 1.0, ind.basis);
      if (dev) remove_mean(contrib);
      for (std::size_t i = 0; i < n; ++i) t[i] -= alpha0 * contrib[i];
    }
    ind.chi2 = ctx.chi_squared_from_basis(ind.basis, alpha0);
  }
  return pop;
}

std::size_t best_index(const Population& pop) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < pop.size(); ++i)
    if (pop[i].chi2 < pop[best].chi2) best = i;
  return best;
}

void step_generation(Population& pop, const ObjectiveContext& ctx, const GaConfig& cfg, double& alpha,
                     std::size_t generation) {
  const std::size_t M = pop.size();
  if (M == 0) return;
  const std::size_t ne = std::min(cfg.elite, M);
  const int dim = ctx.grid().dim;

  // Rank by χ², stable so ties keep slot order.
  std::vector<std::size_t> order(M);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return pop[a].chi2 < pop[b].chi2; });

  std::vector<double> chi(M);
  for (std::size_t i = 0; i < M; ++i) chi[i] = pop[i].chi2;
  const double c0 = cfg.fitness_offset_fraction * median(chi);
  std::vector<double> fit(M);
  for (std::size_t i = 0; i < M; ++i) fit[i] = fitness(pop[i].chi2, c0);
  const double mean_fit = std::accumulate(fit.begin(), fit.end(), 0.0) / static_cast<double>(M);

  // Elite, then copies proportional to fitness (mean copy count 1), then next best.
  std::vector<std::size_t> parent;
  parent.reserve(M);
  for (std::size_t e = 0; e < ne; ++e) parent.push_back(order[e]);
  std::size_t r = 0;
  for (; r < M && parent.size() < M; ++r) {
    const double copies = std::floor(fit[order[r]] / mean_fit);
    if (copies < 1.0) break;
    for (double c = 0; c < copies && parent.size() < M; c += 1.0) parent.push_back(order[r]);
  }
  for (std::size_t f = r; parent.size() < M; ++f) parent.push_back(order[f % M]);

  Population next(M);
  for (std::size_t s = 0; s < M; ++s) next[s] = pop[parent[s]];

  Rng sel(mix_seed(cfg.seed, generation, kSelectionTag));
  const std::size_t free_slots = M - ne;
  std::vector<char> dirty(M, 0);
  const std::size_t N = next[0].positions.size();

  // Crossover: pair randomly chosen non-elite slots; swap each source with probability 1/2.
  const std::vector<std::size_t> crossed = draw_distinct(free_slots, cfg.crossover, sel);
  for (std::size_t p = 0; p + 1 < crossed.size(); p += 2) {
    const std::size_t a = ne + crossed[p], b = ne + crossed[p + 1];
    Rng rng(mix_seed(cfg.seed, generation, kCrossTag + p / 2));
    std::bernoulli_distribution coin(0.5);
    bool changed = false;
    for (std::size_t k = 0; k < N; ++k)
      if (coin(rng)) {
        std::swap(next[a].positions[k], next[b].positions[k]);
        changed = true;
      }
    if (changed) dirty[a] = dirty[b] = 1;
  }

  // Mutation: shift a random share of the coordinates by up to rho_mut.
  const double rho = ctx.irf().width() / 2.0 * cfg.mutation_scale;
  const std::size_t coords = N * static_cast<std::size_t>(dim);
  const auto n_coords = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(cfg.mutated_fraction * static_cast<double>(coords))));
  const std::vector<std::size_t> mutated = draw_distinct(free_slots, cfg.mutation, sel);
  for (std::size_t slot_rel : mutated) {
    const std::size_t s = ne + slot_rel;
    Rng rng(mix_seed(cfg.seed, generation, kMutationTag + s));
    const std::vector<std::size_t> which = draw_distinct(coords, n_coords, rng);
    std::uniform_real_distribution<double> uni(-rho, rho);
    std::normal_distribution<double> gauss(0.0, rho);
    for (std::size_t c : which) {
      const double shift = cfg.mutation_shape == MutationShape::Uniform ? uni(rng) : gauss(rng);
      next[s].positions[c / static_cast<std::size_t>(dim)][c % static_cast<std::size_t>(dim)] += shift;
    }
    dirty[s] = 1;
  }

  std::vector<std::size_t> todo;
  for (std::size_t s = 0; s < M; ++s)
    if (dirty[s]) todo.push_back(s);
  evaluate_all(next, todo, ctx, alpha);

  if (uses_deviation(ctx.mode()) && cfg.alpha_refit == AlphaRefit::PerGeneration) {
    const std::size_t b = best_index(next);
    const double a_star = refit_alpha_from_basis(next[b].basis, ctx);
    if (a_star > 0.0 && std::isfinite(a_star) && a_star != alpha &&
        ctx.chi_squared_from_basis(next[b].basis, a_star) <= next[b].chi2) {
      alpha = a_star;
      for (Individual& ind : next) ind.chi2 = ctx.chi_squared_from_basis(ind.basis, alpha);
    }
  }
  pop = std::move(next);
}

GaRunRecord run_ga(const ObjectiveContext& ctx, std::size_t n_sources, double alpha0, const GaConfig& cfg,
                   const ProgressFn& progress) {
  cfg.validate();
  Population pop = build_initial_family(ctx, n_sources, alpha0, cfg.population, cfg.initial_spread, cfg.seed);
  return run_ga(ctx, std::move(pop), alpha0, cfg, progress);
}

GaRunRecord run_ga(const ObjectiveContext& ctx, Population pop, double alpha, const GaConfig& cfg,
                   const ProgressFn& progress) {
  cfg.validate();
  if (pop.empty()) throw InputError("GA population is empty");
  GaRunRecord rec;
  rec.best_chi2.push_back(pop[best_index(pop)].chi2);
  rec.stop_reason = StopReason::MaxGenerations;

  auto reached_floor = [&](double chi2) {
    return cfg.noise_floor > 0.0 && chi2 <= (1.0 + cfg.stop_tolerance) * cfg.noise_floor;
  };

  if (!reached_floor(rec.best_chi2.back())) {
    for (std::size_t g = 1; g <= cfg.max_generations; ++g) {
      step_generation(pop, ctx, cfg, alpha, g);
      const double best = pop[best_index(pop)].chi2;
      rec.best_chi2.push_back(best);
      rec.generations = g;
      if (progress) progress(g, best);
      if (reached_floor(best)) {
        rec.stop_reason = StopReason::NoiseFloor;
        break;
      }
      if (cfg.stall_window > 0 && g >= cfg.stall_window) {
        const double then = rec.best_chi2[g - cfg.stall_window];
        if (then > 0.0 && (then - best) / then < cfg.stall_threshold) {
          rec.stop_reason = StopReason::Stalled;
          break;
        }
      }
      if (g == cfg.max_generations) rec.stop_reason = StopReason::MaxGenerations;
    }
  } else {
    rec.stop_reason = StopReason::NoiseFloor;
  }

  Individual& best = pop[best_index(pop)];
  if (uses_deviation(ctx.mode()) && cfg.alpha_refit == AlphaRefit::EndOnly) {
    const double a_star = refit_alpha_from_basis(best.basis, ctx);
    if (a_star > 0.0 && std::isfinite(a_star)) {
      alpha = a_star;
      best.chi2 = ctx.chi_squared_from_basis(best.basis, alpha);
    }
  }
  rec.best.positions = best.positions;
  rec.best.alpha = alpha;
  rec.best.grid = ctx.grid();
  rec.best_chi2_final = best.chi2;
  return rec;
}

}  // namespace suppose

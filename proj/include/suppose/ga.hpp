#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "suppose/objective.hpp"

namespace suppose {

enum class MutationShape { Uniform, Gaussian };
enum class AlphaRefit { PerGeneration, EndOnly };
enum class StopReason { NoiseFloor, Stalled, MaxGenerations };

std::string to_string(StopReason r);

/// Genetic algorithm settings. Counts refer to individuals per generation.
struct GaConfig {
  std::size_t population = 100;  // M
  std::size_t elite = 2;         // ne, copied unmodified
  std::size_t crossover = 60;    // individuals paired for crossover
  std::size_t mutation = 60;     // individuals mutated
  double mutated_fraction = 0.01; // share of coordinates shifted in a mutated individual
  double mutation_scale = 0.2;   // rho_mut = (d0 / 2) * mutation_scale
  MutationShape mutation_shape = MutationShape::Uniform;
  double initial_spread = 0.5;   // initial family perturbation std = spread * d0 / 2
  std::size_t max_generations = 10000;
  double noise_floor = 0.0;      // <||eta||^2>; 0 disables the noise-floor stop
  double stop_tolerance = 0.02;
  std::size_t stall_window = 500;
  double stall_threshold = 1e-6;
  double fitness_offset_fraction = 1e-3;  // c0 = fraction * median population χ²
  AlphaRefit alpha_refit = AlphaRefit::PerGeneration;
  std::uint64_t seed = 1;

  void validate() const;
};

struct Individual {
  std::vector<Point> positions;
  std::vector<double> basis;  // sum_k Ĩ(x_i - a_k), always recomputed from positions
  double chi2 = 0.0;
};

using Population = std::vector<Individual>;

/// Greedy peeling with random perturbation of each located maximum: every
/// individual places its N sources one by one at argmax(T) + r, r ~ Normal(0, (spread d0/2)^2)
/// per axis, subtracting alpha0 Ĩ_* from the running residual T after each placement.
Population build_initial_family(const ObjectiveContext& ctx, std::size_t n_sources, double alpha0,
                                std::size_t population, double spread, std::uint64_t seed);

/// Recomputes basis and χ² of one individual from its positions.
void evaluate(Individual& ind, const ObjectiveContext& ctx, double alpha);

/// One generation: elite, fitness-proportional duplication, fill, crossover,
/// mutation, re-evaluation and (UnknownConstant mode) alpha refit on the best.
/// `pop` is replaced by the next generation with the elite in the leading slots.
void step_generation(Population& pop, const ObjectiveContext& ctx, const GaConfig& cfg, double& alpha,
                     std::size_t generation);

std::size_t best_index(const Population& pop);

struct GaRunRecord {
  std::vector<double> best_chi2;  // entry 0 is the initial family
  std::size_t generations = 0;
  SourceSet best;
  double best_chi2_final = 0.0;
  StopReason stop_reason = StopReason::MaxGenerations;
};

using ProgressFn = std::function<void(std::size_t generation, double best_chi2)>;

/// Runs the GA from a fresh initial family until the noise floor is reached, the
/// best χ² stalls, or the generation budget is spent.
GaRunRecord run_ga(const ObjectiveContext& ctx, std::size_t n_sources, double alpha0, const GaConfig& cfg,
                   const ProgressFn& progress = {});

/// Same loop from a caller supplied population.
GaRunRecord run_ga(const ObjectiveContext& ctx, Population pop, double alpha, const GaConfig& cfg,
                   const ProgressFn& progress = {});

}  // namespace suppose

#pragma once

#include <optional>

#include "json.hpp"

#include "suppose/bounds.hpp"
#include "suppose/ga.hpp"
#include "suppose/synth.hpp"

namespace suppose {

struct FitConfig {
  GaConfig ga;
  BackgroundMode mode = BackgroundMode::None;
  RenderOptions render;
  BoundOptions bounds;
  GreedyOptions greedy;
  double alpha0 = 0.0;                  // greedy peel size; 0 picks max(S_*) / (10 max Ĩ_*)
  std::size_t preliminary_n = 100;      // N of the preliminary fit in auto mode
  std::size_t preliminary_generations = 2000;
  std::optional<int> coarsest_level;    // superpixel search range d_p 2^-level; default covers d0
  int finest_level = 6;
  NoiseModel noise;                     // used for <||η||²>; None falls back to the preliminary χ²
  bool use_noise_floor_stop = false;    // stop the GA at (1 + tol) <||η||²>
};

struct FitResult {
  GaRunRecord run;
  std::size_t n = 0;
  double initial_alpha = 0.0;
  double noise_power = 0.0;
  std::optional<GreedyResult> greedy;
  std::optional<GaRunRecord> preliminary;
  std::optional<SuperpixelChoice> superpixel;  // from the preliminary fit (auto) or the final fit
  std::optional<BoundReport> bound;
};

/// Σ_i Ĩ(x_i - c) for the response centered on the grid: converts total signal to Z.
double kernel_mass(const IrfModel& irf, const PixelGrid& grid);

/// Starting alpha for N sources: Z / N with Z from the greedy peel (constant
/// background) or Σ S / Σ Ĩ otherwise.
double initial_alpha(const ObjectiveContext& ctx, std::size_t n, const FitConfig& cfg,
                     GreedyResult* greedy_out = nullptr);

/// <||η||²> from the noise model evaluated on the fitted prediction
/// S - (S_* - S̃), in the units of the measured signal. Returns the fit χ² when
/// no noise model is configured.
double noise_power_estimate(const SampledSignal& measured, const ObjectiveContext& ctx, const SourceSet& fit,
                            const NoiseModel& noise);

/// GA at a fixed N.
FitResult fit_fixed(const SampledSignal& measured, const IrfModel& irf, std::size_t n, const FitConfig& cfg,
                    const ProgressFn& progress = {}, const LagFunction& G = {});

/// Greedy α0 N, preliminary GA, histogram-based bound estimate and final GA at N_op.
FitResult fit_auto(const SampledSignal& measured, const IrfModel& irf, const FitConfig& cfg,
                   const ProgressFn& progress = {}, const LagFunction& G = {});

/// Full configuration snapshot. Reading starts from the defaults, overrides the keys present
/// and rejects unknown keys.
nlohmann::json to_json(const FitConfig& cfg);
FitConfig fit_config_from_json(const nlohmann::json& j);

/// N, alpha, χ² start/final, generations and stop reason.
nlohmann::json summary_json(const GaRunRecord& r);

/// True when the run spent its generation budget with χ² above (1 + tol) <||η||²>.
bool ceiling_without_floor(const FitResult& r, const FitConfig& cfg);

}  // namespace suppose

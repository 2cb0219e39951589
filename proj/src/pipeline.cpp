#include "suppose/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace suppose {

double kernel_mass(const IrfModel& irf, const PixelGrid& grid) {
  const CenteredKernel k(irf, grid, BackgroundMode::None);
  return std::accumulate(k.samples().begin(), k.samples().end(), 0.0);
}

double initial_alpha(const ObjectiveContext& ctx, std::size_t n, const FitConfig& cfg, GreedyResult* greedy_out) {
  if (n == 0) throw InputError("fit needs N >= 1");
  double z = 0.0;
  if (uses_deviation(ctx.mode())) {
    const CenteredKernel k(ctx.irf(), ctx.grid(), ctx.mode());
    const double kmax = *std::max_element(k.samples().begin(), k.samples().end());
    const double smax = *std::max_element(ctx.target().values.begin(), ctx.target().values.end());
    if (!(kmax > 0.0 && smax > 0.0)) throw InputError("target has no positive deviation to fit");
    const double a0 = cfg.alpha0 > 0.0 ? cfg.alpha0 : smax / (10.0 * kmax);
    GreedyResult g = greedy_find_alphaN(ctx, a0, cfg.greedy);
    if (g.n == 0) throw InputError("greedy alpha*N search failed: " + g.diagnostic);
    z = g.z;
    if (greedy_out) *greedy_out = std::move(g);
  } else {
    const double mass = kernel_mass(ctx.irf(), ctx.grid());
    if (!(mass > 0.0)) throw InputError("IRF has no mass on this grid");
    z = ctx.target().sum() / mass;
  }
  if (!(z > 0.0)) throw InputError("total signal must be positive to set alpha");
  return z / static_cast<double>(n);
}

double noise_power_estimate(const SampledSignal& measured, const ObjectiveContext& ctx, const SourceSet& fit,
                            const NoiseModel& noise) {
  if (noise.kind == NoiseKind::None) return chi_squared(fit, ctx);
  const SampledSignal model = evaluate_model(fit, ctx.irf(), ctx.grid(), ctx.mode(), {});
  std::vector<double> pred(measured.values.size());
  for (std::size_t i = 0; i < pred.size(); ++i)
    pred[i] = measured.values[i] - (ctx.target().values[i] - model.values[i]);
  return noise.expected_power(pred);
}

namespace {

// The floor comes from the noise model on the raw data; the fitted prediction is not available yet.
GaConfig with_floor(const FitConfig& cfg, const SampledSignal& measured) {
  GaConfig g = cfg.ga;
  g.noise_floor = cfg.use_noise_floor_stop && cfg.noise.kind != NoiseKind::None
                      ? cfg.noise.expected_power(measured.values)
                      : 0.0;
  return g;
}

}  // namespace

FitResult fit_fixed(const SampledSignal& measured, const IrfModel& irf, std::size_t n, const FitConfig& cfg,
                    const ProgressFn& progress, const LagFunction& G) {
  const ObjectiveContext ctx(measured, irf, cfg.mode, cfg.render);
  FitResult out;
  out.n = n;
  GreedyResult greedy;
  out.initial_alpha = initial_alpha(ctx, n, cfg, &greedy);
  if (uses_deviation(cfg.mode)) out.greedy = std::move(greedy);
  out.run = run_ga(ctx, n, out.initial_alpha, with_floor(cfg, measured), progress);
  out.noise_power = noise_power_estimate(measured, ctx, out.run.best, cfg.noise);
  if (out.noise_power > 0.0) {
    try {
      const BoundModel bm(irf, measured.grid, cfg.mode, G, cfg.bounds);
      out.superpixel = select_superpixel(bm, out.run.best, out.noise_power, cfg.coarsest_level, cfg.finest_level);
      out.bound = out.superpixel->selected().report;
    } catch (const InputError&) {
      // Bounds are diagnostics for a fixed-N fit; the positions stand on their own.
    }
  }
  return out;
}

FitResult fit_auto(const SampledSignal& measured, const IrfModel& irf, const FitConfig& cfg,
                   const ProgressFn& progress, const LagFunction& G) {
  const ObjectiveContext ctx(measured, irf, cfg.mode, cfg.render);
  GreedyResult greedy;
  const std::size_t n0 = std::max<std::size_t>(1, cfg.preliminary_n);
  const double alpha_pre = initial_alpha(ctx, n0, cfg, &greedy);

  GaConfig pre_cfg = with_floor(cfg, measured);
  pre_cfg.max_generations = std::min(cfg.preliminary_generations, cfg.ga.max_generations);
  GaRunRecord pre = run_ga(ctx, n0, alpha_pre, pre_cfg);
  const double noise = noise_power_estimate(measured, ctx, pre.best, cfg.noise);
  if (!(noise > 0.0)) throw InputError("noise power estimate is zero; cannot select N (give a noise model)");

  const BoundModel bm(irf, measured.grid, cfg.mode, G, cfg.bounds);
  SuperpixelChoice choice = select_superpixel(bm, pre.best, noise, cfg.coarsest_level, cfg.finest_level);
  const std::size_t n_op = std::max<std::size_t>(1, choice.selected().report.N_op_int);

  FitResult out = fit_fixed(measured, irf, n_op, cfg, progress, G);
  if (uses_deviation(cfg.mode)) out.greedy = std::move(greedy);
  out.preliminary = std::move(pre);
  out.bound = choice.selected().report;
  out.superpixel = std::move(choice);
  out.noise_power = noise;
  return out;
}

namespace {

using nlohmann::json;

template <class T>
void take(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void reject_unknown(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  for (const auto& [k, v] : j.items()) {
    bool known = false;
    for (const char* e : keys) known = known || k == e;
    if (!known) throw InputError("unknown key '" + k + "' in " + where);
  }
}

}  // namespace

json to_json(const FitConfig& c) {
  const GaConfig& g = c.ga;
  json ga{{"population", g.population},
          {"elite", g.elite},
          {"crossover", g.crossover},
          {"mutation", g.mutation},
          {"mutated_fraction", g.mutated_fraction},
          {"mutation_scale", g.mutation_scale},
          {"mutation_shape", g.mutation_shape == MutationShape::Uniform ? "uniform" : "gaussian"},
          {"initial_spread", g.initial_spread},
          {"max_generations", g.max_generations},
          {"stop_tolerance", g.stop_tolerance},
          {"stall_window", g.stall_window},
          {"stall_threshold", g.stall_threshold},
          {"fitness_offset_fraction", g.fitness_offset_fraction},
          {"alpha_refit", g.alpha_refit == AlphaRefit::PerGeneration ? "per-generation" : "end-only"},
          {"seed", g.seed}};
  json j{{"ga", ga},
         {"mode", to_string(c.mode)},
         {"support_radius", c.render.support_radius},
         {"bounds",
          {{"epsilon", c.bounds.epsilon},
           {"small_m_threshold", c.bounds.small_m_threshold},
           {"translation_terms", c.bounds.translation_terms}}},
         {"greedy", {{"global_minimum", c.greedy.global_minimum}, {"max_steps", c.greedy.max_steps}}},
         {"alpha0", c.alpha0},
         {"preliminary_n", c.preliminary_n},
         {"preliminary_generations", c.preliminary_generations},
         {"finest_level", c.finest_level},
         {"noise", to_json(c.noise)},
         {"use_noise_floor_stop", c.use_noise_floor_stop}};
  j["coarsest_level"] = c.coarsest_level ? json(*c.coarsest_level) : json(nullptr);
  return j;
}

FitConfig fit_config_from_json(const json& j) {
  if (!j.is_object()) throw InputError("fit configuration must be a JSON object");
  reject_unknown(j,
                 {"ga", "mode", "support_radius", "bounds", "greedy", "alpha0", "preliminary_n",
                  "preliminary_generations", "coarsest_level", "finest_level", "noise", "use_noise_floor_stop"},
                 "fit configuration");
  FitConfig c;
  try {
    if (j.contains("ga")) {
      const json& g = j.at("ga");
      reject_unknown(g,
                     {"population", "elite", "crossover", "mutation", "mutated_fraction", "mutation_scale",
                      "mutation_shape", "initial_spread", "max_generations", "stop_tolerance", "stall_window",
                      "stall_threshold", "fitness_offset_fraction", "alpha_refit", "seed"},
                     "ga");
      GaConfig& a = c.ga;
      take(g, "population", a.population);
      take(g, "elite", a.elite);
      take(g, "crossover", a.crossover);
      take(g, "mutation", a.mutation);
      take(g, "mutated_fraction", a.mutated_fraction);
      take(g, "mutation_scale", a.mutation_scale);
      take(g, "initial_spread", a.initial_spread);
      take(g, "max_generations", a.max_generations);
      take(g, "stop_tolerance", a.stop_tolerance);
      take(g, "stall_window", a.stall_window);
      take(g, "stall_threshold", a.stall_threshold);
      take(g, "fitness_offset_fraction", a.fitness_offset_fraction);
      take(g, "seed", a.seed);
      if (g.contains("mutation_shape")) {
        const auto v = g.at("mutation_shape").get<std::string>();
        if (v == "uniform") a.mutation_shape = MutationShape::Uniform;
        else if (v == "gaussian") a.mutation_shape = MutationShape::Gaussian;
        else throw InputError("mutation_shape must be uniform or gaussian");
      }
      if (g.contains("alpha_refit")) {
        const auto v = g.at("alpha_refit").get<std::string>();
        if (v == "per-generation") a.alpha_refit = AlphaRefit::PerGeneration;
        else if (v == "end-only") a.alpha_refit = AlphaRefit::EndOnly;
        else throw InputError("alpha_refit must be per-generation or end-only");
      }
      a.validate();
    }
    if (j.contains("mode")) c.mode = background_mode_from_string(j.at("mode").get<std::string>());
    take(j, "support_radius", c.render.support_radius);
    if (j.contains("bounds")) {
      const json& b = j.at("bounds");
      reject_unknown(b, {"epsilon", "small_m_threshold", "translation_terms"}, "bounds");
      take(b, "epsilon", c.bounds.epsilon);
      take(b, "small_m_threshold", c.bounds.small_m_threshold);
      take(b, "translation_terms", c.bounds.translation_terms);
    }
    if (j.contains("greedy")) {
      const json& g = j.at("greedy");
      reject_unknown(g, {"global_minimum", "max_steps"}, "greedy");
      take(g, "global_minimum", c.greedy.global_minimum);
      take(g, "max_steps", c.greedy.max_steps);
    }
    take(j, "alpha0", c.alpha0);
    take(j, "preliminary_n", c.preliminary_n);
    take(j, "preliminary_generations", c.preliminary_generations);
    if (j.contains("coarsest_level") && !j.at("coarsest_level").is_null())
      c.coarsest_level = j.at("coarsest_level").get<int>();
    take(j, "finest_level", c.finest_level);
    if (j.contains("noise")) c.noise = noise_model_from_json(j.at("noise"));
    take(j, "use_noise_floor_stop", c.use_noise_floor_stop);
  } catch (const json::exception& e) {
    throw InputError(std::string("bad fit configuration: ") + e.what());
  }
  return c;
}

json summary_json(const GaRunRecord& r) {
  return json{{"n", r.best.size()},
              {"alpha", r.best.alpha},
              {"z", r.best.total_intensity()},
              {"chi2_initial", r.best_chi2.empty() ? 0.0 : r.best_chi2.front()},
              {"chi2_final", r.best_chi2_final},
              {"generations", r.generations},
              {"stop_reason", to_string(r.stop_reason)}};
}

bool ceiling_without_floor(const FitResult& r, const FitConfig& cfg) {
  if (r.run.stop_reason != StopReason::MaxGenerations || cfg.noise.kind == NoiseKind::None) return false;
  return r.run.best_chi2_final > (1.0 + cfg.ga.stop_tolerance) * r.noise_power;
}

}  // namespace suppose

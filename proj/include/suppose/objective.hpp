#pragma once

#include <span>
#include <vector>

#include "suppose/forward_model.hpp"

namespace suppose {

/// Target data and forward model shared by every χ² evaluation of one fit.
class ObjectiveContext {
 public:
  /// `measured` is the raw signal; in UnknownConstant mode its mean is removed here.
  ObjectiveContext(const SampledSignal& measured, IrfModel irf, BackgroundMode mode,
                   RenderOptions opts = {});

  const SampledSignal& target() const { return target_; }  // S_*
  const ModelRenderer& renderer() const { return renderer_; }
  const IrfModel& irf() const { return renderer_.irf(); }
  const PixelGrid& grid() const { return target_.grid; }
  BackgroundMode mode() const { return mode_; }

  /// Unscaled basis u_i = sum_k Ĩ(x_i - a_k).
  std::vector<double> basis(std::span<const Point> positions) const {
    return renderer_.basis(positions);
  }
  /// sum_i (S_*(x_i) - alpha u_*(x_i))^2 where u_* is u with its mean removed
  /// in UnknownConstant mode.
  double chi_squared_from_basis(std::span<const double> u, double alpha) const;

 private:
  SampledSignal target_;
  ModelRenderer renderer_;
  BackgroundMode mode_;
};

/// χ² = ||S_* - S̃||^2 for the given sources.
double chi_squared(const SourceSet& sources, const ObjectiveContext& ctx);

/// GA fitness 1 / (χ² + c0); strictly decreasing in χ².
double fitness(double chi2, double offset);

/// Closed-form least-squares intensity for fixed positions:
/// alpha* = <u_*, S_*> / <u_*, u_*>. Throws InputError when u_* vanishes.
double refit_alpha(std::span<const Point> positions, const ObjectiveContext& ctx);
double refit_alpha_from_basis(std::span<const double> u, const ObjectiveContext& ctx);
inline double refit_alpha(const SourceSet& sources, const ObjectiveContext& ctx) {
  return refit_alpha(std::span<const Point>(sources.positions), ctx);
}

}  // namespace suppose

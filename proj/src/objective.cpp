#include "suppose/objective.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace suppose {

ObjectiveContext::ObjectiveContext(const SampledSignal& measured, IrfModel irf, BackgroundMode mode,
                                   RenderOptions opts)
    : target_(uses_deviation(mode) ? measured.mean_subtracted() : measured),
      renderer_(std::move(irf), measured.grid, opts),
      mode_(mode) {}

double ObjectiveContext::chi_squared_from_basis(std::span<const double> u, double alpha) const {
  const std::vector<double>& s = target_.values;
  double shift = 0.0;
  if (uses_deviation(mode_))
    shift = std::accumulate(u.begin(), u.end(), 0.0) / static_cast<double>(u.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double d = s[i] - alpha * (u[i] - shift);
    acc += d * d;
  }
  return acc;
}

double chi_squared(const SourceSet& sources, const ObjectiveContext& ctx) {
  const std::vector<double> u = ctx.basis(sources.positions);
  return ctx.chi_squared_from_basis(u, sources.alpha);
}

double fitness(double chi2, double offset) {
  const double denom = chi2 + offset;
  if (!(denom > 0.0)) return std::numeric_limits<double>::max();
  return 1.0 / denom;
}

double refit_alpha_from_basis(std::span<const double> u, const ObjectiveContext& ctx) {
  const std::vector<double>& s = ctx.target().values;
  double shift = 0.0;
  if (uses_deviation(ctx.mode()))
    shift = std::accumulate(u.begin(), u.end(), 0.0) / static_cast<double>(u.size());
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double ui = u[i] - shift;
    num += ui * s[i];
    den += ui * ui;
  }
  if (!(den >= 1e-30 * static_cast<double>(s.size())))
    throw InputError("alpha refit is degenerate: the model basis vanishes (all sources outside the field?)");
  return num / den;
}

double refit_alpha(std::span<const Point> positions, const ObjectiveContext& ctx) {
  const std::vector<double> u = ctx.basis(positions);
  return refit_alpha_from_basis(u, ctx);
}

}  // namespace suppose

#pragma once

#include <span>
#include <string>
#include <vector>

#include "suppose/irf.hpp"
#include "suppose/signal.hpp"

namespace suppose {

/// How the background term of the measurement is handled.
///   None             no background present
///   SubtractedKnown  a measured background was removed beforehand
///   UnknownConstant  constant unknown background: work with S_dev and Ĩ_dev
enum class BackgroundMode { None, SubtractedKnown, UnknownConstant };

std::string to_string(BackgroundMode m);
BackgroundMode background_mode_from_string(const std::string& s);
inline bool uses_deviation(BackgroundMode m) { return m == BackgroundMode::UnknownConstant; }

struct RenderOptions {
  /// Per-axis cutoff radius in physical units; 0 evaluates the response everywhere.
  /// A cutoff drops at most the response mass outside the box.
  double support_radius = 0.0;
};

/// Accumulates sums of shifted responses sum_k w Ĩ(x_i - a_k) on a fixed grid.
class ModelRenderer {
 public:
  ModelRenderer(IrfModel irf, PixelGrid grid, RenderOptions opts = {});

  const IrfModel& irf() const { return irf_; }
  const PixelGrid& grid() const { return grid_; }

  void add_source(Point a, double weight, std::span<double> out) const;
  void accumulate(std::span<const Point> sources, double weight, std::span<double> out) const;
  /// u_i = sum_k Ĩ(x_i - a_k), unscaled and without mean removal.
  std::vector<double> basis(std::span<const Point> sources) const;

 private:
  IrfModel irf_;
  PixelGrid grid_;
  RenderOptions opts_;
  double gauss_amplitude_ = 0.0;
  double gauss_rate_ = 0.0;
};

void remove_mean(std::span<double> values);

/// S̃(x_i) = alpha sum_k Ĩ_*(x_i - a_k); Ĩ_* = Ĩ_dev in UnknownConstant mode.
SampledSignal evaluate_model(const SourceSet& sources, const IrfModel& irf, const PixelGrid& grid,
                             BackgroundMode mode, RenderOptions opts = {});

/// Ĩ_* sampled on a target grid with its center on the pixel nearest the grid midpoint.
/// In UnknownConstant mode the grid mean of the centered samples is removed and the same
/// constant is used for shifted lookups, so Ĩ_dev is one fixed function.
class CenteredKernel {
 public:
  CenteredKernel(const IrfModel& irf, const PixelGrid& grid, BackgroundMode mode);

  const IrfModel& irf() const { return irf_; }
  const PixelGrid& grid() const { return grid_; }
  BackgroundMode mode() const { return mode_; }
  Point center() const { return center_; }
  double mean() const { return mean_; }

  /// Ĩ_*(x_i - c)
  const std::vector<double>& samples() const { return samples_; }
  /// Ĩ_*(x_i - c - z)
  std::vector<double> shifted(Point z) const;
  /// ∇Ĩ(x_i - c - z)
  std::vector<Point> gradient(Point z = {0.0, 0.0}) const;

  /// ||Ĩ_*||^2
  double norm2() const;

 private:
  IrfModel irf_;
  PixelGrid grid_;
  BackgroundMode mode_;
  Point center_{0.0, 0.0};
  double mean_ = 0.0;
  std::vector<double> samples_;
};

}  // namespace suppose

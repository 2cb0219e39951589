#pragma once

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include "json.hpp"
#include "suppose/assignment.hpp"
#include "suppose/signal.hpp"

namespace suppose {

struct MatchedSigma {
  double sigma = 0.0;                   // sqrt(mean matched squared displacement)
  std::vector<std::size_t> assignment;  // true source k matched to fitted source assignment[k]
  bool exact = true;
  double max_excess = 0.0;              // certified bound on the squared-cost excess (auction only)
};

/// σ² = (1/N) min_τ Σ_k ||a_τ(k) - ã_k||². Throws InputError for unequal counts.
MatchedSigma matched_sigma(std::span<const Point> truth, std::span<const Point> fitted,
                           std::size_t exact_limit = 2000);

/// Squared-distance cost matrix between two equal-size point lists.
CostMatrix squared_distance_costs(std::span<const Point> a, std::span<const Point> b);

/// Occupied bins of a D-dimensional histogram with edges at origin - d_p/2 + j d_bin.
struct Histogram {
  Point d_bin{0.0, 0.0};
  std::vector<std::array<long, 2>> bins;  // sorted by (iy, ix)
  std::vector<std::size_t> counts;
  std::vector<Point> centers;

  std::size_t occupied() const { return bins.size(); }  // m_bin
  std::size_t total() const;
  /// R_p = alpha * count at the bin centers.
  GroundTruth intensities(double alpha) const;
};

Histogram histogram_sources(std::span<const Point> sources, const PixelGrid& grid, Point d_bin);
/// Bins of size grid.pitch / 2^level (level may be negative for coarser bins).
Histogram histogram_level(std::span<const Point> sources, const PixelGrid& grid, int level);

/// Continuous-looking reconstruction on `out`: every source deposits mass alpha
/// spread by `kernel` (supersampled per output pixel and normalized to unit mass).
/// An empty kernel deposits each source into the pixel containing it.
SampledSignal render_smoothed(const SourceSet& sources, const PixelGrid& out,
                              const std::function<double(Point)>& kernel = {}, int supersample = 4);

struct LineSpec {
  Point point{0.0, 0.0};
  Point direction{0.0, 1.0};
};

struct LobeStats {
  std::size_t count = 0;
  double mean_offset = 0.0;  // mean perpendicular offset from the line
  double stddev = 0.0;       // population std of the perpendicular coordinate
};

/// Perpendicular statistics of sources around two parallel lines, split at the midline.
std::array<LobeStats, 2> line_lobe_stats(std::span<const Point> sources, const LineSpec& first,
                                         const LineSpec& second);

/// Sources grouped along x (1-D data).
struct Cluster {
  double centroid = 0.0;
  std::size_t count = 0;
};

/// Each source goes to the nearest of `lines`; empty groups keep count 0.
std::vector<Cluster> nearest_line_clusters(std::span<const Point> sources, std::span<const double> lines);

/// Maximal runs of contiguous occupied bins of width d_bin (edges from `grid`), in x order.
std::vector<Cluster> contiguous_clusters(std::span<const Point> sources, const PixelGrid& grid, double d_bin);

struct EvalReport {
  std::optional<MatchedSigma> matched;
  double d0 = 0.0;
  double super_resolution = 0.0;  // M_s = d0 / (2σ)
  std::vector<Histogram> histograms;
  std::optional<std::array<LobeStats, 2>> lobes;
  double nearest_neighbor_rms = 0.0;  // unequal-count diagnostic
  std::vector<Cluster> line_clusters;  // 1-D truth: nearest-line groups
};

/// RMS distance from each fitted source to its nearest true source.
double nearest_neighbor_rms(std::span<const Point> truth, std::span<const Point> fitted);

nlohmann::json to_json(const Histogram& h);
nlohmann::json to_json(const Cluster& c);
nlohmann::json to_json(const EvalReport& r);

}  // namespace suppose

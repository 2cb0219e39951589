#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace suppose {

/// Position in physical units. 1-D data only uses the first component.
using Point = std::array<double, 2>;

/// Raised for malformed inputs (bad grids, invalid parameters, unreadable files).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Uniform pixel lattice in one or two dimensions.
///
/// Pixel centers sit at origin + index * pitch along each axis. Two-dimensional
/// samples are stored row-major with x varying fastest: linear index
/// `iy * nx + ix`. Unused axes of a 1-D grid have extent 1.
struct PixelGrid {
  int dim = 1;
  std::array<std::size_t, 2> extents{1, 1};
  std::array<double, 2> pitch{1.0, 1.0};
  std::array<double, 2> origin{0.0, 0.0};

  static PixelGrid line(std::size_t n, double pitch, double origin = 0.0);
  static PixelGrid image(std::size_t nx, std::size_t ny, double pitch, Point origin = {0.0, 0.0});

  /// Throws InputError when the invariants (D in {1,2}, extents >= 1, pitch > 0) fail.
  void validate() const;

  std::size_t size() const { return extents[0] * extents[1]; }
  std::size_t nx() const { return extents[0]; }
  std::size_t ny() const { return extents[1]; }

  Point center(std::size_t linear) const;
  Point center(std::size_t ix, std::size_t iy) const {
    return {origin[0] + static_cast<double>(ix) * pitch[0],
            origin[1] + static_cast<double>(iy) * pitch[1]};
  }
  std::size_t index(std::size_t ix, std::size_t iy) const { return iy * extents[0] + ix; }

  /// Physical midpoint of the sampled region.
  Point midpoint() const;
  /// Linear index of the pixel whose center is nearest to `p` (clamped to the grid).
  std::size_t nearest(Point p) const;

  bool same_layout(const PixelGrid& other, double rel_tol = 1e-12) const;
};

struct SampledSignal {
  PixelGrid grid;
  std::vector<double> values;
  std::string label;

  SampledSignal() = default;
  SampledSignal(PixelGrid g, std::vector<double> v, std::string l = {});

  double sum() const;
  double max() const;
  /// Copy with the per-signal mean removed (S_dev).
  SampledSignal mean_subtracted() const;
};

double signal_sum(const SampledSignal& sig);

/// N equal-intensity virtual point sources.
struct SourceSet {
  std::vector<Point> positions;
  double alpha = 1.0;
  PixelGrid grid;

  std::size_t size() const { return positions.size(); }
  /// Z = alpha * N, the total fitted intensity.
  double total_intensity() const { return alpha * static_cast<double>(positions.size()); }
  void validate() const;
};

/// Discrete source distribution R = sum_p R_p delta(x - y_p).
struct GroundTruth {
  std::vector<Point> support;
  std::vector<double> intensities;

  std::size_t size() const { return support.size(); }
  double total() const;
  void validate() const;
};

/// Ground truth approximated by integer multiples of alpha.
struct TruncatedTruth {
  std::vector<long> counts;          // N_p
  std::vector<double> truncated;     // Rbar_p = N_p * alpha
  std::vector<double> residuals;     // X_p = Rbar_p - R_p
  std::vector<Point> positions;      // a_k, y_p repeated N_p times
  double alpha = 0.0;
};

/// Rounds R_p / alpha to the nearest integer and redistributes unit increments
/// (or decrements) in order of the rounding residual until sum N_p == n_sources.
TruncatedTruth truncate_ground_truth(const GroundTruth& gt, double alpha, std::size_t n_sources);

/// Half-away-from-zero rounding used for N_p.
long round_half_away(double v);

}  // namespace suppose

#pragma once

#include <optional>
#include <vector>

#include "json.hpp"
#include "suppose/irf.hpp"
#include "suppose/numerics.hpp"

namespace suppose {

/// S_norm = (S - B) / (S_lamp - B). Throws InputError listing pixels with S_lamp - B <= 0.
SampledSignal normalize_spectrum(const SampledSignal& s, const SampledSignal& lamp, const SampledSignal& dark);

struct CalibrationOptions {
  double min_width = 0.0;  // accepted per-record d0 range in physical units; 0 disables a side
  double max_width = 0.0;
  int lm_iterations = 400;
  int refine_passes = 8;   // 2-D: refit each record with the pooled shape, then refit the pool
};

/// One record after normalization and co-centering.
struct CenteredRecord {
  std::vector<Point> x;        // pixel centers minus the record center
  std::vector<double> values;  // background-free, unit sum
  PixelGrid grid;              // original patch grid
  Point center{0.0, 0.0};      // centroid (1-D) or fitted peak (2-D)
  double background = 0.0;     // a_r of the per-record fit (2-D)
  double width = 0.0;          // per-record d0 estimate
  double fit_cost = 0.0;
  bool accepted = true;
};

/// 1-D: S̄ = S / ΣS, x̄ = x - Σ S̄ x. 2-D: per-record Gaussian + constant fit, centered on the
/// fitted peak, background removed, scaled to unit sum. Throws InputError on a zero-sum record.
std::vector<CenteredRecord> cocenter_normalize(const std::vector<SampledSignal>& records,
                                               const CalibrationOptions& opts = {});

struct IrfFit {
  IrfModel irf = IrfModel::gaussian_2d(1.0);
  Point shift{0.0, 0.0};  // fitted offset of the response origin from the pooled center
  double cost = 0.0;
  std::size_t starts = 0;
  std::size_t points = 0;
  bool converged = false;
};

/// Pooled nonlinear least squares of the accepted records against the family, multi-start.
/// Asymmetric1D starts from moment-matched b1 = b2; GaussianHalo2D from a Gaussian fit with
/// the halo amplitude at 0. A `warm` fit replaces the start grid with its own parameters.
IrfFit fit_irf_family(const std::vector<CenteredRecord>& records, IrfFamily family,
                      const CalibrationOptions& opts = {}, const IrfFit* warm = nullptr);

/// G(z) = Σ_i g(x_i) g(x_i - z) on the integer lag lattice, zero outside; linear
/// (bilinear) interpolation between lags.
class Autocorrelation {
 public:
  Autocorrelation() = default;
  explicit Autocorrelation(const SampledSignal& g);

  const SampledSignal& lags() const { return lags_; }
  double at_lag(long jx, long jy = 0) const;
  double operator()(Point z) const;

 private:
  SampledSignal lags_;
  long rx_ = 0, ry_ = 0;
};

struct CalibrationResult {
  IrfFit fit;
  double d0 = 0.0;
  SampledSignal g;  // residual on the common offset grid
  Autocorrelation G;
  std::vector<CenteredRecord> records;
};

/// g(x) = (1/s) Σ_r (S'_r - Ĩ)(x), indexed by the pixel offset from each record's nearest-center
/// pixel and restricted to offsets present in every accepted record.
SampledSignal compute_residual(const std::vector<CenteredRecord>& records, const IrfFit& fit);

/// Refits each 2-D record as A Ĩ(x - c) + a with the pooled shape fixed and re-centers it.
void recenter_with_shape(std::vector<CenteredRecord>& centered, const std::vector<SampledSignal>& records,
                         const IrfFit& fit, const CalibrationOptions& opts = {});

/// Full procedure: co-center, fit (with shape refinement passes in 2-D), residual, autocorrelation.
CalibrationResult calibrate(const std::vector<SampledSignal>& records, IrfFamily family,
                            const CalibrationOptions& opts = {});

struct SpotOptions {
  double threshold_mads = 5.0;  // local maxima above median + k MAD
  double patch_radius = 0.0;    // physical units; 0 uses 3 expected_width
  double expected_width = 0.0;  // physical units; 0 uses 2 pixels
};

/// Patches around local maxima brighter than median + k MAD that fit entirely inside the
/// signal, brightest first; maxima inside a brighter spot's patch are dropped.
std::vector<SampledSignal> detect_spots(const SampledSignal& image, const SpotOptions& opts = {});

nlohmann::json to_json(const CalibrationResult& r, const CalibrationOptions& opts);

}  // namespace suppose

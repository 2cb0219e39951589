#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "suppose/irf.hpp"
#include "suppose/signal.hpp"

namespace suppose {

enum class NoiseKind { None, Constant, FloorPlusShot };

/// Zero-mean Gaussian noise. FloorPlusShot: std = c0 + c1 sqrt(S); Constant: std = c0.
struct NoiseModel {
  NoiseKind kind = NoiseKind::None;
  double c0 = 0.0;
  double c1 = 0.0;

  static NoiseModel none() { return {}; }
  static NoiseModel constant(double sd) { return {NoiseKind::Constant, sd, 0.0}; }
  static NoiseModel floor_plus_shot(double c0, double c1) { return {NoiseKind::FloorPlusShot, c0, c1}; }

  double stddev(double signal) const;
  /// Sum over samples of stddev(S_i)^2, i.e. <||eta||^2> for the given clean signal.
  double expected_power(const std::vector<double>& clean) const;
  /// Adds one noise realization to `values` in place, drawn from a stream seeded by `seed`.
  void apply(std::vector<double>& values, std::uint64_t seed) const;
};

struct Scenario {
  std::string name;
  GroundTruth truth;
  IrfModel irf = IrfModel::gaussian_2d(1.0);
  PixelGrid grid;
  double peak = 0.0;        // noiseless source render rescaled to this maximum; 0 keeps intensities
  double background = 0.0;  // constant counts added before noise
  NoiseModel noise;
  bool clip_16bit = false;  // round and clamp to [0, 65535] after noise
  std::uint64_t seed = 1;
};

struct SceneRender {
  SampledSignal clean;       // sources + background, no noise
  SampledSignal signal;      // what the instrument records
  GroundTruth truth;         // intensities after the peak normalization
  double scale = 1.0;        // factor applied to the scenario intensities
  double noise_power = 0.0;  // realized ||signal - clean||^2
  double expected_noise_power = 0.0;
};

SceneRender render_scene(const Scenario& sc);
SceneRender render_scene(const Scenario& sc, std::uint64_t seed);

nlohmann::json to_json(const NoiseModel& n);
NoiseModel noise_model_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Scenario& sc);
Scenario scenario_from_json(const nlohmann::json& j);

nlohmann::json to_json(const PixelGrid& g);
PixelGrid pixel_grid_from_json(const nlohmann::json& j);
nlohmann::json to_json(const IrfModel& irf);
IrfModel irf_from_json(const nlohmann::json& j);

/// Fluorescence test image in pixel units: two parallel segments along y.
struct TwoLineParams {
  std::size_t size_px = 25;
  double pixel_nm = 68.0;
  double sigma_px = 1.435;
  double separation_nm = 144.0;
  std::size_t per_line = 71;
  double spacing_nm = 9.6;
  double peak = 40000.0;
  double background = 20000.0;
  NoiseModel noise = NoiseModel::floor_plus_shot(23.0, 1.0);
  std::uint64_t seed = 1;
};

Scenario make_two_line_scene(const TwoLineParams& p = {});
/// x positions (pixel units) of the two segments of a two-line scene.
std::pair<double, double> two_line_positions(const TwoLineParams& p);

/// Spectral lines (wavelength, intensity) convolved with a 1-D response on `grid`.
Scenario make_spectral_scene(const std::vector<std::pair<double, double>>& lines, const IrfModel& irf,
                             const PixelGrid& grid, const NoiseModel& noise, double gain = 1.0,
                             std::uint64_t seed = 1);

/// Asymmetric1D response in nm with d0 = `width_nm`, b2 = asymmetry * b1 and unit
/// lattice sum on a grid of pitch `pitch_nm`.
IrfModel spectrometer_irf(double width_nm = 1.23, double asymmetry = 1.25, double pitch_nm = 0.22);

std::vector<std::pair<double, double>> sodium_doublet();
std::vector<std::pair<double, double>> krypton_triplet();

/// Na doublet and Kr triplet fixtures on a 0.22 nm grid with instrument-like noise.
Scenario na_doublet_scene(std::uint64_t seed = 1);
Scenario kr_triplet_scene(std::uint64_t seed = 1);

}  // namespace suppose

#include "suppose/synth.hpp"

#include <algorithm>
#include <cmath>

#include "suppose/forward_model.hpp"
#include "suppose/numerics.hpp"

namespace suppose {

using nlohmann::json;

double NoiseModel::stddev(double signal) const {
  switch (kind) {
    case NoiseKind::None: return 0.0;
    case NoiseKind::Constant: return c0;
    case NoiseKind::FloorPlusShot: return c0 + c1 * std::sqrt(std::max(signal, 0.0));
  }
  return 0.0;
}

double NoiseModel::expected_power(const std::vector<double>& clean) const {
  double acc = 0.0;
  for (double s : clean) {
    const double sd = stddev(s);
    acc += sd * sd;
  }
  return acc;
}

void NoiseModel::apply(std::vector<double>& values, std::uint64_t seed) const {
  if (kind == NoiseKind::None) return;
  numerics::Rng rng(numerics::mix_seed(seed, 0x6e6f697365ULL));
  std::normal_distribution<double> unit(0.0, 1.0);
  for (double& v : values) v += stddev(v) * unit(rng);
}

SceneRender render_scene(const Scenario& sc) { return render_scene(sc, sc.seed); }

SceneRender render_scene(const Scenario& sc, std::uint64_t seed) {
  sc.grid.validate();
  sc.truth.validate();
  if (sc.background < 0.0 || sc.peak < 0.0) throw InputError("scenario peak and background must be >= 0");
  ModelRenderer renderer(sc.irf, sc.grid);
  std::vector<double> src(sc.grid.size(), 0.0);
  for (std::size_t p = 0; p < sc.truth.size(); ++p)
    renderer.add_source(sc.truth.support[p], sc.truth.intensities[p], src);

  SceneRender out;
  if (sc.peak > 0.0) {
    const double mx = *std::max_element(src.begin(), src.end());
    if (!(mx > 0.0)) throw InputError("scenario renders to zero; cannot normalize to a peak");
    out.scale = sc.peak / mx;
    for (double& v : src) v *= out.scale;
  }
  out.truth = sc.truth;
  for (double& r : out.truth.intensities) r *= out.scale;

  for (double& v : src) v += sc.background;
  std::vector<double> noisy = src;
  out.expected_noise_power = sc.noise.expected_power(src);
  sc.noise.apply(noisy, seed);
  if (sc.clip_16bit && sc.noise.kind != NoiseKind::None)
    for (double& v : noisy) v = std::clamp(std::round(v), 0.0, 65535.0);
  for (std::size_t i = 0; i < src.size(); ++i) {
    const double d = noisy[i] - src[i];
    out.noise_power += d * d;
  }
  out.clean = SampledSignal(sc.grid, std::move(src), sc.name + " clean");
  out.signal = SampledSignal(sc.grid, std::move(noisy), sc.name);
  return out;
}

json to_json(const NoiseModel& n) {
  const char* kind = n.kind == NoiseKind::None ? "none" : n.kind == NoiseKind::Constant ? "constant" : "floor-plus-shot";
  return json{{"kind", kind}, {"c0", n.c0}, {"c1", n.c1}};
}

NoiseModel noise_model_from_json(const json& j) {
  const std::string kind = j.value("kind", std::string("none"));
  NoiseModel n;
  n.c0 = j.value("c0", 0.0);
  n.c1 = j.value("c1", 0.0);
  if (kind == "none") n.kind = NoiseKind::None;
  else if (kind == "constant") n.kind = NoiseKind::Constant;
  else if (kind == "floor-plus-shot") n.kind = NoiseKind::FloorPlusShot;
  else throw InputError("unknown noise kind '" + kind + "'");
  if (n.c0 < 0.0 || n.c1 < 0.0) throw InputError("noise coefficients must be >= 0");
  return n;
}

json to_json(const PixelGrid& g) {
  return json{{"dim", g.dim},
              {"extents", {g.extents[0], g.extents[1]}},
              {"pitch", {g.pitch[0], g.pitch[1]}},
              {"origin", {g.origin[0], g.origin[1]}}};
}

PixelGrid pixel_grid_from_json(const json& j) {
  PixelGrid g;
  g.dim = j.at("dim").get<int>();
  const auto ext = j.at("extents").get<std::vector<std::size_t>>();
  const auto pitch = j.at("pitch").get<std::vector<double>>();
  const auto origin = j.value("origin", std::vector<double>{0.0, 0.0});
  if (ext.empty() || pitch.empty() || origin.empty()) throw InputError("grid extents/pitch/origin must be non-empty");
  g.extents = {ext[0], ext.size() > 1 ? ext[1] : 1};
  g.pitch = {pitch[0], pitch.size() > 1 ? pitch[1] : pitch[0]};
  g.origin = {origin[0], origin.size() > 1 ? origin[1] : 0.0};
  g.validate();
  return g;
}

json to_json(const IrfModel& irf) {
  json j{{"family", to_string(irf.family())}, {"dimension", irf.dimension()}};
  if (irf.family() == IrfFamily::Tabulated) {
    j["grid"] = to_json(irf.table().grid);
    j["values"] = irf.table().values;
  } else {
    j["parameters"] = irf.parameters();
  }
  return j;
}

IrfModel irf_from_json(const json& j) {
  const IrfFamily fam = irf_family_from_string(j.at("family").get<std::string>());
  if (fam == IrfFamily::Tabulated)
    return IrfModel::tabulated(pixel_grid_from_json(j.at("grid")), j.at("values").get<std::vector<double>>());
  return IrfModel::from_parameters(fam, j.at("parameters").get<std::vector<double>>());
}

json to_json(const Scenario& sc) {
  json support = json::array();
  for (const Point& p : sc.truth.support) support.push_back({p[0], p[1]});
  return json{{"name", sc.name},
              {"truth", {{"support", support}, {"intensities", sc.truth.intensities}}},
              {"irf", to_json(sc.irf)},
              {"grid", to_json(sc.grid)},
              {"peak", sc.peak},
              {"background", sc.background},
              {"noise", to_json(sc.noise)},
              {"clip_16bit", sc.clip_16bit},
              {"seed", sc.seed}};
}

Scenario scenario_from_json(const json& j) {
  Scenario sc;
  sc.name = j.value("name", std::string("scenario"));
  for (const auto& p : j.at("truth").at("support")) {
    const auto v = p.get<std::vector<double>>();
    if (v.empty()) throw InputError("empty support point in scenario");
    sc.truth.support.push_back({v[0], v.size() > 1 ? v[1] : 0.0});
  }
  sc.truth.intensities = j.at("truth").at("intensities").get<std::vector<double>>();
  sc.irf = irf_from_json(j.at("irf"));
  sc.grid = pixel_grid_from_json(j.at("grid"));
  sc.peak = j.value("peak", 0.0);
  sc.background = j.value("background", 0.0);
  sc.noise = j.contains("noise") ? noise_model_from_json(j.at("noise")) : NoiseModel::none();
  sc.clip_16bit = j.value("clip_16bit", false);
  sc.seed = j.value("seed", std::uint64_t{1});
  sc.truth.validate();
  if (sc.irf.dimension() != sc.grid.dim) throw InputError("scenario IRF and grid dimensions differ");
  return sc;
}

std::pair<double, double> two_line_positions(const TwoLineParams& p) {
  const double c = 0.5 * static_cast<double>(p.size_px - 1);
  const double half = 0.5 * p.separation_nm / p.pixel_nm;
  return {c - half, c + half};
}

Scenario make_two_line_scene(const TwoLineParams& p) {
  if (p.size_px < 2 || p.per_line < 1) throw InputError("two-line scene needs size >= 2 and >= 1 source per line");
  Scenario sc;
  sc.name = "two-line";
  sc.grid = PixelGrid::image(p.size_px, p.size_px, 1.0);
  sc.irf = IrfModel::gaussian_2d(p.sigma_px);
  const auto [x1, x2] = two_line_positions(p);
  const double c = 0.5 * static_cast<double>(p.size_px - 1);
  const double step = p.spacing_nm / p.pixel_nm;
  const double y0 = c - 0.5 * step * static_cast<double>(p.per_line - 1);
  for (double x : {x1, x2})
    for (std::size_t k = 0; k < p.per_line; ++k) {
      sc.truth.support.push_back({x, y0 + step * static_cast<double>(k)});
      sc.truth.intensities.push_back(1.0);
    }
  sc.peak = p.peak;
  sc.background = p.background;
  sc.noise = p.noise;
  sc.clip_16bit = true;
  sc.seed = p.seed;
  return sc;
}

Scenario make_spectral_scene(const std::vector<std::pair<double, double>>& lines, const IrfModel& irf,
                             const PixelGrid& grid, const NoiseModel& noise, double gain, std::uint64_t seed) {
  if (irf.dimension() != 1 || grid.dim != 1) throw InputError("spectral scenes are one-dimensional");
  const double lo = grid.origin[0], hi = grid.origin[0] + grid.pitch[0] * static_cast<double>(grid.nx() - 1);
  Scenario sc;
  sc.name = "spectrum";
  for (const auto& [wl, intensity] : lines) {
    if (wl < lo || wl > hi) throw InputError("spectral line outside the grid");
    sc.truth.support.push_back({wl, 0.0});
    sc.truth.intensities.push_back(gain * intensity);
  }
  sc.irf = irf;
  sc.grid = grid;
  sc.noise = noise;
  sc.seed = seed;
  return sc;
}

IrfModel spectrometer_irf(double width_nm, double asymmetry, double pitch_nm) {
  if (!(width_nm > 0.0 && asymmetry > 0.0 && pitch_nm > 0.0)) throw InputError("spectrometer IRF parameters must be positive");
  const double w1 = IrfModel::asymmetric_1d(1.0, 1.0, asymmetry).width();
  const double b1 = w1 / width_nm;
  const IrfModel irf = IrfModel::asymmetric_1d(1.0, b1, asymmetry * b1);
  return irf.normalized(PixelGrid::line(2, pitch_nm));
}

std::vector<std::pair<double, double>> sodium_doublet() { return {{589.00, 1000.0}, {589.59, 500.0}}; }

std::vector<std::pair<double, double>> krypton_triplet() {
  return {{557.03, 300.0}, {556.22, 80.0}, {558.04, 13.0}};
}

Scenario na_doublet_scene(std::uint64_t seed) {
  Scenario sc = make_spectral_scene(sodium_doublet(), spectrometer_irf(), PixelGrid::line(128, 0.22, 575.33),
                                    NoiseModel::floor_plus_shot(12.0, 1.0), 1.0, seed);
  sc.name = "na-doublet";
  return sc;
}

Scenario kr_triplet_scene(std::uint64_t seed) {
  Scenario sc = make_spectral_scene(krypton_triplet(), spectrometer_irf(), PixelGrid::line(128, 0.22, 543.03),
                                    NoiseModel::floor_plus_shot(12.0, 1.0), 5.0, seed);
  sc.name = "kr-triplet";
  return sc;
}

}  // namespace suppose

#include <omp.h>

#include <algorithm>
#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "suppose/calibration.hpp"
#include "suppose/evaluation.hpp"
#include "suppose/io.hpp"
#include "suppose/pipeline.hpp"
#include "suppose/synth.hpp"

using namespace suppose;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr int kInputError = 2;
constexpr int kCeiling = 3;

json tool_info() { return json{{"name", "suppose"}, {"version", kVersion}}; }

std::string ext_for(const PixelGrid& g) { return g.dim == 1 ? ".csv" : ".pgm"; }

Scenario named_scenario(const std::string& name) {
  if (name == "two-line") return make_two_line_scene();
  if (name == "two-line-ci") {
    TwoLineParams p;
    p.size_px = 32;
    Scenario sc = make_two_line_scene(p);
    sc.name = "two-line-ci";
    return sc;
  }
  if (name == "na-doublet") return na_doublet_scene();
  if (name == "kr-triplet") return kr_triplet_scene();
  if (fs::exists(name)) return scenario_from_json(io::read_json(name));
  throw InputError("unknown scenario '" + name + "' (two-line, two-line-ci, na-doublet, kr-triplet or a JSON file)");
}

// Accepts a bare IRF object or any document carrying one under "irf".
IrfModel load_irf(const fs::path& path, std::optional<SampledSignal>* g_out, std::optional<NoiseModel>* noise_out = nullptr) {
  const json j = io::read_json(path);
  if (noise_out && j.contains("noise")) *noise_out = noise_model_from_json(j.at("noise"));
  if (g_out && j.contains("g") && j.at("g").is_string()) *g_out = io::read_grid_csv(path.parent_path() / j.at("g").get<std::string>());
  return irf_from_json(j.contains("irf") ? j.at("irf") : j);
}

std::vector<fs::path> expand_inputs(const std::vector<std::string>& inputs) {
  std::vector<fs::path> out;
  for (const std::string& in : inputs) {
    const fs::path p(in);
    if (fs::is_directory(p)) {
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(p)) {
        const std::string ext = e.path().extension().string();
        if (e.is_regular_file() && (ext == ".csv" || ext == ".pgm")) files.push_back(e.path());
      }
      std::sort(files.begin(), files.end());
      out.insert(out.end(), files.begin(), files.end());
    } else if (fs::exists(p)) {
      out.push_back(p);
    } else {
      throw InputError("input not found: " + in);
    }
  }
  if (out.empty()) throw InputError("no calibration inputs (.csv or .pgm) found");
  return out;
}

void write_series_csv(const fs::path& path, const std::string& header, const std::vector<std::pair<double, double>>& rows) {
  std::string s = header + "\n";
  for (const auto& [a, b] : rows) s += (std::ostringstream() << std::setprecision(17) << a << "," << b << "\n").str();
  io::write_text_atomic(path, s);
}

void write_histogram_csv(const fs::path& path, const Histogram& h, int dim) {
  std::ostringstream s;
  s << std::setprecision(17) << (dim == 2 ? "x,y,count\n" : "x,count\n");
  for (std::size_t p = 0; p < h.bins.size(); ++p) {
    s << h.centers[p][0] << ",";
    if (dim == 2) s << h.centers[p][1] << ",";
    s << h.counts[p] << "\n";
  }
  io::write_text_atomic(path, s.str());
}

EvalReport evaluate_against(const SourceSet& fit, const GroundTruth& truth, double d0, int dim,
                            const std::optional<std::array<LineSpec, 2>>& lines) {
  EvalReport rep;
  rep.d0 = d0;
  rep.nearest_neighbor_rms = nearest_neighbor_rms(truth.support, fit.positions);
  if (!fit.positions.empty()) {
    const TruncatedTruth tt = truncate_ground_truth(truth, truth.total() / static_cast<double>(fit.size()), fit.size());
    rep.matched = matched_sigma(tt.positions, fit.positions);
    if (rep.matched->sigma > 0.0) rep.super_resolution = d0 / (2.0 * rep.matched->sigma);
  }
  for (int level = -2; level <= 4; ++level) rep.histograms.push_back(histogram_level(fit.positions, fit.grid, level));
  if (lines) rep.lobes = line_lobe_stats(fit.positions, (*lines)[0], (*lines)[1]);
  if (dim == 1) {
    std::vector<double> xs;
    for (const Point& p : truth.support) xs.push_back(p[0]);
    rep.line_clusters = nearest_line_clusters(fit.positions, xs);
  }
  return rep;
}

std::optional<std::array<LineSpec, 2>> parse_lines(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  if (v.size() != 6) throw InputError("--lines expects x1,y1,x2,y2,dx,dy");
  return std::array<LineSpec, 2>{LineSpec{{v[0], v[1]}, {v[4], v[5]}}, LineSpec{{v[2], v[3]}, {v[4], v[5]}}};
}

// kind[:c0[:c1]], e.g. floor-plus-shot:12:1
NoiseModel parse_noise(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  if (parts.empty() || parts.size() > 3) throw InputError("--noise expects kind[:c0[:c1]]");
  json j{{"kind", parts[0]}};
  try {
    if (parts.size() > 1) j["c0"] = std::stod(parts[1]);
    if (parts.size() > 2) j["c1"] = std::stod(parts[2]);
  } catch (const std::exception&) {
    throw InputError("--noise coefficients must be numbers");
  }
  return noise_model_from_json(j);
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
};

int cmd_synth(const SynthArgs& a) {
  Scenario sc = named_scenario(a.scenario);
  if (a.seed) sc.seed = *a.seed;
  const SceneRender r = render_scene(sc);
  const fs::path out(a.out);
  const fs::path sig = out / ("signal" + ext_for(sc.grid));
  io::write_signal(sig, r.signal);
  io::write_grid_csv(out / "clean.csv", r.clean);
  io::write_ground_truth_csv(out / "truth.csv", r.truth, sc.grid.dim);
  io::write_json(out / "scenario.json", to_json(sc));
  io::write_json(out / "irf.json", to_json(sc.irf));
  json m{{"tool", tool_info()},
         {"command", "synth"},
         {"scenario", to_json(sc)},
         {"seed", sc.seed},
         {"scale", r.scale},
         {"noise_power", r.noise_power},
         {"expected_noise_power", r.expected_noise_power},
         {"outputs", {sig.filename().string(), "clean.csv", "truth.csv", "scenario.json", "irf.json"}},
         {"digests", {{sig.filename().string(), io::sha256_file(sig)}, {"truth.csv", io::sha256_file(out / "truth.csv")}}}};
  io::write_json(out / "manifest.json", m);
  std::cout << "wrote " << out.string() << " (" << r.truth.size() << " sources, noise power " << r.noise_power << ")\n";
  return 0;
}

// ---------------------------------------------------------------- calibrate

struct CalibrateArgs {
  std::vector<std::string> inputs;
  std::string family = "asymmetric-1d";
  double min_width = 0.0, max_width = 0.0;
  bool spots = false;
  double spot_width = 0.0, spot_radius = 0.0, threshold = 5.0;
  std::string lamp, dark;
  std::string out = "calibration";
};

int cmd_calibrate(const CalibrateArgs& a) {
  const std::vector<fs::path> files = expand_inputs(a.inputs);
  std::optional<SampledSignal> lamp, dark;
  if (!a.lamp.empty() != !a.dark.empty()) throw InputError("--lamp and --dark go together");
  if (!a.lamp.empty()) {
    lamp = io::read_signal(a.lamp);
    dark = io::read_signal(a.dark);
  }
  std::vector<SampledSignal> records;
  json digests = json::object();
  for (const fs::path& f : files) {
    SampledSignal s = io::read_signal(f);
    digests[f.string()] = io::sha256_file(f);
    if (lamp) s = normalize_spectrum(s, *lamp, *dark);
    if (a.spots) {
      SpotOptions so;
      so.threshold_mads = a.threshold;
      so.expected_width = a.spot_width;
      so.patch_radius = a.spot_radius;
      for (SampledSignal& p : detect_spots(s, so)) records.push_back(std::move(p));
    } else {
      records.push_back(std::move(s));
    }
  }
  if (records.empty()) throw InputError("no calibration records (no spots detected)");
  CalibrationOptions opts;
  opts.min_width = a.min_width;
  opts.max_width = a.max_width;
  const CalibrationResult r = calibrate(records, irf_family_from_string(a.family), opts);
  const fs::path out(a.out);
  io::write_grid_csv(out / "g.csv", r.g);
  io::write_grid_csv(out / "G.csv", r.G.lags());
  json m{{"tool", tool_info()},
         {"command", "calibrate"},
         {"irf", to_json(r.fit.irf)},
         {"calibration", to_json(r, opts)},
         {"g", "g.csv"},
         {"G", "G.csv"},
         {"inputs", digests},
         {"records", records.size()}};
  io::write_json(out / "calibration.json", m);
  std::cout << "fitted " << a.family << " on " << records.size() << " records, d0 = " << r.d0 << "\n";
  return 0;
}

// ---------------------------------------------------------------- fit

struct FitArgs {
  std::string signal, irf, config, n = "auto", mode, out = "fit", truth, noise;
  std::optional<std::uint64_t> seed;
  std::vector<double> lines;
  bool progress = false;
  bool render = false;
};

int cmd_fit(const FitArgs& a) {
  const SampledSignal measured = io::read_signal(a.signal);
  std::optional<SampledSignal> g;
  std::optional<NoiseModel> doc_noise;
  const IrfModel irf = load_irf(a.irf, &g, &doc_noise);
  if (irf.dimension() != measured.grid.dim)
    throw InputError("IRF dimension " + std::to_string(irf.dimension()) + " does not match the signal");
  FitConfig cfg;
  if (!a.config.empty()) {
    const json cj = io::read_json(a.config);
    cfg = fit_config_from_json(cj.contains("config") ? cj.at("config") : cj);
  }
  if (!a.noise.empty()) {
    cfg.noise = parse_noise(a.noise);
  } else if (doc_noise) {
    cfg.noise = *doc_noise;
  }
  if (!a.mode.empty()) cfg.mode = background_mode_from_string(a.mode);
  if (a.seed) cfg.ga.seed = *a.seed;
  LagFunction G;
  std::optional<Autocorrelation> ac;
  if (g) {
    ac.emplace(*g);
    G = [&ac](Point z) { return (*ac)(z); };
  }
  ProgressFn progress;
  if (a.progress)
    progress = [](std::size_t gen, double chi2) {
      if (gen % 100 == 0) std::cerr << "generation " << gen << " chi2 " << chi2 << "\n";
    };

  FitResult r;
  if (a.n == "auto") {
    r = fit_auto(measured, irf, cfg, progress, G);
  } else {
    std::size_t n = 0;
    try {
      std::size_t used = 0;
      const long v = std::stol(a.n, &used);
      if (used != a.n.size() || v < 1) throw std::invalid_argument(a.n);
      n = static_cast<std::size_t>(v);
    } catch (const std::exception&) {
      throw InputError("--n must be 'auto' or a positive integer");
    }
    r = fit_fixed(measured, irf, n, cfg, progress, G);
  }

  const fs::path out(a.out);
  std::vector<std::string> outputs{"positions.csv", "chi2_trace.csv"};
  io::write_positions_csv(out / "positions.csv", r.run.best);
  std::vector<std::pair<double, double>> trace;
  for (std::size_t k = 0; k < r.run.best_chi2.size(); ++k) trace.emplace_back(static_cast<double>(k), r.run.best_chi2[k]);
  write_series_csv(out / "chi2_trace.csv", "generation,best_chi2", trace);

  json m{{"tool", tool_info()},
         {"command", "fit"},
         {"config", to_json(cfg)},
         {"seed", cfg.ga.seed},
         {"n", a.n},
         {"inputs", {{a.signal, io::sha256_file(a.signal)}, {a.irf, io::sha256_file(a.irf)}}},
         {"irf", to_json(irf)},
         {"run", summary_json(r.run)},
         {"initial_alpha", r.initial_alpha},
         {"noise_power", r.noise_power}};
  if (r.preliminary) m["preliminary"] = summary_json(*r.preliminary);
  if (r.greedy) m["greedy"] = {{"n", r.greedy->n}, {"z", r.greedy->z}, {"diagnostic", r.greedy->diagnostic}};
  if (r.bound) {
    m["bound"] = to_json(*r.bound);
    write_series_csv(out / "bound_curve.csv", "n,sigma_bound", r.bound->curve());
    outputs.push_back("bound_curve.csv");
  }
  if (r.superpixel) {
    const SuperpixelLevel& sel = r.superpixel->selected();
    json levels = json::array();
    for (const SuperpixelLevel& l : r.superpixel->levels)
      levels.push_back({{"level", l.level}, {"d_bin", l.d_bin[0]}, {"m", l.report.m}, {"N_op", l.report.N_op},
                        {"sigma_op", l.report.sigma_op}});
    m["superpixel"] = {{"chosen_level", sel.level}, {"d_s", sel.d_bin[0]}, {"levels", levels}};
    const Histogram h = histogram_sources(r.run.best.positions, measured.grid, sel.d_bin);
    write_histogram_csv(out / "histogram.csv", h, measured.grid.dim);
    outputs.push_back("histogram.csv");
  }
  if (a.render) {
    const SampledSignal img = render_smoothed(r.run.best, measured.grid);
    io::write_grid_csv(out / "render.csv", img);
    outputs.push_back("render.csv");
  }
  if (!a.truth.empty()) {
    int dim = 1;
    const GroundTruth truth = io::read_ground_truth_csv(a.truth, &dim);
    m["inputs"][a.truth] = io::sha256_file(a.truth);
    m["evaluation"] = to_json(evaluate_against(r.run.best, truth, irf.width(), dim, parse_lines(a.lines)));
  }
  const bool flagged = ceiling_without_floor(r, cfg);
  m["ceiling_without_noise_floor"] = flagged;
  m["outputs"] = outputs;
  io::write_json(out / "manifest.json", m);
  std::cout << "N = " << r.n << ", alpha = " << r.run.best.alpha << ", chi2 = " << r.run.best_chi2_final
            << ", stop = " << to_string(r.run.stop_reason) << "\n";
  if (flagged) {
    std::cerr << "generation ceiling reached with chi2 above the noise floor; result written and flagged\n";
    return kCeiling;
  }
  return 0;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateArgs {
  std::string positions, truth, irf, signal, out;
  double d0 = 0.0;
  std::vector<double> lines;
};

int cmd_evaluate(const EvaluateArgs& a) {
  int dim = 1, tdim = 1;
  SourceSet fit;
  fit.positions = io::read_positions_csv(a.positions, &dim);
  const GroundTruth truth = io::read_ground_truth_csv(a.truth, &tdim);
  if (dim != tdim) throw InputError("positions and truth differ in dimension");
  double d0 = a.d0;
  if (!a.irf.empty()) d0 = load_irf(a.irf, nullptr).width();
  if (!(d0 > 0.0)) throw InputError("evaluate needs --irf or --d0");
  if (!a.signal.empty()) {
    fit.grid = io::read_signal(a.signal).grid;
  } else {
    fit.grid = dim == 2 ? PixelGrid::image(1, 1, 1.0) : PixelGrid::line(1, 1.0);
  }
  fit.alpha = fit.positions.empty() ? 1.0 : truth.total() / static_cast<double>(fit.positions.size());
  const json j = to_json(evaluate_against(fit, truth, d0, dim, parse_lines(a.lines)));
  if (a.out.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    io::write_json(fs::path(a.out) / "evaluation.json", j);
    std::cout << "wrote " << (fs::path(a.out) / "evaluation.json").string() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* t = std::getenv("SUPPOSE_THREADS")) {
    const int n = std::atoi(t);
    if (n > 0) omp_set_num_threads(n);
  }
  CLI::App app{"Super-resolution by superposition of point sources"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  SynthArgs sa;
  auto* synth = app.add_subcommand("synth", "generate a synthetic signal and its ground truth");
  synth->add_option("--scenario", sa.scenario, "two-line, two-line-ci, na-doublet, kr-triplet or a scenario JSON")->required();
  synth->add_option("--seed", sa.seed, "noise seed");
  synth->add_option("--out", sa.out, "output directory");

  CalibrateArgs ca;
  auto* cal = app.add_subcommand("calibrate", "fit the instrument response from point-like records");
  cal->add_option("inputs", ca.inputs, "record files or directories (.csv, .pgm)")->required();
  cal->add_option("--family", ca.family, "asymmetric-1d or gaussian-halo-2d");
  cal->add_option("--min-width", ca.min_width, "smallest accepted record width d0");
  cal->add_option("--max-width", ca.max_width, "largest accepted record width d0");
  cal->add_flag("--spots", ca.spots, "detect spots in each input instead of using it as one record");
  cal->add_option("--spot-width", ca.spot_width, "expected spot width");
  cal->add_option("--spot-radius", ca.spot_radius, "patch radius around each spot");
  cal->add_option("--threshold", ca.threshold, "spot threshold in MADs above the median");
  cal->add_option("--lamp", ca.lamp, "lamp reference spectrum");
  cal->add_option("--dark", ca.dark, "dark background spectrum");
  cal->add_option("--out", ca.out, "output directory");

  FitArgs fa;
  auto* fit = app.add_subcommand("fit", "fit N virtual point sources to a signal");
  fit->add_option("--signal", fa.signal, "signal (.csv 1-D, .pgm 2-D)")->required();
  fit->add_option("--irf", fa.irf, "calibration manifest or IRF JSON")->required();
  fit->add_option("--n", fa.n, "auto or a source count");
  fit->add_option("--mode", fa.mode, "none|subtracted|constant-bg");
  fit->add_option("--config", fa.config, "fit configuration or an earlier fit manifest");
  fit->add_option("--seed", fa.seed, "GA seed");
  fit->add_option("--noise", fa.noise, "noise model kind[:c0[:c1]] for the noise floor");
  fit->add_option("--out", fa.out, "output directory");
  fit->add_option("--truth", fa.truth, "ground truth CSV for an evaluation report");
  fit->add_option("--lines", fa.lines, "x1,y1,x2,y2,dx,dy of two parallel lines for lobe statistics")->delimiter(',');
  fit->add_flag("--progress", fa.progress, "print the best chi2 every 100 generations");
  fit->add_flag("--render", fa.render, "write a pixel-deposit render of the solution");

  EvaluateArgs ea;
  auto* ev = app.add_subcommand("evaluate", "compare fitted positions with a ground truth");
  ev->add_option("--positions", ea.positions, "positions CSV")->required();
  ev->add_option("--truth", ea.truth, "ground truth CSV")->required();
  ev->add_option("--irf", ea.irf, "IRF JSON for d0");
  ev->add_option("--d0", ea.d0, "resolution width when no IRF is given");
  ev->add_option("--signal", ea.signal, "signal whose grid sets the histogram edges");
  ev->add_option("--lines", ea.lines, "x1,y1,x2,y2,dx,dy of two parallel lines")->delimiter(',');
  ev->add_option("--out", ea.out, "output directory (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInputError;
  }
  try {
    if (*synth) return cmd_synth(sa);
    if (*cal) return cmd_calibrate(ca);
    if (*fit) return cmd_fit(fa);
    if (*ev) return cmd_evaluate(ea);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "fatal: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

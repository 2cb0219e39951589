#include "suppose/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace suppose {

using nlohmann::json;
namespace nm = numerics;

SampledSignal normalize_spectrum(const SampledSignal& s, const SampledSignal& lamp, const SampledSignal& dark) {
  if (!s.grid.same_layout(lamp.grid) || !s.grid.same_layout(dark.grid))
    throw InputError("spectrum, lamp and dark frames must share one grid");
  std::vector<double> v(s.values.size());
  std::vector<std::size_t> bad;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double den = lamp.values[i] - dark.values[i];
    if (!(den > 0.0)) {
      bad.push_back(i);
      continue;
    }
    v[i] = (s.values[i] - dark.values[i]) / den;
  }
  if (!bad.empty()) {
    std::string list;
    for (std::size_t k = 0; k < bad.size() && k < 20; ++k) list += (k ? "," : "") + std::to_string(bad[k]);
    if (bad.size() > 20) list += ",...";
    throw InputError("lamp minus dark is not positive at pixel(s) " + list);
  }
  return SampledSignal(s.grid, std::move(v), s.label + " normalized");
}

namespace {

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<long>(mid), v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + static_cast<long>(mid)));
  return m;
}

bool width_ok(double w, const CalibrationOptions& o) {
  if (o.min_width > 0.0 && w < o.min_width) return false;
  if (o.max_width > 0.0 && w > o.max_width) return false;
  return true;
}

struct GaussFit {
  double amp, cx, cy, s, a, cost;
};

// amp exp(-|x - c|² / (2 s²)) + a
GaussFit fit_gaussian_const(const SampledSignal& r, int iterations) {
  const PixelGrid& g = r.grid;
  const double med = median_of(r.values);
  const std::size_t imax = static_cast<std::size_t>(std::max_element(r.values.begin(), r.values.end()) - r.values.begin());
  const Point c0 = g.center(imax);
  const double amp0 = r.values[imax] - med;
  const double s0 = 1.5 * g.pitch[0];
  auto fn = [&](std::span<const double> p, std::span<double> res) {
    const double s2 = std::exp(2.0 * p[3]);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Point x = g.center(i);
      const double d2 = (x[0] - p[1]) * (x[0] - p[1]) + (x[1] - p[2]) * (x[1] - p[2]);
      res[i] = p[0] * std::exp(-d2 / (2.0 * s2)) + p[4] - r.values[i];
    }
  };
  nm::LsqOptions lo;
  lo.max_iterations = iterations;
  const nm::LsqResult fit = nm::levenberg_marquardt(fn, {amp0, c0[0], c0[1], std::log(s0), med}, g.size(), lo);
  return {fit.params[0], fit.params[1], fit.params[2], std::exp(fit.params[3]), fit.params[4], fit.cost};
}

}  // namespace

std::vector<CenteredRecord> cocenter_normalize(const std::vector<SampledSignal>& records,
                                               const CalibrationOptions& opts) {
  if (records.empty()) throw InputError("calibration needs at least one record");
  const Point pitch = records.front().grid.pitch;
  std::vector<CenteredRecord> out(records.size());
  for (std::size_t r = 0; r < records.size(); ++r) {
    const SampledSignal& s = records[r];
    s.grid.validate();
    if (s.grid.dim != records.front().grid.dim) throw InputError("calibration records must share dimension");
    if (std::abs(s.grid.pitch[0] - pitch[0]) > 1e-12 * pitch[0] ||
        std::abs(s.grid.pitch[1] - pitch[1]) > 1e-12 * pitch[1])
      throw InputError("calibration records must share pixel pitch");
  }
  // Records are independent; each iteration writes only its own slot.
  std::vector<std::string> errors(records.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t r = 0; r < records.size(); ++r) {
    const SampledSignal& s = records[r];
    CenteredRecord& c = out[r];
    c.grid = s.grid;
    std::vector<double> v = s.values;
    if (s.grid.dim == 2) {
      const GaussFit f = fit_gaussian_const(s, opts.lm_iterations);
      c.center = {f.cx, f.cy};
      c.background = f.a;
      c.width = 2.0 * f.s;
      c.fit_cost = f.cost;
      for (double& x : v) x -= f.a;
    }
    double sum = 0.0;
    for (double x : v) sum += x;
    if (!(sum > 0.0)) {
      errors[r] = "calibration record " + std::to_string(r) + " has non-positive sum";
      continue;
    }
    for (double& x : v) x /= sum;
    if (s.grid.dim == 1) {
      double m1 = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) m1 += v[i] * s.grid.center(i)[0];
      double m2 = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) m2 += v[i] * std::pow(s.grid.center(i)[0] - m1, 2);
      c.center = {m1, 0.0};
      c.width = 2.0 * std::sqrt(std::max(m2, 0.0));
    }
    c.x.resize(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      const Point p = s.grid.center(i);
      c.x[i] = {p[0] - c.center[0], s.grid.dim == 2 ? p[1] - c.center[1] : 0.0};
    }
    c.values = std::move(v);
    c.accepted = width_ok(c.width, opts);
  }
  for (const std::string& e : errors)
    if (!e.empty()) throw InputError(e);
  return out;
}

namespace {

struct Pooled {
  std::vector<Point> x;
  std::vector<double> v;
  double m2 = 0.0;  // mean per-axis variance from the per-record widths
  Point pitch{1.0, 1.0};
  int dim = 1;
};

Pooled pool(const std::vector<CenteredRecord>& records) {
  Pooled p;
  std::size_t used = 0;
  for (const CenteredRecord& r : records) {
    if (!r.accepted) continue;
    ++used;
    p.dim = r.grid.dim;
    p.pitch = r.grid.pitch;
    for (std::size_t i = 0; i < r.x.size(); ++i) {
      p.x.push_back(r.x[i]);
      p.v.push_back(r.values[i]);
    }
    p.m2 += 0.25 * r.width * r.width;
  }
  if (used == 0) throw InputError("no calibration record passed the width acceptance range");
  p.m2 /= static_cast<double>(used);
  if (!(p.m2 > 0.0)) throw InputError("calibration records have zero spread");
  return p;
}

struct Candidate {
  std::vector<double> params;
  Point shift;
  double cost;
  bool converged;
};

}  // namespace

IrfFit fit_irf_family(const std::vector<CenteredRecord>& records, IrfFamily family, const CalibrationOptions& opts,
                      const IrfFit* warm) {
  const Pooled P = pool(records);
  nm::LsqOptions lo;
  lo.max_iterations = opts.lm_iterations;
  std::vector<Candidate> cands;
  std::size_t starts = 0;

  if (family == IrfFamily::Asymmetric1D) {
    if (P.dim != 1) throw InputError("asymmetric-1d needs 1-D records");
    // sech(bx) has variance π²/(4b²); its lattice sum is a1 π / (2 b d_p).
    const double b = std::numbers::pi / (2.0 * std::sqrt(P.m2));
    // p = {log a1, log b1, log b2, x0}
    auto fn = [&](std::span<const double> p, std::span<double> r) {
      const double a1 = std::exp(p[0]), b1 = std::exp(p[1]), b2 = std::exp(p[2]);
      for (std::size_t i = 0; i < P.x.size(); ++i) {
        const double x = P.x[i][0] - p[3];
        const double e1 = b1 * x, e2 = -b2 * x;
        const double m = std::max(e1, e2);
        r[i] = a1 * std::exp(-m) / (std::exp(e1 - m) + std::exp(e2 - m)) - P.v[i];
      }
    };
    std::vector<std::vector<double>> p0s;
    if (warm) {
      const auto& q = warm->irf.parameters();
      p0s.push_back({std::log(q[0]), std::log(q[1]), std::log(q[2]), warm->shift[0]});
    } else {
      for (double ratio : {1.0, 0.5, 2.0})
        for (double scale : {1.0, 0.7, 1.4}) {
          const double b1 = b * scale * std::sqrt(ratio), b2 = b * scale / std::sqrt(ratio);
          const double a1 = (b1 + b2) * P.pitch[0] / std::numbers::pi;
          p0s.push_back({std::log(a1), std::log(b1), std::log(b2), 0.0});
        }
    }
    for (const auto& p0 : p0s) {
      const nm::LsqResult f = nm::levenberg_marquardt(fn, p0, P.x.size(), lo);
      ++starts;
      if (!std::isfinite(f.cost)) continue;
      cands.push_back({{std::exp(f.params[0]), std::exp(f.params[1]), std::exp(f.params[2])},
                       {f.params[3], 0.0}, f.cost, f.converged});
    }
  } else if (family == IrfFamily::GaussianHalo2D) {
    if (P.dim != 2) throw InputError("gaussian-halo-2d needs 2-D records");
    const double s2 = P.m2;
    const double cell = P.pitch[0] * P.pitch[1];
    // Gaussian stage: p = {log b1, log d1, cx, cy}
    auto gfn = [&](std::span<const double> p, std::span<double> r) {
      const double b1 = std::exp(p[0]), d1 = std::exp(p[1]);
      for (std::size_t i = 0; i < P.x.size(); ++i) {
        const double dx = P.x[i][0] - p[2], dy = P.x[i][1] - p[3];
        r[i] = b1 * std::exp(-(dx * dx + dy * dy) * d1) - P.v[i];
      }
    };
    std::vector<std::vector<double>> p0s;
    if (warm) {
      const auto& q = warm->irf.parameters();
      p0s.push_back({std::log(q[0]), std::log(q[1]), q[2], std::log(q[3]), q[4], warm->shift[0], warm->shift[1]});
    } else {
      const double d1_0 = 1.0 / (2.0 * s2);
      const nm::LsqResult g = nm::levenberg_marquardt(
          gfn, {std::log(cell * d1_0 / std::numbers::pi), std::log(d1_0), 0.0, 0.0}, P.x.size(), lo);
      ++starts;
      if (std::isfinite(g.cost))
        cands.push_back({{std::exp(g.params[0]), std::exp(g.params[1]), 0.0, 1.0, 0.0}, {g.params[2], g.params[3]},
                         g.cost, g.converged});
      const double s = 1.0 / std::sqrt(2.0 * std::exp(g.params[1]));
      for (double r0f : {1.0, 2.0, 3.0, 4.0})
        for (double d2f : {1.0, 4.0})
          p0s.push_back({g.params[0], g.params[1], 0.0, std::log(d2f / (2.0 * s * s)), r0f * s, g.params[2], g.params[3]});
    }
    // Full model: p = {log b1, log d1, b2, log d2, r0, cx, cy}
    auto hfn = [&](std::span<const double> p, std::span<double> r) {
      const double b1 = std::exp(p[0]), d1 = std::exp(p[1]), b2 = p[2], d2 = std::exp(p[3]), r0 = p[4];
      for (std::size_t i = 0; i < P.x.size(); ++i) {
        const double dx = P.x[i][0] - p[5], dy = P.x[i][1] - p[6];
        const double rho2 = dx * dx + dy * dy, rho = std::sqrt(rho2);
        r[i] = b1 * std::exp(-rho2 * d1) + b2 * rho2 * std::exp(-(rho - r0) * (rho - r0) * d2) - P.v[i];
      }
    };
    for (const auto& p0 : p0s) {
      const nm::LsqResult f = nm::levenberg_marquardt(hfn, p0, P.x.size(), lo);
      ++starts;
      if (!std::isfinite(f.cost) || f.params[2] < 0.0 || f.params[4] < 0.0) continue;
      cands.push_back({{std::exp(f.params[0]), std::exp(f.params[1]), f.params[2], std::exp(f.params[3]), f.params[4]},
                       {f.params[5], f.params[6]}, f.cost, f.converged});
    }
  } else {
    throw InputError("tabulated responses are not fitted");
  }

  if (cands.empty()) throw InputError("IRF fit failed from every start");
  const auto best = std::min_element(cands.begin(), cands.end(),
                                     [](const Candidate& a, const Candidate& b) { return a.cost < b.cost; });
  IrfFit out;
  out.irf = IrfModel::from_parameters(family, best->params);
  out.shift = best->shift;
  out.cost = best->cost;
  out.starts = starts;
  out.points = P.x.size();
  out.converged = best->converged;
  const double w = out.irf.width();
  if (!std::isfinite(w) || w <= 0.0) throw InputError("fitted IRF has no finite width");
  if (!width_ok(w, opts)) throw InputError("fitted IRF width " + std::to_string(w) + " is outside the acceptance range");
  return out;
}

Autocorrelation::Autocorrelation(const SampledSignal& g) {
  const PixelGrid& gg = g.grid;
  const long nx = static_cast<long>(gg.nx()), ny = static_cast<long>(gg.ny());
  rx_ = nx - 1;
  ry_ = gg.dim == 2 ? ny - 1 : 0;
  PixelGrid lag = gg.dim == 2 ? PixelGrid::image(static_cast<std::size_t>(2 * rx_ + 1), static_cast<std::size_t>(2 * ry_ + 1),
                                                 gg.pitch[0], {-rx_ * gg.pitch[0], -ry_ * gg.pitch[1]})
                              : PixelGrid::line(static_cast<std::size_t>(2 * rx_ + 1), gg.pitch[0], -rx_ * gg.pitch[0]);
  lag.pitch = gg.pitch;
  std::vector<double> v(lag.size(), 0.0);
  for (long jy = -ry_; jy <= ry_; ++jy)
    for (long jx = -rx_; jx <= rx_; ++jx) {
      double s = 0.0;
      for (long iy = std::max(0L, jy); iy < std::min(ny, ny + jy); ++iy)
        for (long ix = std::max(0L, jx); ix < std::min(nx, nx + jx); ++ix)
          s += g.values[static_cast<std::size_t>(iy * nx + ix)] * g.values[static_cast<std::size_t>((iy - jy) * nx + ix - jx)];
      v[static_cast<std::size_t>((jy + ry_) * (2 * rx_ + 1) + jx + rx_)] = s;
    }
  lags_ = SampledSignal(lag, std::move(v), "G");
}

double Autocorrelation::at_lag(long jx, long jy) const {
  if (lags_.values.empty() || std::abs(jx) > rx_ || std::abs(jy) > ry_) return 0.0;
  return lags_.values[static_cast<std::size_t>((jy + ry_) * (2 * rx_ + 1) + jx + rx_)];
}

double Autocorrelation::operator()(Point z) const {
  if (lags_.values.empty()) return 0.0;
  const double ux = z[0] / lags_.grid.pitch[0];
  const double uy = lags_.grid.dim == 2 ? z[1] / lags_.grid.pitch[1] : 0.0;
  const double fx = std::floor(ux), fy = std::floor(uy);
  const double tx = ux - fx, ty = uy - fy;
  const long x0 = static_cast<long>(fx), y0 = static_cast<long>(fy);
  return (1 - tx) * (1 - ty) * at_lag(x0, y0) + tx * (1 - ty) * at_lag(x0 + 1, y0) + (1 - tx) * ty * at_lag(x0, y0 + 1) +
         tx * ty * at_lag(x0 + 1, y0 + 1);
}

SampledSignal compute_residual(const std::vector<CenteredRecord>& records, const IrfFit& fit) {
  std::array<long, 2> lo{std::numeric_limits<long>::min(), std::numeric_limits<long>::min()};
  std::array<long, 2> hi{std::numeric_limits<long>::max(), std::numeric_limits<long>::max()};
  std::vector<std::array<long, 2>> centers(records.size());
  std::size_t used = 0;
  const CenteredRecord* first = nullptr;
  for (std::size_t r = 0; r < records.size(); ++r) {
    const CenteredRecord& rec = records[r];
    if (!rec.accepted) continue;
    if (!first) first = &rec;
    ++used;
    const std::size_t k = rec.grid.nearest(rec.center);
    centers[r] = {static_cast<long>(k % rec.grid.nx()), static_cast<long>(k / rec.grid.nx())};
    for (int a = 0; a < 2; ++a) {
      lo[a] = std::max(lo[a], -centers[r][a]);
      hi[a] = std::min(hi[a], static_cast<long>(rec.grid.extents[a]) - 1 - centers[r][a]);
    }
  }
  if (!first) throw InputError("no accepted calibration records for the residual");
  if (hi[0] < lo[0] || hi[1] < lo[1]) throw InputError("calibration records share no common offsets");
  const std::size_t nx = static_cast<std::size_t>(hi[0] - lo[0] + 1), ny = static_cast<std::size_t>(hi[1] - lo[1] + 1);
  const PixelGrid& pg = first->grid;
  PixelGrid grid = pg.dim == 2 ? PixelGrid::image(nx, ny, pg.pitch[0], {lo[0] * pg.pitch[0], lo[1] * pg.pitch[1]})
                               : PixelGrid::line(nx, pg.pitch[0], lo[0] * pg.pitch[0]);
  grid.pitch = pg.pitch;
  std::vector<double> g(grid.size(), 0.0);
  for (std::size_t r = 0; r < records.size(); ++r) {
    const CenteredRecord& rec = records[r];
    if (!rec.accepted) continue;
    for (long jy = lo[1]; jy <= hi[1]; ++jy)
      for (long jx = lo[0]; jx <= hi[0]; ++jx) {
        const std::size_t i = rec.grid.index(static_cast<std::size_t>(centers[r][0] + jx),
                                             static_cast<std::size_t>(centers[r][1] + jy));
        const Point x{rec.x[i][0] - fit.shift[0], rec.x[i][1] - fit.shift[1]};
        g[grid.index(static_cast<std::size_t>(jx - lo[0]), static_cast<std::size_t>(jy - lo[1]))] +=
            (rec.values[i] - fit.irf(x)) / static_cast<double>(used);
      }
  }
  return SampledSignal(grid, std::move(g), "g");
}

void recenter_with_shape(std::vector<CenteredRecord>& centered, const std::vector<SampledSignal>& records,
                         const IrfFit& fit, const CalibrationOptions& opts) {
  if (centered.size() != records.size()) throw InputError("record lists differ in length");
#pragma omp parallel for schedule(dynamic)
  for (std::size_t r = 0; r < records.size(); ++r) {
    const SampledSignal& s = records[r];
    CenteredRecord& c = centered[r];
    if (s.grid.dim != 2) continue;
    // A Ĩ(x - c - shift) + a
    auto fn = [&](std::span<const double> p, std::span<double> res) {
      for (std::size_t i = 0; i < s.grid.size(); ++i) {
        const Point x = s.grid.center(i);
        res[i] = p[0] * fit.irf({x[0] - p[1] - fit.shift[0], x[1] - p[2] - fit.shift[1]}) + p[3] - s.values[i];
      }
    };
    double mass = 0.0;
    for (double v : c.values) mass += v;
    double sum = 0.0;
    for (double v : s.values) sum += v - c.background;
    nm::LsqOptions lo;
    lo.max_iterations = opts.lm_iterations;
    const nm::LsqResult f =
        nm::levenberg_marquardt(fn, {sum / std::max(mass, 1e-300), c.center[0], c.center[1], c.background}, s.grid.size(), lo);
    if (!std::isfinite(f.cost) || !(f.params[0] > 0.0)) continue;
    std::vector<double> v = s.values;
    double total = 0.0;
    for (double& x : v) total += (x -= f.params[3]);
    if (!(total > 0.0)) continue;
    for (double& x : v) x /= total;
    c.center = {f.params[1], f.params[2]};
    c.background = f.params[3];
    c.fit_cost = f.cost;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const Point p = s.grid.center(i);
      c.x[i] = {p[0] - c.center[0], p[1] - c.center[1]};
    }
    c.values = std::move(v);
  }
}

CalibrationResult calibrate(const std::vector<SampledSignal>& records, IrfFamily family,
                            const CalibrationOptions& opts) {
  CalibrationResult out;
  out.records = cocenter_normalize(records, opts);
  out.fit = fit_irf_family(out.records, family, opts);
  for (int pass = 0; pass < opts.refine_passes && out.fit.irf.dimension() == 2; ++pass) {
    recenter_with_shape(out.records, records, out.fit, opts);
    out.fit = fit_irf_family(out.records, family, opts, &out.fit);
  }
  out.d0 = out.fit.irf.width();
  out.g = compute_residual(out.records, out.fit);
  out.G = Autocorrelation(out.g);
  return out;
}

std::vector<SampledSignal> detect_spots(const SampledSignal& image, const SpotOptions& opts) {
  const PixelGrid& g = image.grid;
  g.validate();
  const double width = opts.expected_width > 0.0 ? opts.expected_width : 2.0 * g.pitch[0];
  const double radius = opts.patch_radius > 0.0 ? opts.patch_radius : 3.0 * width;
  const long R = std::max(1L, static_cast<long>(std::ceil(radius / g.pitch[0] - 1e-9)));
  const double med = median_of(image.values);
  std::vector<double> dev(image.values.size());
  for (std::size_t i = 0; i < dev.size(); ++i) dev[i] = std::abs(image.values[i] - med);
  const double mad = median_of(dev);
  const double threshold = med + opts.threshold_mads * mad;
  const long nx = static_cast<long>(g.nx()), ny = static_cast<long>(g.ny());
  const long Ry = g.dim == 2 ? R : 0;
  struct Peak {
    long x, y;
    double v;
  };
  std::vector<Peak> peaks;
  for (long y = Ry; y < ny - Ry; ++y)
    for (long x = R; x < nx - R; ++x) {
      const double v = image.values[static_cast<std::size_t>(y * nx + x)];
      if (!(v > threshold)) continue;
      bool is_max = true;
      for (long dy = g.dim == 2 ? -1 : 0; dy <= (g.dim == 2 ? 1 : 0) && is_max; ++dy)
        for (long dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const double w = image.values[static_cast<std::size_t>((y + dy) * nx + x + dx)];
          if (w > v || (w == v && (dy < 0 || (dy == 0 && dx < 0)))) {
            is_max = false;
            break;
          }
        }
      if (is_max) peaks.push_back({x, y, v});
    }
  std::stable_sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) { return a.v > b.v; });
  std::vector<Peak> kept;
  for (const Peak& p : peaks) {
    bool inside = false;
    for (const Peak& k : kept)
      if (std::abs(p.x - k.x) <= R && std::abs(p.y - k.y) <= Ry) inside = true;
    if (!inside) kept.push_back(p);
  }
  std::vector<SampledSignal> out;
  for (const Peak& p : kept) {
    const std::size_t w = static_cast<std::size_t>(2 * R + 1), h = static_cast<std::size_t>(2 * Ry + 1);
    const Point o = g.center(static_cast<std::size_t>(p.x - R), static_cast<std::size_t>(p.y - Ry));
    PixelGrid pg = g.dim == 2 ? PixelGrid::image(w, h, g.pitch[0], o) : PixelGrid::line(w, g.pitch[0], o[0]);
    pg.pitch = g.pitch;
    std::vector<double> v(pg.size());
    for (long dy = 0; dy < static_cast<long>(h); ++dy)
      for (long dx = 0; dx < static_cast<long>(w); ++dx)
        v[static_cast<std::size_t>(dy) * w + static_cast<std::size_t>(dx)] =
            image.values[static_cast<std::size_t>((p.y - Ry + dy) * nx + p.x - R + dx)];
    out.emplace_back(pg, std::move(v), image.label + " spot " + std::to_string(out.size()));
  }
  return out;
}

json to_json(const CalibrationResult& r, const CalibrationOptions& opts) {
  json recs = json::array();
  for (const CenteredRecord& c : r.records)
    recs.push_back({{"center", {c.center[0], c.center[1]}},
                    {"background", c.background},
                    {"width", c.width},
                    {"fit_cost", c.fit_cost},
                    {"accepted", c.accepted}});
  return json{{"family", to_string(r.fit.irf.family())},
              {"parameters", r.fit.irf.parameters()},
              {"shift", {r.fit.shift[0], r.fit.shift[1]}},
              {"d0", r.d0},
              {"fit_cost", r.fit.cost},
              {"fit_points", r.fit.points},
              {"starts", r.fit.starts},
              {"converged", r.fit.converged},
              {"acceptance", {{"min_width", opts.min_width}, {"max_width", opts.max_width}}},
              {"g_max_abs", [&] {
                 double m = 0.0;
                 for (double v : r.g.values) m = std::max(m, std::abs(v));
                 return m;
               }()},
              {"G0", r.G.at_lag(0, 0)},
              {"records", recs}};
}

}  // namespace suppose

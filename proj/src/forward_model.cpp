#include "suppose/forward_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace suppose {

std::string to_string(BackgroundMode m) {
  switch (m) {
    case BackgroundMode::None: return "none";
    case BackgroundMode::SubtractedKnown: return "subtracted";
    case BackgroundMode::UnknownConstant: return "constant-bg";
  }
  return "none";
}

BackgroundMode background_mode_from_string(const std::string& s) {
  if (s == "none") return BackgroundMode::None;
  if (s == "subtracted") return BackgroundMode::SubtractedKnown;
  if (s == "constant-bg") return BackgroundMode::UnknownConstant;
  throw InputError("unknown background mode '" + s + "' (none|subtracted|constant-bg)");
}

namespace {

// exp(-rate (x_j - a)^2) on x_j = origin + j h, via a multiplicative recurrence that
// starts at the sample nearest to a and walks outwards (values only decrease).
void gaussian_profile(double origin, double h, std::size_t n, double a, double rate,
                      std::size_t lo, std::size_t hi, double* out) {
  double fj = std::round((a - origin) / h);
  fj = std::clamp(fj, static_cast<double>(lo), static_cast<double>(hi - 1));
  const auto j0 = static_cast<std::size_t>(fj);
  const double t0 = origin + static_cast<double>(j0) * h - a;
  const double g0 = std::exp(-rate * t0 * t0);
  const double q = std::exp(-2.0 * rate * h * h);
  out[j0] = g0;
  double g = g0, r = std::exp(-rate * (2.0 * t0 * h + h * h));
  for (std::size_t j = j0 + 1; j < hi; ++j) {
    g *= r;
    r *= q;
    out[j] = g;
  }
  g = g0;
  r = std::exp(-rate * (h * h - 2.0 * t0 * h));
  for (std::size_t j = j0; j-- > lo;) {
    g *= r;
    r *= q;
    out[j] = g;
  }
  (void)n;
}

// Index window [lo, hi) of samples within `radius` of a along one axis.
void axis_window(double origin, double h, std::size_t n, double a, double radius, std::size_t& lo,
                 std::size_t& hi) {
  if (radius <= 0.0) {
    lo = 0;
    hi = n;
    return;
  }
  const double flo = std::ceil((a - radius - origin) / h);
  const double fhi = std::floor((a + radius - origin) / h);
  if (fhi < 0.0 || flo > static_cast<double>(n - 1)) {
    lo = hi = 0;
    return;
  }
  lo = static_cast<std::size_t>(std::max(flo, 0.0));
  hi = static_cast<std::size_t>(std::min(fhi, static_cast<double>(n - 1))) + 1;
}

}  // namespace

ModelRenderer::ModelRenderer(IrfModel irf, PixelGrid grid, RenderOptions opts)
    : irf_(std::move(irf)), grid_(grid), opts_(opts) {
  grid_.validate();
  if (irf_.dimension() != grid_.dim) throw InputError("IRF and grid dimensions differ");
  if (irf_.is_separable_gaussian()) {
    gauss_amplitude_ = irf_.parameters()[0];
    gauss_rate_ = irf_.parameters()[1];
  }
}

void ModelRenderer::add_source(Point a, double w, std::span<double> out) const {
  const std::size_t nx = grid_.nx(), ny = grid_.ny();
  std::size_t xlo, xhi, ylo = 0, yhi = 1;
  axis_window(grid_.origin[0], grid_.pitch[0], nx, a[0], opts_.support_radius, xlo, xhi);
  if (grid_.dim == 2) axis_window(grid_.origin[1], grid_.pitch[1], ny, a[1], opts_.support_radius, ylo, yhi);
  if (xlo >= xhi || ylo >= yhi) return;

  if (gauss_rate_ > 0.0) {
    // Product of 1-D Gaussian profiles.
    thread_local std::vector<double> gx, gy;
    gx.assign(nx, 0.0);
    gy.assign(ny, 0.0);
    gaussian_profile(grid_.origin[0], grid_.pitch[0], nx, a[0], gauss_rate_, xlo, xhi, gx.data());
    gaussian_profile(grid_.origin[1], grid_.pitch[1], ny, a[1], gauss_rate_, ylo, yhi, gy.data());
    const double scale = w * gauss_amplitude_;
    for (std::size_t iy = ylo; iy < yhi; ++iy) {
      const double sy = scale * gy[iy];
      double* row = out.data() + iy * nx;
      for (std::size_t ix = xlo; ix < xhi; ++ix) row[ix] += sy * gx[ix];
    }
    return;
  }
  for (std::size_t iy = ylo; iy < yhi; ++iy) {
    const double y = grid_.origin[1] + static_cast<double>(iy) * grid_.pitch[1] - a[1];
    double* row = out.data() + iy * nx;
    for (std::size_t ix = xlo; ix < xhi; ++ix) {
      const double x = grid_.origin[0] + static_cast<double>(ix) * grid_.pitch[0] - a[0];
      row[ix] += w * irf_({x, y});
    }
  }
}

void ModelRenderer::accumulate(std::span<const Point> sources, double weight,
                               std::span<double> out) const {
  for (const Point& a : sources) add_source(a, weight, out);
}

std::vector<double> ModelRenderer::basis(std::span<const Point> sources) const {
  std::vector<double> u(grid_.size(), 0.0);
  accumulate(sources, 1.0, u);
  return u;
}

void remove_mean(std::span<double> values) {
  if (values.empty()) return;
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  for (double& v : values) v -= mean;
}

SampledSignal evaluate_model(const SourceSet& sources, const IrfModel& irf, const PixelGrid& grid,
                             BackgroundMode mode, RenderOptions opts) {
  sources.validate();
  ModelRenderer r(irf, grid, opts);
  std::vector<double> v(grid.size(), 0.0);
  r.accumulate(sources.positions, sources.alpha, v);
  if (uses_deviation(mode)) remove_mean(v);
  return SampledSignal(grid, std::move(v), "model");
}

CenteredKernel::CenteredKernel(const IrfModel& irf, const PixelGrid& grid, BackgroundMode mode)
    : irf_(irf), grid_(grid), mode_(mode) {
  grid_.validate();
  if (irf_.dimension() != grid_.dim) throw InputError("IRF and grid dimensions differ");
  center_ = grid_.center(grid_.nearest(grid_.midpoint()));
  samples_.resize(grid_.size());
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    const Point x = grid_.center(i);
    samples_[i] = irf_({x[0] - center_[0], x[1] - center_[1]});
  }
  if (uses_deviation(mode_)) {
    mean_ = std::accumulate(samples_.begin(), samples_.end(), 0.0) / static_cast<double>(samples_.size());
    for (double& v : samples_) v -= mean_;
  }
}

std::vector<double> CenteredKernel::shifted(Point z) const {
  std::vector<double> out(grid_.size());
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    const Point x = grid_.center(i);
    out[i] = irf_({x[0] - center_[0] - z[0], x[1] - center_[1] - z[1]}) - mean_;
  }
  return out;
}

std::vector<Point> CenteredKernel::gradient(Point z) const {
  std::vector<Point> out(grid_.size());
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    const Point x = grid_.center(i);
    out[i] = irf_.gradient({x[0] - center_[0] - z[0], x[1] - center_[1] - z[1]});
  }
  return out;
}

double CenteredKernel::norm2() const {
  double s = 0.0;
  for (double v : samples_) s += v * v;
  return s;
}

}  // namespace suppose

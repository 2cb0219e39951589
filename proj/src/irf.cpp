#include "suppose/irf.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "suppose/numerics.hpp"

namespace suppose {

std::string to_string(IrfFamily f) {
  switch (f) {
    case IrfFamily::Asymmetric1D: return "asymmetric-1d";
    case IrfFamily::GaussianHalo2D: return "gaussian-halo-2d";
    case IrfFamily::Tabulated: return "tabulated";
  }
  return "unknown";
}

IrfFamily irf_family_from_string(const std::string& s) {
  if (s == "asymmetric-1d") return IrfFamily::Asymmetric1D;
  if (s == "gaussian-halo-2d" || s == "gaussian-2d") return IrfFamily::GaussianHalo2D;
  if (s == "tabulated") return IrfFamily::Tabulated;
  throw InputError("unknown IRF family '" + s + "'");
}

namespace {

void require_finite_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    std::ostringstream os;
    os << "IRF parameter " << what << " must be positive (got " << v << ")";
    throw InputError(os.str());
  }
}

// a / (exp(b1 x) + exp(-b2 x)) and the log-derivative factor, overflow-safe.
void asymmetric_eval(double a, double b1, double b2, double x, double& value, double& slope) {
  const double s = b1 + b2;
  if (x >= 0.0) {
    const double e = std::exp(-s * x);
    value = a * std::exp(-b1 * x) / (1.0 + e);
    slope = -value * (b1 - b2 * e) / (1.0 + e);
  } else {
    const double e = std::exp(s * x);
    value = a * std::exp(b2 * x) / (1.0 + e);
    slope = -value * (b1 * e - b2) / (1.0 + e);
  }
}

double halo_radial(const std::vector<double>& p, double r) {
  return p[0] * std::exp(-r * r * p[1]) + p[2] * r * r * std::exp(-(r - p[4]) * (r - p[4]) * p[3]);
}

// (d f / d r) / r, finite at r = 0.
double halo_radial_slope_over_r(const std::vector<double>& p, double r) {
  const double g = p[0] * std::exp(-r * r * p[1]);
  const double h = p[2] * std::exp(-(r - p[4]) * (r - p[4]) * p[3]);
  return -2.0 * p[1] * g + h * (2.0 - 2.0 * r * (r - p[4]) * p[3]);
}

double table_lookup(const IrfTable& t, Point x) {
  const PixelGrid& g = t.grid;
  double fx = (x[0] - g.origin[0]) / g.pitch[0];
  if (fx < 0.0 || fx > static_cast<double>(g.nx() - 1)) return 0.0;
  auto ix = static_cast<std::size_t>(std::floor(fx));
  if (ix >= g.nx() - 1) ix = g.nx() >= 2 ? g.nx() - 2 : 0;
  const double tx = g.nx() >= 2 ? fx - static_cast<double>(ix) : 0.0;
  if (g.dim == 1) {
    if (g.nx() == 1) return t.values[0];
    return (1.0 - tx) * t.values[ix] + tx * t.values[ix + 1];
  }
  double fy = (x[1] - g.origin[1]) / g.pitch[1];
  if (fy < 0.0 || fy > static_cast<double>(g.ny() - 1)) return 0.0;
  auto iy = static_cast<std::size_t>(std::floor(fy));
  if (iy >= g.ny() - 1) iy = g.ny() >= 2 ? g.ny() - 2 : 0;
  const double ty = g.ny() >= 2 ? fy - static_cast<double>(iy) : 0.0;
  const std::size_t ix1 = std::min(ix + 1, g.nx() - 1);
  const std::size_t iy1 = std::min(iy + 1, g.ny() - 1);
  const double v00 = t.values[g.index(ix, iy)], v10 = t.values[g.index(ix1, iy)];
  const double v01 = t.values[g.index(ix, iy1)], v11 = t.values[g.index(ix1, iy1)];
  return (1.0 - ty) * ((1.0 - tx) * v00 + tx * v10) + ty * ((1.0 - tx) * v01 + tx * v11);
}

}  // namespace

IrfModel IrfModel::asymmetric_1d(double a1, double b1, double b2) {
  require_finite_positive(a1, "a1");
  require_finite_positive(b1, "b1");
  require_finite_positive(b2, "b2");
  IrfModel m;
  m.family_ = IrfFamily::Asymmetric1D;
  m.dim_ = 1;
  m.params_ = {a1, b1, b2};
  m.compute_moments();
  return m;
}

IrfModel IrfModel::gaussian_halo_2d(double b1, double d1, double b2, double d2, double halo_radius) {
  require_finite_positive(b1, "b1");
  require_finite_positive(d1, "d1");
  require_finite_positive(d2, "d2");
  if (!(b2 >= 0.0) || !std::isfinite(b2)) throw InputError("IRF halo amplitude b2 must be >= 0");
  if (!(halo_radius >= 0.0) || !std::isfinite(halo_radius))
    throw InputError("IRF halo radius must be >= 0");
  IrfModel m;
  m.family_ = IrfFamily::GaussianHalo2D;
  m.dim_ = 2;
  m.params_ = {b1, d1, b2, d2, halo_radius};
  m.compute_moments();
  return m;
}

IrfModel IrfModel::gaussian_2d(double sigma, double amplitude) {
  require_finite_positive(sigma, "sigma");
  return gaussian_halo_2d(amplitude, 1.0 / (2.0 * sigma * sigma), 0.0, 1.0, 0.0);
}

IrfModel IrfModel::tabulated(PixelGrid grid, std::vector<double> values) {
  grid.validate();
  if (values.size() != grid.size()) throw InputError("tabulated IRF sample count does not match its grid");
  double peak = 0.0;
  for (double v : values) {
    if (!std::isfinite(v)) throw InputError("tabulated IRF holds non-finite samples");
    peak = std::max(peak, std::abs(v));
  }
  if (peak <= 0.0) throw InputError("tabulated IRF is identically zero");
  // The support must close inside the table: border samples stay below 5% of the peak.
  double border = 0.0;
  for (std::size_t iy = 0; iy < grid.ny(); ++iy)
    for (std::size_t ix = 0; ix < grid.nx(); ++ix) {
      const bool edge = ix == 0 || ix + 1 == grid.nx() ||
                        (grid.dim == 2 && (iy == 0 || iy + 1 == grid.ny()));
      if (edge) border = std::max(border, std::abs(values[grid.index(ix, iy)]));
    }
  if (border > 0.05 * peak) throw InputError("tabulated IRF support is cut by its table extent");
  IrfModel m;
  m.family_ = IrfFamily::Tabulated;
  m.dim_ = grid.dim;
  m.table_ = IrfTable{grid, std::move(values)};
  m.compute_moments();
  return m;
}

IrfModel IrfModel::from_parameters(IrfFamily family, const std::vector<double>& p) {
  switch (family) {
    case IrfFamily::Asymmetric1D:
      if (p.size() != 3) throw InputError("asymmetric-1d IRF expects 3 parameters");
      return asymmetric_1d(p[0], p[1], p[2]);
    case IrfFamily::GaussianHalo2D:
      if (p.size() != 5) throw InputError("gaussian-halo-2d IRF expects 5 parameters");
      return gaussian_halo_2d(p[0], p[1], p[2], p[3], p[4]);
    case IrfFamily::Tabulated: break;
  }
  throw InputError("tabulated IRFs are built from samples, not parameters");
}

double IrfModel::operator()(Point x) const {
  switch (family_) {
    case IrfFamily::Asymmetric1D: {
      double v, s;
      asymmetric_eval(params_[0], params_[1], params_[2], x[0], v, s);
      return v;
    }
    case IrfFamily::GaussianHalo2D:
      return halo_radial(params_, std::hypot(x[0], x[1]));
    case IrfFamily::Tabulated:
      return table_lookup(table_, x);
  }
  return 0.0;
}

Point IrfModel::gradient(Point x) const {
  switch (family_) {
    case IrfFamily::Asymmetric1D: {
      double v, s;
      asymmetric_eval(params_[0], params_[1], params_[2], x[0], v, s);
      return {s, 0.0};
    }
    case IrfFamily::GaussianHalo2D: {
      const double k = halo_radial_slope_over_r(params_, std::hypot(x[0], x[1]));
      return {k * x[0], k * x[1]};
    }
    case IrfFamily::Tabulated: {
      Point g{0.0, 0.0};
      for (int a = 0; a < dim_; ++a) {
        const double h = 1e-4 * table_.grid.pitch[a];
        Point xp = x, xm = x;
        xp[a] += h;
        xm[a] -= h;
        g[a] = (table_lookup(table_, xp) - table_lookup(table_, xm)) / (2.0 * h);
      }
      return g;
    }
  }
  return {0.0, 0.0};
}

bool IrfModel::has_parity() const {
  switch (family_) {
    case IrfFamily::GaussianHalo2D: return true;
    case IrfFamily::Asymmetric1D:
      return std::abs(params_[1] - params_[2]) <= 1e-12 * std::max(params_[1], params_[2]);
    case IrfFamily::Tabulated: {
      // Even about the table center, sample by sample.
      const PixelGrid& g = table_.grid;
      double peak = 0.0;
      for (double v : table_.values) peak = std::max(peak, std::abs(v));
      for (std::size_t iy = 0; iy < g.ny(); ++iy)
        for (std::size_t ix = 0; ix < g.nx(); ++ix) {
          const std::size_t mx = g.nx() - 1 - ix, my = g.ny() - 1 - iy;
          const double v = table_.values[g.index(ix, iy)];
          if (std::abs(v - table_.values[g.index(mx, iy)]) > 1e-12 * peak) return false;
          if (std::abs(v - table_.values[g.index(ix, my)]) > 1e-12 * peak) return false;
        }
      const Point mid = g.midpoint();
      return std::abs(mid[0]) < 1e-12 * g.pitch[0] && (g.dim == 1 || std::abs(mid[1]) < 1e-12 * g.pitch[1]);
    }
  }
  return false;
}

bool IrfModel::is_separable_gaussian() const {
  return family_ == IrfFamily::GaussianHalo2D && params_[2] == 0.0;
}

double IrfModel::width() const { return 2.0 * std::sqrt(variance_); }

IrfModel IrfModel::scaled(double factor) const {
  IrfModel m = *this;
  switch (family_) {
    case IrfFamily::Asymmetric1D: m.params_[0] *= factor; break;
    case IrfFamily::GaussianHalo2D:
      m.params_[0] *= factor;
      m.params_[2] *= factor;
      break;
    case IrfFamily::Tabulated:
      for (double& v : m.table_.values) v *= factor;
      break;
  }
  m.integral_ *= factor;
  return m;
}

IrfModel IrfModel::normalized(const PixelGrid& grid) const {
  double cell = grid.pitch[0];
  if (dim_ == 2) cell *= grid.pitch[1];
  if (!(integral_ > 0.0)) throw InputError("IRF has non-positive integral and cannot be normalized");
  return scaled(cell / integral_);
}

void IrfModel::compute_moments() {
  constexpr std::size_t kIntervals = 40000;
  switch (family_) {
    case IrfFamily::Asymmetric1D: {
      const double a = params_[0], b1 = params_[1], b2 = params_[2];
      const double lo = -46.0 / b2, hi = 46.0 / b1;
      auto f = [&](double x) {
        double v, s;
        asymmetric_eval(a, b1, b2, x, v, s);
        return v;
      };
      const double m0 = numerics::simpson(f, lo, hi, kIntervals);
      const double m1 = numerics::simpson([&](double x) { return x * f(x); }, lo, hi, kIntervals);
      const double m2 = numerics::simpson([&](double x) { return x * x * f(x); }, lo, hi, kIntervals);
      integral_ = m0;
      centroid_ = {m1 / m0, 0.0};
      variance_ = m2 / m0 - centroid_[0] * centroid_[0];
      break;
    }
    case IrfFamily::GaussianHalo2D: {
      const double rmax = std::max(std::sqrt(46.0 / params_[1]),
                                   params_[2] > 0.0 ? params_[4] + std::sqrt(46.0 / params_[3]) : 0.0);
      auto f = [&](double r) { return halo_radial(params_, r) * 2.0 * std::numbers::pi * r; };
      const double m0 = numerics::simpson(f, 0.0, rmax, kIntervals);
      const double m2 = numerics::simpson([&](double r) { return r * r * f(r); }, 0.0, rmax, kIntervals);
      integral_ = m0;
      centroid_ = {0.0, 0.0};
      variance_ = 0.5 * m2 / m0;  // per axis
      break;
    }
    case IrfFamily::Tabulated: {
      const PixelGrid& g = table_.grid;
      double s0 = 0.0;
      Point s1{0.0, 0.0}, s2{0.0, 0.0};
      for (std::size_t i = 0; i < g.size(); ++i) {
        const Point c = g.center(i);
        const double v = table_.values[i];
        s0 += v;
        for (int a = 0; a < g.dim; ++a) {
          s1[a] += v * c[a];
          s2[a] += v * c[a] * c[a];
        }
      }
      double cell = g.pitch[0] * (g.dim == 2 ? g.pitch[1] : 1.0);
      integral_ = s0 * cell;
      double var = 0.0;
      for (int a = 0; a < g.dim; ++a) {
        centroid_[a] = s1[a] / s0;
        var += s2[a] / s0 - centroid_[a] * centroid_[a];
      }
      variance_ = var / g.dim;
      break;
    }
  }
  if (!(variance_ > 0.0) || !std::isfinite(variance_))
    throw InputError("IRF has no positive width (d0 must be > 0)");
}

PixelatedIrf::PixelatedIrf(std::function<double(Point)> continuous, int dim, Point pitch, int order)
    : j_(std::move(continuous)), dim_(dim), pitch_(pitch) {
  if (dim != 1 && dim != 2) throw InputError("pixelation supports 1-D and 2-D responses");
  auto [x, w] = numerics::gauss_legendre(order);
  nodes_ = std::move(x);
  weights_ = std::move(w);
}

double PixelatedIrf::operator()(Point x) const {
  double acc = 0.0;
  const std::size_t q = nodes_.size();
  if (dim_ == 1) {
    for (std::size_t i = 0; i < q; ++i)
      acc += weights_[i] * j_({x[0] + 0.5 * pitch_[0] * nodes_[i], 0.0});
    acc *= 0.5;
  } else {
    for (std::size_t i = 0; i < q; ++i)
      for (std::size_t k = 0; k < q; ++k)
        acc += weights_[i] * weights_[k] *
               j_({x[0] + 0.5 * pitch_[0] * nodes_[i], x[1] + 0.5 * pitch_[1] * nodes_[k]});
    acc *= 0.25;
  }
  if (!std::isfinite(acc)) throw InputError("pixelation quadrature produced a non-finite value");
  return acc;
}

IrfModel PixelatedIrf::tabulate(const PixelGrid& grid) const {
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) v[i] = (*this)(grid.center(i));
  return IrfModel::tabulated(grid, std::move(v));
}

PixelatedIrf pixelate_irf(std::function<double(Point)> continuous, int dim, Point pitch, int order) {
  return PixelatedIrf(std::move(continuous), dim, pitch, order);
}

}  // namespace suppose

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "suppose/signal.hpp"

namespace suppose {

enum class IrfFamily { Asymmetric1D, GaussianHalo2D, Tabulated };

std::string to_string(IrfFamily f);
IrfFamily irf_family_from_string(const std::string& s);

/// Sampled instrument response with bilinear (1-D: linear) interpolation.
/// The grid origin is the offset of sample 0 relative to the response center.
struct IrfTable {
  PixelGrid grid;
  std::vector<double> values;
};

/// Fitted instrument response Ĩ, evaluated at offsets x - a in physical units.
///
/// Families:
///   Asymmetric1D    a1 / (exp(b1 x) + exp(-b2 x))                 params {a1, b1, b2}
///   GaussianHalo2D  b1 exp(-r^2 d1) + b2 r^2 exp(-(r - r0)^2 d2)  params {b1, d1, b2, d2, r0}
///   Tabulated       samples on a grid, zero outside
///
/// Analytic families describe the already pixelated response; no extra box
/// convolution is applied when evaluating them.
class IrfModel {
 public:
  static IrfModel asymmetric_1d(double a1, double b1, double b2);
  static IrfModel gaussian_halo_2d(double b1, double d1, double b2, double d2, double halo_radius);
  /// Isotropic Gaussian with per-axis standard deviation `sigma` and peak `amplitude`.
  static IrfModel gaussian_2d(double sigma, double amplitude = 1.0);
  static IrfModel tabulated(PixelGrid grid, std::vector<double> values);
  static IrfModel from_parameters(IrfFamily family, const std::vector<double>& params);

  IrfFamily family() const { return family_; }
  int dimension() const { return dim_; }
  const std::vector<double>& parameters() const { return params_; }
  const IrfTable& table() const { return table_; }

  double operator()(Point offset) const;
  Point gradient(Point offset) const;

  /// Even in every coordinate about its center, so first-order translation
  /// errors of sums over the grid vanish.
  bool has_parity() const;
  /// GaussianHalo2D without halo: evaluates as a product of 1-D profiles.
  bool is_separable_gaussian() const;

  double integral() const { return integral_; }
  Point centroid() const { return centroid_; }
  /// Mean over axes of the per-axis variance of Ĩ seen as a distribution.
  double axis_variance() const { return variance_; }
  /// d0 = 2 x standard deviation.
  double width() const;

  IrfModel scaled(double factor) const;
  /// Rescaled so that the lattice sum over a grid of this pitch equals 1.
  IrfModel normalized(const PixelGrid& grid) const;

 private:
  IrfModel() = default;
  void compute_moments();

  IrfFamily family_ = IrfFamily::Tabulated;
  int dim_ = 1;
  std::vector<double> params_;
  IrfTable table_;
  double integral_ = 0.0;
  Point centroid_{0.0, 0.0};
  double variance_ = 0.0;
};

/// Box-averaged response I = J * K_p evaluated by tensor-product Gauss-Legendre
/// quadrature over the pixel cell centered at each query point.
class PixelatedIrf {
 public:
  PixelatedIrf(std::function<double(Point)> continuous, int dim, Point pitch, int order = 4);
  double operator()(Point x) const;
  /// Samples this response on `grid` and wraps it as a Tabulated model.
  IrfModel tabulate(const PixelGrid& grid) const;

 private:
  std::function<double(Point)> j_;
  int dim_;
  Point pitch_;
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

PixelatedIrf pixelate_irf(std::function<double(Point)> continuous, int dim, Point pitch,
                          int order = 4);

}  // namespace suppose

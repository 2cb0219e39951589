#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "suppose/evaluation.hpp"
#include "suppose/objective.hpp"

namespace suppose {

/// Autocorrelation G(z) of the IRF fit residual; an empty function means G ≡ 0.
using LagFunction = std::function<double(Point)>;

struct GreedyOptions {
  bool global_minimum = false;  // scan max_steps and take the global minimum of t(k)
  std::size_t max_steps = 100000;
};

struct GreedyResult {
  std::size_t n = 0;           // N
  double z = 0.0;              // Z = alpha0 N
  std::vector<Point> peaks;    // b_k
  std::vector<double> t_curve; // t(k) = ||T|| after k subtractions, t(0) = ||S_*||
  std::string diagnostic;
};

/// Peels alpha0 Ĩ_* off the running residual at its maximum until the residual
/// norm first rises.
GreedyResult greedy_find_alphaN(const ObjectiveContext& ctx, double alpha0, const GreedyOptions& opts = {});

/// sqrt(2)^(D-1) (d_p / 2) ||Σ_i ∇f(x_i)||.
double translation_error(std::span<const Point> grad_f, double d_p, int dim);

/// F = Σ_p R_p² G(0) + 2 Σ_p Σ_{l≠p, |y_p-y_l|<d0} R_l R_p G(y_l - y_p).
double compute_F(const GroundTruth& gt, const LagFunction& G, double d0);

/// Y(z) = Σ_i |Ĩ_*(x_i)| |Ĩ_*(x_i - z)|.
double overlap_Y(const CenteredKernel& k, Point z);

/// L = ||Ĩ_*||² + (3/m) Σ_p Σ_{l≠p, |y_p-y_l|<d0} Y(y_l - y_p). `pair_sum` receives the double sum.
double compute_L(const GroundTruth& gt, const CenteredKernel& k, double d0, double* pair_sum = nullptr);

struct BoundOptions {
  double epsilon = 1.0;                 // Young's inequality parameter
  std::size_t small_m_threshold = 10;   // m below this uses alpha²/4 instead of alpha²/12
  bool translation_terms = true;        // evaluate E terms for IRFs without parity
};

struct BoundReport {
  std::size_t m = 0;
  double Z = 0.0;
  double d0 = 0.0;
  double d_p = 0.0;
  double epsilon = 1.0;
  double noise_power = 0.0;
  double F = 0.0;
  double G0 = 0.0;
  double L = 0.0;
  double norm2 = 0.0;       // ||Ĩ_*||²
  double y_pair_sum = 0.0;
  double I_der_sq = 0.0;    // min_s Σ_i (∂_s Ĩ(x_i))²
  double E_G = 0.0;
  double E_Rbar = 0.0;
  double E_sigma = 0.0;
  double C = 0.0;
  double truncation_factor = 1.0 / 12.0;
  double kappa_sq = 0.0;    // κ²
  double kappa1_sq = 0.0;   // κ'²
  double kappa2_sq = 0.0;   // κ''²
  double N_op = 0.0;
  std::size_t N_op_int = 0;
  double sigma_op = 0.0;
  double M_s = 0.0;

  /// sqrt(κ'²/(κ''² N) + κ² N/κ''²)
  double sigma_bound(double N) const;
  /// (N, sigma_bound(N)) on a log-spaced grid of integers from 1 to 8 N_op.
  std::vector<std::pair<double, double>> curve(std::size_t points = 64) const;
};

/// IRF-derived constants shared by every bound evaluation of one fit.
class BoundModel {
 public:
  BoundModel(const IrfModel& irf, const PixelGrid& grid, BackgroundMode mode, LagFunction G = {},
             BoundOptions opts = {});

  const CenteredKernel& kernel() const { return kernel_; }
  const BoundOptions& options() const { return opts_; }
  const LagFunction& autocorrelation() const { return G_; }
  double d0() const { return d0_; }
  double d_p() const { return d_p_; }
  double derivative_norm2() const { return i_der_sq_; }
  double e_sigma() const { return e_sigma_; }
  /// Translation error of the truncation term, E_Rbar.
  double e_rbar(const GroundTruth& gt) const;

 private:
  CenteredKernel kernel_;
  LagFunction G_;
  BoundOptions opts_;
  double d0_ = 0.0;
  double d_p_ = 0.0;
  double i_der_sq_ = 0.0;
  double e_sigma_ = 0.0;
};

/// κ, κ', κ'', N_op = κ'/κ, σ_op² = 2κ'κ/κ''², M_s = d0/(2σ_op) for the estimated
/// source distribution. Throws InputError when C <= 0 or the bound degenerates.
BoundReport estimate_optimum(const BoundModel& model, const GroundTruth& gt, double noise_power);

/// Closed forms of N_op and σ_op written in terms of Z, m, F, L and Ĩ_der
/// (translation terms dropped).
std::pair<double, double> closed_form_optimum(const BoundReport& r);

/// σ = σ_op sqrt((N_op/N + N/N_op) / 2).
double sigma_tradeoff(double N, double N_op, double sigma_op);

/// Upper bound on <||S_* - R̃*Ĩ_*||²>: (1+1/ε)F + <||η||²> + (1+ε) alpha² m t (L + E_Rbar/m),
/// t = 1/12 (1/4 for small m).
double chi2_bound(const BoundReport& r, double alpha);

struct SuperpixelLevel {
  int level = 0;   // d_bin = d_p / 2^level
  Point d_bin{0.0, 0.0};
  Histogram histogram;
  BoundReport report;
};

struct SuperpixelChoice {
  std::vector<SuperpixelLevel> levels;
  std::size_t chosen = 0;

  const SuperpixelLevel& selected() const { return levels.at(chosen); }
};

/// Coarsest level whose bin d_p 2^-level is no wider than d0.
int coarsest_superpixel_level(double d0, double d_p);

/// Histograms the fitted sources at d_p 2^-level for level in [coarsest, finest],
/// evaluates the bound at each level and picks the level whose bin size is
/// closest (in log scale) to its own σ_op. `coarsest` defaults to the level covering d0.
SuperpixelChoice select_superpixel(const BoundModel& model, const SourceSet& fit, double noise_power,
                                   std::optional<int> coarsest = std::nullopt, int finest = 6);

nlohmann::json to_json(const BoundReport& r);

}  // namespace suppose

#include "suppose/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace suppose {

using nlohmann::json;

GreedyResult greedy_find_alphaN(const ObjectiveContext& ctx, double alpha0, const GreedyOptions& opts) {
  if (!(alpha0 > 0.0)) throw InputError("greedy search needs alpha0 > 0");
  const PixelGrid& grid = ctx.grid();
  const bool dev = uses_deviation(ctx.mode());
  std::vector<double> t = ctx.target().values;
  std::vector<double> contrib(t.size());
  auto norm = [&] {
    double s = 0.0;
    for (double v : t) s += v * v;
    return std::sqrt(s);
  };
  GreedyResult out;
  out.t_curve.push_back(norm());
  std::size_t best_k = 0;
  for (std::size_t k = 1; k <= opts.max_steps; ++k) {
    std::size_t arg = 0;
    for (std::size_t i = 1; i < t.size(); ++i)
      if (t[i] > t[arg]) arg = i;
    const Point b = grid.center(arg);
    std::fill(contrib.begin(), contrib.end(), 0.0);
    ctx.renderer().add_source(b, 1.0, contrib);
    if (dev) remove_mean(contrib);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] -= alpha0 * contrib[i];
    out.peaks.push_back(b);
    out.t_curve.push_back(norm());
    if (out.t_curve[k] < out.t_curve[best_k]) best_k = k;
    if (!opts.global_minimum && out.t_curve[k] > out.t_curve[k - 1]) break;
  }
  out.n = best_k;
  out.peaks.resize(best_k);
  out.z = alpha0 * static_cast<double>(best_k);
  if (best_k == 0) out.diagnostic = "residual norm rises at the first subtraction; use a smaller alpha0";
  return out;
}

double translation_error(std::span<const Point> grad_f, double d_p, int dim) {
  Point s{0.0, 0.0};
  for (const Point& g : grad_f) {
    s[0] += g[0];
    s[1] += g[1];
  }
  return std::pow(std::sqrt(2.0), dim - 1) * 0.5 * d_p * std::hypot(s[0], s[1]);
}

namespace {

double distance(Point a, Point b) { return std::hypot(a[0] - b[0], a[1] - b[1]); }

// Ordered pairs (p, l), l != p, closer than d0. Cells of side d0 keep this near-linear.
template <class Fn>
void for_each_near_pair(const GroundTruth& gt, double d0, Fn&& fn) {
  std::map<std::array<long, 2>, std::vector<std::size_t>> cells;
  auto key = [&](Point p) {
    return std::array<long, 2>{static_cast<long>(std::floor(p[0] / d0)), static_cast<long>(std::floor(p[1] / d0))};
  };
  for (std::size_t p = 0; p < gt.size(); ++p) cells[key(gt.support[p])].push_back(p);
  for (std::size_t p = 0; p < gt.size(); ++p) {
    const auto k = key(gt.support[p]);
    for (long dy = -1; dy <= 1; ++dy)
      for (long dx = -1; dx <= 1; ++dx) {
        const auto it = cells.find({k[0] + dx, k[1] + dy});
        if (it == cells.end()) continue;
        for (std::size_t l : it->second)
          if (l != p && distance(gt.support[p], gt.support[l]) < d0) fn(p, l);
      }
  }
}

// Lag key for memoizing functions of y_l - y_p (histogram centers sit on a lattice).
std::array<long long, 2> lag_key(Point z, double quantum) {
  return {std::llround(z[0] / quantum), std::llround(z[1] / quantum)};
}

}  // namespace

double compute_F(const GroundTruth& gt, const LagFunction& G, double d0) {
  gt.validate();
  if (!G) return 0.0;
  const double g0 = G({0.0, 0.0});
  double f = 0.0;
  for (double r : gt.intensities) f += r * r * g0;
  double cross = 0.0;
  for_each_near_pair(gt, d0, [&](std::size_t p, std::size_t l) {
    const Point z{gt.support[l][0] - gt.support[p][0], gt.support[l][1] - gt.support[p][1]};
    cross += gt.intensities[l] * gt.intensities[p] * G(z);
  });
  return f + 2.0 * cross;
}

double overlap_Y(const CenteredKernel& k, Point z) {
  const std::vector<double>& a = k.samples();
  const std::vector<double> b = k.shifted(z);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i]) * std::abs(b[i]);
  return s;
}

double compute_L(const GroundTruth& gt, const CenteredKernel& k, double d0, double* pair_sum) {
  gt.validate();
  if (gt.size() == 0) throw InputError("L needs at least one source");
  const double quantum = 1e-9 * d0;
  std::map<std::array<long long, 2>, double> cache;
  double sum = 0.0;
  for_each_near_pair(gt, d0, [&](std::size_t p, std::size_t l) {
    const Point z{gt.support[l][0] - gt.support[p][0], gt.support[l][1] - gt.support[p][1]};
    const auto key = lag_key(z, quantum);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, overlap_Y(k, z)).first;
    sum += it->second;
  });
  if (pair_sum) *pair_sum = sum;
  return k.norm2() + 3.0 / static_cast<double>(gt.size()) * sum;
}

BoundModel::BoundModel(const IrfModel& irf, const PixelGrid& grid, BackgroundMode mode, LagFunction G,
                       BoundOptions opts)
    : kernel_(irf, grid, mode), G_(std::move(G)), opts_(opts) {
  if (!(opts_.epsilon > 0.0)) throw InputError("bound epsilon must be positive");
  d0_ = irf.width();
  d_p_ = grid.dim == 2 ? std::max(grid.pitch[0], grid.pitch[1]) : grid.pitch[0];
  const std::vector<Point> grad = kernel_.gradient();
  double best = std::numeric_limits<double>::infinity();
  for (int s = 0; s < grid.dim; ++s) {
    double acc = 0.0;
    for (const Point& g : grad) acc += g[s] * g[s];
    best = std::min(best, acc);
  }
  i_der_sq_ = best;
  if (opts_.translation_terms && !irf.has_parity()) {
    // ∇(∂_t Ĩ)² = 2 ∂_t Ĩ ∇∂_t Ĩ, second derivatives by central differences of the gradient.
    const double h = 1e-4 * d0_;
    std::array<std::vector<Point>, 2> plus, minus;
    for (int s = 0; s < grid.dim; ++s) {
      Point e{0.0, 0.0};
      e[s] = h;
      plus[s] = kernel_.gradient({-e[0], -e[1]});
      minus[s] = kernel_.gradient({e[0], e[1]});
    }
    for (int t = 0; t < grid.dim; ++t) {
      std::vector<Point> gf(grad.size());
      for (std::size_t i = 0; i < grad.size(); ++i)
        for (int s = 0; s < grid.dim; ++s)
          gf[i][s] = 2.0 * grad[i][t] * (plus[s][i][t] - minus[s][i][t]) / (2.0 * h);
      e_sigma_ = std::max(e_sigma_, translation_error(gf, d_p_, grid.dim));
    }
  }
}

double BoundModel::e_rbar(const GroundTruth& gt) const {
  if (!opts_.translation_terms || kernel_.irf().has_parity()) return 0.0;
  const int dim = kernel_.grid().dim;
  const std::vector<double>& f0 = kernel_.samples();
  const std::vector<Point> g0 = kernel_.gradient();
  // f = Ĩ_*²
  std::vector<Point> gf(f0.size());
  for (std::size_t i = 0; i < f0.size(); ++i) gf[i] = {2.0 * f0[i] * g0[i][0], 2.0 * f0[i] * g0[i][1]};
  double e = static_cast<double>(gt.size()) * translation_error(gf, d_p_, dim);
  // f = |Ĩ_*(x)| |Ĩ_*(x - z)| for each near pair
  const double quantum = 1e-9 * d0_;
  std::map<std::array<long long, 2>, double> cache;
  for_each_near_pair(gt, d0_, [&](std::size_t p, std::size_t l) {
    const Point z{gt.support[l][0] - gt.support[p][0], gt.support[l][1] - gt.support[p][1]};
    const auto key = lag_key(z, quantum);
    auto it = cache.find(key);
    if (it == cache.end()) {
      const std::vector<double> fz = kernel_.shifted(z);
      const std::vector<Point> gz = kernel_.gradient(z);
      std::vector<Point> g(f0.size());
      for (std::size_t i = 0; i < f0.size(); ++i) {
        const double s0 = f0[i] < 0.0 ? -1.0 : 1.0, sz = fz[i] < 0.0 ? -1.0 : 1.0;
        for (int a = 0; a < 2; ++a)
          g[i][a] = s0 * g0[i][a] * std::abs(fz[i]) + std::abs(f0[i]) * sz * gz[i][a];
      }
      it = cache.emplace(key, translation_error(g, d_p_, dim)).first;
    }
    e += it->second;
  });
  return e;
}

double BoundReport::sigma_bound(double N) const {
  if (!(N > 0.0)) throw InputError("sigma bound needs N > 0");
  return std::sqrt(kappa1_sq / (kappa2_sq * N) + kappa_sq * N / kappa2_sq);
}

std::vector<std::pair<double, double>> BoundReport::curve(std::size_t points) const {
  std::vector<std::pair<double, double>> out;
  const double top = std::max(8.0 * N_op, 2.0);
  double last = 0.0;
  for (std::size_t i = 0; i < points; ++i) {
    const double f = points > 1 ? static_cast<double>(i) / static_cast<double>(points - 1) : 0.0;
    const double n = std::round(std::exp(f * std::log(top)));
    if (n <= last) continue;
    last = n;
    out.emplace_back(n, sigma_bound(n));
  }
  return out;
}

BoundReport estimate_optimum(const BoundModel& model, const GroundTruth& gt, double noise_power) {
  gt.validate();
  if (gt.size() == 0) throw InputError("bound estimate needs a non-empty source distribution");
  if (noise_power < 0.0) throw InputError("noise power must be >= 0");
  const BoundOptions& o = model.options();
  BoundReport r;
  r.m = gt.size();
  r.Z = gt.total();
  r.d0 = model.d0();
  r.d_p = model.d_p();
  r.epsilon = o.epsilon;
  r.noise_power = noise_power;
  r.G0 = model.autocorrelation() ? model.autocorrelation()({0.0, 0.0}) : 0.0;
  r.F = compute_F(gt, model.autocorrelation(), r.d0);
  r.norm2 = model.kernel().norm2();
  r.L = compute_L(gt, model.kernel(), r.d0, &r.y_pair_sum);
  r.I_der_sq = model.derivative_norm2();
  r.E_G = 0.0;
  r.E_sigma = model.e_sigma();
  r.E_Rbar = model.e_rbar(gt);
  r.C = r.I_der_sq - r.E_sigma;
  if (!(r.I_der_sq > 0.0)) throw InputError("IRF derivative norm vanishes on this grid");
  if (!(r.C > 0.0)) throw InputError("bound constant C = I_der^2 - E_sigma is not positive");
  if (!(r.Z > 0.0)) throw InputError("total intensity Z must be positive");
  r.truncation_factor = r.m < o.small_m_threshold ? 0.25 : 1.0 / 12.0;
  const double m = static_cast<double>(r.m);
  r.kappa_sq = 4.0 * ((r.F + r.E_G) * (1.0 + 1.0 / o.epsilon) + noise_power);
  r.kappa1_sq = 4.0 * (1.0 + o.epsilon) * r.Z * r.Z * m * r.truncation_factor * (r.L + r.E_Rbar / m);
  r.kappa2_sq = r.Z * r.Z * r.C;
  if (!(r.kappa_sq > 0.0))
    throw InputError("noise power and IRF fit error are both zero; the optimal N is unbounded");
  const double kappa = std::sqrt(r.kappa_sq), kappa1 = std::sqrt(r.kappa1_sq);
  r.N_op = kappa1 / kappa;
  r.sigma_op = std::sqrt(2.0 * kappa1 * kappa / r.kappa2_sq);
  r.M_s = r.d0 / (2.0 * r.sigma_op);
  // Integer minimizer of the bound, one of the neighbours of the real optimum.
  const double lo = std::max(1.0, std::floor(r.N_op));
  const double hi = std::max(1.0, std::ceil(r.N_op));
  r.N_op_int = static_cast<std::size_t>(r.sigma_bound(lo) <= r.sigma_bound(hi) ? lo : hi);
  return r;
}

std::pair<double, double> closed_form_optimum(const BoundReport& r) {
  const double e = r.epsilon, m = static_cast<double>(r.m);
  const double denom = (1.0 + 1.0 / e) * r.F + r.noise_power;
  const bool small = r.truncation_factor > 1.0 / 12.0;
  const double n_op = std::sqrt((1.0 + e) * m / 12.0) * std::sqrt(r.Z * r.Z / denom) * std::sqrt(r.L) *
                      (small ? std::sqrt(3.0) : 1.0);
  const double s_op = 2.0 * std::pow((1.0 + e) * m, 0.25) / ((small ? 1.0 : std::pow(3.0, 0.25)) * std::sqrt(r.I_der_sq)) *
                      std::pow(denom / (r.Z * r.Z), 0.25) * std::pow(r.L, 0.25);
  return {n_op, s_op};
}

double sigma_tradeoff(double N, double N_op, double sigma_op) {
  if (!(N > 0.0 && N_op > 0.0 && sigma_op > 0.0)) throw InputError("trade-off needs positive N, N_op and sigma_op");
  return sigma_op * std::sqrt(0.5 * (N_op / N + N / N_op));
}

double chi2_bound(const BoundReport& r, double alpha) {
  const double m = static_cast<double>(r.m);
  return (1.0 + 1.0 / r.epsilon) * (r.F + r.E_G) + r.noise_power +
         (1.0 + r.epsilon) * alpha * alpha * m * r.truncation_factor * (r.L + r.E_Rbar / m);
}

int coarsest_superpixel_level(double d0, double d_p) {
  if (!(d0 > 0.0 && d_p > 0.0)) throw InputError("superpixel levels need positive d0 and d_p");
  return -static_cast<int>(std::floor(std::log2(d0 / d_p) + 1e-12));
}

SuperpixelChoice select_superpixel(const BoundModel& model, const SourceSet& fit, double noise_power,
                                   std::optional<int> coarsest_opt, int finest) {
  const int coarsest = coarsest_opt ? *coarsest_opt : coarsest_superpixel_level(model.d0(), model.d_p());
  if (coarsest > finest) throw InputError("superpixel level range is empty");
  if (fit.positions.empty()) throw InputError("superpixel selection needs fitted sources");
  SuperpixelChoice out;
  double best = std::numeric_limits<double>::infinity();
  for (int level = coarsest; level <= finest; ++level) {
    SuperpixelLevel lv;
    lv.level = level;
    lv.histogram = histogram_level(fit.positions, fit.grid, level);
    lv.d_bin = lv.histogram.d_bin;
    lv.report = estimate_optimum(model, lv.histogram.intensities(fit.alpha), noise_power);
    const double miss = std::abs(std::log(lv.d_bin[0] / lv.report.sigma_op));
    if (miss < best) {
      best = miss;
      out.chosen = out.levels.size();
    }
    out.levels.push_back(std::move(lv));
  }
  return out;
}

json to_json(const BoundReport& r) {
  json curve = json::array();
  for (const auto& [n, s] : r.curve()) curve.push_back({n, s});
  return json{{"m", r.m},
              {"Z", r.Z},
              {"d0", r.d0},
              {"d_p", r.d_p},
              {"epsilon", r.epsilon},
              {"noise_power", r.noise_power},
              {"F", r.F},
              {"G0", r.G0},
              {"L", r.L},
              {"norm2", r.norm2},
              {"y_pair_sum", r.y_pair_sum},
              {"I_der_sq", r.I_der_sq},
              {"E_G", r.E_G},
              {"E_Rbar", r.E_Rbar},
              {"E_sigma", r.E_sigma},
              {"C", r.C},
              {"truncation_factor", r.truncation_factor},
              {"kappa_sq", r.kappa_sq},
              {"kappa1_sq", r.kappa1_sq},
              {"kappa2_sq", r.kappa2_sq},
              {"N_op", r.N_op},
              {"N_op_int", r.N_op_int},
              {"sigma_op", r.sigma_op},
              {"M_s", r.M_s},
              {"sigma_bound_curve", curve}};
}

}  // namespace suppose

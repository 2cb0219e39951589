#include "suppose/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace suppose {

using nlohmann::json;

CostMatrix squared_distance_costs(std::span<const Point> a, std::span<const Point> b) {
  if (a.size() != b.size()) throw InputError("cost matrix needs equal point counts");
  CostMatrix c;
  c.n = a.size();
  c.cost.resize(c.n * c.n);
  for (std::size_t i = 0; i < c.n; ++i)
    for (std::size_t j = 0; j < c.n; ++j) {
      const double dx = a[i][0] - b[j][0], dy = a[i][1] - b[j][1];
      c.cost[i * c.n + j] = dx * dx + dy * dy;
    }
  return c;
}

MatchedSigma matched_sigma(std::span<const Point> truth, std::span<const Point> fitted, std::size_t exact_limit) {
  if (truth.size() != fitted.size())
    throw InputError("matched sigma needs equal source counts (" + std::to_string(truth.size()) + " vs " +
                     std::to_string(fitted.size()) + ")");
  MatchedSigma out;
  if (truth.empty()) return out;
  const Assignment a = solve_assignment(squared_distance_costs(truth, fitted), exact_limit);
  out.sigma = std::sqrt(a.cost / static_cast<double>(truth.size()));
  out.assignment = a.column_of_row;
  out.exact = a.exact;
  out.max_excess = a.max_excess;
  return out;
}

double nearest_neighbor_rms(std::span<const Point> truth, std::span<const Point> fitted) {
  if (truth.empty() || fitted.empty()) return 0.0;
  double acc = 0.0;
  for (const Point& f : fitted) {
    double best = std::numeric_limits<double>::infinity();
    for (const Point& t : truth) {
      const double dx = f[0] - t[0], dy = f[1] - t[1];
      best = std::min(best, dx * dx + dy * dy);
    }
    acc += best;
  }
  return std::sqrt(acc / static_cast<double>(fitted.size()));
}

std::size_t Histogram::total() const {
  std::size_t s = 0;
  for (std::size_t c : counts) s += c;
  return s;
}

GroundTruth Histogram::intensities(double alpha) const {
  GroundTruth gt;
  gt.support = centers;
  gt.intensities.reserve(counts.size());
  for (std::size_t c : counts) gt.intensities.push_back(alpha * static_cast<double>(c));
  return gt;
}

Histogram histogram_sources(std::span<const Point> sources, const PixelGrid& grid, Point d_bin) {
  grid.validate();
  if (!(d_bin[0] > 0.0) || (grid.dim == 2 && !(d_bin[1] > 0.0))) throw InputError("histogram bin size must be positive");
  Point edge0{grid.origin[0] - 0.5 * grid.pitch[0], grid.origin[1] - 0.5 * grid.pitch[1]};
  std::map<std::array<long, 2>, std::size_t> occ;  // key (iy, ix) for row-major order
  for (const Point& s : sources) {
    const long ix = static_cast<long>(std::floor((s[0] - edge0[0]) / d_bin[0]));
    const long iy = grid.dim == 2 ? static_cast<long>(std::floor((s[1] - edge0[1]) / d_bin[1])) : 0;
    ++occ[{iy, ix}];
  }
  Histogram h;
  h.d_bin = grid.dim == 2 ? d_bin : Point{d_bin[0], 0.0};
  for (const auto& [key, count] : occ) {
    h.bins.push_back({key[1], key[0]});
    h.counts.push_back(count);
    Point c{edge0[0] + (static_cast<double>(key[1]) + 0.5) * d_bin[0], 0.0};
    if (grid.dim == 2) c[1] = edge0[1] + (static_cast<double>(key[0]) + 0.5) * d_bin[1];
    h.centers.push_back(c);
  }
  return h;
}

Histogram histogram_level(std::span<const Point> sources, const PixelGrid& grid, int level) {
  const double f = std::ldexp(1.0, -level);
  return histogram_sources(sources, grid, {grid.pitch[0] * f, grid.pitch[1] * f});
}

SampledSignal render_smoothed(const SourceSet& sources, const PixelGrid& out,
                              const std::function<double(Point)>& kernel, int supersample) {
  out.validate();
  if (supersample < 1) throw InputError("supersample factor must be >= 1");
  std::vector<double> v(out.size(), 0.0);
  const double hx = out.pitch[0], hy = out.pitch[1];
  const Point edge0{out.origin[0] - 0.5 * hx, out.origin[1] - 0.5 * hy};
  if (!kernel) {
    for (const Point& a : sources.positions) {
      const double fx = std::floor((a[0] - edge0[0]) / hx);
      const double fy = out.dim == 2 ? std::floor((a[1] - edge0[1]) / hy) : 0.0;
      if (fx < 0 || fy < 0 || fx >= static_cast<double>(out.nx()) || fy >= static_cast<double>(out.ny())) continue;
      v[out.index(static_cast<std::size_t>(fx), static_cast<std::size_t>(fy))] += sources.alpha;
    }
    return SampledSignal(out, std::move(v), "smoothed");
  }
  const int sy_count = out.dim == 2 ? supersample : 1;
  std::vector<double> w(out.size());
  for (const Point& a : sources.positions) {
    double mass = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
      const Point c = out.center(i);
      double acc = 0.0;
      for (int sy = 0; sy < sy_count; ++sy)
        for (int sx = 0; sx < supersample; ++sx) {
          const double ox = ((sx + 0.5) / supersample - 0.5) * hx;
          const double oy = out.dim == 2 ? ((sy + 0.5) / supersample - 0.5) * hy : 0.0;
          acc += kernel({c[0] + ox - a[0], c[1] + oy - a[1]});
        }
      w[i] = acc;
      mass += acc;
    }
    if (!(mass > 0.0)) continue;
    const double scale = sources.alpha / mass;
    for (std::size_t i = 0; i < out.size(); ++i) v[i] += scale * w[i];
  }
  return SampledSignal(out, std::move(v), "smoothed");
}

std::array<LobeStats, 2> line_lobe_stats(std::span<const Point> sources, const LineSpec& first,
                                         const LineSpec& second) {
  const double len = std::hypot(first.direction[0], first.direction[1]);
  if (!(len > 0.0)) throw InputError("line direction must be nonzero");
  const Point n{-first.direction[1] / len, first.direction[0] / len};
  auto perp = [&](Point p) { return (p[0] - first.point[0]) * n[0] + (p[1] - first.point[1]) * n[1]; };
  const double u2 = perp(second.point);
  const double mid = 0.5 * u2;
  std::array<double, 2> sum{0, 0}, sq{0, 0};
  std::array<LobeStats, 2> out;
  for (const Point& s : sources) {
    const double u = perp(s);
    const std::size_t lobe = (u2 >= 0.0 ? u > mid : u < mid) ? 1 : 0;
    const double ref = lobe == 0 ? 0.0 : u2;
    ++out[lobe].count;
    sum[lobe] += u - ref;
    sq[lobe] += (u - ref) * (u - ref);
  }
  for (std::size_t l = 0; l < 2; ++l) {
    if (out[l].count == 0) continue;
    const double c = static_cast<double>(out[l].count);
    out[l].mean_offset = sum[l] / c;
    out[l].stddev = std::sqrt(std::max(0.0, sq[l] / c - out[l].mean_offset * out[l].mean_offset));
  }
  // Sign convention: positive offsets point from the first line towards the second.
  if (u2 < 0.0)
    for (auto& l : out) l.mean_offset = -l.mean_offset;
  return out;
}

std::vector<Cluster> nearest_line_clusters(std::span<const Point> sources, std::span<const double> lines) {
  std::vector<Cluster> out(lines.size());
  if (lines.empty()) return out;
  std::vector<double> sum(lines.size(), 0.0);
  for (const Point& s : sources) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < lines.size(); ++j)
      if (std::abs(s[0] - lines[j]) < std::abs(s[0] - lines[best])) best = j;
    ++out[best].count;
    sum[best] += s[0];
  }
  for (std::size_t j = 0; j < lines.size(); ++j)
    out[j].centroid = out[j].count ? sum[j] / static_cast<double>(out[j].count) : lines[j];
  return out;
}

std::vector<Cluster> contiguous_clusters(std::span<const Point> sources, const PixelGrid& grid, double d_bin) {
  if (!(d_bin > 0.0)) throw InputError("cluster bin size must be positive");
  const double edge0 = grid.origin[0] - 0.5 * grid.pitch[0];
  std::map<long, std::pair<std::size_t, double>> by_ix;
  for (const Point& s : sources) {
    auto& e = by_ix[static_cast<long>(std::floor((s[0] - edge0) / d_bin))];
    ++e.first;
    e.second += s[0];
  }
  std::vector<Cluster> out;
  std::vector<double> sums;
  long prev = 0;
  for (const auto& [ix, e] : by_ix) {
    if (out.empty() || ix != prev + 1) {
      out.push_back({});
      sums.push_back(0.0);
    }
    out.back().count += e.first;
    sums.back() += e.second;
    prev = ix;
  }
  for (std::size_t c = 0; c < out.size(); ++c) out[c].centroid = sums[c] / static_cast<double>(out[c].count);
  return out;
}

json to_json(const Cluster& c) { return json{{"centroid", c.centroid}, {"count", c.count}}; }

json to_json(const Histogram& h) {
  json bins = json::array();
  for (std::size_t p = 0; p < h.bins.size(); ++p)
    bins.push_back({{"center", {h.centers[p][0], h.centers[p][1]}}, {"count", h.counts[p]}});
  return json{{"d_bin", {h.d_bin[0], h.d_bin[1]}}, {"m_bin", h.occupied()}, {"bins", bins}};
}

json to_json(const EvalReport& r) {
  json j{{"d0", r.d0}, {"nearest_neighbor_rms", r.nearest_neighbor_rms}};
  if (r.matched) {
    j["sigma"] = r.matched->sigma;
    j["super_resolution"] = r.super_resolution;
    j["assignment_exact"] = r.matched->exact;
    j["assignment_max_excess"] = r.matched->max_excess;
  }
  if (r.lobes) {
    json lobes = json::array();
    for (const LobeStats& l : *r.lobes)
      lobes.push_back({{"count", l.count}, {"mean_offset", l.mean_offset}, {"std", l.stddev}});
    j["lobes"] = lobes;
  }
  json levels = json::array();
  for (const Histogram& h : r.histograms) levels.push_back({{"d_bin", {h.d_bin[0], h.d_bin[1]}}, {"m_bin", h.occupied()}});
  j["histogram_levels"] = levels;
  if (!r.line_clusters.empty()) {
    json lc = json::array();
    for (const Cluster& c : r.line_clusters) lc.push_back(to_json(c));
    j["line_clusters"] = lc;
  }
  return j;
}

}  // namespace suppose

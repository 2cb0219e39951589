#include "suppose/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace suppose {

PixelGrid PixelGrid::line(std::size_t n, double pitch, double origin) {
  PixelGrid g;
  g.dim = 1;
  g.extents = {n, 1};
  g.pitch = {pitch, pitch};
  g.origin = {origin, 0.0};
  g.validate();
  return g;
}

PixelGrid PixelGrid::image(std::size_t nx, std::size_t ny, double pitch, Point origin) {
  PixelGrid g;
  g.dim = 2;
  g.extents = {nx, ny};
  g.pitch = {pitch, pitch};
  g.origin = origin;
  g.validate();
  return g;
}

void PixelGrid::validate() const {
  if (dim != 1 && dim != 2) throw InputError("pixel grid dimension must be 1 or 2");
  for (int a = 0; a < dim; ++a) {
    if (extents[a] < 1) throw InputError("pixel grid extent must be >= 1");
    if (!(pitch[a] > 0.0) || !std::isfinite(pitch[a]))
      throw InputError("pixel pitch must be positive and finite");
  }
  if (dim == 1 && extents[1] != 1) throw InputError("1-D grid must have a unit second extent");
}

Point PixelGrid::center(std::size_t linear) const {
  return center(linear % extents[0], linear / extents[0]);
}

Point PixelGrid::midpoint() const {
  Point p{origin[0] + 0.5 * static_cast<double>(extents[0] - 1) * pitch[0], 0.0};
  if (dim == 2) p[1] = origin[1] + 0.5 * static_cast<double>(extents[1] - 1) * pitch[1];
  return p;
}

std::size_t PixelGrid::nearest(Point p) const {
  std::array<std::size_t, 2> idx{0, 0};
  for (int a = 0; a < dim; ++a) {
    double f = std::round((p[a] - origin[a]) / pitch[a]);
    f = std::clamp(f, 0.0, static_cast<double>(extents[a] - 1));
    idx[a] = static_cast<std::size_t>(f);
  }
  return index(idx[0], idx[1]);
}

bool PixelGrid::same_layout(const PixelGrid& o, double rel_tol) const {
  if (dim != o.dim || extents != o.extents) return false;
  for (int a = 0; a < dim; ++a) {
    double scale = std::max(std::abs(pitch[a]), std::abs(o.pitch[a]));
    if (std::abs(pitch[a] - o.pitch[a]) > rel_tol * scale) return false;
    if (std::abs(origin[a] - o.origin[a]) > rel_tol * std::max(1.0, scale)) return false;
  }
  return true;
}

SampledSignal::SampledSignal(PixelGrid g, std::vector<double> v, std::string l)
    : grid(g), values(std::move(v)), label(std::move(l)) {
  grid.validate();
  if (values.size() != grid.size()) {
    std::ostringstream os;
    os << "signal has " << values.size() << " samples but grid holds " << grid.size();
    throw InputError(os.str());
  }
}

double SampledSignal::sum() const { return std::accumulate(values.begin(), values.end(), 0.0); }

double SampledSignal::max() const {
  return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
}

SampledSignal SampledSignal::mean_subtracted() const {
  SampledSignal out = *this;
  const double mean = sum() / static_cast<double>(values.size());
  for (double& v : out.values) v -= mean;
  return out;
}

double signal_sum(const SampledSignal& sig) { return sig.sum(); }

void SourceSet::validate() const {
  if (positions.empty()) throw InputError("source set must hold at least one source");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InputError("source intensity alpha must be positive");
}

double GroundTruth::total() const {
  return std::accumulate(intensities.begin(), intensities.end(), 0.0);
}

void GroundTruth::validate() const {
  if (support.empty()) throw InputError("ground truth needs at least one support point");
  if (support.size() != intensities.size())
    throw InputError("ground truth support and intensity lists differ in length");
  for (double r : intensities)
    if (!(r > 0.0)) throw InputError("ground truth intensities must be positive");
}

long round_half_away(double v) {
  return static_cast<long>(v < 0.0 ? -std::floor(-v + 0.5) : std::floor(v + 0.5));
}

TruncatedTruth truncate_ground_truth(const GroundTruth& gt, double alpha, std::size_t n_sources) {
  gt.validate();
  if (!(alpha > 0.0)) throw InputError("alpha must be positive");
  const std::size_t m = gt.size();

  TruncatedTruth out;
  out.alpha = alpha;
  out.counts.resize(m);
  std::vector<double> rest(m);
  for (std::size_t p = 0; p < m; ++p) {
    const double q = gt.intensities[p] / alpha;
    out.counts[p] = round_half_away(q);
    rest[p] = q - static_cast<double>(out.counts[p]);
  }

  const long target = static_cast<long>(n_sources);
  long total = std::accumulate(out.counts.begin(), out.counts.end(), 0L);

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  if (total < target) {
    const long deficit = target - total;
    if (deficit > static_cast<long>(m)) {
      std::ostringstream os;
      os << "cannot reach N=" << n_sources << " with one increment per support point (deficit "
         << deficit << ", m=" << m << ")";
      throw InputError(os.str());
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return rest[a] > rest[b]; });
    for (long i = 0; i < deficit; ++i) ++out.counts[order[static_cast<std::size_t>(i)]];
  } else if (total > target) {
    const long surplus = total - target;
    std::vector<std::size_t> candidates;
    std::copy_if(order.begin(), order.end(), std::back_inserter(candidates),
                 [&](std::size_t p) { return out.counts[p] > 0; });
    if (surplus > static_cast<long>(candidates.size())) {
      std::ostringstream os;
      os << "N=" << n_sources << " is below the " << total
         << " sources forced by rounding (deficit " << surplus << ")";
      throw InputError(os.str());
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [&](std::size_t a, std::size_t b) { return rest[a] < rest[b]; });
    for (long i = 0; i < surplus; ++i) --out.counts[candidates[static_cast<std::size_t>(i)]];
  }

  out.truncated.resize(m);
  out.residuals.resize(m);
  out.positions.reserve(n_sources);
  for (std::size_t p = 0; p < m; ++p) {
    out.truncated[p] = static_cast<double>(out.counts[p]) * alpha;
    out.residuals[p] = out.truncated[p] - gt.intensities[p];
    for (long k = 0; k < out.counts[p]; ++k) out.positions.push_back(gt.support[p]);
  }
  return out;
}

}  // namespace suppose

#include "suppose/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

namespace suppose::io {

using nlohmann::json;

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& field, double& out) {
  const std::string t = trim(field);
  if (t.empty()) return false;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

// Numeric rows with min_cols..max_cols columns; a leading non-numeric row is a header.
std::vector<std::vector<double>> read_numeric_csv(const fs::path& path, std::size_t min_cols,
                                                  std::size_t max_cols, std::vector<std::string>* header) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty() || trim(line)[0] == '#') continue;
    const auto fields = split(line, ',');
    std::vector<double> row(fields.size());
    bool numeric = true;
    for (std::size_t c = 0; c < fields.size(); ++c) numeric = numeric && parse_double(fields[c], row[c]);
    if (!numeric) {
      if (rows.empty() && header && header->empty()) {
        for (const auto& f : fields) header->push_back(trim(f));
        continue;
      }
      throw InputError(path.string() + ":" + std::to_string(lineno) + ": non-numeric field");
    }
    if (row.size() < min_cols || row.size() > max_cols)
      throw InputError(path.string() + ":" + std::to_string(lineno) + ": expected " + std::to_string(min_cols) +
                       (min_cols == max_cols ? "" : "-" + std::to_string(max_cols)) + " columns");
    if (width == 0) width = row.size();
    if (row.size() != width) throw InputError(path.string() + ":" + std::to_string(lineno) + ": ragged row");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InputError(path.string() + ": no data rows");
  return rows;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

SampledSignal read_signal_csv(const fs::path& path) {
  std::vector<std::string> header;
  const auto rows = read_numeric_csv(path, 2, 2, &header);
  std::vector<double> v;
  v.reserve(rows.size());
  for (const auto& r : rows) v.push_back(r[1]);
  double pitch = 1.0;
  if (rows.size() > 1) {
    pitch = (rows.back()[0] - rows.front()[0]) / static_cast<double>(rows.size() - 1);
    if (!(pitch > 0.0)) throw InputError(path.string() + ": coordinates must increase");
    for (std::size_t i = 1; i < rows.size(); ++i)
      if (std::abs(rows[i][0] - rows[i - 1][0] - pitch) > 1e-6 * pitch)
        throw InputError(path.string() + ": coordinates are not uniformly spaced at row " + std::to_string(i + 1));
  }
  return SampledSignal(PixelGrid::line(rows.size(), pitch, rows.front()[0]), std::move(v), path.stem().string());
}

void write_signal_csv(const fs::path& path, const SampledSignal& sig) {
  if (sig.grid.dim != 1) throw InputError("CSV signals are 1-D; use PGM for images");
  std::string out = "coordinate,counts\n";
  for (std::size_t i = 0; i < sig.values.size(); ++i)
    out += fmt(sig.grid.center(i)[0]) + "," + fmt(sig.values[i]) + "\n";
  write_text_atomic(path, out);
}

fs::path sidecar_path(const fs::path& image) { return fs::path(image.string() + ".json"); }

SampledSignal read_pgm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::string magic;
  in >> magic;
  if (magic != "P5") throw InputError(path.string() + ": not a binary PGM (P5)");
  auto next_int = [&]() -> long {
    in >> std::ws;
    while (in.peek() == '#') {
      std::string skip;
      std::getline(in, skip);
      in >> std::ws;
    }
    long v = -1;
    if (!(in >> v)) throw InputError(path.string() + ": malformed PGM header");
    return v;
  };
  const long w = next_int(), h = next_int(), maxval = next_int();
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535) throw InputError(path.string() + ": bad PGM dimensions");
  in.get();
  const std::size_t bpp = maxval > 255 ? 2 : 1;
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  std::vector<unsigned char> raw(n * bpp);
  if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size())))
    throw InputError(path.string() + ": truncated PGM data");
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = bpp == 2 ? static_cast<double>((raw[2 * i] << 8) | raw[2 * i + 1]) : static_cast<double>(raw[i]);
  PixelGrid grid = PixelGrid::image(static_cast<std::size_t>(w), static_cast<std::size_t>(h), 1.0);
  const fs::path side = sidecar_path(path);
  if (fs::exists(side)) {
    const json j = read_json(side);
    const auto pitch = j.value("pitch", std::vector<double>{1.0, 1.0});
    const auto origin = j.value("origin", std::vector<double>{0.0, 0.0});
    if (pitch.empty() || origin.empty()) throw InputError(side.string() + ": pitch/origin must be non-empty");
    grid.pitch = {pitch[0], pitch.size() > 1 ? pitch[1] : pitch[0]};
    grid.origin = {origin[0], origin.size() > 1 ? origin[1] : 0.0};
    grid.validate();
  }
  return SampledSignal(grid, std::move(v), path.stem().string());
}

void write_pgm(const fs::path& path, const SampledSignal& sig) {
  if (sig.grid.dim != 2) throw InputError("PGM images are 2-D; use CSV for 1-D signals");
  std::string out = "P5\n" + std::to_string(sig.grid.nx()) + " " + std::to_string(sig.grid.ny()) + "\n65535\n";
  out.reserve(out.size() + 2 * sig.values.size());
  for (double v : sig.values) {
    const auto q = static_cast<unsigned>(std::clamp(std::round(v), 0.0, 65535.0));
    out.push_back(static_cast<char>(q >> 8));
    out.push_back(static_cast<char>(q & 0xff));
  }
  write_text_atomic(path, out);
  write_json(sidecar_path(path), json{{"pitch", {sig.grid.pitch[0], sig.grid.pitch[1]}},
                                      {"origin", {sig.grid.origin[0], sig.grid.origin[1]}},
                                      {"layout", "row-major, x fastest"}});
}

SampledSignal read_signal(const fs::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".csv") return read_signal_csv(path);
  if (ext == ".pgm") return read_pgm(path);
  throw InputError("unsupported signal format '" + ext + "' (use .csv or .pgm)");
}

void write_signal(const fs::path& path, const SampledSignal& sig) {
  if (sig.grid.dim == 1) write_signal_csv(path, sig);
  else write_pgm(path, sig);
}

void write_grid_csv(const fs::path& path, const SampledSignal& sig) {
  const bool two = sig.grid.dim == 2;
  std::string out = two ? "x,y,value\n" : "x,value\n";
  for (std::size_t i = 0; i < sig.values.size(); ++i) {
    const Point c = sig.grid.center(i);
    out += fmt(c[0]) + ",";
    if (two) out += fmt(c[1]) + ",";
    out += fmt(sig.values[i]) + "\n";
  }
  write_text_atomic(path, out);
}

SampledSignal read_grid_csv(const fs::path& path) {
  std::vector<std::string> header;
  const auto rows = read_numeric_csv(path, 2, 3, &header);
  if (rows.front().size() == 2) {
    std::vector<double> v;
    for (const auto& r : rows) v.push_back(r[1]);
    const double pitch = rows.size() > 1 ? (rows.back()[0] - rows.front()[0]) / static_cast<double>(rows.size() - 1) : 1.0;
    return SampledSignal(PixelGrid::line(rows.size(), pitch, rows.front()[0]), std::move(v), path.stem().string());
  }
  std::size_t nx = 1;
  while (nx < rows.size() && rows[nx][1] == rows[0][1]) ++nx;
  if (rows.size() % nx != 0) throw InputError(path.string() + ": 2-D grid rows are not rectangular");
  const std::size_t ny = rows.size() / nx;
  const double px = nx > 1 ? rows[1][0] - rows[0][0] : 1.0;
  const double py = ny > 1 ? rows[nx][1] - rows[0][1] : px;
  PixelGrid g = PixelGrid::image(nx, ny, px, {rows[0][0], rows[0][1]});
  g.pitch = {px, py};
  g.validate();
  std::vector<double> v;
  for (const auto& r : rows) v.push_back(r[2]);
  return SampledSignal(g, std::move(v), path.stem().string());
}

void write_positions_csv(const fs::path& path, const SourceSet& s) {
  const bool two = s.grid.dim == 2;
  std::string out = two ? "x,y\n" : "x\n";
  for (const Point& p : s.positions) out += two ? fmt(p[0]) + "," + fmt(p[1]) + "\n" : fmt(p[0]) + "\n";
  write_text_atomic(path, out);
}

std::vector<Point> read_positions_csv(const fs::path& path, int* dim_out) {
  std::vector<std::string> header;
  const auto rows = read_numeric_csv(path, 1, 2, &header);
  std::vector<Point> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back({r[0], r.size() > 1 ? r[1] : 0.0});
  if (dim_out) *dim_out = static_cast<int>(rows.front().size());
  return out;
}

void write_ground_truth_csv(const fs::path& path, const GroundTruth& gt, int dim) {
  std::string out = dim == 2 ? "x,y,intensity\n" : "x,intensity\n";
  for (std::size_t p = 0; p < gt.size(); ++p) {
    out += fmt(gt.support[p][0]) + ",";
    if (dim == 2) out += fmt(gt.support[p][1]) + ",";
    out += fmt(gt.intensities[p]) + "\n";
  }
  write_text_atomic(path, out);
}

GroundTruth read_ground_truth_csv(const fs::path& path, int* dim_out) {
  std::vector<std::string> header;
  const auto rows = read_numeric_csv(path, 2, 3, &header);
  GroundTruth gt;
  for (const auto& r : rows) {
    const bool two = r.size() == 3;
    gt.support.push_back({r[0], two ? r[1] : 0.0});
    gt.intensities.push_back(r.back());
  }
  gt.validate();
  if (dim_out) *dim_out = rows.front().size() == 3 ? 2 : 1;
  return gt;
}

json read_json(const fs::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& j) { write_text_atomic(path, j.dump(2) + "\n"); }

void write_text_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw InputError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 0xf]);
  }
  return out;
}

std::string sha256_file(const fs::path& path) { return sha256_hex(read_text(path)); }

}  // namespace suppose::io

#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "suppose/signal.hpp"

namespace suppose::io {

namespace fs = std::filesystem;

/// 1-D signal as two CSV columns (coordinate, counts). A non-numeric first row is
/// treated as a header. Coordinates must be uniformly spaced.
SampledSignal read_signal_csv(const fs::path& path);
void write_signal_csv(const fs::path& path, const SampledSignal& sig);

/// 2-D image as binary P5 PGM with 16-bit big-endian samples (8-bit accepted on read)
/// plus a JSON sidecar `<path>.json` holding pitch and origin. Values are rounded
/// and clamped to [0, 65535] on write.
SampledSignal read_pgm(const fs::path& path);
void write_pgm(const fs::path& path, const SampledSignal& sig);
fs::path sidecar_path(const fs::path& image);

/// Dispatches on the extension: .csv -> 1-D, .pgm -> 2-D.
SampledSignal read_signal(const fs::path& path);
void write_signal(const fs::path& path, const SampledSignal& sig);

/// Sampled function on a grid as `x,value` or `x,y,value` rows (row-major, x fastest).
void write_grid_csv(const fs::path& path, const SampledSignal& sig);
SampledSignal read_grid_csv(const fs::path& path);

/// Header `x` or `x,y`, one row per source, physical units.
void write_positions_csv(const fs::path& path, const SourceSet& s);
std::vector<Point> read_positions_csv(const fs::path& path, int* dim_out = nullptr);

/// Header `x,intensity` or `x,y,intensity`.
void write_ground_truth_csv(const fs::path& path, const GroundTruth& gt, int dim);
GroundTruth read_ground_truth_csv(const fs::path& path, int* dim_out = nullptr);

nlohmann::json read_json(const fs::path& path);
/// Pretty-printed with a trailing newline.
void write_json(const fs::path& path, const nlohmann::json& j);

/// Writes through a temporary file in the same directory, then renames.
void write_text_atomic(const fs::path& path, const std::string& content);
std::string read_text(const fs::path& path);

/// Lowercase hex SHA-256 of the file contents.
std::string sha256_file(const fs::path& path);
std::string sha256_hex(const std::string& bytes);

}  // namespace suppose::io

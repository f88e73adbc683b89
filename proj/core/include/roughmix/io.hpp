#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <nlohmann/json.hpp>

#include "roughmix/estimate.hpp"
#include "roughmix/gmfbm.hpp"
#include "roughmix/lift.hpp"
#include "roughmix/rde.hpp"
#include "roughmix/tensor.hpp"

namespace roughmix::io {

/// Decimal with 17 significant digits, enough to round-trip any double.
std::string format_double(double x);

/// CSV with header `t,x1,...,xd`, one row per grid point.
void write_path_csv(std::ostream& out, const SamplePath& path);
/// Throws ConfigError on malformed input.
SamplePath read_path_csv(std::istream& in);
void save_path_csv(const std::filesystem::path& file, const SamplePath& path);
SamplePath load_path_csv(const std::filesystem::path& file);

/// CSV with header `t,y1,...,ye`.
void write_solution_csv(std::ostream& out, const RdeSolution& solution);

nlohmann::json to_json(const GmfbmSpec& spec);
GmfbmSpec spec_from_json(const nlohmann::json& j);

/// {"dim": d, "level": N, "levels": [[x_0], [level 1], ..., [level N]]}
/// with each level in lexicographic word order.
nlohmann::json to_json(const TruncatedTensor& x);
TruncatedTensor tensor_from_json(const nlohmann::json& j);

/// {"dim": d, "p": p, "times": [...], "inc1": [[...], ...], "inc2": [[row-major d*d], ...]}
nlohmann::json to_json(const Level2RoughPath& rp);
Level2RoughPath rough_path_from_json(const nlohmann::json& j);

nlohmann::json to_json(const FitReport& report);

nlohmann::json load_json(const std::filesystem::path& file);
/// Writes `j` with two-space indentation and a trailing newline.
void save_json(const std::filesystem::path& file, const nlohmann::json& j);

}  // namespace roughmix::io

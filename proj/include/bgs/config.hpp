#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "bgs/harness.hpp"

namespace bgs {

using Settings = std::map<std::string, std::string>;

/// Flat "key = value" lines; '#' starts a comment. Keys use the long flag
/// names (dims, mats, skels, muscs, rpltol, seed, out, format, t-fix,
/// reorth-first, auto-shift, sweep, threads); '_' and '-' are interchangeable.
Settings parse_settings(std::string_view text);
Settings load_settings(const std::filesystem::path& path);

/// Applies settings on top of `cfg`. Throws ContractError on unknown keys or bad values.
void apply_settings(RunConfig& cfg, const Settings& settings);

BlockLayout parse_dims(std::string_view text);
/// "a:b", "a:step:b" or a comma list.
std::vector<double> parse_sweep(std::string_view text);
std::vector<MatrixKind> parse_matrix_list(std::string_view text);
std::vector<SkeletonId> parse_skeleton_list(std::string_view text);
std::vector<MuscleId> parse_muscle_list(std::string_view text);
std::vector<Format> parse_formats(std::string_view text);
bool parse_bool(std::string_view text);

}  // namespace bgs

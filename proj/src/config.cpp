#include "bgs/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "bgs/errors.hpp"

namespace bgs {

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto a = s.find_first_not_of(ws);
  if (a == std::string_view::npos) return {};
  return s.substr(a, s.find_last_not_of(ws) - a + 1);
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    const auto part = trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (!part.empty()) out.emplace_back(part);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string normalize_key(std::string_view k) {
  std::string out(trim(k));
  std::replace(out.begin(), out.end(), '_', '-');
  return out;
}

double to_double(std::string_view s, const char* what) {
  std::string str(trim(s));
  try {
    std::size_t used = 0;
    const double v = std::stod(str, &used);
    if (used != str.size()) throw std::invalid_argument(str);
    return v;
  } catch (const std::exception&) {
    throw ContractError(std::string("bad ") + what + ": '" + str + "'");
  }
}

template <class Int>
Int to_int(std::string_view s, const char* what) {
  s = trim(s);
  Int v{};
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw ContractError(std::string("bad ") + what + ": '" + std::string(s) + "'");
  return v;
}

template <class T, class Parse, class All>
std::vector<T> parse_names(std::string_view text, const char* what, Parse parse, const All& all) {
  if (trim(text) == "all") return {all.begin(), all.end()};
  std::vector<T> out;
  for (const auto& name : split(text, ',')) {
    const auto v = parse(name);
    if (!v) throw ContractError(std::string("unknown ") + what + " '" + name + "'");
    out.push_back(*v);
  }
  return out;
}

}  // namespace

Settings parse_settings(std::string_view text) {
  Settings out;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view l = line;
    if (const auto hash = l.find('#'); hash != std::string_view::npos) l = l.substr(0, hash);
    l = trim(l);
    if (l.empty()) continue;
    const auto eq = l.find('=');
    if (eq == std::string_view::npos)
      throw ContractError("config line " + std::to_string(lineno) + ": expected key = value");
    out[normalize_key(l.substr(0, eq))] = std::string(trim(l.substr(eq + 1)));
  }
  return out;
}

Settings load_settings(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ContractError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_settings(ss.str());
}

BlockLayout parse_dims(std::string_view text) {
  const auto parts = split(text, ',');
  if (parts.size() != 3) throw ContractError("dims must be m,p,s");
  BlockLayout d{to_int<Index>(parts[0], "dims"), to_int<Index>(parts[1], "dims"), to_int<Index>(parts[2], "dims")};
  d.validate();
  return d;
}

std::vector<double> parse_sweep(std::string_view text) {
  text = trim(text);
  if (text.find(':') != std::string_view::npos) {
    const auto parts = split(text, ':');
    if (parts.size() != 2 && parts.size() != 3) throw ContractError("sweep range must be a:b or a:step:b");
    const double a = to_double(parts[0], "sweep");
    const double step = parts.size() == 3 ? to_double(parts[1], "sweep") : 1.0;
    const double b = to_double(parts.back(), "sweep");
    if (!(step > 0.0)) throw ContractError("sweep step must be positive");
    std::vector<double> out;
    for (long i = 0;; ++i) {
      const double v = a + static_cast<double>(i) * step;
      if (v > b + 1e-9 * std::abs(step)) break;
      out.push_back(v);
    }
    if (out.empty()) throw ContractError("empty sweep range");
    return out;
  }
  std::vector<double> out;
  for (const auto& p : split(text, ',')) out.push_back(to_double(p, "sweep"));
  if (out.empty()) throw ContractError("empty sweep");
  return out;
}

std::vector<MatrixKind> parse_matrix_list(std::string_view text) {
  return parse_names<MatrixKind>(text, "matrix", parse_matrix_kind, kAllMatrixKinds);
}

std::vector<SkeletonId> parse_skeleton_list(std::string_view text) {
  if (trim(text).empty() || trim(text) == "none") return {};
  return parse_names<SkeletonId>(text, "skeleton", parse_skeleton, kAllSkeletons);
}

std::vector<MuscleId> parse_muscle_list(std::string_view text) {
  return parse_names<MuscleId>(text, "muscle", parse_muscle, kAllMuscles);
}

std::vector<Format> parse_formats(std::string_view text) {
  std::vector<Format> out;
  for (const auto& f : split(text, ',')) {
    if (f == "csv") out.push_back(Format::Csv);
    else if (f == "json") out.push_back(Format::Json);
    else if (f == "svg") out.push_back(Format::Svg);
    else throw ContractError("unknown format '" + f + "'");
  }
  if (out.empty()) throw ContractError("no output format");
  return out;
}

bool parse_bool(std::string_view text) {
  text = trim(text);
  if (text == "1" || text == "true" || text == "yes" || text == "on") return true;
  if (text == "0" || text == "false" || text == "no" || text == "off") return false;
  throw ContractError("bad boolean '" + std::string(text) + "'");
}

void apply_settings(RunConfig& cfg, const Settings& settings) {
  for (const auto& [raw_key, value] : settings) {
    const std::string key = normalize_key(raw_key);
    if (key == "dims") cfg.dims = parse_dims(value);
    else if (key == "mats") cfg.matrices = parse_matrix_list(value);
    else if (key == "skels") cfg.skeletons = parse_skeleton_list(value);
    else if (key == "muscs") cfg.muscles = parse_muscle_list(value);
    else if (key == "rpltol") cfg.options.rpltol = to_double(value, "rpltol");
    else if (key == "seed") cfg.seed = to_int<std::uint64_t>(value, "seed");
    else if (key == "out") cfg.out_dir = value;
    else if (key == "format") cfg.formats = parse_formats(value);
    else if (key == "t-fix") cfg.options.t_fix = parse_bool(value);
    else if (key == "reorth-first") cfg.options.reorth_first_block = parse_bool(value);
    else if (key == "auto-shift") cfg.options.auto_shift = parse_bool(value);
    else if (key == "sweep") cfg.sweep = parse_sweep(value);
    else if (key == "threads") cfg.threads = to_int<unsigned>(value, "threads");
    else throw ContractError("unknown config key '" + raw_key + "'");
  }
  if (cfg.options.rpltol < 0.0) throw ContractError("rpltol must be >= 0");
}

}  // namespace bgs

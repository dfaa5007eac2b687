#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bgs/matgen.hpp"
#include "bgs/metrics.hpp"
#include "bgs/muscles.hpp"
#include "bgs/skeletons.hpp"

namespace bgs {

enum class Format { Csv, Json, Svg };

struct RunConfig {
  BlockLayout dims{1000, 10, 5};
  std::vector<MatrixKind> matrices;
  std::vector<SkeletonId> skeletons;
  std::vector<MuscleId> muscles;
  SkeletonOptions options;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = ".";
  std::vector<Format> formats{Format::Csv};
  /// kappa: exponents t; glued-kappa: exponents e (r = t = -e); monomial-kappa: basis widths.
  std::vector<double> sweep;
  /// Worker threads for independent cells; 0 = hardware concurrency.
  unsigned threads = 0;
};

enum class KappaPlotKind { Standard, Glued, Monomial };

struct CellResult {
  std::string variant;  ///< "BCGS-HouseQR", or the muscle name alone in muscle-only runs
  std::string matrix;   ///< matrix label, e.g. "rand_normal" or "glued(r=-3;t=-3)"
  std::optional<SkeletonId> skeleton;
  MuscleId muscle = MuscleId::HouseQR;
  double sweep_value = 0.0;
  std::uint64_t stream_seed = 0;
  /// "ok", "incompatible", "chol_fail" or "nan_encountered"
  std::string status;
  StabilityReport report;
};

struct ExperimentResult {
  std::string experiment;  ///< "heatmap", "kappa", "glued-kappa", "monomial-kappa"
  RunConfig config;
  std::vector<CellResult> cells;  ///< ordered by (matrix, skeleton, muscle) in enum order
};

/// One cell per (matrix, skeleton, muscle). Incompatible pairings become NaN
/// cells with status "incompatible". Throws ContractError on an empty list.
ExperimentResult run_heatmap(const RunConfig& cfg);

/// One cell per (sweep point, variant). With no skeletons each muscle runs on
/// the whole matrix. An empty sweep takes the kind's default range.
ExperimentResult run_kappa_plot(KappaPlotKind kind, const RunConfig& cfg);

std::vector<double> default_sweep(KappaPlotKind kind);

/// Long-form table with header variant,matrix,metric,value,status,kappa,seed.
std::string to_csv(const ExperimentResult& res);
std::string to_json(const ExperimentResult& res);

/// Writes the formats requested in the config into res.config.out_dir and
/// returns the paths written.
std::vector<std::filesystem::path> write_outputs(const ExperimentResult& res);

/// Desk-scale command lines for the reference heatmap and kappa-plot runs.
std::string presets_text();

std::string format_value(double v);

}  // namespace bgs

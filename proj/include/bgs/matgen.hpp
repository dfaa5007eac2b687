#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>

#include "bgs/matcore.hpp"

namespace bgs {

enum class MatrixKind {
  rand_uniform,
  rand_normal,
  rank_def,
  laeuchli,
  monomial,
  s_step,
  newton,
  stewart,
  stewart_extreme,
  glued,
  kappa_series,
};

inline constexpr std::array kAllMatrixKinds = {
    MatrixKind::rand_uniform, MatrixKind::rand_normal,     MatrixKind::rank_def, MatrixKind::laeuchli,
    MatrixKind::monomial,     MatrixKind::s_step,          MatrixKind::newton,   MatrixKind::stewart,
    MatrixKind::stewart_extreme, MatrixKind::glued,        MatrixKind::kappa_series,
};

std::string_view to_string(MatrixKind kind) noexcept;
/// Accepts the enum spelling; "s-step" is taken as an alias of s_step.
std::optional<MatrixKind> parse_matrix_kind(std::string_view name);

struct MatrixSpec {
  MatrixKind kind = MatrixKind::rand_normal;
  BlockLayout dims;
  std::uint64_t seed = 0;
  /// glued: exponents of the global and per-block singular value profiles.
  double r = 0.0;
  /// glued: per-block exponent; kappa_series: singular values span [10^-t, 1].
  double t = 0.0;
  /// Krylov kinds: columns per generated basis block; 0 means dims.s.
  Index basis_width = 0;
};

/// Deterministic in the spec: equal specs give bit-identical matrices.
/// Throws ContractError if the layout is too small for the kind's structure.
Mat generate(const MatrixSpec& spec);

/// 0-based (duplicate, zero) column indices used by the stewart generator for n columns.
std::pair<Index, Index> stewart_indices(Index n);

/// MATLAB-style logspace with exact endpoints.
std::vector<double> logspace(double a, double b, Index n);

/// `count` Leja-ordered points taken from a uniform grid on [lo, hi].
std::vector<double> leja_points(double lo, double hi, Index count);

}  // namespace bgs

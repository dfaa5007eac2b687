#pragma once

#include <array>
#include <optional>
#include <string_view>
#include <vector>

#include "bgs/events.hpp"
#include "bgs/matcore.hpp"
#include "bgs/muscles.hpp"
#include "bgs/rng.hpp"

namespace bgs {

/// Inter-block Gram-Schmidt loops ("skeletons").
enum class SkeletonId {
  BCGS,
  BCGS_PIP,
  BCGS_PIO,
  BCGS_RO,
  BCGS_IRO,
  BCGS_IRO_LS,
  BCGS_SROR,
  BMGS,
  BMGS_SVL,
  BMGS_LTS,
  BMGS_CWY,
  BMGS_ICWY,
};

inline constexpr std::array kAllSkeletons = {
    SkeletonId::BCGS,      SkeletonId::BCGS_PIP, SkeletonId::BCGS_PIO, SkeletonId::BCGS_RO,
    SkeletonId::BCGS_IRO,  SkeletonId::BCGS_IRO_LS, SkeletonId::BCGS_SROR, SkeletonId::BMGS,
    SkeletonId::BMGS_SVL,  SkeletonId::BMGS_LTS, SkeletonId::BMGS_CWY, SkeletonId::BMGS_ICWY,
};

std::string_view to_string(SkeletonId id) noexcept;
std::optional<SkeletonId> parse_skeleton(std::string_view name);

/// BCGS_SROR runs only with CGS_SRO / CGS_SROR; every other pairing is accepted.
bool compatible(SkeletonId skel, MuscleId musc) noexcept;
/// Skeletons that honour SkeletonOptions::t_fix (BCGS_IRO, BMGS).
bool supports_t_fix(SkeletonId skel) noexcept;
bool supports_reorth_first_block(SkeletonId skel) noexcept;

struct SkeletonOptions {
  /// Replace Q_j by Q_j T_jj in every projection against a finished block.
  bool t_fix = false;
  /// BCGS_IRO: intra-orthogonalize the first block vector twice.
  bool reorth_first_block = false;
  /// Replacement tolerance for BCGS_SROR and the CGS_SROR muscle.
  double rpltol = 100.0;
  /// Keep each block right before it was intra-orthogonalized.
  bool record_trace = false;
  /// ShCholQR_RORO shift escalation, forwarded to the muscle.
  bool auto_shift = false;
};

struct BlockQRResult {
  Mat Q;
  Mat R;
  Mat T;  ///< block diagonal of muscle T factors, or the skeleton's own T
  Status status = Status::Ok;
  EventLog events;
  /// With record_trace: entry k is the m x s block that became Q_{k+1}.
  std::vector<Mat> trace;

  bool ok() const noexcept { return status == Status::Ok; }
};

/// Block QR factorization X = QR of an m x (p*s) matrix.
/// Throws IncompatibleError for pairings rejected by compatible(), and
/// ContractError for a layout that does not match X or an option the
/// skeleton does not support. Numerical failures are reported through status;
/// factors are then partial.
BlockQRResult block_orthogonalize(const Mat& X, const BlockLayout& layout, SkeletonId skel, MuscleId musc,
                                  const SkeletonOptions& opts, Rng& rng);

struct SrorBlockStep {
  Mat Q;      ///< m x s, orthonormal and orthogonal to the previous basis
  Mat Rcol;   ///< coefficients against the previous basis; no columns if that basis is empty
  Mat Rdiag;  ///< s x s upper triangular
};

/// Block step of BCGS_SROR: projection against `Qprev` with per-column fault
/// checks and random replacement, followed by CGS_SROR inside the block.
/// Identically zero columns come back with zero R entries.
SrorBlockStep bcgs_step_sror(const Mat& Qprev, const Mat& Xk, double rpltol, Rng& rng, EventLog* log = nullptr,
                             Origin origin = Origin::Skeleton);

/// ||R^T R - (S^T S + T^T T)|| / ||Y + Z||^2 with R, S, T the Householder
/// R-factors of Y + Z, Y and Z.
double verify_block_pythagorean(const Mat& Y, const Mat& Z);

}  // namespace bgs

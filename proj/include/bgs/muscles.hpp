#pragma once

#include <array>
#include <optional>
#include <string_view>
#include <vector>

#include "bgs/events.hpp"
#include "bgs/matcore.hpp"
#include "bgs/rng.hpp"

namespace bgs {

/// Intra-orthogonalization routines ("muscles"), in the order used for
/// report rows and columns.
enum class MuscleId {
  CGS,
  CGS_P,
  CGS_RO,
  CGS_IRO,
  CGS_SRO,
  CGS_SROR,
  CGS_IRO_LS,
  MGS,
  MGS_RO,
  MGS_IRO,
  MGS_SVL,
  MGS_LTS,
  MGS_CWY,
  MGS_ICWY,
  HouseQR,
  CholQR,
  CholQR_RO,
  ShCholQR_RORO,
};

inline constexpr std::array kAllMuscles = {
    MuscleId::CGS,      MuscleId::CGS_P,     MuscleId::CGS_RO,        MuscleId::CGS_IRO,  MuscleId::CGS_SRO,
    MuscleId::CGS_SROR, MuscleId::CGS_IRO_LS, MuscleId::MGS,          MuscleId::MGS_RO,   MuscleId::MGS_IRO,
    MuscleId::MGS_SVL,  MuscleId::MGS_LTS,   MuscleId::MGS_CWY,       MuscleId::MGS_ICWY, MuscleId::HouseQR,
    MuscleId::CholQR,   MuscleId::CholQR_RO, MuscleId::ShCholQR_RORO,
};

std::string_view to_string(MuscleId id) noexcept;
std::optional<MuscleId> parse_muscle(std::string_view name);

/// True for the four low-sync MGS variants that return a correction factor T.
bool produces_t(MuscleId id) noexcept;
/// True for the variants whose T enters projectors as T^{-T} (LTS, ICWY)
/// rather than T^T (SVL, CWY).
bool t_is_inverse_form(MuscleId id) noexcept;

struct MuscleOptions {
  /// Replacement tolerance for CGS_SROR. CGS_SRO always runs with 0.
  double rpltol = 100.0;
  /// ShCholQR_RORO: on a failed shifted Cholesky, retry once with shift ||X||_2^2.
  bool auto_shift = false;
  /// Keep the pre-normalization vector of each column step (MGS_CWY/ICWY/SVL/LTS).
  bool record_trace = false;
};

struct QRResult {
  Mat Q;
  Mat R;
  Mat T;  ///< identity unless the muscle produces a correction factor
  Status status = Status::Ok;
  EventLog events;
  /// With record_trace: column k holds the vector that was normalized into q_k.
  std::optional<Mat> trace;

  bool ok() const noexcept { return status == Status::Ok; }
};

QRResult intra_orthogonalize(const Mat& X, MuscleId id, const MuscleOptions& opts, Rng& rng);

/// Shift used by ShCholQR_RORO for an m x s block with 2-norm `norm_x`.
double shifted_cholqr_shift(Index m, Index s, double norm_x) noexcept;

struct SrorStep {
  std::vector<double> y;  ///< unit vector orthogonal to the basis
  std::vector<double> r;  ///< projection coefficients, length = basis columns
  double rho = 0.0;
  int northog = 0;  ///< projection passes taken
};

/// One column step of CGS with selective reorthogonalization and replacement.
/// `nu` is the reference norm for fault detection (raised to ||x|| if smaller).
/// Every tall-dimension reduction is appended to `log` with the given origin.
SrorStep cgs_step_sror(const Mat& basis, std::span<const double> x, double nu, double rpltol, Rng& rng,
                       EventLog* log = nullptr, Origin origin = Origin::Muscle);

/// Correction factor in the "T approximates (triu(Q^T Q))^{-1}" convention:
/// T itself for SVL/CWY, T^{-1} for LTS/ICWY, identity otherwise.
Mat correction_factor(const QRResult& res, MuscleId id);

}  // namespace bgs

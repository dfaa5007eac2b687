#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

#include "bgs/events.hpp"
#include "bgs/matcore.hpp"

namespace bgs {

/// ||I - Q^T Q||_2
double loss_of_orthogonality(const Mat& Q);

/// ||QR - X||_2 / ||X||_2. Throws ContractError for X = 0.
/// Pass `norm_x` when ||X||_2 is already known.
double relative_residual(const Mat& Q, const Mat& R, const Mat& X, std::optional<double> norm_x = std::nullopt);

/// ||X^T X - R^T R||_2 / ||X||_2^2. Throws ContractError for X = 0.
double relative_cholesky_residual(const Mat& R, const Mat& X, std::optional<double> norm_x = std::nullopt);

struct TriadResiduals {
  double ts = 0.0;  ///< ||T S - I||_F, S = triu(Q^T Q)
  double tr = 0.0;  ///< ||(I - T) R||_F
};

TriadResiduals triad_residuals(const Mat& Q, const Mat& R, const Mat& T);

/// sigma_max / sigma_min; +inf when sigma_min is exactly zero.
double condition_number(const Mat& X);

struct StabilityReport {
  double loo = 0.0;
  double rel_res = 0.0;
  double rel_chol_res = 0.0;
  std::optional<TriadResiduals> triad;
  double kappa = 0.0;
  std::size_t sync_skeleton = 0;
  std::size_t sync_muscle = 0;
  Status status = Status::Ok;
  std::uint64_t seed = 0;
};

/// Fills a report from a finished run. Metric fields are NaN unless status is ok.
/// `T` is the correction factor to judge the triad by (pass nullopt to skip it).
StabilityReport make_report(const Mat& X, const Mat& Q, const Mat& R, const std::optional<Mat>& T, Status status,
                            const EventLog& events, double kappa, std::uint64_t seed,
                            std::optional<double> norm_x = std::nullopt);

}  // namespace bgs

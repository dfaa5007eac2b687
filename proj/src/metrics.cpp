#include "bgs/metrics.hpp"

#include <cmath>
#include <limits>

#include "bgs/errors.hpp"

namespace bgs {

double loss_of_orthogonality(const Mat& Q) {
  return two_norm(Mat::identity(Q.cols()) - inner(Q, Q));
}

double relative_residual(const Mat& Q, const Mat& R, const Mat& X, std::optional<double> norm_x) {
  const double nx = norm_x ? *norm_x : two_norm(X);
  if (nx == 0.0) throw ContractError("relative_residual: X is zero");
  return two_norm(matmul(Q, R) - X) / nx;
}

double relative_cholesky_residual(const Mat& R, const Mat& X, std::optional<double> norm_x) {
  const double nx = norm_x ? *norm_x : two_norm(X);
  if (nx == 0.0) throw ContractError("relative_cholesky_residual: X is zero");
  return two_norm(inner(X, X) - inner(R, R)) / (nx * nx);
}

TriadResiduals triad_residuals(const Mat& Q, const Mat& R, const Mat& T) {
  const Index n = Q.cols();
  if (T.rows() != n || T.cols() != n || R.rows() != n)
    throw ContractError("triad_residuals: T and R must conform to Q's column count");
  const Mat I = Mat::identity(n);
  const Mat S = triu(inner(Q, Q));
  return {frobenius_norm(matmul(T, S) - I), frobenius_norm(matmul(I - T, R))};
}

double condition_number(const Mat& X) {
  const auto sv = jacobi_svd_values(X);
  if (sv.empty()) throw ContractError("condition_number: empty matrix");
  if (sv.back() == 0.0) return std::numeric_limits<double>::infinity();
  return sv.front() / sv.back();
}

StabilityReport make_report(const Mat& X, const Mat& Q, const Mat& R, const std::optional<Mat>& T, Status status,
                            const EventLog& events, double kappa, std::uint64_t seed,
                            std::optional<double> norm_x) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  StabilityReport rep{nan, nan, nan, std::nullopt, kappa, events.count(Origin::Skeleton),
                      events.count(Origin::Muscle), status, seed};
  if (status != Status::Ok) return rep;
  rep.loo = loss_of_orthogonality(Q);
  if (!norm_x) norm_x = two_norm(X);
  rep.rel_res = relative_residual(Q, R, X, norm_x);
  rep.rel_chol_res = relative_cholesky_residual(R, X, norm_x);
  if (T) rep.triad = triad_residuals(Q, R, *T);
  return rep;
}

}  // namespace bgs

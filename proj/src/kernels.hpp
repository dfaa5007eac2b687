#pragma once

// Skeleton loops shared by the block skeletons and by the column-wise
// muscles, which are the same loops run with block width 1.

#include <functional>
#include <optional>

#include "bgs/events.hpp"
#include "bgs/matcore.hpp"
#include "bgs/muscles.hpp"
#include "bgs/skeletons.hpp"

namespace bgs::detail {

using BlockIO = std::function<QRResult(const Mat&)>;

/// How a finished block's T_jj enters projections under the T-fix.
enum class Correction { None, Transpose, InverseTranspose };

struct Run {
  Mat Q;
  Mat R;
  Mat T;
  Status status = Status::Ok;
  EventLog events;
  std::vector<Mat> trace;
  bool record_trace = false;
  Origin origin = Origin::Skeleton;

  Run(Index m, Index n, Origin o, bool trace_on)
      : Q(m, n), R(n, n), T(Mat::identity(n)), record_trace(trace_on), origin(o) {}

  bool failed() const noexcept { return status != Status::Ok; }
  void sync() { events.reduction(origin); }
  void keep(const Mat& W) {
    if (record_trace) trace.push_back(W);
  }
  /// Folds a muscle call into the run; false if the run must stop.
  bool absorb(const QRResult& io);
  /// Cholesky with status bookkeeping (non-finite input -> nan, pivot <= 0 -> chol_fail).
  std::optional<Mat> chol(const Mat& G);
  /// Sets nan status if any factor entry is non-finite.
  void finish();
};

/// Normalization of a single column, the muscle of every column-wise variant.
QRResult normalize_column(const Mat& x, Origin origin);

Run bcgs(const Mat& X, Index s, const BlockIO& io, Origin origin, bool trace);
Run bcgs_pip(const Mat& X, Index s, const BlockIO& io, Origin origin, bool trace);
Run bcgs_pio(const Mat& X, Index s, const BlockIO& io, Origin origin, bool trace);
Run bcgs_iro(const Mat& X, Index s, const BlockIO& io, Origin origin, Correction corr, bool reorth_first,
             bool trace);
Run bcgs_iro_ls(const Mat& X, Index s, Origin origin, bool trace);
Run bmgs(const Mat& X, Index s, const BlockIO& io, Origin origin, Correction corr, int passes, bool trace);
Run bmgs_svl(const Mat& X, Index s, const BlockIO& io, Origin origin, bool inverse_form, bool trace);
/// With complete_t the last block skips final_io and is finished by a fused
/// Cholesky step that also fills its T column.
Run bmgs_cwy(const Mat& X, Index s, const BlockIO& final_io, Origin origin, bool inverse_form, bool trace,
             bool complete_t);
Run bcgs_sror(const Mat& X, Index s, double rpltol, Rng& rng, Origin origin, bool trace);

/// CGS_SROR on a whole block. `nus` holds per-column reference norms (empty: use ||x_k||).
Run cgs_sror(const Mat& X, double rpltol, Rng& rng, std::span<const double> nus, Origin origin);

/// Runs `once` twice and multiplies the R factors (the "RO" variants).
Run run_twice(const Mat& X, const std::function<Run(const Mat&)>& once);

}  // namespace bgs::detail

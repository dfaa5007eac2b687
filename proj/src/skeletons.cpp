#include "bgs/skeletons.hpp"

#include <cmath>
#include <string>

#include "bgs/errors.hpp"
#include "kernels.hpp"

namespace bgs {

namespace detail {

bool Run::absorb(const QRResult& io) {
  events.append(io.events);
  if (!io.ok()) {
    status = io.status;
    return false;
  }
  return true;
}

std::optional<Mat> Run::chol(const Mat& G) {
  if (!G.all_finite()) {
    status = Status::NanEncountered;
    return std::nullopt;
  }
  auto R = cholesky(G);
  if (!R) status = Status::CholFail;
  return R;
}

void Run::finish() {
  if (status == Status::Ok && !(Q.all_finite() && R.all_finite() && T.all_finite()))
    status = Status::NanEncountered;
}

QRResult normalize_column(const Mat& x, Origin origin) {
  QRResult res{x, Mat(1, 1), Mat::identity(1), Status::Ok, {}, std::nullopt};
  res.events.reduction(origin);
  const double r = frobenius_norm(x);
  res.R(0, 0) = r;
  for (double& v : res.Q.col(0)) v /= r;  // 0/0 stays NaN on purpose
  if (!res.Q.all_finite()) res.status = Status::NanEncountered;
  return res;
}

namespace {

// Y - Qk C
Mat project_out(const Mat& Y, const Mat& Qk, const Mat& C) { return gemm(Qk, C, Trans::No, Trans::No, -1.0, 1.0, Y); }

// Apply T_jj^T (or T_jj^{-T}) to each s-row slab of C.
Mat correct(const Mat& C, const Mat& T, Index s, Correction corr) {
  if (corr == Correction::None) return C;
  Mat out = C;
  for (Index j = 0; j * s < C.rows(); ++j) {
    const Mat Tjj = T.block(j * s, j * s, s, s);
    const Mat Cj = C.block(j * s, 0, s, C.cols());
    out.set_block(j * s, 0,
                  corr == Correction::Transpose ? inner(Tjj, Cj) : tri_solve(Tjj, Cj, Side::Left, Trans::Yes));
  }
  return out;
}

bool first_block(Run& run, const Mat& X, Index s, const BlockIO& io) {
  const Mat X1 = X.cols_range(0, s);
  run.keep(X1);
  QRResult res = io(X1);
  if (!run.absorb(res)) return false;
  run.Q.set_cols(0, res.Q);
  run.R.set_block(0, 0, res.R);
  run.T.set_block(0, 0, res.T);
  return true;
}

// W R^{-1}, turning a zero pivot into nan status the way an unchecked division would.
std::optional<Mat> right_solve(Run& run, const Mat& W, const Mat& R) {
  try {
    return tri_solve(R, W, Side::Right, Trans::No);
  } catch (const SingularError&) {
    run.status = Status::NanEncountered;
    return std::nullopt;
  }
}

}  // namespace

Run bcgs(const Mat& X, Index s, const BlockIO& io, Origin origin, bool trace) {
  const Index p = X.cols() / s;
  Run run(X.rows(), X.cols(), origin, trace);
  if (!first_block(run, X, s, io)) return run;
  for (Index k = 1; k < p; ++k) {
    const Mat Qk = run.Q.cols_range(0, k * s);
    const Mat Xk = X.cols_range(k * s, s);
    const Mat C = inner(Qk, Xk);
    run.sync();
    const Mat W = project_out(Xk, Qk, C);
    run.keep(W);
    QRResult res = io(W);
    if (!run.absorb(res)) return run;
    run.Q.set_cols(k * s, res.Q);
    run.R.set_block(0, k * s, C);
    run.R.set_block(k * s, k * s, res.R);
    run.T.set_block(k * s, k * s, res.T);
  }
  run.finish();
  return run;
}

Run bcgs_pip(const Mat& X, Index s, const BlockIO& io, Origin origin, bool trace) {
  const Index p = X.cols() / s;
  Run run(X.rows(), X.cols(), origin, trace);
  if (!first_block(run, X, s, io)) return run;
  for (Index k = 1; k < p; ++k) {
    const Mat Qk = run.Q.cols_range(0, k * s);
    const Mat Xk = X.cols_range(k * s, s);
    // [Q_{1:k} X_k]^T X_k in one reduction
    const Mat C = inner(Qk, Xk);
    const Mat Omega = inner(Xk, Xk);
    run.sync();
    const auto Rkk = run.chol(Omega - inner(C, C));
    if (!Rkk) return run;
    const Mat W = project_out(Xk, Qk, C);
    run.keep(W);
    const auto Qnew = right_solve(run, W, *Rkk);
    if (!Qnew) return run;
    run.Q.set_cols(k * s, *Qnew);
    run.R.set_block(0, k * s, C);
    run.R.set_block(k * s, k * s, *Rkk);
  }
  run.finish();
  return run;
}

Run bcgs_pio(const Mat& X, Index s, const BlockIO& io, Origin origin, bool trace) {
  const Index p = X.cols() / s;
  const Index m = X.rows();
  Run run(m, X.cols(), origin, trace);
  if (!first_block(run, X, s, io)) return run;
  for (Index k = 1; k < p; ++k) {
    const Mat Qk = run.Q.cols_range(0, k * s);
    const Mat Xk = X.cols_range(k * s, s);
    const Mat C = inner(Qk, Xk);
    run.sync();
    Mat stack(m + k * s, 2 * s);
    stack.set_block(0, 0, Xk);
    stack.set_block(m, s, C);
    QRResult res = io(stack);
    if (!run.absorb(res)) return run;
    const Mat S = res.R.block(0, 0, s, s);
    const Mat T = res.R.block(s, s, s, s);
    const auto Rkk = run.chol(inner(S, S) - inner(T, T));
    if (!Rkk) return run;
    const Mat W = project_out(Xk, Qk, C);
    run.keep(W);
    const auto Qnew = right_solve(run, W, *Rkk);
    if (!Qnew) return run;
    run.Q.set_cols(k * s, *Qnew);
    run.R.set_block(0, k * s, C);
    run.R.set_block(k * s, k * s, *Rkk);
  }
  run.finish();
  return run;
}

Run bcgs_iro(const Mat& X, Index s, const BlockIO& io, Origin origin, Correction corr, bool reorth_first,
             bool trace) {
  const Index p = X.cols() / s;
  Run run(X.rows(), X.cols(), origin, trace);
  if (!first_block(run, X, s, io)) return run;
  if (reorth_first) {
    QRResult again = io(run.Q.cols_range(0, s));
    if (!run.absorb(again)) return run;
    run.Q.set_cols(0, again.Q);
    run.R.set_block(0, 0, matmul(again.R, run.R.block(0, 0, s, s)));
    run.T.set_block(0, 0, again.T);
  }
  for (Index k = 1; k < p; ++k) {
    const Mat Qk = run.Q.cols_range(0, k * s);
    const Mat Xk = X.cols_range(k * s, s);

    const Mat C1 = correct(inner(Qk, Xk), run.T, s, corr);
    run.sync();
    const Mat W1 = project_out(Xk, Qk, C1);
    QRResult first = io(W1);
    if (!run.absorb(first)) return run;

    const Mat C2 = correct(inner(Qk, first.Q), run.T, s, corr);
    run.sync();
    const Mat W2 = project_out(first.Q, Qk, C2);
    run.keep(W2);
    QRResult second = io(W2);
    if (!run.absorb(second)) return run;

    run.Q.set_cols(k * s, second.Q);
    run.R.set_block(0, k * s, C1 + matmul(C2, first.R));
    run.R.set_block(k * s, k * s, matmul(second.R, first.R));
    run.T.set_block(k * s, k * s, second.T);
  }
  run.finish();
  return run;
}

Run bcgs_iro_ls(const Mat& X, Index s, Origin origin, bool trace) {
  const Index p = X.cols() / s;
  Run run(X.rows(), X.cols(), origin, trace);
  Mat U = X.cols_range(0, s);
  for (Index k = 2; k <= p; ++k) {
    // 1-based block k: U is the unnormalized block k-1.
    const Index prev = (k - 2) * s;  // columns in Q_{1:k-2}
    const Mat Xk = X.cols_range((k - 1) * s, s);
    Mat Gram = inner(U, U);
    Mat P = inner(U, Xk);
    Mat Wc, Zc;
    if (k > 2) {
      const Mat Qold = run.Q.cols_range(0, prev);
      Wc = inner(Qold, U);
      Zc = inner(Qold, Xk);
      Gram = Gram - inner(Wc, Wc);
      P = P - inner(Wc, Zc);
    }
    run.sync();
    const auto Rkk = run.chol(Gram);
    if (!Rkk) return run;
    run.R.set_block(prev, prev, *Rkk);
    run.R.set_block(prev, prev + s, tri_solve(*Rkk, P, Side::Left, Trans::Yes));
    std::optional<Mat> Qnew;
    run.keep(U);
    if (k == 2) {
      Qnew = right_solve(run, U, *Rkk);
    } else {
      const Mat Qold = run.Q.cols_range(0, prev);
      run.R.set_block(0, prev, run.R.block(0, prev, prev, s) + Wc);
      run.R.set_block(0, prev + s, Zc);
      Qnew = right_solve(run, project_out(U, Qold, Wc), *Rkk);
    }
    if (!Qnew) return run;
    run.Q.set_cols(prev, *Qnew);
    U = project_out(Xk, run.Q.cols_range(0, prev + s), run.R.block(0, prev + s, prev + s, s));
  }
  // final block
  const Index prev = (p - 1) * s;
  Mat Gram = inner(U, U);
  Mat Wc;
  if (prev > 0) {
    Wc = inner(run.Q.cols_range(0, prev), U);
    Gram = Gram - inner(Wc, Wc);
  }
  run.sync();
  const auto Rpp = run.chol(Gram);
  if (!Rpp) return run;
  run.R.set_block(prev, prev, *Rpp);
  run.keep(U);
  std::optional<Mat> Qnew;
  if (prev > 0) {
    run.R.set_block(0, prev, run.R.block(0, prev, prev, s) + Wc);
    Qnew = right_solve(run, project_out(U, run.Q.cols_range(0, prev), Wc), *Rpp);
  } else {
    Qnew = right_solve(run, U, *Rpp);
  }
  if (!Qnew) return run;
  run.Q.set_cols(prev, *Qnew);
  run.finish();
  return run;
}

Run bmgs(const Mat& X, Index s, const BlockIO& io, Origin origin, Correction corr, int passes, bool trace) {
  const Index p = X.cols() / s;
  Run run(X.rows(), X.cols(), origin, trace);
  if (!first_block(run, X, s, io)) return run;
  for (Index k = 1; k < p; ++k) {
    Mat W = X.cols_range(k * s, s);
    for (int pass = 0; pass < passes; ++pass) {
      for (Index j = 0; j < k; ++j) {
        const Mat Qj = run.Q.cols_range(j * s, s);
        Mat Rjk = inner(Qj, W);
        run.sync();
        if (corr != Correction::None) {
          const Mat Tjj = run.T.block(j * s, j * s, s, s);
          Rjk = corr == Correction::Transpose ? inner(Tjj, Rjk) : tri_solve(Tjj, Rjk, Side::Left, Trans::Yes);
        }
        W = project_out(W, Qj, Rjk);
        run.R.set_block(j * s, k * s, run.R.block(j * s, k * s, s, s) + Rjk);
      }
    }
    run.keep(W);
    QRResult res = io(W);
    if (!run.absorb(res)) return run;
    run.Q.set_cols(k * s, res.Q);
    run.R.set_block(k * s, k * s, res.R);
    run.T.set_block(k * s, k * s, res.T);
  }
  run.finish();
  return run;
}

Run bmgs_svl(const Mat& X, Index s, const BlockIO& io, Origin origin, bool inverse_form, bool trace) {
  const Index p = X.cols() / s;
  Run run(X.rows(), X.cols(), origin, trace);
  if (!first_block(run, X, s, io)) return run;
  for (Index k = 1; k < p; ++k) {
    const Index ks = k * s;
    const Mat Qk = run.Q.cols_range(0, ks);
    const Mat Xk = X.cols_range(ks, s);
    const Mat Tk = run.T.block(0, 0, ks, ks);
    const Mat C = inner(Qk, Xk);
    run.sync();
    const Mat Rcol = inverse_form ? tri_solve(Tk, C, Side::Left, Trans::Yes) : inner(Tk, C);
    const Mat W = project_out(Xk, Qk, Rcol);
    run.keep(W);
    QRResult res = io(W);
    if (!run.absorb(res)) return run;
    const Mat D = inner(Qk, res.Q);
    run.sync();
    const Mat Tcol = inverse_form ? matmul(D, res.T) : -1.0 * matmul(matmul(Tk, D), res.T);
    run.Q.set_cols(ks, res.Q);
    run.R.set_block(0, ks, Rcol);
    run.R.set_block(ks, ks, res.R);
    run.T.set_block(0, ks, Tcol);
    run.T.set_block(ks, ks, res.T);
  }
  run.finish();
  return run;
}

Run bmgs_cwy(const Mat& X, Index s, const BlockIO& final_io, Origin origin, bool inverse_form, bool trace,
             bool complete_t) {
  const Index p = X.cols() / s;
  Run run(X.rows(), X.cols(), origin, trace);
  Mat U = X.cols_range(0, s);
  for (Index k = 1; k < p; ++k) {
    // 1-based block k is being normalized; block k+1 is projected.
    const Index prev = (k - 1) * s;
    const Mat W = X.cols_range(k * s, s);
    const Mat Gram = inner(U, U);
    const Mat P = inner(U, W);
    Mat Tt, Rr;
    if (k > 1) {
      const Mat Qold = run.Q.cols_range(0, prev);
      Tt = inner(Qold, U);
      Rr = inner(Qold, W);
    }
    run.sync();
    const auto Rkk = run.chol(Gram);
    if (!Rkk) return run;
    if (k > 1) {
      const Mat Y = tri_solve(*Rkk, Tt, Side::Right, Trans::No);
      const Mat Tcol = inverse_form ? Y : -1.0 * matmul(run.T.block(0, 0, prev, prev), Y);
      run.T.set_block(0, prev, Tcol);
    }
    Mat v(k * s, s);
    if (k > 1) v.set_block(0, 0, Rr);
    v.set_block(prev, 0, tri_solve(*Rkk, P, Side::Left, Trans::Yes));
    const Mat Tk = run.T.block(0, 0, k * s, k * s);
    const Mat Rcol = inverse_form ? tri_solve(Tk, v, Side::Left, Trans::Yes) : inner(Tk, v);
    run.keep(U);
    const auto Qk = right_solve(run, U, *Rkk);
    if (!Qk) return run;
    run.Q.set_cols(prev, *Qk);
    run.R.set_block(prev, prev, *Rkk);
    run.R.set_block(0, k * s, Rcol);
    U = project_out(W, run.Q.cols_range(0, k * s), Rcol);
  }
  run.keep(U);
  const Index last = (p - 1) * s;
  if (complete_t && p > 1) {
    // [Q_{1:p-1} U]^T U in one reduction: the final norm plus the last T column,
    // which the plain listing leaves at the identity
    const Mat Tt = inner(run.Q.cols_range(0, last), U);
    const Mat Gram = inner(U, U);
    run.sync();
    const auto Rkk = run.chol(Gram);
    if (!Rkk) return run;
    const Mat Y = tri_solve(*Rkk, Tt, Side::Right, Trans::No);
    run.T.set_block(0, last, inverse_form ? Y : -1.0 * matmul(run.T.block(0, 0, last, last), Y));
    const auto Qk = right_solve(run, U, *Rkk);
    if (!Qk) return run;
    run.Q.set_cols(last, *Qk);
    run.R.set_block(last, last, *Rkk);
    run.finish();
    return run;
  }
  QRResult res = final_io(U);
  if (!run.absorb(res)) return run;
  run.Q.set_cols(last, res.Q);
  run.R.set_block(last, last, res.R);
  run.finish();
  return run;
}

Run run_twice(const Mat& X, const std::function<Run(const Mat&)>& once) {
  Run first = once(X);
  if (first.failed()) return first;
  Run second = once(first.Q);
  EventLog events = first.events;
  events.append(second.events);
  second.events = std::move(events);
  if (second.failed()) return second;
  second.R = matmul(second.R, first.R);
  if (first.record_trace) {
    first.trace.insert(first.trace.end(), second.trace.begin(), second.trace.end());
    second.trace = std::move(first.trace);
  }
  second.finish();
  return second;
}

}  // namespace detail

namespace {

constexpr std::array<std::string_view, 12> kSkeletonNames = {
    "BCGS", "BCGS_PIP", "BCGS_PIO", "BCGS_RO", "BCGS_IRO", "BCGS_IRO_LS",
    "BCGS_SROR", "BMGS", "BMGS_SVL", "BMGS_LTS", "BMGS_CWY", "BMGS_ICWY",
};

BlockQRResult to_result(detail::Run&& run) {
  return {std::move(run.Q), std::move(run.R), std::move(run.T), run.status, std::move(run.events),
          std::move(run.trace)};
}

}  // namespace

std::string_view to_string(SkeletonId id) noexcept { return kSkeletonNames[static_cast<std::size_t>(id)]; }

std::optional<SkeletonId> parse_skeleton(std::string_view name) {
  for (std::size_t i = 0; i < kSkeletonNames.size(); ++i)
    if (kSkeletonNames[i] == name) return static_cast<SkeletonId>(i);
  return std::nullopt;
}

bool compatible(SkeletonId skel, MuscleId musc) noexcept {
  if (skel == SkeletonId::BCGS_SROR) return musc == MuscleId::CGS_SRO || musc == MuscleId::CGS_SROR;
  return true;
}

bool supports_t_fix(SkeletonId skel) noexcept { return skel == SkeletonId::BCGS_IRO || skel == SkeletonId::BMGS; }

bool supports_reorth_first_block(SkeletonId skel) noexcept { return skel == SkeletonId::BCGS_IRO; }

BlockQRResult block_orthogonalize(const Mat& X, const BlockLayout& layout, SkeletonId skel, MuscleId musc,
                                  const SkeletonOptions& opts, Rng& rng) {
  layout.validate();
  if (X.rows() != layout.m || X.cols() != layout.n())
    throw ContractError("block_orthogonalize: matrix is " + std::to_string(X.rows()) + "x" +
                        std::to_string(X.cols()) + ", layout expects " + std::to_string(layout.m) + "x" +
                        std::to_string(layout.n()));
  if (!compatible(skel, musc))
    throw IncompatibleError(std::string(to_string(skel)) + " cannot run with muscle " + std::string(to_string(musc)));
  if (opts.t_fix && !supports_t_fix(skel))
    throw ContractError(std::string("t_fix is not defined for ") + std::string(to_string(skel)));
  if (opts.reorth_first_block && !supports_reorth_first_block(skel))
    throw ContractError(std::string("reorth_first_block is not defined for ") + std::string(to_string(skel)));

  const MuscleOptions mopts{opts.rpltol, opts.auto_shift, false};
  const detail::BlockIO io = [&](const Mat& W) { return intra_orthogonalize(W, musc, mopts, rng); };
  const Index s = layout.s;
  const Origin sk = Origin::Skeleton;
  const bool tr = opts.record_trace;

  detail::Correction corr = detail::Correction::None;
  if (opts.t_fix && produces_t(musc))
    corr = t_is_inverse_form(musc) ? detail::Correction::InverseTranspose : detail::Correction::Transpose;

  switch (skel) {
    case SkeletonId::BCGS: return to_result(detail::bcgs(X, s, io, sk, tr));
    case SkeletonId::BCGS_PIP: return to_result(detail::bcgs_pip(X, s, io, sk, tr));
    case SkeletonId::BCGS_PIO: return to_result(detail::bcgs_pio(X, s, io, sk, tr));
    case SkeletonId::BCGS_RO:
      return to_result(detail::run_twice(X, [&](const Mat& Y) { return detail::bcgs(Y, s, io, sk, tr); }));
    case SkeletonId::BCGS_IRO:
      return to_result(detail::bcgs_iro(X, s, io, sk, corr, opts.reorth_first_block, tr));
    case SkeletonId::BCGS_IRO_LS: return to_result(detail::bcgs_iro_ls(X, s, sk, tr));
    case SkeletonId::BCGS_SROR: {
      const double rpltol = musc == MuscleId::CGS_SRO ? 0.0 : opts.rpltol;
      return to_result(detail::bcgs_sror(X, s, rpltol, rng, sk, tr));
    }
    case SkeletonId::BMGS: return to_result(detail::bmgs(X, s, io, sk, corr, 1, tr));
    case SkeletonId::BMGS_SVL: return to_result(detail::bmgs_svl(X, s, io, sk, false, tr));
    case SkeletonId::BMGS_LTS: return to_result(detail::bmgs_svl(X, s, io, sk, true, tr));
    case SkeletonId::BMGS_CWY: return to_result(detail::bmgs_cwy(X, s, io, sk, false, tr, false));
    case SkeletonId::BMGS_ICWY: return to_result(detail::bmgs_cwy(X, s, io, sk, true, tr, false));
  }
  throw ContractError("unknown skeleton");
}

double verify_block_pythagorean(const Mat& Y, const Mat& Z) {
  if (Y.rows() != Z.rows() || Y.cols() != Z.cols()) throw ContractError("verify_block_pythagorean: shape mismatch");
  const Mat X = Y + Z;
  const Mat R = house_qr(X).R;
  const Mat S = house_qr(Y).R;
  const Mat T = house_qr(Z).R;
  const double nx = two_norm(X);
  if (nx == 0.0) throw ContractError("verify_block_pythagorean: Y + Z is zero");
  return two_norm(inner(R, R) - (inner(S, S) + inner(T, T))) / (nx * nx);
}

}  // namespace bgs

#include "bgs/muscles.hpp"

#include <cmath>
#include <string>

#include "bgs/errors.hpp"
#include "kernels.hpp"

namespace bgs {

namespace {

constexpr std::array<std::string_view, 18> kMuscleNames = {
    "CGS",     "CGS_P",   "CGS_RO",   "CGS_IRO",  "CGS_SRO", "CGS_SROR", "CGS_IRO_LS", "MGS",       "MGS_RO",
    "MGS_IRO", "MGS_SVL", "MGS_LTS",  "MGS_CWY",  "MGS_ICWY", "HouseQR", "CholQR",    "CholQR_RO", "ShCholQR_RORO",
};

QRResult from_run(detail::Run&& run, bool keep_trace) {
  QRResult res{std::move(run.Q), std::move(run.R), std::move(run.T), run.status, std::move(run.events), std::nullopt};
  if (keep_trace && !run.trace.empty()) {
    Mat tr(res.Q.rows(), static_cast<Index>(run.trace.size()));
    for (std::size_t k = 0; k < run.trace.size(); ++k) tr.set_cols(static_cast<Index>(k), run.trace[k]);
    res.trace = std::move(tr);
  }
  return res;
}

QRResult failed(Index m, Index s, Status st, EventLog events) {
  const double nan = std::nan("");
  return {Mat(m, s, nan), Mat(s, s, nan), Mat::identity(s), st, std::move(events), std::nullopt};
}

// One CholQR pass on a Gram matrix already reduced (the caller logs the sync).
QRResult cholqr_from_gram(const Mat& X, const Mat& G, EventLog events) {
  if (!G.all_finite()) return failed(X.rows(), X.cols(), Status::NanEncountered, std::move(events));
  auto R = cholesky(G);
  if (!R) return failed(X.rows(), X.cols(), Status::CholFail, std::move(events));
  QRResult res{tri_solve(*R, X, Side::Right, Trans::No), *R, Mat::identity(X.cols()), Status::Ok, std::move(events),
               std::nullopt};
  if (!(res.Q.all_finite() && res.R.all_finite())) res.status = Status::NanEncountered;
  return res;
}

QRResult cholqr(const Mat& X) {
  EventLog ev;
  const Mat G = inner(X, X);
  ev.reduction(Origin::Muscle);
  return cholqr_from_gram(X, G, std::move(ev));
}

QRResult cholqr_ro(const Mat& X) {
  QRResult first = cholqr(X);
  if (!first.ok()) return first;
  QRResult second = cholqr(first.Q);
  EventLog ev = first.events;
  ev.append(second.events);
  second.events = std::move(ev);
  if (second.ok()) second.R = matmul(second.R, first.R);
  return second;
}

QRResult sh_cholqr_roro(const Mat& X, bool auto_shift) {
  const Index m = X.rows(), s = X.cols();
  EventLog ev;
  const Mat G = inner(X, X);
  ev.reduction(Origin::Muscle);
  if (!G.all_finite()) return failed(m, s, Status::NanEncountered, std::move(ev));
  // ||X||_2^2 = ||X^T X||_2, so the shift costs no extra reduction
  const double norm2 = two_norm(G);
  auto shifted = [&](double sigma) {
    Mat A = G;
    for (Index i = 0; i < s; ++i) A(i, i) += sigma;
    return cholesky(A);
  };
  auto R1 = shifted(shifted_cholqr_shift(m, s, std::sqrt(norm2)));
  if (!R1 && auto_shift) R1 = shifted(norm2);
  if (!R1) return failed(m, s, Status::CholFail, std::move(ev));
  const Mat Q1 = tri_solve(*R1, X, Side::Right, Trans::No);
  QRResult rest = cholqr_ro(Q1);
  ev.append(rest.events);
  rest.events = std::move(ev);
  if (rest.ok()) rest.R = matmul(rest.R, *R1);
  return rest;
}

QRResult house(const Mat& X) {
  HouseholderQR h = house_qr(X);
  QRResult res{std::move(h.Q), std::move(h.R), Mat::identity(X.cols()), Status::Ok, {}, std::nullopt};
  // one column-norm reduction per Householder reflector
  for (Index k = 0; k < X.cols(); ++k) res.events.reduction(Origin::Muscle);
  if (!(res.Q.all_finite() && res.R.all_finite())) res.status = Status::NanEncountered;
  return res;
}

}  // namespace

std::string_view to_string(MuscleId id) noexcept { return kMuscleNames[static_cast<std::size_t>(id)]; }

std::optional<MuscleId> parse_muscle(std::string_view name) {
  for (std::size_t i = 0; i < kMuscleNames.size(); ++i)
    if (kMuscleNames[i] == name) return static_cast<MuscleId>(i);
  return std::nullopt;
}

bool produces_t(MuscleId id) noexcept {
  return id == MuscleId::MGS_SVL || id == MuscleId::MGS_LTS || id == MuscleId::MGS_CWY || id == MuscleId::MGS_ICWY;
}

bool t_is_inverse_form(MuscleId id) noexcept { return id == MuscleId::MGS_LTS || id == MuscleId::MGS_ICWY; }

double shifted_cholqr_shift(Index m, Index s, double norm_x) noexcept {
  const double ms = static_cast<double>(m) * static_cast<double>(s);
  const double ss = static_cast<double>(s) * static_cast<double>(s + 1);
  return 11.0 * (ms + ss) * machine_eps() * norm_x * norm_x;
}

QRResult intra_orthogonalize(const Mat& X, MuscleId id, const MuscleOptions& opts, Rng& rng) {
  if (X.cols() < 1 || X.rows() < X.cols())
    throw ContractError("intra_orthogonalize: block must be tall, got " + std::to_string(X.rows()) + "x" +
                        std::to_string(X.cols()));
  if (opts.rpltol < 0.0) throw ContractError("intra_orthogonalize: rpltol must be >= 0");

  using namespace detail;
  const Origin mu = Origin::Muscle;
  const bool tr = opts.record_trace;
  const BlockIO col = [](const Mat& w) { return normalize_column(w, Origin::Muscle); };

  switch (id) {
    case MuscleId::CGS: return from_run(bcgs(X, 1, col, mu, tr), tr);
    case MuscleId::CGS_P: return from_run(bcgs_pip(X, 1, col, mu, tr), tr);
    case MuscleId::CGS_RO:
      return from_run(run_twice(X, [&](const Mat& Y) { return bcgs(Y, 1, col, mu, tr); }), tr);
    case MuscleId::CGS_IRO: return from_run(bcgs_iro(X, 1, col, mu, Correction::None, false, tr), tr);
    case MuscleId::CGS_SRO: return from_run(cgs_sror(X, 0.0, rng, {}, mu), tr);
    case MuscleId::CGS_SROR: return from_run(cgs_sror(X, opts.rpltol, rng, {}, mu), tr);
    case MuscleId::CGS_IRO_LS: return from_run(bcgs_iro_ls(X, 1, mu, tr), tr);
    case MuscleId::MGS: return from_run(bmgs(X, 1, col, mu, Correction::None, 1, tr), tr);
    case MuscleId::MGS_RO:
      return from_run(run_twice(X, [&](const Mat& Y) { return bmgs(Y, 1, col, mu, Correction::None, 1, tr); }), tr);
    case MuscleId::MGS_IRO: return from_run(bmgs(X, 1, col, mu, Correction::None, 2, tr), tr);
    case MuscleId::MGS_SVL: return from_run(bmgs_svl(X, 1, col, mu, false, tr), tr);
    case MuscleId::MGS_LTS: return from_run(bmgs_svl(X, 1, col, mu, true, tr), tr);
    case MuscleId::MGS_CWY: return from_run(bmgs_cwy(X, 1, col, mu, false, tr, true), tr);
    case MuscleId::MGS_ICWY: return from_run(bmgs_cwy(X, 1, col, mu, true, tr, true), tr);
    case MuscleId::HouseQR: return house(X);
    case MuscleId::CholQR: return cholqr(X);
    case MuscleId::CholQR_RO: return cholqr_ro(X);
    case MuscleId::ShCholQR_RORO: return sh_cholqr_roro(X, opts.auto_shift);
  }
  throw ContractError("unknown muscle");
}

Mat correction_factor(const QRResult& res, MuscleId id) {
  if (!produces_t(id)) return Mat::identity(res.T.rows());
  if (!t_is_inverse_form(id)) return res.T;
  return tri_solve(res.T, Mat::identity(res.T.rows()), Side::Left, Trans::No);
}

}  // namespace bgs

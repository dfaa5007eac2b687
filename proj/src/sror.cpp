// Selective reorthogonalization with replacement, column and block forms.

#include <algorithm>
#include <cmath>
#include <limits>

#include "bgs/errors.hpp"
#include "kernels.hpp"

namespace bgs {

namespace {

double norm2(std::span<const double> v) {
  double scale = 0.0, ssq = 1.0;
  for (double x : v) {
    if (x == 0.0) continue;
    const double a = std::abs(x);
    if (scale < a) {
      ssq = 1.0 + ssq * (scale / a) * (scale / a);
      scale = a;
    } else {
      ssq += (a / scale) * (a / scale);
    }
  }
  return scale * std::sqrt(ssq);
}

void random_direction(std::span<double> y, double length, Rng& rng) {
  for (double& v : y) v = rng.uniform() - 0.5;
  const double n = norm2(y);
  for (double& v : y) v *= length / n;
}

void log_sync(EventLog* log, Origin origin) {
  if (log) log->reduction(origin);
}

constexpr int kMaxProjections = 100;

struct Projected {
  Mat Y;  // columns orthogonal to the basis, unnormalized
  Mat R;  // accumulated coefficients
  std::vector<double> nus;
  std::vector<bool> zero;
};

// Block projection against Qprev, with the per-column fault test of
// cgs_step_sror. Every pass costs two reductions (coefficients, norms).
Projected fault_project(const Mat& Qprev, const Mat& X, std::vector<double> nus, double rpltol, Rng& rng,
                        EventLog* log, Origin origin) {
  const Index s = X.cols();
  const double eps = machine_eps();
  Projected out{X, Mat(std::max<Index>(Qprev.cols(), 1), s), std::move(nus), std::vector<bool>(s, false)};
  std::vector<double> nu1(s);
  std::vector<bool> active(s, true);
  log_sync(log, origin);
  for (Index j = 0; j < s; ++j) {
    const double nx = norm2(out.Y.col(j));
    if (nx == 0.0) {
      out.zero[j] = true;
      random_direction(out.Y.col(j), 1.0, rng);
      out.nus[j] = 1.0;
    } else {
      out.nus[j] = std::max(out.nus[j], nx);
    }
    nu1[j] = out.nus[j];
  }
  for (int it = 0; it < kMaxProjections; ++it) {
    std::vector<Index> idx;
    for (Index j = 0; j < s; ++j)
      if (active[j]) idx.push_back(j);
    if (idx.empty()) break;
    Mat Ya(X.rows(), static_cast<Index>(idx.size()));
    for (std::size_t a = 0; a < idx.size(); ++a) Ya.set_cols(static_cast<Index>(a), out.Y.cols_range(idx[a], 1));
    const Mat C = inner(Qprev, Ya);
    log_sync(log, origin);
    Ya = gemm(Qprev, C, Trans::No, Trans::No, -1.0, 1.0, Ya);
    log_sync(log, origin);
    for (std::size_t a = 0; a < idx.size(); ++a) {
      const Index j = idx[a];
      for (Index i = 0; i < Qprev.cols(); ++i) out.R(i, j) += C(i, static_cast<Index>(a));
      auto y = Ya.col(static_cast<Index>(a));
      const double nu2 = norm2(y);
      if (nu2 > 0.5 * nu1[j]) {
        active[j] = false;
      } else if (nu2 > rpltol * out.nus[j] * eps) {
        nu1[j] = nu2;
      } else {
        out.nus[j] *= eps;
        nu1[j] = out.nus[j];
        random_direction(y, out.nus[j], rng);
      }
      std::copy(y.begin(), y.end(), out.Y.col(j).begin());
    }
  }
  if (Qprev.cols() == 0) out.R = Mat(1, s);
  return out;
}

}  // namespace

SrorStep cgs_step_sror(const Mat& basis, std::span<const double> x, double nu, double rpltol, Rng& rng, EventLog* log,
                       Origin origin) {
  const Index n = static_cast<Index>(x.size());
  const Index nq = basis.cols();
  if (nq > 0 && basis.rows() != n) throw ContractError("cgs_step_sror: basis and vector lengths differ");
  if (nu < 0.0 || rpltol < 0.0) throw ContractError("cgs_step_sror: nu and rpltol must be >= 0");
  const double eps = machine_eps();

  SrorStep out;
  out.r.assign(static_cast<std::size_t>(nq), 0.0);
  out.y.assign(x.begin(), x.end());
  const double nux = norm2(x);
  log_sync(log, origin);

  if (nq == 0) {
    if (nux == 0.0) {
      random_direction(out.y, 1.0, rng);
      out.rho = 0.0;
    } else {
      for (double& v : out.y) v /= nux;
      out.rho = nux;
    }
    return out;
  }

  nu = std::max(nu, nux);
  bool zeronorm = false;
  if (nux != 0.0) {
    for (double& v : out.y) v /= nux;
    nu /= nux;
  } else {
    zeronorm = true;
    random_direction(out.y, 1.0, rng);
    nu = 1.0;
  }

  Mat y(n, 1);
  std::copy(out.y.begin(), out.y.end(), y.col(0).begin());
  double nu1 = nu;
  double nu2 = 0.0;
  while (true) {
    ++out.northog;
    const Mat s = inner(basis, y);
    log_sync(log, origin);
    for (Index i = 0; i < nq; ++i) out.r[i] += s(i, 0);
    y = gemm(basis, s, Trans::No, Trans::No, -1.0, 1.0, y);
    nu2 = norm2(y.col(0));
    log_sync(log, origin);

    if (nu2 > 0.5 * nu1) break;

    if (nu2 > rpltol * nu * eps) {
      nu1 = nu2;
    } else {
      nu *= eps;
      nu1 = nu;
      random_direction(y.col(0), nu, rng);
    }
  }

  out.y.assign(y.col(0).begin(), y.col(0).end());
  if (!zeronorm) {
    out.rho = nu2;
    for (double& v : out.y) v /= out.rho;
    out.rho *= nux;
    for (double& v : out.r) v *= nux;
  } else {
    for (double& v : out.y) v /= nu2;
    std::fill(out.r.begin(), out.r.end(), 0.0);
    out.rho = 0.0;
  }
  return out;
}

SrorBlockStep bcgs_step_sror(const Mat& Qprev, const Mat& Xk, double rpltol, Rng& rng, EventLog* log, Origin origin) {
  const Index s = Xk.cols();
  if (Qprev.cols() > 0 && Qprev.rows() != Xk.rows()) throw ContractError("bcgs_step_sror: row counts differ");
  if (rpltol < 0.0) throw ContractError("bcgs_step_sror: rpltol must be >= 0");

  auto intra = [&](const Mat& Y, std::span<const double> nus) {
    detail::Run r = detail::cgs_sror(Y, rpltol, rng, nus, Origin::Muscle);
    if (log) log->append(r.events);
    return r;
  };

  if (Qprev.cols() == 0) {
    detail::Run r = intra(Xk, {});
    return {std::move(r.Q), Mat(), std::move(r.R)};
  }

  std::vector<double> nus(static_cast<std::size_t>(s), 0.0);
  Projected first = fault_project(Qprev, Xk, nus, rpltol, rng, log, origin);
  detail::Run one = intra(first.Y, first.nus);
  Projected second =
      fault_project(Qprev, one.Q, std::vector<double>(static_cast<std::size_t>(s), 1.0), rpltol, rng, log, origin);
  detail::Run two = intra(second.Y, {});

  SrorBlockStep out{std::move(two.Q), first.R + matmul(second.R, one.R), matmul(two.R, one.R)};
  for (Index j = 0; j < s; ++j) {
    if (!first.zero[j]) continue;
    for (double& v : out.Rcol.col(j)) v = 0.0;
    for (double& v : out.Rdiag.col(j)) v = 0.0;
  }
  return out;
}

namespace detail {

Run cgs_sror(const Mat& X, double rpltol, Rng& rng, std::span<const double> nus, Origin origin) {
  const Index s = X.cols();
  Run run(X.rows(), s, origin, false);
  for (Index k = 0; k < s; ++k) {
    const double nu = nus.empty() ? 0.0 : nus[static_cast<std::size_t>(k)];
    SrorStep st = cgs_step_sror(run.Q.cols_range(0, k), X.col(k), nu, rpltol, rng, &run.events, origin);
    std::copy(st.y.begin(), st.y.end(), run.Q.col(k).begin());
    for (Index i = 0; i < k; ++i) run.R(i, k) = st.r[static_cast<std::size_t>(i)];
    run.R(k, k) = st.rho;
  }
  run.finish();
  return run;
}

Run bcgs_sror(const Mat& X, Index s, double rpltol, Rng& rng, Origin origin, bool trace) {
  const Index p = X.cols() / s;
  Run run(X.rows(), X.cols(), origin, trace);
  for (Index k = 0; k < p; ++k) {
    const Mat Xk = X.cols_range(k * s, s);
    run.keep(Xk);
    SrorBlockStep st = bcgs_step_sror(run.Q.cols_range(0, k * s), Xk, rpltol, rng, &run.events, origin);
    run.Q.set_cols(k * s, st.Q);
    if (k > 0) run.R.set_block(0, k * s, st.Rcol);
    run.R.set_block(k * s, k * s, st.Rdiag);
  }
  run.finish();
  return run;
}

}  // namespace detail

}  // namespace bgs

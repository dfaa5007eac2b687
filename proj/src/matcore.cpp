#include "bgs/matcore.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "bgs/errors.hpp"

namespace bgs {

namespace {

void require(bool cond, const char* what) {
  if (!cond) throw ContractError(what);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm2(std::span<const double> a) {
  // Scaled accumulation keeps tiny and huge columns out of under/overflow.
  double scale = 0.0;
  double ssq = 1.0;
  for (double v : a) {
    if (v == 0.0) continue;
    const double av = std::abs(v);
    if (std::isnan(av)) return av;
    if (scale < av) {
      ssq = 1.0 + ssq * (scale / av) * (scale / av);
      scale = av;
    } else {
      ssq += (av / scale) * (av / scale);
    }
  }
  return scale * std::sqrt(ssq);
}

// Householder triangularization in place. Returns reflector vectors (unit
// leading entry implied by storage in a separate matrix) and their betas.
struct Reflectors {
  Mat V;                     // rows x k, column j holds v_j in rows j..
  std::vector<double> beta;  // H_j = I - beta_j v_j v_j^T
};

Reflectors triangularize(Mat& A) {
  const Index m = A.rows();
  const Index n = A.cols();
  const Index k = std::min(m, n);
  Reflectors refl{Mat(m, std::max<Index>(k, 0)), std::vector<double>(static_cast<std::size_t>(k), 0.0)};
  for (Index j = 0; j < k; ++j) {
    auto x = A.col(j).subspan(static_cast<std::size_t>(j));
    const double nx = norm2(x);
    if (nx == 0.0 || std::isnan(nx)) continue;
    const double alpha = x[0] >= 0.0 ? -nx : nx;
    auto v = refl.V.col(j).subspan(static_cast<std::size_t>(j));
    for (std::size_t i = 0; i < x.size(); ++i) v[i] = x[i];
    v[0] -= alpha;
    const double vtv = dot(v, v);
    if (vtv == 0.0) continue;
    const double beta = 2.0 / vtv;
    refl.beta[static_cast<std::size_t>(j)] = beta;
    x[0] = alpha;
    for (std::size_t i = 1; i < x.size(); ++i) x[i] = 0.0;
    for (Index c = j + 1; c < n; ++c) {
      auto y = A.col(c).subspan(static_cast<std::size_t>(j));
      const double f = beta * dot(v, y);
      for (std::size_t i = 0; i < y.size(); ++i) y[i] -= f * v[i];
    }
  }
  return refl;
}

}  // namespace

double machine_eps() noexcept { return std::numeric_limits<double>::epsilon(); }

Mat::Mat(Index rows, Index cols, double fill) : rows_(rows), cols_(cols) {
  require(rows >= 1 && cols >= 0, "Mat requires rows >= 1 and cols >= 0");
  data_.assign(static_cast<std::size_t>(rows * cols), fill);
}

Mat Mat::identity(Index n) {
  Mat I(n, n);
  for (Index i = 0; i < n; ++i) I(i, i) = 1.0;
  return I;
}

Mat Mat::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const auto nr = static_cast<Index>(rows.size());
  const auto nc = nr == 0 ? 0 : static_cast<Index>(rows.begin()->size());
  Mat A(nr, nc);
  Index i = 0;
  for (const auto& row : rows) {
    require(static_cast<Index>(row.size()) == nc, "ragged row literal");
    Index j = 0;
    for (double v : row) A(i, j++) = v;
    ++i;
  }
  return A;
}

Mat Mat::cols_range(Index first, Index count) const {
  require(first >= 0 && count >= 0 && first + count <= cols_, "column range out of bounds");
  Mat out(rows_, count);
  std::copy_n(data_.begin() + first * rows_, count * rows_, out.data_.begin());
  return out;
}

void Mat::set_cols(Index first, const Mat& src) {
  require(src.rows_ == rows_ && first >= 0 && first + src.cols_ <= cols_, "set_cols shape mismatch");
  std::copy(src.data_.begin(), src.data_.end(), data_.begin() + first * rows_);
}

Mat Mat::block(Index r0, Index c0, Index nr, Index nc) const {
  require(r0 >= 0 && c0 >= 0 && r0 + nr <= rows_ && c0 + nc <= cols_, "block out of bounds");
  Mat out(nr, nc);
  for (Index j = 0; j < nc; ++j)
    for (Index i = 0; i < nr; ++i) out(i, j) = (*this)(r0 + i, c0 + j);
  return out;
}

void Mat::set_block(Index r0, Index c0, const Mat& src) {
  require(r0 >= 0 && c0 >= 0 && r0 + src.rows_ <= rows_ && c0 + src.cols_ <= cols_, "set_block out of bounds");
  for (Index j = 0; j < src.cols_; ++j)
    for (Index i = 0; i < src.rows_; ++i) (*this)(r0 + i, c0 + j) = src(i, j);
}

Mat Mat::transpose() const {
  require(cols_ >= 1, "cannot transpose a matrix without columns");
  Mat T(cols_, rows_);
  for (Index j = 0; j < cols_; ++j)
    for (Index i = 0; i < rows_; ++i) T(j, i) = (*this)(i, j);
  return T;
}

bool Mat::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void BlockLayout::validate() const {
  require(p >= 1 && s >= 1, "layout needs p >= 1 and s >= 1");
  require(m >= n(), "layout needs m >= p*s");
}

Mat gemm(const Mat& A, const Mat& B, Trans ta, Trans tb, double alpha, double beta, const Mat& C) {
  const Index m = ta == Trans::No ? A.rows() : A.cols();
  const Index k = ta == Trans::No ? A.cols() : A.rows();
  const Index kb = tb == Trans::No ? B.rows() : B.cols();
  const Index n = tb == Trans::No ? B.cols() : B.rows();
  require(k == kb, "gemm inner dimensions do not conform");
  require(m >= 1, "gemm result needs at least one row");

  Mat out(m, n);
  if (beta != 0.0) {
    require(C.rows() == m && C.cols() == n, "gemm C has the wrong shape");
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = beta * C.data()[i];
  }
  if (alpha == 0.0 || k == 0) return out;

  if (ta == Trans::Yes && tb == Trans::No) {
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < m; ++i) out(i, j) += alpha * dot(A.col(i), B.col(j));
  } else if (ta == Trans::No && tb == Trans::No) {
    for (Index j = 0; j < n; ++j) {
      auto c = out.col(j);
      for (Index l = 0; l < k; ++l) {
        const double f = alpha * B(l, j);
        if (f == 0.0) continue;
        auto a = A.col(l);
        for (Index i = 0; i < m; ++i) c[static_cast<std::size_t>(i)] += f * a[static_cast<std::size_t>(i)];
      }
    }
  } else if (ta == Trans::No && tb == Trans::Yes) {
    for (Index j = 0; j < n; ++j) {
      auto c = out.col(j);
      for (Index l = 0; l < k; ++l) {
        const double f = alpha * B(j, l);
        if (f == 0.0) continue;
        auto a = A.col(l);
        for (Index i = 0; i < m; ++i) c[static_cast<std::size_t>(i)] += f * a[static_cast<std::size_t>(i)];
      }
    }
  } else {
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < m; ++i) {
        double acc = 0.0;
        for (Index l = 0; l < k; ++l) acc += A(l, i) * B(j, l);
        out(i, j) += alpha * acc;
      }
  }
  return out;
}

Mat operator+(const Mat& A, const Mat& B) {
  require(A.rows() == B.rows() && A.cols() == B.cols(), "matrix sum shape mismatch");
  Mat C = A;
  for (std::size_t i = 0; i < C.size(); ++i) C.data()[i] += B.data()[i];
  return C;
}

Mat operator-(const Mat& A, const Mat& B) {
  require(A.rows() == B.rows() && A.cols() == B.cols(), "matrix difference shape mismatch");
  Mat C = A;
  for (std::size_t i = 0; i < C.size(); ++i) C.data()[i] -= B.data()[i];
  return C;
}

Mat operator*(double a, const Mat& A) {
  Mat C = A;
  for (std::size_t i = 0; i < C.size(); ++i) C.data()[i] *= a;
  return C;
}

std::optional<Mat> cholesky(const Mat& A) {
  require(A.rows() == A.cols(), "cholesky needs a square matrix");
  const Index n = A.rows();
  Mat R(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i <= j; ++i) {
      double v = 0.5 * (A(i, j) + A(j, i));
      for (Index k = 0; k < i; ++k) v -= R(k, i) * R(k, j);
      if (i < j) {
        R(i, j) = v / R(i, i);
      } else {
        if (v <= 0.0) return std::nullopt;
        R(j, j) = std::sqrt(v);
      }
    }
  }
  return R;
}

Mat tri_solve(const Mat& R, const Mat& B, Side side, Trans trans) {
  require(R.rows() == R.cols(), "tri_solve needs a square factor");
  const Index n = R.rows();
  for (Index i = 0; i < n; ++i)
    if (R(i, i) == 0.0) throw SingularError("tri_solve: zero diagonal entry " + std::to_string(i));

  Mat X = B;
  if (side == Side::Left) {
    require(B.rows() == n, "tri_solve left: row mismatch");
    for (Index c = 0; c < B.cols(); ++c) {
      auto x = X.col(c);
      if (trans == Trans::No) {
        for (Index i = n - 1; i >= 0; --i) {
          double v = x[static_cast<std::size_t>(i)];
          for (Index k = i + 1; k < n; ++k) v -= R(i, k) * x[static_cast<std::size_t>(k)];
          x[static_cast<std::size_t>(i)] = v / R(i, i);
        }
      } else {
        for (Index i = 0; i < n; ++i) {
          double v = x[static_cast<std::size_t>(i)];
          for (Index k = 0; k < i; ++k) v -= R(k, i) * x[static_cast<std::size_t>(k)];
          x[static_cast<std::size_t>(i)] = v / R(i, i);
        }
      }
    }
    return X;
  }

  require(B.cols() == n, "tri_solve right: column mismatch");
  const Index m = B.rows();
  auto axpy = [m](std::span<double> y, double f, std::span<const double> x) {
    for (Index i = 0; i < m; ++i) y[static_cast<std::size_t>(i)] -= f * x[static_cast<std::size_t>(i)];
  };
  auto scale = [m](std::span<double> y, double d) {
    for (Index i = 0; i < m; ++i) y[static_cast<std::size_t>(i)] /= d;
  };
  if (trans == Trans::No) {
    // X R = B, column j depends on columns < j.
    for (Index j = 0; j < n; ++j) {
      for (Index k = 0; k < j; ++k)
        if (R(k, j) != 0.0) axpy(X.col(j), R(k, j), X.col(k));
      scale(X.col(j), R(j, j));
    }
  } else {
    // X R^T = B, column j depends on columns > j.
    for (Index j = n - 1; j >= 0; --j) {
      for (Index k = j + 1; k < n; ++k)
        if (R(j, k) != 0.0) axpy(X.col(j), R(j, k), X.col(k));
      scale(X.col(j), R(j, j));
    }
  }
  return X;
}

HouseholderQR house_qr(const Mat& X, bool economic) {
  const Index m = X.rows();
  const Index n = X.cols();
  require(m >= n, "house_qr needs rows >= cols");
  Mat A = X;
  const Reflectors refl = triangularize(A);
  const Index k = static_cast<Index>(refl.beta.size());

  const Index qcols = economic ? n : m;
  Mat Q(m, qcols);
  for (Index j = 0; j < qcols; ++j) Q(j, j) = 1.0;
  for (Index j = k - 1; j >= 0; --j) {
    const double beta = refl.beta[static_cast<std::size_t>(j)];
    if (beta == 0.0) continue;
    auto v = refl.V.col(j).subspan(static_cast<std::size_t>(j));
    for (Index c = 0; c < qcols; ++c) {
      auto y = Q.col(c).subspan(static_cast<std::size_t>(j));
      const double f = beta * dot(v, y);
      if (f == 0.0) continue;
      for (std::size_t i = 0; i < y.size(); ++i) y[i] -= f * v[i];
    }
  }

  const Index rrows = economic ? n : m;
  Mat R(rrows, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i <= std::min(j, rrows - 1); ++i) R(i, j) = A(i, j);

  for (Index j = 0; j < std::min(rrows, n); ++j) {
    if (R(j, j) < 0.0) {
      for (Index c = j; c < n; ++c) R(j, c) = -R(j, c);
      for (double& q : Q.col(j)) q = -q;
    }
  }
  return {std::move(Q), std::move(R)};
}

std::vector<double> jacobi_svd_values(const Mat& X) {
  require(X.rows() >= X.cols(), "jacobi_svd_values needs rows >= cols");
  const Index n = X.cols();
  if (n == 0) return {};

  auto upper = [n](Mat A) {
    triangularize(A);
    Mat U(n, n);
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i <= j; ++i) U(i, j) = A(i, j);
    return U;
  };
  // exactly zero columns contribute exact zero singular values; keep them out
  // of the preconditioning, which would smear them into rounding noise
  std::vector<Index> live;
  for (Index j = 0; j < n; ++j) {
    const auto c = X.col(j);
    if (std::any_of(c.begin(), c.end(), [](double v) { return v != 0.0; })) live.push_back(j);
  }
  if (live.empty()) return std::vector<double>(static_cast<std::size_t>(n), 0.0);
  if (static_cast<Index>(live.size()) < n) {
    Mat Y(X.rows(), static_cast<Index>(live.size()));
    for (std::size_t k = 0; k < live.size(); ++k) Y.set_cols(static_cast<Index>(k), X.cols_range(live[k], 1));
    auto sv = jacobi_svd_values(Y);
    sv.resize(static_cast<std::size_t>(n), 0.0);
    return sv;
  }

  // X = Q1 R, R^T = Q2 R2: Jacobi on R2^T converges in a handful of sweeps
  // where plain cyclic Jacobi on R can need dozens for graded spectra
  Mat W = upper(upper(X).transpose()).transpose();

  // rotation test on the cosine between columns, with the sqrt(m) eps slack LAPACK uses
  // for rounding in the inner product
  const double tol = machine_eps() * std::sqrt(static_cast<double>(W.rows()));
  // columns below eps ||A||_F are roundoff; rotating them against large ones
  // only shuffles noise and can stall convergence
  const double floor_norm = machine_eps() * frobenius_norm(W);
  constexpr int kMaxSweeps = 30;
  bool converged = n == 1;
  for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
    bool rotated = false;
    for (Index i = 0; i < n - 1; ++i) {
      for (Index j = i + 1; j < n; ++j) {
        auto ai = W.col(i);
        auto aj = W.col(j);
        double aa = 0.0, bb = 0.0, ab = 0.0;
        for (std::size_t r = 0; r < ai.size(); ++r) {
          aa += ai[r] * ai[r];
          bb += aj[r] * aj[r];
          ab += ai[r] * aj[r];
        }
        double na = std::sqrt(aa), nb = std::sqrt(bb), g = 0.0;
        constexpr double kSafeLo = 1e-280, kSafeHi = 1e280;
        if (aa > kSafeLo && bb > kSafeLo && aa < kSafeHi && bb < kSafeHi) {
          g = ab / (na * nb);
        } else {
          // squares under- or overflow: fall back to scaled sums
          na = norm2(ai);
          nb = norm2(aj);
          if (!std::isfinite(na) || !std::isfinite(nb))
            throw ConvergenceError("jacobi_svd_values: non-finite input");
          if (std::min(na, nb) <= floor_norm) continue;
          for (std::size_t r = 0; r < ai.size(); ++r) g += (ai[r] / na) * (aj[r] / nb);
        }
        if (std::min(na, nb) <= floor_norm) continue;
        if (std::abs(g) <= tol) continue;
        rotated = true;
        const double zeta = (nb / na - na / nb) / (2.0 * g);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
        const double c = 1.0 / std::hypot(1.0, t);
        const double s = c * t;
        for (std::size_t r = 0; r < ai.size(); ++r) {
          const double x = ai[r];
          const double y = aj[r];
          ai[r] = c * x - s * y;
          aj[r] = s * x + c * y;
        }
      }
    }
    converged = !rotated;
  }
  if (!converged) throw ConvergenceError("jacobi_svd_values: no convergence within 30 sweeps");

  std::vector<double> sv(static_cast<std::size_t>(n));
  for (Index j = 0; j < n; ++j) sv[static_cast<std::size_t>(j)] = norm2(W.col(j));
  std::sort(sv.begin(), sv.end(), std::greater<>());
  return sv;
}

double two_norm(const Mat& A) {
  if (A.empty()) return 0.0;
  if (std::all_of(A.values().begin(), A.values().end(), [](double v) { return v == 0.0; })) return 0.0;
  const auto sv = A.rows() >= A.cols() ? jacobi_svd_values(A) : jacobi_svd_values(A.transpose());
  return sv.front();
}

double frobenius_norm(const Mat& A) { return norm2(A.values()); }

Mat triu(const Mat& A) {
  Mat U(A.rows(), A.cols());
  for (Index j = 0; j < A.cols(); ++j)
    for (Index i = 0; i <= std::min(j, A.rows() - 1); ++i) U(i, j) = A(i, j);
  return U;
}

}  // namespace bgs

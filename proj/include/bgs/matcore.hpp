#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace bgs {

using Index = std::ptrdiff_t;

/// Dense real matrix stored column-major.
///
/// A matrix always has at least one row; zero columns is allowed and is how
/// an empty basis ("no previous block vectors") is represented.
class Mat {
public:
  Mat() : rows_(1), cols_(0) {}
  Mat(Index rows, Index cols, double fill = 0.0);

  static Mat identity(Index n);
  /// Column-major construction from nested rows, for literals in tests.
  static Mat from_rows(std::initializer_list<std::initializer_list<double>> rows);

  Index rows() const noexcept { return rows_; }
  Index cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return cols_ == 0; }

  double& operator()(Index i, Index j) noexcept { return data_[static_cast<std::size_t>(i + j * rows_)]; }
  double operator()(Index i, Index j) const noexcept { return data_[static_cast<std::size_t>(i + j * rows_)]; }

  std::span<double> col(Index j) noexcept { return {data_.data() + j * rows_, static_cast<std::size_t>(rows_)}; }
  std::span<const double> col(Index j) const noexcept {
    return {data_.data() + j * rows_, static_cast<std::size_t>(rows_)};
  }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }
  std::span<const double> values() const noexcept { return data_; }

  /// Contiguous column range [first, first + count).
  Mat cols_range(Index first, Index count) const;
  void set_cols(Index first, const Mat& src);
  Mat block(Index r0, Index c0, Index nr, Index nc) const;
  void set_block(Index r0, Index c0, const Mat& src);

  Mat transpose() const;
  bool all_finite() const noexcept;

  friend bool operator==(const Mat&, const Mat&) = default;

private:
  Index rows_;
  Index cols_;
  std::vector<double> data_;
};

/// Partition of an m x (p*s) matrix into p block vectors of width s.
struct BlockLayout {
  Index m = 0;
  Index p = 0;
  Index s = 0;

  Index n() const noexcept { return p * s; }
  /// Throws ContractError unless m >= n >= 1.
  void validate() const;
  friend bool operator==(const BlockLayout&, const BlockLayout&) = default;
};

enum class Trans { No, Yes };
enum class Side { Left, Right };

/// alpha * op(A) * op(B) + beta * C. Pass an empty C (0 columns) when beta is 0.
Mat gemm(const Mat& A, const Mat& B, Trans ta, Trans tb, double alpha = 1.0, double beta = 0.0,
         const Mat& C = Mat());

inline Mat matmul(const Mat& A, const Mat& B) { return gemm(A, B, Trans::No, Trans::No); }
/// A^T B, the tall-dimension reduction used by every Gram-Schmidt variant.
inline Mat inner(const Mat& A, const Mat& B) { return gemm(A, B, Trans::Yes, Trans::No); }

Mat operator+(const Mat& A, const Mat& B);
Mat operator-(const Mat& A, const Mat& B);
Mat operator*(double a, const Mat& A);

/// Upper Cholesky factor of (A + A^T)/2, or nullopt on a pivot <= 0.
std::optional<Mat> cholesky(const Mat& A);

/// Solves op(R) X = B (Side::Left) or X op(R) = B (Side::Right) for upper triangular R.
/// Throws SingularError on an exactly zero diagonal entry.
Mat tri_solve(const Mat& R, const Mat& B, Side side, Trans trans);

struct HouseholderQR {
  Mat Q;
  Mat R;
};

/// Householder QR with explicitly formed Q and nonnegative diag(R).
/// With economic = false, Q is square (rows x rows) and R is rows x cols.
HouseholderQR house_qr(const Mat& X, bool economic = true);

/// Singular values in descending order via one-sided Jacobi.
/// Tall inputs are first reduced to their triangular factor.
std::vector<double> jacobi_svd_values(const Mat& X);

/// Largest singular value. Wide inputs are handled through their transpose.
double two_norm(const Mat& A);
double frobenius_norm(const Mat& A);

/// Upper triangle including the diagonal.
Mat triu(const Mat& A);

double machine_eps() noexcept;

}  // namespace bgs

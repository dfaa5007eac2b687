#include "bgs/matgen.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "bgs/errors.hpp"
#include "bgs/rng.hpp"

namespace bgs {

namespace {

std::string_view names(MatrixKind k) {
  switch (k) {
    case MatrixKind::rand_uniform: return "rand_uniform";
    case MatrixKind::rand_normal: return "rand_normal";
    case MatrixKind::rank_def: return "rank_def";
    case MatrixKind::laeuchli: return "laeuchli";
    case MatrixKind::monomial: return "monomial";
    case MatrixKind::s_step: return "s_step";
    case MatrixKind::newton: return "newton";
    case MatrixKind::stewart: return "stewart";
    case MatrixKind::stewart_extreme: return "stewart_extreme";
    case MatrixKind::glued: return "glued";
    case MatrixKind::kappa_series: return "kappa_series";
  }
  return "unknown";
}

Mat orthonormal(Rng& rng, Index rows, Index cols) { return house_qr(rng.normal_mat(rows, cols)).Q; }

// U diag(sigma) V^T with U m x n and V n x n orthonormal.
Mat svd_built(Rng& rng, Index m, const std::vector<double>& sigma) {
  const Index n = static_cast<Index>(sigma.size());
  Mat U = orthonormal(rng, m, n);
  const Mat V = orthonormal(rng, n, n);
  for (Index j = 0; j < n; ++j)
    for (double& v : U.col(j)) v *= sigma[static_cast<std::size_t>(j)];
  return gemm(U, V, Trans::No, Trans::Yes);
}

void normalize(std::span<double> v) {
  double ss = 0.0;
  for (double x : v) ss += x * x;
  const double n = std::sqrt(ss);
  for (double& x : v) x /= n;
}

// Diagonal operator with eigenvalues evenly spread over [1/10, 10].
std::vector<double> spectrum(Index m) {
  std::vector<double> d(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) d[i] = m == 1 ? 0.1 : 0.1 + (10.0 - 0.1) * static_cast<double>(i) / (m - 1);
  return d;
}

Index basis_width(const MatrixSpec& spec) {
  const Index w = spec.basis_width > 0 ? spec.basis_width : spec.dims.s;
  if (spec.dims.n() % w != 0)
    throw ContractError("basis width " + std::to_string(w) + " does not divide n = " + std::to_string(spec.dims.n()));
  return w;
}

Mat krylov(const MatrixSpec& spec, Rng& rng) {
  const Index m = spec.dims.m, n = spec.dims.n();
  const Index w = basis_width(spec);
  const auto a = spectrum(m);
  const bool chained = spec.kind != MatrixKind::monomial;
  const bool newton = spec.kind == MatrixKind::newton;
  const std::vector<double> nodes = newton ? leja_points(0.1, 10.0, n) : std::vector<double>{};

  Mat X(m, n);
  std::vector<double> v(static_cast<std::size_t>(m));
  Index node = 0;
  auto apply = [&](std::span<const double> x, std::span<double> y) {
    const double shift = newton ? nodes[static_cast<std::size_t>(node++)] : 0.0;
    for (Index i = 0; i < m; ++i) y[i] = (a[i] - shift) * x[i];
  };
  for (Index k = 0; k < n / w; ++k) {
    if (k == 0 || !chained) {
      for (double& x : v) x = rng.uniform();
      normalize(v);
    }
    std::copy(v.begin(), v.end(), X.col(k * w).begin());
    for (Index j = 1; j < w; ++j) apply(X.col(k * w + j - 1), X.col(k * w + j));
    if (chained) {
      if (newton) {
        // one more factor so the next start vector is not parallel to this block's last column
        apply(X.col(k * w + w - 1), v);
      } else {
        v.assign(X.col(k * w + w - 1).begin(), X.col(k * w + w - 1).end());
      }
      normalize(v);
    }
  }
  return X;
}

}  // namespace

std::string_view to_string(MatrixKind kind) noexcept { return names(kind); }

std::optional<MatrixKind> parse_matrix_kind(std::string_view name) {
  if (name == "s-step") return MatrixKind::s_step;
  for (MatrixKind k : kAllMatrixKinds)
    if (names(k) == name) return k;
  return std::nullopt;
}

std::vector<double> logspace(double a, double b, Index n) {
  if (n < 1) return {};
  std::vector<double> out(static_cast<std::size_t>(n));
  if (n == 1) {
    out[0] = std::pow(10.0, b);
    return out;
  }
  for (Index i = 0; i < n; ++i) out[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / (n - 1));
  out.front() = std::pow(10.0, a);
  out.back() = std::pow(10.0, b);
  return out;
}

std::vector<double> leja_points(double lo, double hi, Index count) {
  const Index grid_n = std::max<Index>(1000, 4 * count);
  std::vector<double> grid(static_cast<std::size_t>(grid_n));
  for (Index i = 0; i < grid_n; ++i) grid[i] = lo + (hi - lo) * static_cast<double>(i) / (grid_n - 1);
  // running sum of log|x - node| per grid point
  std::vector<double> score(grid.size(), 0.0);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count));
  for (Index k = 0; k < count; ++k) {
    std::size_t best = 0;
    if (k == 0) {
      for (std::size_t i = 1; i < grid.size(); ++i)
        if (std::abs(grid[i]) > std::abs(grid[best])) best = i;
    } else {
      for (std::size_t i = 1; i < grid.size(); ++i)
        if (score[i] > score[best]) best = i;
    }
    const double node = grid[best];
    out.push_back(node);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double d = std::abs(grid[i] - node);
      score[i] += d > 0.0 ? std::log(d) : -std::numeric_limits<double>::infinity();
    }
  }
  return out;
}

std::pair<Index, Index> stewart_indices(Index n) {
  if (n >= 35) return {24, 34};
  if (n < 4) throw ContractError("stewart needs at least 4 columns, got " + std::to_string(n));
  return {(n + 1) / 2 - 1, (7 * n + 9) / 10 - 1};
}

Mat generate(const MatrixSpec& spec) {
  spec.dims.validate();
  const Index m = spec.dims.m, n = spec.dims.n(), s = spec.dims.s, p = spec.dims.p;
  Rng rng(spec.seed);
  switch (spec.kind) {
    case MatrixKind::rand_uniform: return rng.uniform_mat(m, n);
    case MatrixKind::rand_normal: return rng.normal_mat(m, n);
    case MatrixKind::rank_def: {
      Mat X = rng.normal_mat(m, n);
      X.set_cols(0, 100.0 * X.cols_range((p - 1) * s, s));
      return X;
    }
    case MatrixKind::laeuchli: {
      if (m < n + 1) throw ContractError("laeuchli needs m >= n + 1");
      const double eps = machine_eps();
      const double eta = eps + (std::sqrt(eps) - eps) * rng.uniform();
      Mat X(m, n);
      for (Index j = 0; j < n; ++j) {
        X(0, j) = 1.0;
        X(j + 1, j) = eta;
      }
      return X;
    }
    case MatrixKind::monomial:
    case MatrixKind::s_step:
    case MatrixKind::newton: return krylov(spec, rng);
    case MatrixKind::stewart: {
      const auto [dup, zero] = stewart_indices(n);
      Mat X = svd_built(rng, m, logspace(0.0, -20.0, n));
      X.set_cols(dup, X.cols_range(0, 1));
      X.set_cols(zero, Mat(m, 1));
      return X;
    }
    case MatrixKind::stewart_extreme: {
      const Index half = (n + 1) / 2;
      std::vector<double> sigma = logspace(0.0, -10.0, half);
      sigma.resize(static_cast<std::size_t>(n), 0.0);
      return svd_built(rng, m, sigma);
    }
    case MatrixKind::glued: {
      Mat A = svd_built(rng, m, logspace(0.0, spec.r, n));
      const auto sb = logspace(0.0, spec.t, s);
      Mat G = orthonormal(rng, s, s).transpose();  // Sigma_block * V_block^T
      for (Index i = 0; i < s; ++i)
        for (Index j = 0; j < s; ++j) G(i, j) *= sb[static_cast<std::size_t>(i)];
      for (Index k = 0; k < p; ++k) A.set_cols(k * s, matmul(A.cols_range(k * s, s), G));
      return A;
    }
    case MatrixKind::kappa_series: return svd_built(rng, m, logspace(0.0, -spec.t, n));
  }
  throw ContractError("unknown matrix kind");
}

}  // namespace bgs

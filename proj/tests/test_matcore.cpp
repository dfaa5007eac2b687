#include <doctest.h>

#include <cmath>

#include "bgs/errors.hpp"
#include "bgs/matcore.hpp"
#include "bgs/rng.hpp"
#include "oracles.hpp"

using namespace bgs;

TEST_CASE("gemm") {
  SUBCASE("identity times identity") {
    CHECK(gemm(Mat::identity(3), Mat::identity(3), Trans::No, Trans::No) == Mat::identity(3));
  }
  SUBCASE("hand product") {
    const Mat C = matmul(Mat::from_rows({{1, 2}, {3, 4}}), Mat::from_rows({{5, 6}, {7, 8}}));
    CHECK(C == Mat::from_rows({{19, 22}, {43, 50}}));
  }
  SUBCASE("random product against the triple loop") {
    Rng rng(11);
    const Mat A = rng.normal_mat(7, 3);
    const Mat B = rng.normal_mat(3, 5);
    const Mat ref = oracle::triple_loop(A, B);
    CHECK(oracle::max_abs_diff(matmul(A, B), ref) <= 1e-13 * oracle::fro(ref));
  }
  SUBCASE("transposes, alpha and beta") {
    Rng rng(12);
    const Mat A = rng.normal_mat(4, 6);
    const Mat B = rng.normal_mat(5, 4);
    const Mat C = rng.normal_mat(6, 5);
    const Mat got = gemm(A, B, Trans::Yes, Trans::Yes, 2.0, -0.5, C);
    Mat ref = oracle::triple_loop(oracle::transpose(A), oracle::transpose(B));
    for (Index i = 0; i < ref.rows(); ++i)
      for (Index j = 0; j < ref.cols(); ++j) ref(i, j) = 2.0 * ref(i, j) - 0.5 * C(i, j);
    CHECK(oracle::max_abs_diff(got, ref) <= 1e-13 * oracle::fro(ref));
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(matmul(Mat(2, 3), Mat(2, 3)), ContractError);
  }
}

TEST_CASE("cholesky") {
  SUBCASE("2x2 by hand") {
    const auto R = cholesky(Mat::from_rows({{4, 2}, {2, 5}}));
    REQUIRE(R);
    CHECK(*R == Mat::from_rows({{2, 1}, {0, 2}}));
  }
  SUBCASE("identity") {
    const auto R = cholesky(Mat::identity(4));
    REQUIRE(R);
    CHECK(*R == Mat::identity(4));
  }
  SUBCASE("laeuchli Gram with eta^2 below eps is not positive definite") {
    const double eta = 1e-9;
    const Mat X = Mat::from_rows({{1, 1}, {eta, 0}, {0, eta}});
    CHECK_FALSE(cholesky(inner(X, X)));
  }
  SUBCASE("indefinite") { CHECK_FALSE(cholesky(Mat::from_rows({{1, 2}, {2, 1}}))); }
}

TEST_CASE("tri_solve") {
  SUBCASE("identity leaves B alone") {
    Rng rng(3);
    const Mat B = rng.normal_mat(3, 4);
    CHECK(tri_solve(Mat::identity(3), B, Side::Left, Trans::No) == B);
  }
  SUBCASE("right solve with its own factor") {
    const Mat R = Mat::from_rows({{2, 1}, {0, 2}});
    CHECK(oracle::max_abs_diff(tri_solve(R, R, Side::Right, Trans::No), Mat::identity(2)) == 0.0);
  }
  SUBCASE("random well-conditioned, all four forms") {
    Rng rng(4);
    Mat R = triu(rng.normal_mat(6, 6));
    for (Index i = 0; i < 6; ++i) R(i, i) = 3.0 + std::abs(R(i, i));
    const Mat B = rng.normal_mat(6, 6);
    const Mat Rt = oracle::transpose(R);
    const Mat X1 = tri_solve(R, B, Side::Left, Trans::No);
    const Mat X2 = tri_solve(R, B, Side::Left, Trans::Yes);
    const Mat X3 = tri_solve(R, B, Side::Right, Trans::No);
    const Mat X4 = tri_solve(R, B, Side::Right, Trans::Yes);
    const double nb = oracle::fro(B);
    CHECK(oracle::fro(oracle::triple_loop(R, X1) - B) <= 1e-13 * nb);
    CHECK(oracle::fro(oracle::triple_loop(Rt, X2) - B) <= 1e-13 * nb);
    CHECK(oracle::fro(oracle::triple_loop(X3, R) - B) <= 1e-13 * nb);
    CHECK(oracle::fro(oracle::triple_loop(X4, Rt) - B) <= 1e-13 * nb);
  }
  SUBCASE("zero diagonal") {
    CHECK_THROWS_AS(tri_solve(Mat::from_rows({{1, 1}, {0, 0}}), Mat::identity(2), Side::Left, Trans::No),
                    SingularError);
  }
}

TEST_CASE("house_qr") {
  SUBCASE("unit vector") {
    Mat X(5, 1);
    X(0, 0) = 1.0;
    const auto qr = house_qr(X);
    CHECK(qr.R == Mat::from_rows({{1}}));
    CHECK(oracle::max_abs_diff(qr.Q, X) <= oracle::eps());
  }
  SUBCASE("3-4-5 columns") {
    Mat X(5, 2);
    X(0, 0) = 3;
    X(0, 1) = 4;
    X(1, 1) = 4;
    const auto qr = house_qr(X);
    CHECK(oracle::max_abs_diff(qr.R, Mat::from_rows({{3, 4}, {0, 4}})) <= 10 * oracle::eps());
  }
  SUBCASE("random 50x10") {
    Rng rng(5);
    const Mat X = rng.normal_mat(50, 10);
    const auto qr = house_qr(X);
    const Mat E = Mat::identity(10) - oracle::triple_loop(oracle::transpose(qr.Q), qr.Q);
    CHECK(oracle::power_norm(E) <= 1e-14);
    CHECK(oracle::power_norm(oracle::triple_loop(qr.Q, qr.R) - X) / oracle::power_norm(X) <= 1e-14);
    for (Index j = 0; j < 10; ++j) CHECK(qr.R(j, j) >= 0.0);
  }
  SUBCASE("full Q is square and orthogonal") {
    Rng rng(6);
    const auto qr = house_qr(rng.normal_mat(8, 3), false);
    CHECK(qr.Q.rows() == 8);
    CHECK(qr.Q.cols() == 8);
    CHECK(oracle::power_norm(Mat::identity(8) - inner(qr.Q, qr.Q)) <= 1e-14);
  }
  SUBCASE("wide input is rejected") { CHECK_THROWS_AS(house_qr(Mat(2, 3)), ContractError); }
}

TEST_CASE("jacobi_svd_values") {
  SUBCASE("diagonal") {
    const auto sv = jacobi_svd_values(Mat::from_rows({{1, 0}, {0, 1e-3}}));
    REQUIRE(sv.size() == 2);
    CHECK(sv[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(sv[1] == doctest::Approx(1e-3).epsilon(1e-15));
  }
  SUBCASE("orthonormal columns") {
    Rng rng(7);
    for (double s : jacobi_svd_values(oracle::random_orthonormal(8, 3, rng)))
      CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("3x2 laeuchli against the closed form") {
    // X^T X = [[1+e2, 1], [1, 1+e2]] has eigenvalues 2+e2 and e2, so the
    // singular values are sqrt(2+eta^2) and eta exactly.
    const double eta = 1e-8;
    const auto sv = jacobi_svd_values(Mat::from_rows({{1, 1}, {eta, 0}, {0, eta}}));
    CHECK(sv[0] == doctest::Approx(std::sqrt(2.0 + eta * eta)).epsilon(1e-14));
    CHECK(std::abs(sv[1] - eta) / eta <= 1e-6);
  }
  SUBCASE("prescribed spectrum") {
    Rng rng(8);
    const std::vector<double> sigma{10, 1, 1e-2, 1e-5, 1e-9};
    const auto sv = jacobi_svd_values(oracle::with_singular_values(40, sigma, rng));
    for (std::size_t i = 0; i < sigma.size(); ++i) CHECK(std::abs(sv[i] - sigma[i]) <= 1e-13 * 10);
  }
  SUBCASE("rank deficient with a huge dynamic range settles") {
    Rng rng(9);
    Mat X = oracle::with_singular_values(30, {500, 1, 1e-3, 0, 0, 0}, rng);
    const Mat G = inner(X, X);
    CHECK_NOTHROW(jacobi_svd_values(G));
  }
  SUBCASE("non-finite input") {
    Mat X = Mat::identity(2);
    X(0, 1) = std::nan("");
    CHECK_THROWS_AS(jacobi_svd_values(X), ConvergenceError);
  }
}

TEST_CASE("two_norm") {
  CHECK(two_norm(Mat::identity(4)) == doctest::Approx(1.0));
  CHECK(two_norm(Mat::from_rows({{0, -1}, {-1, 0}})) == doctest::Approx(1.0));
  Rng rng(10);
  const Mat A = rng.normal_mat(20, 5);
  CHECK(two_norm(A) == doctest::Approx(oracle::power_norm(A)).epsilon(1e-10));
  CHECK(two_norm(oracle::transpose(A)) == doctest::Approx(oracle::power_norm(A)).epsilon(1e-10));
}

TEST_CASE("block layout") {
  CHECK_NOTHROW((BlockLayout{10, 2, 5}.validate()));
  CHECK_THROWS_AS((BlockLayout{9, 2, 5}.validate()), ContractError);
  CHECK_THROWS_AS((BlockLayout{10, 0, 5}.validate()), ContractError);
}

#include <doctest.h>

#include <cmath>
#include <string>

#include "bgs/muscles.hpp"
#include "oracles.hpp"

using namespace bgs;

namespace {

Mat first_identity_columns(Index m, Index s) { return Mat::identity(m).cols_range(0, s); }

// 50x4 with singular values 10..1
Mat kappa10(std::uint64_t seed) {
  Rng rng(seed);
  return oracle::with_singular_values(50, {10, 5, 2, 1}, rng);
}

}  // namespace

TEST_CASE("names round-trip") {
  for (auto id : kAllMuscles) CHECK(parse_muscle(to_string(id)) == id);
  CHECK_FALSE(parse_muscle("GS"));
}

TEST_CASE("orthonormal input is a fixed point") {
  const Mat X = first_identity_columns(8, 3);
  for (auto id : kAllMuscles) {
    CAPTURE(std::string(to_string(id)));
    Rng rng(1);
    const auto res = intra_orthogonalize(X, id, {}, rng);
    REQUIRE(res.ok());
    CHECK(oracle::max_abs_diff(res.Q, X) <= 10 * oracle::eps());
    CHECK(oracle::max_abs_diff(res.R, Mat::identity(3)) <= 10 * oracle::eps());
    CHECK(oracle::max_abs_diff(res.T, Mat::identity(3)) <= 10 * oracle::eps());
  }
}

TEST_CASE("every variant matches the Householder factors") {
  const Mat X = kappa10(2);
  auto ref = house_qr(X);
  for (auto id : kAllMuscles) {
    CAPTURE(std::string(to_string(id)));
    Rng rng(2);
    auto res = intra_orthogonalize(X, id, {}, rng);
    REQUIRE(res.ok());
    oracle::normalize_signs(res.Q, res.R);
    CHECK(oracle::fro(res.R - ref.R) / oracle::fro(ref.R) <= 1e-10);
    CHECK(oracle::fro(res.Q - ref.Q) <= 1e-10);
  }
}

TEST_CASE("T factor") {
  const Mat X = kappa10(3);
  for (auto id : kAllMuscles) {
    Rng rng(3);
    const auto res = intra_orthogonalize(X, id, {}, rng);
    if (!produces_t(id)) {
      CHECK(res.T == Mat::identity(4));
      CHECK(correction_factor(res, id) == Mat::identity(4));
    } else {
      // T approximates triu(Q^T Q)^{-1} up to O(eps) for a well-conditioned block
      const Mat Tc = correction_factor(res, id);
      const Mat S = triu(inner(res.Q, res.Q));
      CHECK(oracle::fro(matmul(Tc, S) - Mat::identity(4)) <= 100 * oracle::eps());
    }
  }
  CHECK(produces_t(MuscleId::MGS_SVL));
  CHECK(t_is_inverse_form(MuscleId::MGS_LTS));
  CHECK(t_is_inverse_form(MuscleId::MGS_ICWY));
  CHECK_FALSE(t_is_inverse_form(MuscleId::MGS_CWY));
}

TEST_CASE("shifted CholQR shift") {
  CHECK(shifted_cholqr_shift(100, 2, 1.0) == doctest::Approx(11.0 * 206.0 * oracle::eps()).epsilon(1e-15));
  CHECK(shifted_cholqr_shift(100, 2, 1.0) == doctest::Approx(5.03e-13).epsilon(1e-3));
}

TEST_CASE("Cholesky variants fail on a near-rank-one Gram matrix") {
  const double eta = 1e-9;
  const Mat X = Mat::from_rows({{1, 1}, {eta, 0}, {0, eta}});
  for (auto id : {MuscleId::CholQR, MuscleId::CholQR_RO}) {
    Rng rng(4);
    CHECK(intra_orthogonalize(X, id, {}, rng).status == Status::CholFail);
  }
}

TEST_CASE("zero column") {
  Mat X = first_identity_columns(6, 3);
  for (Index i = 0; i < 6; ++i) X(i, 1) = 0.0;
  SUBCASE("breaks plain Gram-Schmidt") {
    Rng rng(5);
    CHECK(intra_orthogonalize(X, MuscleId::MGS, {}, rng).status == Status::NanEncountered);
  }
  SUBCASE("replacement keeps Q orthonormal and pushes the zero into R") {
    Rng rng(5);
    const auto res = intra_orthogonalize(X, MuscleId::CGS_SROR, {}, rng);
    REQUIRE(res.ok());
    CHECK(oracle::power_norm(Mat::identity(3) - inner(res.Q, res.Q)) <= 100 * oracle::eps());
    CHECK(res.R(1, 1) == 0.0);
    CHECK(oracle::fro(matmul(res.Q, res.R) - X) <= 100 * oracle::eps());
  }
  SUBCASE("Householder does not care") {
    Rng rng(5);
    CHECK(intra_orthogonalize(X, MuscleId::HouseQR, {}, rng).ok());
  }
}

TEST_CASE("auto shift rescues ShCholQR_RORO") {
  Mat X = Mat::from_rows({{1, 1}, {1e-12, 0}, {0, 0}, {0, 0}});
  Rng a(6), b(6);
  const auto plain = intra_orthogonalize(X, MuscleId::ShCholQR_RORO, {}, a);
  MuscleOptions opts;
  opts.auto_shift = true;
  const auto shifted = intra_orthogonalize(X, MuscleId::ShCholQR_RORO, opts, b);
  CHECK(shifted.status != Status::CholFail);
  CHECK((plain.status == Status::CholFail || plain.ok()));
}

TEST_CASE("muscle sync counts") {
  Rng g(7);
  const Mat X = g.normal_mat(40, 6);
  auto count = [&](MuscleId id) {
    Rng rng(7);
    const auto res = intra_orthogonalize(X, id, {}, rng);
    CHECK(res.events.count(Origin::Skeleton) == 0);
    return res.events.count(Origin::Muscle);
  };
  CHECK(count(MuscleId::CGS) == 2 * 6 - 1);
  CHECK(count(MuscleId::CGS_IRO_LS) == 6);
  CHECK(count(MuscleId::HouseQR) == 6);
  CHECK(count(MuscleId::CholQR) == 1);
  CHECK(count(MuscleId::CholQR_RO) == 2);
  CHECK(count(MuscleId::ShCholQR_RORO) == 3);
}

TEST_CASE("cgs_step_sror") {
  SUBCASE("normalization only") {
    Rng rng(8);
    const std::vector<double> x{2, 0, 0};
    const auto st = cgs_step_sror(Mat(3, 0), x, 0.0, 100.0, rng);
    CHECK(st.y == std::vector<double>{1, 0, 0});
    CHECK(st.r.empty());
    CHECK(st.rho == 2.0);
    CHECK(st.northog == 0);
  }
  SUBCASE("zero vector becomes a random unit vector") {
    Rng rng(9);
    const std::vector<double> x{0, 0, 0, 0};
    const auto st = cgs_step_sror(Mat(4, 0), x, 0.0, 100.0, rng);
    double n2 = 0.0;
    for (double v : st.y) n2 += v * v;
    CHECK(std::sqrt(n2) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(st.rho == 0.0);
  }
  SUBCASE("vector inside the basis takes the replacement path") {
    Rng rng(10);
    const Mat basis = first_identity_columns(3, 1);
    const std::vector<double> x{1, 0, 0};
    EventLog log;
    const auto st = cgs_step_sror(basis, x, 0.0, 1.0, rng, &log);
    CHECK(std::abs(st.y[0]) <= 1e-8);
    CHECK(std::abs(st.rho) <= 10 * oracle::eps());
    REQUIRE(st.r.size() == 1);
    CHECK(st.r[0] == doctest::Approx(1.0));
    CHECK(log.count(Origin::Muscle) > 0);
  }
}

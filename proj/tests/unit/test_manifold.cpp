#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "generators.hpp"
#include "midword/error.hpp"
#include "midword/manifold.hpp"

using namespace midword;
using namespace midword::testing;

namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return Errc::kIo;
}

const double kE2 = std::exp(2.0);

}  // namespace

TEST_SUITE("spd") {
  TEST_CASE("construction rejects asymmetric, indefinite and non-finite input") {
    MatrixXd a(2, 2);
    a << 1, 0.5, 0.4, 1;
    CHECK(code_of([&] { SymPosDef{a}; }) == Errc::kInvalidInput);
    a << 1, 2, 2, 1;
    CHECK(code_of([&] { SymPosDef{a}; }) == Errc::kNotPositiveDefinite);
    a << 1, 0, 0, std::nan("");
    CHECK(code_of([&] { SymPosDef{a}; }) == Errc::kInvalidInput);
  }

  TEST_CASE("matrix log of identity and diagonal") {
    CHECK(spd_matrix_log(SymPosDef(MatrixXd::Identity(4, 4))).cwiseAbs().maxCoeff() < 1e-15);
    MatrixXd d = MatrixXd::Zero(2, 2);
    d(0, 0) = kE2;
    d(1, 1) = 1.0;
    const MatrixXd l = spd_matrix_log(SymPosDef(d));
    CHECK(l(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(std::abs(l(1, 1)) < 1e-15);
    CHECK(std::abs(l(0, 1)) < 1e-15);
  }

  TEST_CASE("matrix log errors") {
    MatrixXd bad = MatrixXd::Identity(2, 2);
    bad(1, 1) = -1.0;
    CHECK(code_of([&] { spd_matrix_log(bad); }) == Errc::kNotPositiveDefinite);
    bad(1, 1) = 1e-14;  // below the 1e-12 relative floor
    CHECK(code_of([&] { spd_matrix_log(bad); }) == Errc::kNotPositiveDefinite);
    bad(1, 1) = std::numeric_limits<double>::infinity();
    CHECK(code_of([&] { spd_matrix_log(bad); }) == Errc::kInvalidInput);
  }

  TEST_CASE("log agrees with a general-eigensolver reference and exp inverts it") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
      const SymPosDef a = random_spd(rng, 6, 2.0);
      const MatrixXd l = spd_matrix_log(a);
      CHECK(rel_err(l, reference_spectral(a.matrix(), [](double x) { return std::log(x); })) < 1e-10);
      CHECK(rel_err(spd_matrix_exp(l).matrix(), a.matrix()) < 1e-8);
    }
  }

  TEST_CASE("log map special cases") {
    std::mt19937_64 rng(3);
    const SymPosDef x = random_spd(rng, 5);
    const SymPosDef y = random_spd(rng, 5);
    CHECK(spd_log_map(x, x).coords.norm() < 1e-12);
    const SymPosDef id(MatrixXd::Identity(5, 5));
    CHECK(rel_err(spd_log_map(id, y).coords, spd_matrix_log(y)) < 1e-12);

    // Commuting diagonal pair: X ln(Y / X) elementwise.
    VectorXd xd(4), yd(4);
    xd << 0.3, 1.7, 4.0, 0.9;
    yd << 2.2, 0.5, 4.5, 0.1;
    const MatrixXd v = spd_log_map(SymPosDef(xd.asDiagonal().toDenseMatrix()),
                                   SymPosDef(yd.asDiagonal().toDenseMatrix()))
                           .coords;
    for (int i = 0; i < 4; ++i) {
      CHECK(v(i, i) == doctest::Approx(xd(i) * std::log(yd(i) / xd(i))).epsilon(1e-12));
    }
    CHECK((v - MatrixXd(v.diagonal().asDiagonal())).cwiseAbs().maxCoeff() < 1e-14);
  }

  TEST_CASE("exp map special cases and round trip") {
    std::mt19937_64 rng(4);
    const SymPosDef x = random_spd(rng, 4);
    CHECK(rel_err(spd_exp_map(x, {x, MatrixXd::Zero(4, 4)}).matrix(), x.matrix()) < 1e-13);

    const SymPosDef id(MatrixXd::Identity(2, 2));
    MatrixXd v = MatrixXd::Zero(2, 2);
    v(0, 0) = 2.0;
    const MatrixXd e = spd_exp_map(id, {id, v}).matrix();
    CHECK(e(0, 0) == doctest::Approx(kE2).epsilon(1e-14));
    CHECK(e(1, 1) == doctest::Approx(1.0).epsilon(1e-14));

    for (int trial = 0; trial < 50; ++trial) {
      const SymPosDef a = random_spd(rng, 5, 1.5);
      const SymPosDef b = random_spd(rng, 5, 1.5);
      CHECK(rel_err(spd_exp_map(a, spd_log_map(a, b)).matrix(), b.matrix()) < 1e-7);
    }
    CHECK(code_of([&] { spd_exp_map(x, {id, v}); }) == Errc::kDimensionMismatch);
  }

  TEST_CASE("geodesic distance values and invariances") {
    const SymPosDef id(MatrixXd::Identity(2, 2));
    MatrixXd d = MatrixXd::Identity(2, 2);
    d(0, 0) = kE2;
    CHECK(spd_geodesic_dist(id, SymPosDef(d)) == doctest::Approx(2.0).epsilon(1e-14));

    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 30; ++trial) {
      const SymPosDef x = random_spd(rng, 5);
      const SymPosDef y = random_spd(rng, 5);
      CHECK(spd_geodesic_dist(x, x) < 1e-12);
      const double dxy = spd_geodesic_dist(x, y);
      CHECK(std::abs(dxy - spd_geodesic_dist(y, x)) < 1e-10);
      const MatrixXd a = random_invertible(rng, 5);
      const double moved = spd_geodesic_dist(SymPosDef(a * x.matrix() * a.transpose()),
                                             SymPosDef(a * y.matrix() * a.transpose()));
      CHECK(std::abs(moved - dxy) <= 1e-8 * dxy);
      // Tangent norm of the log map is the distance.
      CHECK(spd_tangent_norm(spd_log_map(x, y)) == doctest::Approx(dxy).epsilon(1e-10));
    }
    CHECK(code_of([&] { spd_geodesic_dist(id, SymPosDef(MatrixXd::Identity(3, 3))); }) ==
          Errc::kDimensionMismatch);
  }
}

TEST_SUITE("grassmann") {
  TEST_CASE("construction checks orthonormality") {
    MatrixXd b(3, 2);
    b << 1, 0, 0, 1, 0, 0;
    CHECK_NOTHROW(GrassmannPoint{b});
    b(0, 1) = 1e-6;
    CHECK(code_of([&] { GrassmannPoint{b}; }) == Errc::kInvalidInput);
    CHECK(code_of([&] { GrassmannPoint::from_span(MatrixXd::Ones(3, 2)); }) ==
          Errc::kRankDeficient);
  }

  TEST_CASE("distance basics") {
    std::mt19937_64 rng(7);
    const GrassmannPoint u = random_grassmann(rng, 6, 3);
    const MatrixXd rot = random_orthogonal(rng, 3);
    CHECK(grassmann_geodesic_dist(u, GrassmannPoint(u.basis() * rot)) < 1e-12);

    const GrassmannPoint e1(MatrixXd(MatrixXd::Identity(2, 2).col(0)));
    const GrassmannPoint e2(MatrixXd(MatrixXd::Identity(2, 2).col(1)));
    CHECK(grassmann_geodesic_dist(e1, e2) == doctest::Approx(std::numbers::pi / 2).epsilon(1e-14));

    const GrassmannPoint other = random_grassmann(rng, 5, 3);
    CHECK(code_of([&] { grassmann_geodesic_dist(u, other); }) == Errc::kDimensionMismatch);
  }

  TEST_CASE("principal angles recovered from construction") {
    std::mt19937_64 rng(8);
    const GrassmannPoint u = random_grassmann(rng, 7, 3);
    VectorXd angles(3);
    angles << 1e-6, 0.4, 1.2;
    const GrassmannPoint v = rotate_away(rng, u, angles);
    const VectorXd got = principal_angles(u, v);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(got(i) - angles(i)) < 1e-12);
  }

  TEST_CASE("log map: single angle in the plane") {
    for (double alpha : {0.1, 0.7, 1.4}) {
      MatrixXd a(2, 1), b(2, 1);
      a << 1, 0;
      b << std::cos(alpha), std::sin(alpha);
      const GrassmannPoint u(a), v(b);
      const auto t = grassmann_log_map(u, v);
      CHECK(t.coords.norm() == doctest::Approx(alpha).epsilon(1e-13));
      const GrassmannPoint back = grassmann_exp_map(u, t);
      CHECK(grassmann_geodesic_dist(back, v) < 1e-12);
    }
  }

  TEST_CASE("log map at its base, cut locus, round trips") {
    std::mt19937_64 rng(9);
    const GrassmannPoint u = random_grassmann(rng, 6, 2);
    CHECK(grassmann_log_map(u, u).coords.norm() < 1e-12);

    MatrixXd a(2, 1), b(2, 1);
    a << 1, 0;
    b << 0, 1;
    CHECK(code_of([&] { grassmann_log_map(GrassmannPoint(a), GrassmannPoint(b)); }) ==
          Errc::kCutLocus);

    std::uniform_real_distribution<double> ang(0.0, std::numbers::pi / 2 - 0.1);
    for (int trial = 0; trial < 100; ++trial) {
      const GrassmannPoint base = random_grassmann(rng, 8, 3);
      VectorXd angles(3);
      for (int i = 0; i < 3; ++i) angles(i) = ang(rng);
      const GrassmannPoint target = rotate_away(rng, base, angles);
      const auto t = grassmann_log_map(base, target);
      CHECK((base.basis().transpose() * t.coords).cwiseAbs().maxCoeff() <= kHorizontalTolerance);
      CHECK(std::abs(t.coords.norm() - grassmann_geodesic_dist(base, target)) < 1e-8);
      const GrassmannPoint back = grassmann_exp_map(base, t);
      CHECK(grassmann_geodesic_dist(back, target) < 1e-7);
      const MatrixXd gram = back.basis().transpose() * back.basis();
      CHECK((gram - MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
    }
  }

  TEST_CASE("exp map of zero and non-horizontal tangent") {
    std::mt19937_64 rng(10);
    const GrassmannPoint u = random_grassmann(rng, 5, 2);
    const GrassmannPoint same = grassmann_exp_map(u, {u, MatrixXd::Zero(5, 2)});
    CHECK(grassmann_geodesic_dist(same, u) < 1e-12);
    CHECK(code_of([&] { grassmann_exp_map(u, {u, u.basis()}); }) == Errc::kInvalidInput);
  }
}

TEST_SUITE("embeddings") {
  TEST_CASE("sym_vec layout, inverse and isometry") {
    MatrixXd s(2, 2);
    s << 1.5, -0.25, -0.25, 3.0;
    const VectorXd v = sym_vec(s);
    REQUIRE(v.size() == 3);
    CHECK(v(0) == 1.5);
    CHECK(v(1) == std::numbers::sqrt2 * -0.25);
    CHECK(v(2) == 3.0);

    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 50; ++trial) {
      MatrixXd a = gaussian_matrix(rng, 6, 6);
      a = (a + a.transpose()).eval();
      MatrixXd b = gaussian_matrix(rng, 6, 6);
      b = (b + b.transpose()).eval();
      // Off-diagonals go through a multiply and divide by sqrt(2): 1 ulp.
      CHECK((sym_unvec(sym_vec(a), 6) - a).cwiseAbs().maxCoeff() <= 4e-16 * a.cwiseAbs().maxCoeff());
      const double frob = (a.array() * b.array()).sum();
      CHECK(std::abs(sym_vec(a).dot(sym_vec(b)) - frob) <= 1e-12 * std::max(1.0, std::abs(frob)));
    }
    CHECK(code_of([] { sym_dim_from_length(5); }) == Errc::kInvalidInput);
    CHECK(sym_dim_from_length(10) == 4);
    CHECK(code_of([] { sym_unvec(VectorXd::Zero(4), 2); }) == Errc::kInvalidInput);
  }

  TEST_CASE("grassmann embedding") {
    const GrassmannPoint e1(MatrixXd(MatrixXd::Identity(2, 2).col(0)));
    const VectorXd v = embed_grassmann(e1);
    CHECK(v(0) == doctest::Approx(1.0));
    CHECK(std::abs(v(1)) < 1e-16);
    CHECK(std::abs(v(2)) < 1e-16);

    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 30; ++trial) {
      const GrassmannPoint u1 = random_grassmann(rng, 7, 3);
      const GrassmannPoint u2 = random_grassmann(rng, 7, 3);
      const MatrixXd rot = random_orthogonal(rng, 3);
      CHECK((embed_grassmann(u1) - embed_grassmann(GrassmannPoint(u1.basis() * rot))).norm() < 1e-13);
      const double proj = (u1.projector() - u2.projector()).norm();
      CHECK(std::abs((embed_grassmann(u1) - embed_grassmann(u2)).norm() - proj) < 1e-12);
    }
  }

  TEST_CASE("spd embedding") {
    CHECK(embed_spd(SymPosDef(MatrixXd::Identity(3, 3))).norm() < 1e-15);
    MatrixXd d = MatrixXd::Identity(2, 2);
    d(0, 0) = kE2;
    const VectorXd v = embed_spd(SymPosDef(d));
    CHECK(v(0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(std::abs(v(1)) < 1e-15);
    CHECK(std::abs(v(2)) < 1e-15);

    std::mt19937_64 rng(14);
    for (int trial = 0; trial < 30; ++trial) {
      const SymPosDef a = random_spd(rng, 5);
      const SymPosDef b = random_spd(rng, 5);
      const double want = (reference_spectral(a.matrix(), [](double x) { return std::log(x); }) -
                           reference_spectral(b.matrix(), [](double x) { return std::log(x); }))
                              .norm();
      CHECK(std::abs((embed_spd(a) - embed_spd(b)).norm() - want) < 1e-10);
    }
  }
}

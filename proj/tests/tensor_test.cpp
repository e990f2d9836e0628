#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "stelar/error.hpp"
#include "stelar/tensor.hpp"

using namespace stelar;

TEST_CASE("tensor stores and indexes by (location, signal, time)") {
  DenseTensor3 t(2, 3, 4, 0.5);
  CHECK(t.locations() == 2);
  CHECK(t.signals() == 3);
  CHECK(t.timesteps() == 4);
  CHECK(t(1, 2, 3) == 0.5);
  t(1, 2, 3) = 7.0;
  CHECK(t(1, 2, 3) == 7.0);
  CHECK(t.slab(3)(1, 2) == 7.0);
  CHECK_THROWS_AS(DenseTensor3(0, 1, 1), UsageError);
}

TEST_CASE("unfolding a 1x1x1 tensor gives the same scalar in every mode") {
  DenseTensor3 t(1, 1, 1);
  t(0, 0, 0) = 42.0;
  for (int mode : {1, 2, 3}) {
    const Matrix u = unfold(t, mode);
    REQUIRE(u.rows() == 1);
    REQUIRE(u.cols() == 1);
    CHECK(u(0, 0) == 42.0);
  }
  CHECK_THROWS_AS(unfold(t, 0), UsageError);
  CHECK_THROWS_AS(unfold(t, 4), UsageError);
}

TEST_CASE("mode-3 unfolding of a rank-1 tensor matches (B kr A) C^T") {
  Vector a(3), b(2), c(4);
  a << 1.0, 2.0, 0.5;
  b << 3.0, 0.25;
  c << 1.0, 0.0, 2.0, 5.0;

  DenseTensor3 t(3, 2, 4);
  for (Index tt = 0; tt < 4; ++tt)
    for (Index n = 0; n < 2; ++n)
      for (Index m = 0; m < 3; ++m) t(m, n, tt) = a(m) * b(n) * c(tt);

  const Matrix lhs = unfold(t, 3);
  const Matrix rhs = khatri_rao(b, a) * c.transpose();
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("unfoldings match the triple-loop index oracle") {
  DenseTensor3 t(2, 2, 2);
  for (Index tt = 0; tt < 2; ++tt)
    for (Index n = 0; n < 2; ++n)
      for (Index m = 0; m < 2; ++m) t(m, n, tt) = static_cast<double>(4 * m + 2 * n + tt);

  const Matrix u1 = unfold(t, 1);
  REQUIRE(u1.rows() == 4);
  REQUIRE(u1.cols() == 2);
  CHECK((u1 - oracles::unfold_oracle(t, 1)).cwiseAbs().maxCoeff() == 0.0);

  std::mt19937_64 rng(11);
  const DenseTensor3 r = oracles::random_tensor(3, 4, 5, rng);
  for (int mode : {1, 2, 3})
    CHECK((unfold(r, mode) - oracles::unfold_oracle(r, mode)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("refold inverts unfold in every mode") {
  std::mt19937_64 rng(7);
  const DenseTensor3 t = oracles::random_tensor(4, 3, 6, rng);
  for (int mode : {1, 2, 3}) {
    const DenseTensor3 back = refold(unfold(t, mode), mode, 4, 3, 6);
    CHECK(back == t);
  }
}

TEST_CASE("khatri_rao scalar and hand-worked cases") {
  Matrix p(1, 1), q(1, 1);
  p << 1.0;
  q << 5.0;
  const Matrix s = khatri_rao(p, q);
  REQUIRE(s.rows() == 1);
  CHECK(s(0, 0) == 5.0);

  Matrix p2(2, 1), q2(2, 1);
  p2 << 1.0, 2.0;
  q2 << 3.0, 4.0;
  const Matrix kr = khatri_rao(p2, q2);
  REQUIRE(kr.rows() == 4);
  CHECK(kr(0, 0) == 3.0);
  CHECK(kr(1, 0) == 4.0);
  CHECK(kr(2, 0) == 6.0);
  CHECK(kr(3, 0) == 8.0);

  Matrix bad(2, 2);
  CHECK_THROWS_AS(khatri_rao(p2, bad), UsageError);
}

TEST_CASE("khatri_rao matches the per-entry oracle on random input") {
  std::mt19937_64 rng(3);
  const Matrix p = oracles::random_matrix(3, 2, rng, -1.0, 1.0);
  const Matrix q = oracles::random_matrix(4, 2, rng, -1.0, 1.0);
  const Matrix kr = khatri_rao(p, q);
  REQUIRE(kr.rows() == 12);
  for (Index k = 0; k < 2; ++k)
    for (Index j = 0; j < 3; ++j)
      for (Index i = 0; i < 4; ++i) CHECK(kr(j * 4 + i, k) == p(j, k) * q(i, k));
}

TEST_CASE("mttkrp of a zero tensor is the zero matrix") {
  DenseTensor3 t(3, 4, 5);
  std::mt19937_64 rng(5);
  const Matrix c = oracles::random_matrix(5, 2, rng);
  const Matrix b = oracles::random_matrix(4, 2, rng);
  CHECK(mttkrp(t, c, b, 1).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("mttkrp on a rank-1 tensor collapses to Gram scalars") {
  Vector a(3), b(2), c(4);
  a << 0.5, 1.5, 2.0;
  b << 1.0, 3.0;
  c << 2.0, 0.5, 1.0, 4.0;
  DenseTensor3 t(3, 2, 4);
  for (Index tt = 0; tt < 4; ++tt)
    for (Index n = 0; n < 2; ++n)
      for (Index m = 0; m < 3; ++m) t(m, n, tt) = a(m) * b(n) * c(tt);

  const Matrix got = mttkrp(t, b, a, 3);
  const Matrix want = c * (b.dot(b) * a.dot(a));
  CHECK((got - want).cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("mttkrp equals unfold^T * khatri_rao on random instances") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 4; ++trial) {
    const Index m_dim = 3 + trial, n_dim = 4, l_dim = 5, rank = 2 + trial % 3;
    const DenseTensor3 t = oracles::random_tensor(m_dim, n_dim, l_dim, rng);
    const Matrix a = oracles::random_matrix(m_dim, rank, rng);
    const Matrix b = oracles::random_matrix(n_dim, rank, rng);
    const Matrix c = oracles::random_matrix(l_dim, rank, rng);

    const struct {
      int mode;
      const Matrix *f1, *f2;
    } cases[] = {{1, &c, &b}, {2, &c, &a}, {3, &b, &a}};
    for (const auto& cs : cases) {
      const Matrix got = mttkrp(t, *cs.f1, *cs.f2, cs.mode);
      const Matrix want = oracles::mttkrp_oracle(t, *cs.f1, *cs.f2, cs.mode);
      CHECK((got - want).norm() / want.norm() < 1e-12);
    }
  }
  DenseTensor3 t(2, 2, 2);
  Matrix wrong(3, 2);
  CHECK_THROWS_AS(mttkrp(t, wrong, wrong, 1), UsageError);
}

TEST_CASE("reconstruct: all-ones factors give the all-ones tensor") {
  FactorModel m;
  m.A = Matrix::Ones(2, 1);
  m.B = Matrix::Ones(3, 1);
  m.C = Matrix::Ones(4, 1);
  const DenseTensor3 t = reconstruct(m);
  for (Index j = 0; j < t.size(); ++j) CHECK(t.data()[static_cast<std::size_t>(j)] == 1.0);
}

TEST_CASE("reconstruct places indicator components at the indexed cell") {
  FactorModel m;
  m.A = Matrix::Zero(3, 2);
  m.B = Matrix::Zero(2, 2);
  m.C = Matrix::Zero(4, 2);
  m.A(1, 0) = 2.0;
  m.B(0, 0) = 3.0;
  m.C(2, 0) = 5.0;
  m.A(0, 1) = 1.0;
  m.B(1, 1) = 1.0;
  m.C(3, 1) = 7.0;
  const DenseTensor3 t = reconstruct(m);
  CHECK(t(1, 0, 2) == 30.0);
  CHECK(t(0, 1, 3) == 7.0);
  double total = 0.0;
  for (double v : t.data()) total += v;
  CHECK(total == 37.0);
}

TEST_CASE("reconstruct matches the triple-loop oracle") {
  std::mt19937_64 rng(23);
  FactorModel m;
  m.A = oracles::random_matrix(4, 2, rng);
  m.B = oracles::random_matrix(3, 2, rng);
  m.C = oracles::random_matrix(6, 2, rng);
  const DenseTensor3 got = reconstruct(m);
  const DenseTensor3 want = oracles::reconstruct_oracle(m);
  for (Index j = 0; j < got.size(); ++j)
    CHECK(got.data()[static_cast<std::size_t>(j)] ==
          doctest::Approx(want.data()[static_cast<std::size_t>(j)]).epsilon(1e-12));
}

TEST_CASE("the three unfolding identities hold for an exact CPD") {
  std::mt19937_64 rng(31);
  FactorModel m;
  m.A = oracles::random_matrix(4, 3, rng);
  m.B = oracles::random_matrix(5, 3, rng);
  m.C = oracles::random_matrix(6, 3, rng);
  const DenseTensor3 t = reconstruct(m);

  const Matrix id1 = khatri_rao(m.C, m.B) * m.A.transpose();
  const Matrix id2 = khatri_rao(m.C, m.A) * m.B.transpose();
  const Matrix id3 = khatri_rao(m.B, m.A) * m.C.transpose();
  CHECK((unfold(t, 1) - id1).norm() / id1.norm() < 1e-10);
  CHECK((unfold(t, 2) - id2).norm() / id2.norm() < 1e-10);
  CHECK((unfold(t, 3) - id3).norm() / id3.norm() < 1e-10);
}

TEST_CASE("normalize absorbs column scales into weights and back") {
  std::mt19937_64 rng(41);
  FactorModel m;
  m.A = oracles::random_matrix(4, 2, rng, 0.1, 1.0);
  m.B = oracles::random_matrix(3, 2, rng, 0.1, 1.0);
  m.C = oracles::random_matrix(5, 2, rng, 0.1, 1.0);

  const FactorModel norm = normalize(m);
  for (Index k = 0; k < 2; ++k) {
    CHECK(norm.A.col(k).norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(norm.B.col(k).norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(norm.C.col(k).norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(norm.weights(k) ==
          doctest::Approx(m.A.col(k).norm() * m.B.col(k).norm() * m.C.col(k).norm())
              .epsilon(1e-12));
  }

  const DenseTensor3 before = reconstruct(m);
  const DenseTensor3 after = reconstruct(absorb_weights(norm));
  for (Index j = 0; j < before.size(); ++j)
    CHECK(before.data()[static_cast<std::size_t>(j)] ==
          doctest::Approx(after.data()[static_cast<std::size_t>(j)]).epsilon(1e-10));
}

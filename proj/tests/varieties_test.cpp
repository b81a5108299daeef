#include "test_support.hpp"

#include <gtest/gtest.h>

#include <limits>

using namespace vtest;

TEST(Dimensions, LowRank) {
  EXPECT_EQ(dim_low_rank(4, 1), 7);
  EXPECT_EQ(dim_low_rank(4, 2), 12);
  for (int d = 1; d <= 10; ++d) EXPECT_EQ(dim_low_rank(d, d), d * d);
  EXPECT_THROW(dim_low_rank(4, 5), std::domain_error);
  EXPECT_THROW(dim_low_rank(4, -1), std::domain_error);
}

TEST(Dimensions, ComplexSymmetric) {
  EXPECT_EQ(dim_complex_symmetric(4, 1), 4);
  EXPECT_EQ(dim_complex_symmetric(5, 2), 9);
  for (int d = 1; d <= 10; ++d) EXPECT_EQ(dim_complex_symmetric(d, d), d * (d + 1) / 2);
}

TEST(Dimensions, Sparse) {
  EXPECT_EQ(dim_sparse(8, 2), 2);
  EXPECT_EQ(dim_sparse(5, 0), 0);
  EXPECT_EQ(dim_sparse(6, 6), 6);
  EXPECT_THROW(dim_sparse(3, 4), std::domain_error);
}

TEST(Dimensions, DoubledRankIdentity) {
  for (long long d = 1; d <= 64; ++d)
    for (long long r = 1; 2 * r <= d; ++r) EXPECT_EQ(dim_low_rank(int(d), int(2 * r)), 4 * d * r - 4 * r * r);
}

TEST(Dimensions, WithinAmbient) {
  for (int d = 1; d <= 6; ++d) {
    for (int p = 0; p <= d; ++p) {
      for (Field f : {Field::Real, Field::Complex}) {
        for (const auto& w : {VarietySpec::sparse(d, p, f), VarietySpec::low_rank(d, p, f),
                              VarietySpec::sym_low_rank(d, p, f)}) {
          EXPECT_GE(w.dimension(), 0);
          EXPECT_LE(w.dimension(), w.ambient_dimension());
        }
      }
    }
  }
}

TEST(DifferenceClosure, Examples) {
  EXPECT_EQ(difference_closure(VarietySpec::sparse(8, 2)), VarietySpec::sparse(8, 4));
  EXPECT_EQ(difference_closure(VarietySpec::low_rank(4, 1)), VarietySpec::low_rank(4, 2));
  EXPECT_EQ(difference_closure(VarietySpec::sparse(4, 3)), VarietySpec::sparse(4, 4));
  EXPECT_EQ(difference_closure(VarietySpec::phase_lift(3, Field::Complex)), VarietySpec::herm_signature(3));
  EXPECT_EQ(difference_closure(VarietySpec::phase_lift(3, Field::Real)), VarietySpec::rank_one_real(3));
}

TEST(DifferenceClosure, Monotone) {
  for (int d = 1; d <= 8; ++d) {
    for (int p = 0; p <= d; ++p) {
      for (const auto& w : {VarietySpec::sparse(d, p), VarietySpec::low_rank(d, p, Field::Complex),
                            VarietySpec::sym_low_rank(d, p)}) {
        const auto c = difference_closure(w);
        EXPECT_EQ(c.d(), d);
        EXPECT_LE(c.param(), d);
        EXPECT_GE(c.dimension(), w.dimension());
      }
    }
  }
}

TEST(Project, Examples) {
  EXPECT_TRUE(project(diag({3, 1}), VarietySpec::low_rank(2, 1)).isApprox(diag({3, 0})));
  EXPECT_EQ(project(vec({5, -1, 2}), VarietySpec::sparse(3, 1)), vec({5, 0, 0}));
  const Element h = project(diag({1, 1}), VarietySpec::herm_signature(2));
  EXPECT_NEAR((h - diag({1, 0})).norm(), 0.0, 1e-14);
}

TEST(Project, SparseTiesGoToLowestIndex) {
  EXPECT_EQ(project(vec({1, -1, 1}), VarietySpec::sparse(3, 1)), vec({1, 0, 0}));
  EXPECT_EQ(project(vec({0, 2, -2, 2}), VarietySpec::sparse(4, 2)), vec({0, 2, -2, 0}));
}

TEST(Project, RejectsNonFinite) {
  EXPECT_THROW(project(vec({1, std::numeric_limits<double>::quiet_NaN()}), VarietySpec::sparse(2, 1)), NumericError);
  EXPECT_THROW(project(vec({1, 2}), VarietySpec::sparse(3, 1)), ShapeError);
}

TEST(Project, HermSignatureNeverDefinite) {
  Rng rng(11);
  for (int t = 0; t < 50; ++t) {
    const Element g = linalg::gaussian(4, 4, Field::Complex, rng);
    const Element pd = g * g.adjoint();  // positive definite
    const Element p = project(pd, VarietySpec::herm_signature(4));
    const RealVector ev = linalg::hermitian_eigen(p).values;
    EXPECT_LE((ev.array() > 1e-10 * pd.norm()).count(), 1);
    EXPECT_TRUE(membership(p, VarietySpec::herm_signature(4)));
  }
}

TEST(Project, HermSignatureKeepsOnePairOfSigns) {
  const Element x = diag({3, 2, -1, -4});
  EXPECT_NEAR((project(x, VarietySpec::herm_signature(4)) - diag({3, 0, 0, -4})).norm(), 0.0, 1e-12);
}

TEST(Project, Idempotent) {
  Rng rng(5);
  for (int t = 0; t < 200; ++t) {
    const int d = 2 + t % 4;
    const Field f = t % 2 ? Field::Complex : Field::Real;
    const int p = 1 + t % d;
    const std::vector<VarietySpec> kinds = {VarietySpec::sparse(d, p, f), VarietySpec::low_rank(d, p, f),
                                            VarietySpec::sym_low_rank(d, p, f), VarietySpec::herm_signature(d),
                                            VarietySpec::rank_one_real(d)};
    for (const auto& w : kinds) {
      const Element x = linalg::gaussian(w.ambient().rows(), w.ambient().cols(), Field::Complex, rng);
      const Element once = project(x, w);
      const Element twice = project(once, w);
      EXPECT_LE((once - twice).norm(), 1e-12 * std::max(1.0, once.norm())) << w.describe();
      EXPECT_TRUE(membership(once, w, 1e-8)) << w.describe();
    }
  }
}

TEST(Project, EckartYoung) {
  Rng rng(17);
  for (int t = 0; t < 200; ++t) {
    const int d = 3 + t % 3;
    const int r = 1 + t % 2;
    const Field f = t % 3 == 0 ? Field::Real : Field::Complex;
    const Element x = linalg::gaussian(d, d, f, rng);
    const double best = (x - project(x, VarietySpec::low_rank(d, r, f))).norm();
    for (int k = 0; k < 5; ++k) {
      const Element y = linalg::gaussian(d, r, f, rng) * linalg::gaussian(d, r, f, rng).adjoint();
      EXPECT_LE(best, (x - y).norm() + 1e-9);
    }
  }
}

TEST(Membership, Examples) {
  EXPECT_TRUE(membership(diag({1, 0}), VarietySpec::low_rank(2, 1), 1e-10));
  EXPECT_FALSE(membership(diag({1, 1}), VarietySpec::low_rank(2, 1), 1e-10));
  EXPECT_TRUE(membership(vec({1, 0, 0, 1}), VarietySpec::sparse(4, 2), 0.0));
  EXPECT_FALSE(membership(vec({1, 0, 1, 1}), VarietySpec::sparse(4, 2), 0.0));
  EXPECT_FALSE(membership(vec({Complex(0, 1)}), VarietySpec::sparse(1, 1, Field::Real)));
  EXPECT_FALSE(membership(unit_matrix(2, 0, 1), VarietySpec::sym_low_rank(2, 1)));
  EXPECT_FALSE(membership(diag({1, 1}), VarietySpec::herm_signature(2)));
  EXPECT_TRUE(membership(diag({1, -1}), VarietySpec::herm_signature(2)));
}

TEST(Membership, ScaleInvariant) {
  const Element x = diag({1, 1e-9, 0});
  for (double s : {1e-6, 1.0, 1e6}) EXPECT_TRUE(membership(s * x, VarietySpec::low_rank(3, 1), 1e-8));
}

TEST(ParseVariety, Forms) {
  EXPECT_EQ(parse_variety("sparse:2", 8, Field::Real), VarietySpec::sparse(8, 2));
  EXPECT_EQ(parse_variety("low_rank:4:1", 0, Field::Complex), VarietySpec::low_rank(4, 1, Field::Complex));
  EXPECT_EQ(parse_variety("herm_sig", 3, Field::Complex), VarietySpec::herm_signature(3));
  EXPECT_THROW(parse_variety("blob:1", 3, Field::Real), std::invalid_argument);
  EXPECT_THROW(parse_variety("sparse:9", 3, Field::Real), std::domain_error);
}

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

using namespace vtest;

namespace {

// Independent complement property check over all 2^m subsets.
bool brute_complement(const MeasurementEnsemble& e) {
  const int m = e.m(), d = e.d();
  for (unsigned mask = 0; mask < (1u << m); ++mask) {
    RealMatrix in(0, d), out(0, d);
    for (int j = 0; j < m; ++j) {
      RealMatrix& t = (mask >> j & 1u) ? in : out;
      t.conservativeResize(t.rows() + 1, d);
      t.row(t.rows() - 1) = e.op(j).real().col(0).transpose();
    }
    auto rank = [](const RealMatrix& a) {
      if (a.rows() == 0) return Eigen::Index(0);
      Eigen::FullPivLU<RealMatrix> lu(a);
      lu.setThreshold(1e-9);
      return lu.rank();
    };
    if (rank(in) < d && rank(out) < d) return false;
  }
  return true;
}

double det3(const RealMatrix& a) {
  return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
         a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
}

// Sum of squared 3x3 minors of a real 4x4 matrix, written out directly.
double brute_minors(const RealMatrix& q) {
  double total = 0.0;
  for (int dr = 0; dr < 4; ++dr) {
    for (int dc = 0; dc < 4; ++dc) {
      RealMatrix s(3, 3);
      for (int i = 0, a = 0; i < 4; ++i) {
        if (i == dr) continue;
        for (int j = 0, b = 0; j < 4; ++j) {
          if (j == dc) continue;
          s(a, b++) = q(i, j);
        }
        ++a;
      }
      total += det3(s) * det3(s);
    }
  }
  return total;
}

MeasurementEnsemble real_rows(const RealMatrix& rows) {
  std::vector<Element> ops;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) ops.push_back(rows.row(i).transpose().cast<Complex>());
  return vectors(Field::Real, ops);
}

// A refutation must come with two distinct signals of the variety whose
// samples agree.
void expect_valid_refutation(const MeasurementEnsemble& e, const VarietySpec& signal, const InjectivityVerdict& v) {
  ASSERT_EQ(v.status, Status::RefutedWithWitness);
  ASSERT_TRUE(v.witness);
  ASSERT_TRUE(v.collision);
  EXPECT_TRUE(v.collision->distinct);
  // a real rank-one witness q only reaches the lifted operators through its
  // symmetric part, and ||sym q|| >= ||q|| / sqrt(2)
  EXPECT_LE(v.collision->gap, std::sqrt(2.0) * v.config.search.tol_feas);
  const Element& x = v.collision->x;
  const Element& y = v.collision->y;
  const bool lifted = signal.is_phase_lift() && x.cols() == 1;
  const double spread = lifted ? (lift_rank_one(x) - lift_rank_one(y)).norm() : (x - y).norm();
  double frob = 0.0;
  const MeasurementEnsemble de = difference_ensemble(e, signal);
  for (const auto& a : de.operators()) frob += a.squaredNorm();
  const double raw = (measure(e, signal, x) - measure(e, signal, y)).norm();
  EXPECT_LE(raw, std::sqrt(2.0) * v.config.search.tol_feas * std::sqrt(frob) * spread);
  if (!signal.is_phase_lift()) {
    EXPECT_TRUE(membership(v.collision->x, signal, 1e-8));
    EXPECT_TRUE(membership(v.collision->y, signal, 1e-8));
  }
}

}  // namespace

TEST(ComplementProperty, Examples) {
  const auto basis = vectors(Field::Real, {vec({1, 0}), vec({0, 1})});
  const auto cp = complement_property(basis);
  EXPECT_FALSE(cp.holds);
  EXPECT_EQ(cp.failing_subset, std::vector<int>{0});

  const auto three = vectors(Field::Real, {vec({1, 0}), vec({0, 1}), vec({1, 1})});
  EXPECT_TRUE(complement_property(three).holds);
  EXPECT_TRUE(complement_property(three).failing_subset.empty());

  // two parallel rows: only S = {2} leaves both sides rank deficient
  const auto repeated = vectors(Field::Real, {vec({1, 0}), vec({2, 0}), vec({0, 1})});
  const auto r = complement_property(repeated);
  EXPECT_FALSE(r.holds);
  EXPECT_EQ(r.failing_subset, std::vector<int>{2});
}

TEST(ComplementProperty, MatchesBruteForce) {
  Rng rng(17);
  for (int t = 0; t < 60; ++t) {
    const int d = 2 + t % 3;
    const int m = d + t % (d + 1);
    RealMatrix rows = linalg::gaussian(m, d, Field::Real, rng).real();
    if (t % 3 == 0) rows.row(m - 1) = 2.0 * rows.row(0);  // force some degenerate cases
    if (t % 5 == 0) rows.row(1).setZero();
    const auto e = real_rows(rows);
    EXPECT_EQ(complement_property(e).holds, brute_complement(e)) << "t=" << t;
  }
}

TEST(ComplementProperty, FailingSubsetReallyFails) {
  for (std::uint64_t s = 0; s < 30; ++s) {
    const int d = 2 + static_cast<int>(s % 4);
    const auto e = gen_gaussian_vectors(d, 2 * d - 2, Field::Real, s);
    const auto cp = complement_property(e);
    ASSERT_FALSE(cp.holds);
    EXPECT_LE(static_cast<int>(cp.failing_subset.size()), e.m() / 2);
    RealMatrix in(cp.failing_subset.size(), d), out(e.m() - cp.failing_subset.size(), d);
    for (int j = 0, a = 0, b = 0; j < e.m(); ++j) {
      const bool inside = std::find(cp.failing_subset.begin(), cp.failing_subset.end(), j) != cp.failing_subset.end();
      (inside ? in.row(a++) : out.row(b++)) = e.op(j).real().col(0).transpose();
    }
    EXPECT_LT(Eigen::FullPivLU<RealMatrix>(in).rank(), d);
    EXPECT_LT(Eigen::FullPivLU<RealMatrix>(out).rank(), d);
  }
}

TEST(ComplementProperty, InvariantUnderScalingAndPermutation) {
  Rng rng(5);
  for (int t = 0; t < 30; ++t) {
    const int d = 2 + t % 3;
    const int m = 2 * d - 2 + t % 2;
    RealMatrix rows = linalg::gaussian(m, d, Field::Real, rng).real();
    const bool base = complement_property(real_rows(rows)).holds;
    RealMatrix scaled = rows;
    for (int j = 0; j < m; ++j) scaled.row(j) *= (j % 2 ? -3.5 : 0.25);
    EXPECT_EQ(complement_property(real_rows(scaled)).holds, base);
    std::vector<int> perm(static_cast<std::size_t>(m));
    std::iota(perm.begin(), perm.end(), 0);
    std::reverse(perm.begin(), perm.end());
    RealMatrix permuted(m, d);
    for (int j = 0; j < m; ++j) permuted.row(j) = rows.row(perm[static_cast<std::size_t>(j)]);
    EXPECT_EQ(complement_property(real_rows(permuted)).holds, base);
  }
}

TEST(ComplementProperty, GenericThreshold) {
  for (int d = 2; d <= 5; ++d) {
    for (std::uint64_t s = 0; s < 5; ++s) {
      EXPECT_TRUE(complement_property(gen_gaussian_vectors(d, 2 * d - 1, Field::Real, s)).holds);
      EXPECT_FALSE(complement_property(gen_gaussian_vectors(d, 2 * d - 2, Field::Real, s)).holds);
    }
  }
}

TEST(ComplementProperty, Errors) {
  EXPECT_THROW(complement_property(gen_gaussian_vectors(3, 25, Field::Real, 1)), BudgetError);
  EXPECT_THROW(complement_property(gen_gaussian_vectors(3, 5, Field::Complex, 1)), std::invalid_argument);
  EXPECT_THROW(complement_property(gen_gaussian_matrices(3, 5, Field::Real, 1)), std::invalid_argument);
}

TEST(WitnessSearch, FindsRankOneKernelElement) {
  const auto e = matrices(Field::Real, {unit_matrix(2, 0, 0)});
  const auto found = witness_search(e, VarietySpec::low_rank(2, 1));
  ASSERT_TRUE(found.witness);
  const Element& q = found.witness->element;
  EXPECT_NEAR(q.norm(), 1.0, 1e-12);
  EXPECT_LE(std::abs(q(0, 0)), 1e-8);
  EXPECT_TRUE(membership(q, VarietySpec::low_rank(2, 1), 1e-8));
}

TEST(WitnessSearch, TrivialKernel) {
  std::vector<Element> basis;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) basis.push_back(unit_matrix(2, i, j));
  const auto found = witness_search(matrices(Field::Real, basis), VarietySpec::low_rank(2, 1));
  EXPECT_FALSE(found.witness);
  EXPECT_TRUE(found.trivial_kernel);
}

TEST(WitnessSearch, DeterministicForFixedSeed) {
  const auto e = gen_gaussian_matrices(3, 7, Field::Real, 4);
  SearchConfig cfg;
  cfg.seed = 9;
  const auto a = witness_search(e, VarietySpec::low_rank(3, 2), cfg);
  const auto b = witness_search(e, VarietySpec::low_rank(3, 2), cfg);
  ASSERT_EQ(bool(a.witness), bool(b.witness));
  if (a.witness) EXPECT_EQ(a.witness->element, b.witness->element);
  EXPECT_EQ(a.restarts_used, b.restarts_used);
}

TEST(Certify, FullBasisIsExact) {
  std::vector<Element> basis;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) basis.push_back(unit_matrix(2, i, j));
  const auto v = certify(matrices(Field::Real, basis), VarietySpec::low_rank(2, 1));
  EXPECT_EQ(v.status, Status::CertifiedExact);
  EXPECT_EQ(v.method, "kernel_nullity");
  EXPECT_EQ(v.kernel_dimension, 0);
}

TEST(Certify, SparseBelowThresholdIsRefuted) {
  const auto signal = VarietySpec::sparse(8, 2);
  Rng rng(3);
  std::vector<Element> ops;
  for (int j = 0; j < 3; ++j) ops.push_back(linalg::gaussian(8, 1, Field::Real, rng));
  const auto ens = vectors(Field::Real, ops);
  const auto v = certify(ens, signal);
  EXPECT_EQ(v.method, "support_enumeration");
  expect_valid_refutation(ens, signal, v);
  int nonzeros = 0;
  for (int i = 0; i < 8; ++i) nonzeros += std::abs(v.witness->element(i, 0)) > 0.0;
  EXPECT_LE(nonzeros, 4);
}

TEST(Certify, SparseAtThresholdIsExact) {
  Rng rng(4);
  std::vector<Element> ops;
  for (int j = 0; j < 4; ++j) ops.push_back(linalg::gaussian(8, 1, Field::Real, rng));
  const auto v = certify(vectors(Field::Real, ops), VarietySpec::sparse(8, 2));
  EXPECT_EQ(v.status, Status::CertifiedExact);
  EXPECT_EQ(v.method, "support_enumeration");
}

TEST(Certify, FullSpaceWithKernelIsRefuted) {
  const auto e = matrices(Field::Real, {unit_matrix(2, 0, 0), unit_matrix(2, 1, 1)});
  const auto signal = VarietySpec::low_rank(2, 2);
  const auto v = certify(e, signal);
  EXPECT_EQ(v.method, "kernel_nullity");
  expect_valid_refutation(e, signal, v);
}

TEST(Certify, RealPhaseUsesComplementProperty) {
  const auto e = vectors(Field::Real, {vec({1, 0}), vec({0, 1})});
  const auto signal = VarietySpec::phase_lift(2, Field::Real);
  const auto v = certify(e, signal);
  EXPECT_EQ(v.method, "complement_property");
  EXPECT_EQ(v.failing_subset, std::vector<int>{0});
  expect_valid_refutation(e, signal, v);
  // the collision has equal magnitudes but is not a global sign flip
  for (int i = 0; i < 2; ++i) EXPECT_NEAR(std::abs(v.collision->x(i, 0)), std::abs(v.collision->y(i, 0)), 1e-12);
  EXPECT_GT(equivalence_distance(v.collision->x, v.collision->y, Field::Real), 0.1);

  const auto three = vectors(Field::Real, {vec({1, 0}), vec({0, 1}), vec({1, 1})});
  EXPECT_EQ(certify(three, signal).status, Status::CertifiedExact);
}

TEST(Certify, HermitianRankEnsemble) {
  const auto e = gen_hermitian_rank(2, {2, 2, 2}, 3);
  const auto signal = VarietySpec::sym_low_rank(2, 1, Field::Complex);
  const auto v = certify(e, signal);
  expect_valid_refutation(e, signal, v);
}

TEST(Certify, ComplementAgreesWithWitnessSearch) {
  CertifyConfig search_only;
  search_only.exact_tests = false;
  search_only.search.restarts = 60;
  int checked = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const int d = 2 + static_cast<int>(s % 3);
    const int m = 2 * d - 2 + static_cast<int>(s / 3 % 2);
    const auto e = gen_gaussian_vectors(d, m, Field::Real, 50 + s);
    const auto signal = VarietySpec::phase_lift(d, Field::Real);
    const auto exact = certify(e, signal);
    const auto searched = certify(e, signal, search_only);
    ASSERT_EQ(exact.method, "complement_property");
    ASSERT_EQ(searched.method, "witness_search");
    EXPECT_EQ(exact.status == Status::RefutedWithWitness, searched.status == Status::RefutedWithWitness)
        << "seed " << s;
    if (exact.status == Status::CertifiedExact) EXPECT_EQ(searched.status, Status::NoWitnessFound);
    if (searched.status == Status::RefutedWithWitness) expect_valid_refutation(e, signal, searched);
    ++checked;
  }
  EXPECT_EQ(checked, 20);
}

TEST(Certify, RejectsBadInput) {
  const auto e = gen_gaussian_matrices(3, 5, Field::Real, 1);
  EXPECT_THROW(certify(e, VarietySpec::low_rank(4, 1)), ShapeError);
  EXPECT_THROW(certify(e, VarietySpec::herm_signature(3)), std::invalid_argument);
}

TEST(Collision, Examples) {
  const auto sparse_e = vectors(Field::Real, {vec({1, 1, 0})});
  const auto c = witness_to_collision(sparse_e, VarietySpec::sparse(3, 1), vec({1, -1, 0}));
  EXPECT_EQ(c.x, vec({1, 0, 0}));
  EXPECT_EQ(c.y, vec({0, 1, 0}));
  EXPECT_TRUE(c.distinct);
  EXPECT_LE(c.gap, 1e-15);

  const auto diag_e = matrices(Field::Real, {Element::Identity(2, 2) * Complex(1, 0) + unit_matrix(2, 0, 0)});
  const auto lr = witness_to_collision(diag_e, VarietySpec::low_rank(2, 1), diag({1, -2}));
  EXPECT_LE((lr.x - lr.y - diag({1, -2})).norm(), 1e-12);
  EXPECT_TRUE(membership(lr.x, VarietySpec::low_rank(2, 1)));
  EXPECT_TRUE(membership(lr.y, VarietySpec::low_rank(2, 1)));
  EXPECT_LE(lr.gap, 1e-12);

  const auto pr_e = vectors(Field::Real, {vec({1, 0}), vec({0, 1})});
  const auto pr = witness_to_collision(pr_e, VarietySpec::phase_lift(2, Field::Real), unit_matrix(2, 0, 1));
  EXPECT_LE(pr.gap, 1e-12);
  EXPECT_TRUE(pr.distinct);
}

TEST(MinorResidual, Examples) {
  EXPECT_EQ(minor_residual(Element::Identity(3, 3), 1), 3.0);
  EXPECT_EQ(minor_residual(Element::Identity(3, 3), 2), 1.0);
  EXPECT_EQ(minor_residual(Element::Identity(3, 3), 3), 0.0);
  EXPECT_NEAR(minor_residual(vec({1, 2, 3}) * vec({4, 5, 6}).transpose(), 1), 0.0, 1e-20);
  EXPECT_THROW(minor_residual(Element::Zero(2, 3), 1), ShapeError);
}

TEST(MinorResidual, MatchesDirectDeterminants) {
  Rng rng(31);
  for (int t = 0; t < 50; ++t) {
    const RealMatrix q = linalg::gaussian(4, 4, Field::Real, rng).real();
    const double lib = minor_residual(q.cast<Complex>(), 2);
    EXPECT_NEAR(lib, brute_minors(q), 1e-10 * (1 + lib));
    EXPECT_NEAR(detail::minor_objective(q, 2, nullptr), lib, 1e-10 * (1 + lib));
  }
}

TEST(MinorResidual, VanishesExactlyOnRankTwo) {
  Rng rng(8);
  for (int t = 0; t < 200; ++t) {
    const int s = 1 + t % 4;
    Element q = random_rank(4, s, Field::Real, rng);
    q /= q.norm();
    const double f = minor_residual(q, 2);
    const bool member = membership(q, VarietySpec::low_rank(4, 2), 1e-8);
    EXPECT_EQ(member, s <= 2);
    if (member) EXPECT_LE(f, 1e-24);
    else EXPECT_GT(f, 1e-12);
  }
}

TEST(MinorResidual, GradientMatchesFiniteDifferences) {
  Rng rng(2);
  for (int t = 0; t < 10; ++t) {
    const RealMatrix q = linalg::gaussian(4, 4, Field::Real, rng).real();
    RealMatrix g;
    detail::minor_objective(q, 2, &g);
    const double h = 1e-6;
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        RealMatrix p = q, m = q;
        p(i, j) += h;
        m(i, j) -= h;
        const double fd = (detail::minor_objective(p, 2, nullptr) - detail::minor_objective(m, 2, nullptr)) / (2 * h);
        EXPECT_NEAR(g(i, j), fd, 1e-5 * (1 + std::abs(fd)));
      }
    }
  }
}

TEST(MinorSystem, FullBasisHasNoKernel) {
  std::vector<Element> basis;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) basis.push_back(unit_matrix(4, i, j));
  const auto r = verify_kernel_minor_system(matrices(Field::Real, basis));
  EXPECT_EQ(r.kernel_dimension, 0);
  EXPECT_TRUE(std::isinf(r.min_residual));
}

TEST(MinorSystem, FindsRankTwoKernelElement) {
  const auto e = gen_gaussian_matrices(4, 11, Field::Real, 2);
  MinorSystemConfig cfg;
  cfg.restarts = 200;
  const auto r = verify_kernel_minor_system(e, 2, cfg);
  EXPECT_EQ(r.kernel_dimension, 5);
  EXPECT_LT(r.min_residual, 1e-10);
  EXPECT_NEAR(r.matrix.norm(), 1.0, 1e-9);
  EXPECT_LE(sample(e, r.matrix).norm(), 1e-9 * e.max_operator_norm());
  // the search agrees: a rank-two kernel element exists
  EXPECT_EQ(certify(e, VarietySpec::low_rank(4, 1)).status, Status::RefutedWithWitness);
}

TEST(MinorSystem, RejectsComplexOrVector) {
  EXPECT_THROW(verify_kernel_minor_system(gen_gaussian_matrices(2, 3, Field::Complex, 1)), std::invalid_argument);
  EXPECT_THROW(verify_kernel_minor_system(gen_gaussian_vectors(2, 3, Field::Real, 1)), std::invalid_argument);
}

TEST(Admissibility, Examples) {
  for (int d : {2, 4, 8}) {
    const auto q0 = admissibility_probe(symmetric_sampler(d), skew_corner(d), 500, 1);
    EXPECT_TRUE(q0.vanishes);
    EXPECT_EQ(q0.samples_checked, 500);
    EXPECT_LE(q0.max_ratio, 1e-12);
    const auto e11 = admissibility_probe(symmetric_sampler(d), unit_matrix(d, 0, 0), 500, 1);
    EXPECT_FALSE(e11.vanishes);
    ASSERT_TRUE(e11.sample);
    EXPECT_EQ(e11.samples_checked, 1);
    EXPECT_FALSE(admissibility_probe(full_sampler(d, Field::Real), skew_corner(d), 50, 2).vanishes);
  }
  EXPECT_THROW(admissibility_probe(symmetric_sampler(2), Element::Zero(2, 2), 10, 1), std::invalid_argument);
  EXPECT_THROW(admissibility_probe(symmetric_sampler(3), skew_corner(2), 10, 1), ShapeError);
}

TEST(StatusNames, Strings) {
  EXPECT_STREQ(to_string(Status::CertifiedExact), "CertifiedExact");
  EXPECT_STREQ(to_string(Status::NoWitnessFound), "NoWitnessFound");
  EXPECT_STREQ(to_string(Status::RefutedWithWitness), "RefutedWithWitness");
  EXPECT_STREQ(to_string(Status::Inconclusive), "Inconclusive");
}

#pragma once

#include "varsample/rng.hpp"
#include "varsample/types.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <numeric>
#include <vector>

namespace varsample::linalg {

inline Element hermitize(const Element& x) { return (x + x.adjoint()) / 2.0; }

/// Singular values are sorted in descending order (Eigen's convention, and
/// part of the projection contract).
inline Eigen::JacobiSVD<Element> svd(const Element& x) {
  return Eigen::JacobiSVD<Element>(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
}

inline RealVector singular_values(const Element& x) {
  return Eigen::JacobiSVD<Element>(x).singularValues();
}

/// Best rank-r approximation in Frobenius norm.
inline Element truncate_rank(const Element& x, int r) {
  const Eigen::Index keep = std::min<Eigen::Index>(r, std::min(x.rows(), x.cols()));
  if (keep <= 0) return Element::Zero(x.rows(), x.cols());
  const auto s = svd(x);
  return s.matrixU().leftCols(keep) * s.singularValues().head(keep).asDiagonal() *
         s.matrixV().leftCols(keep).adjoint();
}

struct HermitianEigen {
  RealVector values;  // descending
  Element vectors;    // column i pairs with values(i)
};

/// Eigendecomposition of the Hermitian part of x, eigenvalues descending.
/// Equal eigenvalues keep the solver's order, so for a diagonal input the
/// lower coordinate index comes first.
inline HermitianEigen hermitian_eigen(const Element& x) {
  Eigen::SelfAdjointEigenSolver<Element> es(hermitize(x));
  const Eigen::Index n = x.rows();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const RealVector& ev = es.eigenvalues();
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return ev(a) > ev(b); });
  HermitianEigen out{RealVector(n), Element(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values(i) = ev(order[static_cast<std::size_t>(i)]);
    out.vectors.col(i) = es.eigenvectors().col(order[static_cast<std::size_t>(i)]);
  }
  return out;
}

/// Rank with singular-value cutoff rel_tol * sigma_max.
inline int numeric_rank(const RealVector& sigma, double rel_tol) {
  if (sigma.size() == 0) return 0;
  const double cut = rel_tol * sigma.maxCoeff();
  int r = 0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    if (sigma(i) > cut && sigma(i) > 0.0) ++r;
  }
  return r;
}

/// Orthonormal basis of the null space of a real matrix, with cutoff
/// rel_tol * sigma_max on the singular values.
struct NullSpace {
  RealMatrix basis;  // n x k, orthonormal columns
  double sigma_max = 0.0;
  double sigma_min_nonzero = 0.0;
};

inline NullSpace null_space(const RealMatrix& m, double rel_tol = 1e-10) {
  const Eigen::Index n = m.cols();
  NullSpace out;
  if (m.rows() == 0) {
    out.basis = RealMatrix::Identity(n, n);
    return out;
  }
  Eigen::BDCSVD<RealMatrix> s(m, Eigen::ComputeFullV);
  const RealVector& sigma = s.singularValues();
  const int rank = numeric_rank(sigma, rel_tol);
  out.sigma_max = sigma.size() > 0 ? sigma(0) : 0.0;
  out.sigma_min_nonzero = rank > 0 ? sigma(rank - 1) : 0.0;
  out.basis = s.matrixV().rightCols(n - rank);
  return out;
}

/// Gaussian element with i.i.d. N(0,1) real parts (and imaginary parts for
/// the complex field).
inline Element gaussian(int rows, int cols, Field field, Rng& rng) {
  Element x(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      const double re = rng.normal();
      const double im = field == Field::Complex ? rng.normal() : 0.0;
      x(i, j) = Complex(re, im);
    }
  }
  return x;
}

/// Determinant of the square submatrix picked by rows/cols.
inline Complex minor_det(const Element& q, const std::vector<int>& rows, const std::vector<int>& cols) {
  const auto p = static_cast<Eigen::Index>(rows.size());
  Element sub(p, p);
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < p; ++j) sub(i, j) = q(rows[i], cols[j]);
  if (p == 0) return Complex(1.0, 0.0);
  if (p == 1) return sub(0, 0);
  if (p == 2) return sub(0, 0) * sub(1, 1) - sub(0, 1) * sub(1, 0);
  if (p == 3) {
    return sub(0, 0) * (sub(1, 1) * sub(2, 2) - sub(1, 2) * sub(2, 1)) -
           sub(0, 1) * (sub(1, 0) * sub(2, 2) - sub(1, 2) * sub(2, 0)) +
           sub(0, 2) * (sub(1, 0) * sub(2, 1) - sub(1, 1) * sub(2, 0));
  }
  return sub.partialPivLu().determinant();
}

/// All size-p subsets of {0..n-1} in lexicographic order.
inline std::vector<std::vector<int>> combinations(int n, int p) {
  std::vector<std::vector<int>> out;
  if (p < 0 || p > n) return out;
  std::vector<int> idx(static_cast<std::size_t>(p));
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    out.push_back(idx);
    int i = p - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - p + i) --i;
    if (i < 0) break;
    ++idx[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < p; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
  return out;
}

/// Binomial coefficient, saturating at `cap` + 1.
inline long long binomial(int n, int k, long long cap = 1LL << 60) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  long double acc = 1.0L;
  for (int i = 1; i <= k; ++i) {
    acc = acc * static_cast<long double>(n - k + i) / static_cast<long double>(i);
    if (acc > static_cast<long double>(cap)) return cap + 1;
  }
  return static_cast<long long>(acc + 0.5L);
}

}  // namespace varsample::linalg

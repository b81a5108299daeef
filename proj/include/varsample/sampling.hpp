#pragma once

#include "varsample/linalg.hpp"
#include "varsample/rng.hpp"
#include "varsample/types.hpp"
#include "varsample/varieties.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace varsample {

/// Ordered list of m sampling operators sharing one shape and field.
class MeasurementEnsemble {
 public:
  MeasurementEnsemble(Field field, Shape shape, std::vector<Element> operators,
                      std::optional<std::vector<int>> ranks = std::nullopt,
                      std::optional<std::uint64_t> seed = std::nullopt, bool hermitian = false)
      : field_(field), shape_(shape), operators_(std::move(operators)), ranks_(std::move(ranks)), seed_(seed),
        hermitian_(hermitian) {
    validate();
  }

  Field field() const { return field_; }
  const Shape& shape() const { return shape_; }
  int d() const { return shape_.d; }
  int m() const { return static_cast<int>(operators_.size()); }
  const std::vector<Element>& operators() const { return operators_; }
  const Element& op(int j) const { return operators_[static_cast<std::size_t>(j)]; }
  const std::optional<std::vector<int>>& ranks() const { return ranks_; }
  const std::optional<std::uint64_t>& seed() const { return seed_; }
  bool hermitian() const { return hermitian_; }

  /// Largest Frobenius norm among the operators.
  double max_operator_norm() const {
    double n = 0.0;
    for (const auto& a : operators_) n = std::max(n, a.norm());
    return n;
  }

 private:
  void validate() const {
    if (operators_.empty()) throw std::invalid_argument("ensemble needs at least one operator");
    if (shape_.d < 1) throw std::invalid_argument("ensemble dimension must be positive");
    for (std::size_t j = 0; j < operators_.size(); ++j) {
      const Element& a = operators_[j];
      require_shape(shape_, a, "ensemble operator");
      if (!all_finite(a)) throw NumericError("ensemble operator " + std::to_string(j) + " is not finite");
      if (field_ == Field::Real && a.imag().cwiseAbs().maxCoeff() != 0.0) {
        throw std::invalid_argument("real ensemble operator " + std::to_string(j) + " has imaginary entries");
      }
      if (hermitian_) {
        if (shape_.is_vector()) throw std::invalid_argument("hermitian flag needs matrix operators");
        if ((a - a.adjoint()).norm() > 1e-12 * std::max(1.0, a.norm())) {
          throw std::invalid_argument("operator " + std::to_string(j) + " is flagged hermitian but is not");
        }
      }
    }
    if (ranks_) {
      if (ranks_->size() != operators_.size()) throw std::invalid_argument("ranks list length differs from m");
      if (shape_.is_vector()) throw std::invalid_argument("rank constraints need matrix operators");
      for (std::size_t j = 0; j < operators_.size(); ++j) {
        const int r = (*ranks_)[j];
        if (r < 0 || r > shape_.d) throw std::invalid_argument("rank constraint out of range");
        if (!membership(operators_[j], VarietySpec::low_rank(shape_.d, r, Field::Complex), 1e-8)) {
          throw std::invalid_argument("operator " + std::to_string(j) + " exceeds its rank constraint " +
                                      std::to_string(r));
        }
      }
    }
  }

  Field field_;
  Shape shape_;
  std::vector<Element> operators_;
  std::optional<std::vector<int>> ranks_;
  std::optional<std::uint64_t> seed_;
  bool hermitian_;
};

/// y_j = <A_j, x> = Tr(A_j x^*).
inline ComplexVector sample(const MeasurementEnsemble& e, const Element& x) {
  require_shape(e.shape(), x, "sample");
  ComplexVector y(e.m());
  for (int j = 0; j < e.m(); ++j) y(j) = inner(e.op(j), x);
  return y;
}

/// Adjoint of sample for the real inner product Re<.,.>: sum_j conj(r_j) A_j.
/// adjoint(e, sample(e, X)) is the normal operator applied to X.
inline Element adjoint(const MeasurementEnsemble& e, const ComplexVector& r) {
  if (r.size() != e.m()) throw ShapeError("adjoint: sample length differs from m");
  Element out = Element::Zero(e.shape().rows(), e.shape().cols());
  for (int j = 0; j < e.m(); ++j) out += std::conj(r(j)) * e.op(j);
  return out;
}

/// Returns a a^*.
inline Element lift_rank_one(const Element& a) {
  if (a.cols() != 1) throw ShapeError("lift_rank_one expects a column vector");
  return a * a.adjoint();
}

/// Matrix ensemble of the lifts a_j a_j^* of a vector ensemble.
inline MeasurementEnsemble lift_ensemble(const MeasurementEnsemble& e) {
  if (!e.shape().is_vector()) return e;
  std::vector<Element> ops;
  ops.reserve(static_cast<std::size_t>(e.m()));
  for (const auto& a : e.operators()) ops.push_back(lift_rank_one(a));
  return MeasurementEnsemble(e.field(), Shape::matrix(e.d()), std::move(ops), std::vector<int>(e.operators().size(), 1),
                             e.seed(), true);
}

/// tau(A) = (A + A^T)/2 + i (A - A^T)/2, a linear bijection from real matrices
/// onto Hermitian matrices.
inline Element tau(const Element& a) {
  if (a.rows() != a.cols()) throw ShapeError("tau expects a square matrix");
  if (a.imag().cwiseAbs().maxCoeff() != 0.0) throw std::invalid_argument("tau expects a real matrix");
  const RealMatrix re = a.real();
  const RealMatrix sym = (re + re.transpose()) / 2.0;
  const RealMatrix skew = (re - re.transpose()) / 2.0;
  Element out(a.rows(), a.cols());
  out.real() = sym;
  out.imag() = skew;
  return out;
}

/// Inverse of tau: the symmetric part is Re(H), the skew part is Im(H).
inline Element tau_inverse(const Element& h) {
  if (h.rows() != h.cols()) throw ShapeError("tau_inverse expects a square matrix");
  if ((h - h.adjoint()).norm() > 1e-12 * std::max(1.0, h.norm())) {
    throw std::invalid_argument("tau_inverse expects a Hermitian matrix");
  }
  const RealMatrix out = h.real() + h.imag();
  return out.cast<Complex>();
}

// -- generators ---------------------------------------------------------------
//
// Operator j always draws from the stream derive_seed(seed, j), so the first
// operators of an ensemble do not change when m grows.

inline MeasurementEnsemble gen_gaussian_vectors(int d, int m, Field field, std::uint64_t seed) {
  if (d < 1 || m < 1) throw std::invalid_argument("gen_gaussian_vectors: d and m must be positive");
  std::vector<Element> ops;
  for (int j = 0; j < m; ++j) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(j)));
    ops.push_back(linalg::gaussian(d, 1, field, rng));
  }
  return MeasurementEnsemble(field, Shape::vector(d), std::move(ops), std::nullopt, seed);
}

inline MeasurementEnsemble gen_gaussian_matrices(int d, int m, Field field, std::uint64_t seed) {
  if (d < 1 || m < 1) throw std::invalid_argument("gen_gaussian_matrices: d and m must be positive");
  std::vector<Element> ops;
  for (int j = 0; j < m; ++j) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(j)));
    ops.push_back(linalg::gaussian(d, d, field, rng));
  }
  return MeasurementEnsemble(field, Shape::matrix(d), std::move(ops), std::nullopt, seed);
}

/// Real symmetric A_j = sum_{i < r_j} z_i z_i^T with Gaussian z_i.
inline MeasurementEnsemble gen_symmetric_rank(int d, const std::vector<int>& ranks, std::uint64_t seed) {
  if (d < 1 || ranks.empty()) throw std::invalid_argument("gen_symmetric_rank: need d >= 1 and a rank list");
  std::vector<Element> ops;
  for (std::size_t j = 0; j < ranks.size(); ++j) {
    const int r = ranks[j];
    if (r < 0 || r > d) throw std::invalid_argument("gen_symmetric_rank: rank outside [0, d]");
    Rng rng(derive_seed(seed, j));
    Element a = Element::Zero(d, d);
    for (int i = 0; i < r; ++i) {
      const Element z = linalg::gaussian(d, 1, Field::Real, rng);
      a += z * z.transpose();
    }
    ops.push_back(linalg::hermitize(a));
  }
  return MeasurementEnsemble(Field::Real, Shape::matrix(d), std::move(ops), ranks, seed, true);
}

/// Hermitian A_j = sum_{i < r_j} lambda_i u_i u_i^* with lambda_i ~ N(0,1) and
/// complex Gaussian u_i.
inline MeasurementEnsemble gen_hermitian_rank(int d, const std::vector<int>& ranks, std::uint64_t seed) {
  if (d < 1 || ranks.empty()) throw std::invalid_argument("gen_hermitian_rank: need d >= 1 and a rank list");
  std::vector<Element> ops;
  for (std::size_t j = 0; j < ranks.size(); ++j) {
    const int r = ranks[j];
    if (r < 0 || r > d) throw std::invalid_argument("gen_hermitian_rank: rank outside [0, d]");
    Rng rng(derive_seed(seed, j));
    Element a = Element::Zero(d, d);
    for (int i = 0; i < r; ++i) {
      const double lambda = rng.normal();
      const Element u = linalg::gaussian(d, 1, Field::Complex, rng);
      a += lambda * (u * u.adjoint());
    }
    ops.push_back(linalg::hermitize(a));
  }
  return MeasurementEnsemble(Field::Complex, Shape::matrix(d), std::move(ops), ranks, seed, true);
}

}  // namespace varsample

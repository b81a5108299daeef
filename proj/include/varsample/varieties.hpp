#pragma once

#include "varsample/linalg.hpp"
#include "varsample/types.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace varsample {

enum class VarietyKind {
  Sparse,         // at most k nonzeros in C^d / R^d
  LowRank,        // d x d matrices of rank <= r
  SymLowRank,     // (Hermitian) symmetric d x d matrices of rank <= r
  HermSignature,  // Hermitian, at most one positive and one negative eigenvalue
  RankOneReal,    // real d x d matrices of rank <= 1
};

inline const char* to_string(VarietyKind k) {
  switch (k) {
    case VarietyKind::Sparse: return "sparse";
    case VarietyKind::LowRank: return "low_rank";
    case VarietyKind::SymLowRank: return "sym_low_rank";
    case VarietyKind::HermSignature: return "herm_sig";
    case VarietyKind::RankOneReal: return "rank_one_real";
  }
  return "?";
}

inline VarietyKind variety_kind_from_string(const std::string& s) {
  if (s == "sparse") return VarietyKind::Sparse;
  if (s == "low_rank") return VarietyKind::LowRank;
  if (s == "sym_low_rank") return VarietyKind::SymLowRank;
  if (s == "herm_sig") return VarietyKind::HermSignature;
  if (s == "rank_one_real") return VarietyKind::RankOneReal;
  throw std::invalid_argument("unknown variety kind '" + s + "'");
}

// -- dimension formulas -------------------------------------------------------

inline void require_range(int d, int p, const char* what) {
  if (d < 1) throw std::domain_error(std::string(what) + ": d must be positive");
  if (p < 0 || p > d) {
    throw std::domain_error(std::string(what) + ": parameter " + std::to_string(p) +
                            " outside [0, " + std::to_string(d) + "]");
  }
}

/// dim M_{d,r} = 2dr - r^2.
inline long long dim_low_rank(int d, int r) {
  require_range(d, r, "dim_low_rank");
  return 2LL * d * r - 1LL * r * r;
}

/// Dimension of complex symmetric d x d matrices of rank <= r: dr - r(r-1)/2.
inline long long dim_complex_symmetric(int d, int r) {
  require_range(d, r, "dim_complex_symmetric");
  return 1LL * d * r - 1LL * r * (r - 1) / 2;
}

inline long long dim_sparse(int d, int k) {
  require_range(d, k, "dim_sparse");
  return k;
}

/// Descriptor of a signal variety or of a difference variety W - W.
///
/// For phase retrieval the signal is the rank-one lift x x^*, written here as
/// SymLowRank with r = 1: over the reals its differences are RankOneReal
/// (through (x-y)(x+y)^T / 4), over the complex field they are HermSignature.
class VarietySpec {
 public:
  VarietySpec(VarietyKind kind, int d, int param, Field field) : kind_(kind), d_(d), param_(param), field_(field) {
    if (d < 1) throw std::domain_error("variety dimension d must be positive");
    if (kind == VarietyKind::HermSignature) {
      field_ = Field::Complex;
      param_ = std::min(2, d);
    } else if (kind == VarietyKind::RankOneReal) {
      field_ = Field::Real;
      param_ = 1;
    }
    require_range(d_, param_, to_string(kind));
  }

  static VarietySpec sparse(int d, int k, Field f = Field::Real) { return {VarietyKind::Sparse, d, k, f}; }
  static VarietySpec low_rank(int d, int r, Field f = Field::Real) { return {VarietyKind::LowRank, d, r, f}; }
  static VarietySpec sym_low_rank(int d, int r, Field f = Field::Real) {
    return {VarietyKind::SymLowRank, d, r, f};
  }
  static VarietySpec herm_signature(int d) { return {VarietyKind::HermSignature, d, 2, Field::Complex}; }
  static VarietySpec rank_one_real(int d) { return {VarietyKind::RankOneReal, d, 1, Field::Real}; }
  /// Rank-one lift of a phase retrieval signal.
  static VarietySpec phase_lift(int d, Field f) { return sym_low_rank(d, 1, f); }

  VarietyKind kind() const { return kind_; }
  int d() const { return d_; }
  /// k for sparse, r for the rank kinds.
  int param() const { return param_; }
  Field field() const { return field_; }

  Shape ambient() const { return kind_ == VarietyKind::Sparse ? Shape::vector(d_) : Shape::matrix(d_); }

  long long ambient_dimension() const {
    const long long n = kind_ == VarietyKind::Sparse ? d_ : 1LL * d_ * d_;
    return field_ == Field::Complex && kind_ != VarietyKind::Sparse ? 2 * n : n;
  }

  long long dimension() const {
    switch (kind_) {
      case VarietyKind::Sparse: return dim_sparse(d_, param_);
      case VarietyKind::LowRank: return dim_low_rank(d_, param_);
      case VarietyKind::SymLowRank: return dim_complex_symmetric(d_, param_);
      case VarietyKind::HermSignature: return dim_low_rank(d_, param_);
      case VarietyKind::RankOneReal: return dim_low_rank(d_, 1);
    }
    return 0;
  }

  bool is_full_space() const {
    return (kind_ == VarietyKind::Sparse || kind_ == VarietyKind::LowRank) && param_ == d_;
  }

  /// True for the rank-one lift used by phase retrieval.
  bool is_phase_lift() const { return kind_ == VarietyKind::SymLowRank && param_ == 1; }

  std::string describe() const {
    return std::string(to_string(kind_)) + ":" + std::to_string(d_) + ":" + std::to_string(param_) + "/" +
           to_string(field_);
  }

  friend bool operator==(const VarietySpec&, const VarietySpec&) = default;

 private:
  VarietyKind kind_;
  int d_;
  int param_;
  Field field_;
};

/// Variety containing every difference x - y of signal points.
inline VarietySpec difference_closure(const VarietySpec& w) {
  const int d = w.d();
  switch (w.kind()) {
    case VarietyKind::Sparse: return VarietySpec::sparse(d, std::min(2 * w.param(), d), w.field());
    case VarietyKind::LowRank: return VarietySpec::low_rank(d, std::min(2 * w.param(), d), w.field());
    case VarietyKind::SymLowRank:
      if (w.param() == 1) {
        return w.field() == Field::Real ? VarietySpec::rank_one_real(d) : VarietySpec::herm_signature(d);
      }
      return VarietySpec::sym_low_rank(d, std::min(2 * w.param(), d), w.field());
    // The difference kinds are not signal varieties; close them under
    // subtraction by plain rank doubling.
    case VarietyKind::HermSignature: return VarietySpec::low_rank(d, std::min(4, d), Field::Complex);
    case VarietyKind::RankOneReal: return VarietySpec::low_rank(d, std::min(2, d), Field::Real);
  }
  return w;
}

namespace detail {

inline Element restrict_field(const Element& x, Field f) {
  if (f == Field::Complex) return x;
  return x.real().cast<Complex>();
}

/// Indices sorted by descending magnitude, ties by lowest index.
inline std::vector<Eigen::Index> by_magnitude(const Element& x) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(x.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::abs(x.data()[a]) > std::abs(x.data()[b]);
  });
  return order;
}

inline Element from_eigenpairs(const linalg::HermitianEigen& eig, const std::vector<Eigen::Index>& keep,
                               Eigen::Index n) {
  Element out = Element::Zero(n, n);
  for (Eigen::Index i : keep) {
    out += eig.values(i) * eig.vectors.col(i) * eig.vectors.col(i).adjoint();
  }
  return out;
}

}  // namespace detail

/// Metric (Frobenius / Euclidean) projection onto w.
inline Element project(const Element& x, const VarietySpec& w) {
  require_shape(w.ambient(), x, "project");
  if (!all_finite(x)) throw NumericError("project: non-finite input");
  const Element xf = detail::restrict_field(x, w.field());
  const Eigen::Index n = w.d();

  switch (w.kind()) {
    case VarietyKind::Sparse: {
      Element out = Element::Zero(xf.rows(), xf.cols());
      const auto order = detail::by_magnitude(xf);
      for (int i = 0; i < w.param(); ++i) {
        const Eigen::Index j = order[static_cast<std::size_t>(i)];
        out.data()[j] = xf.data()[j];
      }
      return out;
    }
    case VarietyKind::LowRank: return detail::restrict_field(linalg::truncate_rank(xf, w.param()), w.field());
    case VarietyKind::RankOneReal: return detail::restrict_field(linalg::truncate_rank(xf, 1), Field::Real);
    case VarietyKind::SymLowRank: {
      const auto eig = linalg::hermitian_eigen(xf);
      std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
      std::iota(order.begin(), order.end(), Eigen::Index{0});
      std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return std::abs(eig.values(a)) > std::abs(eig.values(b));
      });
      order.resize(static_cast<std::size_t>(w.param()));
      Element out = detail::from_eigenpairs(eig, order, n);
      out = linalg::hermitize(out);
      return detail::restrict_field(out, w.field());
    }
    case VarietyKind::HermSignature: {
      const auto eig = linalg::hermitian_eigen(xf);
      std::vector<Eigen::Index> keep;
      // values are descending: the first is the largest, the last the most negative
      if (eig.values(0) > 0.0) keep.push_back(0);
      Eigen::Index neg = -1;
      for (Eigen::Index i = n - 1; i >= 0; --i) {
        if (eig.values(i) < 0.0 && (neg < 0 || eig.values(i) <= eig.values(neg))) neg = i;
      }
      if (neg >= 0 && (keep.empty() || neg != keep.front())) keep.push_back(neg);
      return linalg::hermitize(detail::from_eigenpairs(eig, keep, n));
    }
  }
  return xf;
}

/// Relative-tolerance membership test: the first excluded singular value,
/// magnitude or eigenvalue must be at most tol * ||x||.
inline bool membership(const Element& x, const VarietySpec& w, double tol = 1e-8) {
  require_shape(w.ambient(), x, "membership");
  if (!all_finite(x)) return false;
  const double thr = tol * x.norm();
  if (w.field() == Field::Real && x.imag().norm() > thr) return false;
  const int p = w.param();

  switch (w.kind()) {
    case VarietyKind::Sparse: {
      if (p >= w.d()) return true;
      const auto order = detail::by_magnitude(x);
      return std::abs(x.data()[order[static_cast<std::size_t>(p)]]) <= thr;
    }
    case VarietyKind::LowRank:
    case VarietyKind::RankOneReal: {
      if (p >= w.d()) return true;
      return linalg::singular_values(x)(p) <= thr;
    }
    case VarietyKind::SymLowRank: {
      if ((x - x.adjoint()).norm() > thr) return false;
      if (p >= w.d()) return true;
      RealVector ev = linalg::hermitian_eigen(x).values.cwiseAbs();
      std::sort(ev.data(), ev.data() + ev.size(), std::greater<>());
      return ev(p) <= thr;
    }
    case VarietyKind::HermSignature: {
      if ((x - x.adjoint()).norm() > thr) return false;
      const RealVector ev = linalg::hermitian_eigen(x).values;
      int pos = 0, neg = 0;
      for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev(i) > thr) ++pos;
        if (ev(i) < -thr) ++neg;
      }
      return pos <= 1 && neg <= 1;
    }
  }
  return false;
}

/// Parses "kind:param" or "kind:d:param" (e.g. "sparse:2", "low_rank:4:1").
/// `default_d` fills in d when only the parameter is given.
inline VarietySpec parse_variety(const std::string& text, int default_d, Field field) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(':', start);
    parts.push_back(text.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  const VarietyKind kind = variety_kind_from_string(parts[0]);
  int d = default_d;
  int param = 0;
  if (parts.size() == 2) {
    param = std::stoi(parts[1]);
  } else if (parts.size() == 3) {
    d = std::stoi(parts[1]);
    param = std::stoi(parts[2]);
  } else if (parts.size() != 1 || (kind != VarietyKind::HermSignature && kind != VarietyKind::RankOneReal)) {
    throw std::invalid_argument("variety must look like kind:param or kind:d:param, got '" + text + "'");
  }
  return VarietySpec(kind, d, param, field);
}

/// Distance between the classes of x and y under x ~ c x with |c| = 1
/// (c = +-1 over the reals).
inline double equivalence_distance(const Element& x, const Element& y, Field field) {
  if (x.rows() != y.rows() || x.cols() != y.cols()) throw ShapeError("equivalence_distance: shape mismatch");
  if (field == Field::Real) return std::min((x - y).norm(), (x + y).norm());
  // The minimizing unimodular c aligns y with x; evaluating ||x - c y|| directly
  // avoids the cancellation in sqrt(|x|^2 + |y|^2 - 2|<x,y>|).
  const Complex ip = (x.array() * y.array().conjugate()).sum();
  const double mag = std::abs(ip);
  const Complex c = mag > 0.0 ? ip / mag : Complex(1.0, 0.0);
  return (x - c * y).norm();
}

/// Rescales x by a unimodular constant so its largest-magnitude entry is real
/// and positive (lowest index on ties).
inline Element normalize_phase(const Element& x) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < x.size(); ++i) {
    if (std::abs(x.data()[i]) > std::abs(x.data()[best])) best = i;
  }
  const double mag = std::abs(x.data()[best]);
  if (mag == 0.0) return x;
  return x * (std::abs(x.data()[best]) / x.data()[best]);
}

}  // namespace varsample

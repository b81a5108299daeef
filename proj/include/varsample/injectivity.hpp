#pragma once

#include "varsample/kernel_search.hpp"
#include "varsample/linalg.hpp"
#include "varsample/rng.hpp"
#include "varsample/sampling.hpp"
#include "varsample/types.hpp"
#include "varsample/varieties.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace varsample {

// -- complement property ------------------------------------------------------

struct ComplementResult {
  bool holds = true;
  std::vector<int> failing_subset;  // 0-based, empty when holds
  long long subsets_checked = 0;
};

inline constexpr int kComplementMaxM = 24;

namespace detail {

inline int span_rank(const RealMatrix& rows, const std::vector<int>& pick) {
  if (pick.empty()) return 0;
  RealMatrix sub(static_cast<Eigen::Index>(pick.size()), rows.cols());
  for (std::size_t i = 0; i < pick.size(); ++i) sub.row(static_cast<Eigen::Index>(i)) = rows.row(pick[i]);
  const RealVector s = Eigen::JacobiSVD<RealMatrix>(sub).singularValues();
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) rank += s(i) > 1e-10 ? 1 : 0;
  return rank;
}

inline std::vector<int> complement_of(const std::vector<int>& s, int m) {
  std::vector<int> out;
  std::size_t p = 0;
  for (int j = 0; j < m; ++j) {
    if (p < s.size() && s[p] == j) {
      ++p;
    } else {
      out.push_back(j);
    }
  }
  return out;
}

inline RealMatrix real_rows(const MeasurementEnsemble& e) {
  if (!e.shape().is_vector() || e.field() != Field::Real) {
    throw std::invalid_argument("complement property needs a real vector ensemble");
  }
  RealMatrix rows(e.m(), e.d());
  for (int j = 0; j < e.m(); ++j) {
    RealVector a = e.op(j).col(0).real();
    const double n = a.norm();
    rows.row(j) = n > 0.0 ? RealVector(a / n) : a;  // rank is scale-free; unit rows make the cutoff absolute
  }
  return rows;
}

}  // namespace detail

/// For every S of size <= m/2 (by size, then lexicographically) checks that
/// the rows in S or the rows outside S span R^d. Returns the first S where
/// neither does.
inline ComplementResult complement_property(const MeasurementEnsemble& e) {
  if (e.m() > kComplementMaxM) {
    throw BudgetError("complement property enumeration is limited to m <= 24 (got m = " + std::to_string(e.m()) +
                      "); use witness_search on the lifted ensemble instead");
  }
  const RealMatrix rows = detail::real_rows(e);
  const int m = e.m(), d = e.d();
  ComplementResult out;
  for (int size = 0; size <= m / 2; ++size) {
    for (const auto& s : linalg::combinations(m, size)) {
      ++out.subsets_checked;
      if (detail::span_rank(rows, s) == d) continue;
      if (detail::span_rank(rows, detail::complement_of(s, m)) == d) continue;
      out.holds = false;
      out.failing_subset = s;
      return out;
    }
  }
  return out;
}

// -- verdicts -----------------------------------------------------------------

enum class Status { CertifiedExact, NoWitnessFound, RefutedWithWitness, Inconclusive };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::CertifiedExact: return "CertifiedExact";
    case Status::NoWitnessFound: return "NoWitnessFound";
    case Status::RefutedWithWitness: return "RefutedWithWitness";
    case Status::Inconclusive: return "Inconclusive";
  }
  return "?";
}

/// Two signals with the same samples.
struct Collision {
  Element x;
  Element y;
  double gap = 0.0;  // ||measure(x) - measure(y)|| / (||M||_op ||D||), D the sampled difference
  bool distinct = true;
};

struct CertifyConfig {
  SearchConfig search;
  bool exact_tests = true;           // complement property / support enumeration when they apply
  long long support_budget = 200000;  // largest support count enumerated exactly
};

struct InjectivityVerdict {
  Status status = Status::Inconclusive;
  std::string method;
  VarietySpec signal = VarietySpec::sparse(1, 0);
  VarietySpec difference = VarietySpec::sparse(1, 0);
  std::optional<double> margin;
  std::optional<Witness> witness;
  std::optional<Collision> collision;
  std::vector<int> failing_subset;
  int restarts_used = 0;
  long long iterations = 0;
  long long kernel_dimension = 0;
  CertifyConfig config;
};

/// Samples of a signal: |<a_j, x>|^2 (vector ensemble) or x^* A_j x (matrix
/// ensemble) for phase lifts, plain sample(e, x) otherwise.
inline ComplexVector measure(const MeasurementEnsemble& e, const VarietySpec& signal, const Element& x) {
  if (signal.is_phase_lift() && x.cols() == 1) return sample(lift_ensemble(e), lift_rank_one(x));
  return sample(e, x);
}

/// The ensemble the difference variety is sampled through.
inline MeasurementEnsemble difference_ensemble(const MeasurementEnsemble& e, const VarietySpec& signal) {
  return signal.is_phase_lift() ? lift_ensemble(e) : e;
}

inline double operator_norm(const MeasurementEnsemble& e, Field field) {
  const RealifiedOperator op(e, Coordinates(e.shape(), field));
  return op.sigma_max();
}

/// Splits a difference-variety element q into two signals with equal samples.
inline Collision witness_to_collision(const MeasurementEnsemble& e, const VarietySpec& signal, const Element& q) {
  const VarietySpec diff = difference_closure(signal);
  Collision c;
  switch (diff.kind()) {
    case VarietyKind::Sparse: {
      c.x = Element::Zero(q.rows(), 1);
      c.y = Element::Zero(q.rows(), 1);
      int taken = 0;
      for (Eigen::Index i = 0; i < q.rows(); ++i) {
        if (q(i, 0) == Complex(0.0, 0.0)) continue;
        if (taken < signal.param()) {
          c.x(i, 0) = q(i, 0);
          ++taken;
        } else {
          c.y(i, 0) = -q(i, 0);
        }
      }
      break;
    }
    case VarietyKind::LowRank: {
      const auto s = linalg::svd(q);
      const Eigen::Index r = std::min<Eigen::Index>(signal.param(), s.singularValues().size());
      const Eigen::Index n = s.singularValues().size();
      c.x = s.matrixU().leftCols(r) * s.singularValues().head(r).asDiagonal() * s.matrixV().leftCols(r).adjoint();
      c.y = -(s.matrixU().rightCols(n - r) * s.singularValues().tail(n - r).asDiagonal() *
              s.matrixV().rightCols(n - r).adjoint());
      if (signal.field() == Field::Real) {
        c.x = c.x.real().cast<Complex>();
        c.y = c.y.real().cast<Complex>();
      }
      break;
    }
    case VarietyKind::HermSignature: {
      const auto eig = linalg::hermitian_eigen(linalg::hermitize(q));
      const Eigen::Index last = eig.values.size() - 1;
      c.x = std::sqrt(std::max(0.0, eig.values(0))) * eig.vectors.col(0);
      c.y = std::sqrt(std::max(0.0, -eig.values(last))) * eig.vectors.col(last);
      break;
    }
    case VarietyKind::RankOneReal: {
      // q = a b^T and x = a + b, y = b - a give (x - y)(x + y)^T / 4 = q.
      const Eigen::JacobiSVD<RealMatrix> s(RealMatrix(q.real()), Eigen::ComputeThinU | Eigen::ComputeThinV);
      const double root = std::sqrt(s.singularValues()(0));
      const Element a = (root * s.matrixU().col(0)).cast<Complex>();
      const Element b = (root * s.matrixV().col(0)).cast<Complex>();
      c.x = a + b;
      c.y = b - a;
      break;
    }
    case VarietyKind::SymLowRank: {
      const auto eig = linalg::hermitian_eigen(linalg::hermitize(q));
      std::vector<Eigen::Index> order(static_cast<std::size_t>(eig.values.size()));
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Eigen::Index>(i);
      std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return std::abs(eig.values(a)) > std::abs(eig.values(b));
      });
      c.x = Element::Zero(q.rows(), q.cols());
      c.y = Element::Zero(q.rows(), q.cols());
      for (std::size_t i = 0; i < order.size(); ++i) {
        const Eigen::Index k = order[i];
        const Element part = eig.values(k) * eig.vectors.col(k) * eig.vectors.col(k).adjoint();
        if (static_cast<int>(i) < signal.param()) {
          c.x += part;
        } else {
          c.y -= part;
        }
      }
      if (signal.field() == Field::Real) {
        c.x = c.x.real().cast<Complex>();
        c.y = c.y.real().cast<Complex>();
      }
      break;
    }
  }
  const MeasurementEnsemble de = difference_ensemble(e, signal);
  const double sigma = operator_norm(de, diff.field());
  const double raw = (measure(e, signal, c.x) - measure(e, signal, c.y)).norm();
  // vector collisions of phase signals are compared up to a global phase
  const bool phase = signal.is_phase_lift() && c.x.cols() == 1;
  const double spread = phase ? (lift_rank_one(c.x) - lift_rank_one(c.y)).norm() : (c.x - c.y).norm();
  const double scale = sigma * spread;
  c.gap = scale > 0.0 ? raw / scale : raw;
  const double dist = phase ? equivalence_distance(c.x, c.y, signal.field()) : (c.x - c.y).norm();
  c.distinct = dist > 1e-8 * std::max(c.x.norm(), c.y.norm());
  return c;
}

// -- certify ------------------------------------------------------------------

namespace detail {

inline InjectivityVerdict refuted(InjectivityVerdict v, const MeasurementEnsemble& e, const Element& q,
                                  double residual) {
  v.status = Status::RefutedWithWitness;
  v.margin = 0.0;
  v.witness = Witness{q, residual, 0, 0};
  v.collision = witness_to_collision(e, v.signal, q);
  return v;
}

/// Exact test for sparse signals: the map is injective on k-sparse vectors iff
/// every column submatrix on min(2k, d) columns has trivial kernel.
inline InjectivityVerdict certify_supports(InjectivityVerdict v, const MeasurementEnsemble& e,
                                           const RealifiedOperator& op) {
  const VarietySpec& w = v.difference;
  const int width = (w.field() == Field::Complex) ? 2 : 1;
  for (const auto& support : linalg::combinations(w.d(), w.param())) {
    ++v.iterations;
    RealMatrix sub(op.matrix().rows(), static_cast<Eigen::Index>(support.size()) * width);
    for (std::size_t i = 0; i < support.size(); ++i) {
      for (int c = 0; c < width; ++c) {
        sub.col(static_cast<Eigen::Index>(i) * width + c) = op.matrix().col(support[i] * width + c);
      }
    }
    const auto ns = linalg::null_space(sub, 1e-10);
    if (ns.basis.cols() == 0) continue;
    RealVector z = RealVector::Zero(op.coords().size());
    for (std::size_t i = 0; i < support.size(); ++i) {
      for (int c = 0; c < width; ++c) {
        z(support[i] * width + c) = ns.basis(static_cast<Eigen::Index>(i) * width + c, 0);
      }
    }
    Element q = op.coords().from_real(z / z.norm());
    return refuted(std::move(v), e, q, op.relative_residual(q));
  }
  v.status = Status::CertifiedExact;
  return v;
}

}  // namespace detail

/// Decides injectivity of the ensemble on a signal variety by looking for a
/// nonzero kernel element in its difference variety.
inline InjectivityVerdict certify(const MeasurementEnsemble& e, const VarietySpec& signal, const CertifyConfig& cfg = {}) {
  InjectivityVerdict v;
  v.signal = signal;
  v.difference = difference_closure(signal);
  v.config = cfg;
  if (signal.kind() == VarietyKind::HermSignature || signal.kind() == VarietyKind::RankOneReal) {
    throw std::invalid_argument("certify expects a signal variety, not a difference variety");
  }
  if (signal.d() != e.d()) throw ShapeError("variety dimension differs from the ensemble's");

  const bool vector_phase = signal.is_phase_lift() && e.shape().is_vector();
  if (!vector_phase && !(e.shape() == signal.ambient())) {
    throw ShapeError("ensemble shape does not match the variety ambient");
  }
  const MeasurementEnsemble de = difference_ensemble(e, signal);

  if (cfg.exact_tests && vector_phase && signal.field() == Field::Real && e.field() == Field::Real &&
      e.m() <= kComplementMaxM) {
    v.method = "complement_property";
    const ComplementResult cp = complement_property(e);
    v.iterations = cp.subsets_checked;
    if (cp.holds) {
      v.status = Status::CertifiedExact;
      return v;
    }
    v.failing_subset = cp.failing_subset;
    // u annihilates the rows in S, w the rows outside S; then a_j^T (u w^T) a_j = 0.
    const RealMatrix rows = detail::real_rows(e);
    auto orthogonal = [&](const std::vector<int>& pick) {
      if (pick.empty()) return RealVector(RealVector::Unit(e.d(), 0));
      RealMatrix sub(static_cast<Eigen::Index>(pick.size()), e.d());
      for (std::size_t i = 0; i < pick.size(); ++i) sub.row(static_cast<Eigen::Index>(i)) = rows.row(pick[i]);
      return RealVector(linalg::null_space(sub, 1e-10).basis.col(0));
    };
    const RealVector u = orthogonal(cp.failing_subset);
    const RealVector w = orthogonal(detail::complement_of(cp.failing_subset, e.m()));
    Element q = (u * w.transpose()).cast<Complex>();
    q /= q.norm();
    const RealifiedOperator op(de, Coordinates(v.difference.ambient(), v.difference.field()));
    v.kernel_dimension = op.kernel_dimension();
    return detail::refuted(std::move(v), e, q, op.relative_residual(q));
  }

  const RealifiedOperator op(de, Coordinates(v.difference.ambient(), v.difference.field()));
  v.kernel_dimension = op.kernel_dimension();
  if (op.kernel_dimension() == 0) {
    v.method = "kernel_nullity";
    v.status = Status::CertifiedExact;
    return v;
  }
  if (v.difference.is_full_space()) {
    v.method = "kernel_nullity";
    const Element q = op.coords().from_real(op.kernel().col(0));
    return detail::refuted(std::move(v), e, q, op.relative_residual(q));
  }
  if (cfg.exact_tests && v.difference.kind() == VarietyKind::Sparse &&
      linalg::binomial(v.difference.d(), v.difference.param(), cfg.support_budget) <= cfg.support_budget) {
    v.method = "support_enumeration";
    return detail::certify_supports(std::move(v), e, op);
  }

  v.method = "witness_search";
  const SearchResult found = witness_search(de, v.difference, cfg.search);
  v.restarts_used = found.restarts_used;
  v.iterations = found.iterations;
  if (found.witness) {
    v.status = Status::RefutedWithWitness;
    v.margin = 0.0;
    v.witness = found.witness;
    v.collision = witness_to_collision(e, signal, found.witness->element);
    return v;
  }
  v.margin = found.margin;
  v.status = found.margin > cfg.search.margin_threshold ? Status::NoWitnessFound : Status::Inconclusive;
  return v;
}

// -- minor system -------------------------------------------------------------

/// Sum of |det|^2 over all (r+1) x (r+1) minors; zero iff rank(q) <= r.
inline double minor_residual(const Element& q, int r) {
  if (q.rows() != q.cols()) throw ShapeError("minor_residual expects a square matrix");
  const int n = static_cast<int>(q.rows());
  if (r < 0) throw std::domain_error("minor_residual: negative rank");
  if (r + 1 > n) return 0.0;
  const auto idx = linalg::combinations(n, r + 1);
  double total = 0.0;
  for (const auto& rows : idx)
    for (const auto& cols : idx) total += std::norm(linalg::minor_det(q, rows, cols));
  return total;
}

struct MinorSystemConfig {
  int restarts = 500;
  int max_iters = 300;
  double grad_tol = 1e-14;
  std::uint64_t seed = 0;
};

struct MinorSystemResult {
  double min_residual = std::numeric_limits<double>::infinity();
  RealVector argmin;  // kernel coordinates t, empty when the kernel is {0}
  Element matrix;     // Q(t)
  int best_restart = -1;
  int restarts = 0;
  long long kernel_dimension = 0;
};

namespace detail {

/// f(Q) = sum over 3x3 minors of det^2 and its gradient in Q for a real
/// square Q (cofactor expansion).
inline double minor_objective(const RealMatrix& q, int r, RealMatrix* grad) {
  const int n = static_cast<int>(q.rows());
  const int p = r + 1;
  const auto idx = linalg::combinations(n, p);
  double f = 0.0;
  if (grad) grad->setZero(n, n);
  RealMatrix sub(p, p);
  for (const auto& rows : idx) {
    for (const auto& cols : idx) {
      for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) sub(i, j) = q(rows[static_cast<std::size_t>(i)], cols[static_cast<std::size_t>(j)]);
      const double det = sub.determinant();
      f += det * det;
      if (!grad) continue;
      RealMatrix minor(p - 1, p - 1);
      for (int i = 0; i < p; ++i) {
        for (int j = 0; j < p; ++j) {
          double cof = 1.0;
          if (p > 1) {
            for (int a = 0, ra = 0; a < p; ++a) {
              if (a == i) continue;
              for (int b = 0, cb = 0; b < p; ++b) {
                if (b == j) continue;
                minor(ra, cb++) = sub(a, b);
              }
              ++ra;
            }
            cof = ((i + j) % 2 == 0 ? 1.0 : -1.0) * minor.determinant();
          }
          (*grad)(rows[static_cast<std::size_t>(i)], cols[static_cast<std::size_t>(j)]) += 2.0 * det * cof;
        }
      }
    }
  }
  return f;
}

}  // namespace detail

/// Minimizes minor_residual(Q, r) over unit Q in the kernel of a real matrix
/// ensemble: Riemannian gradient descent with Armijo backtracking on the unit
/// sphere of kernel coordinates, from cfg.restarts seeded starts.
inline MinorSystemResult verify_kernel_minor_system(const MeasurementEnsemble& e, int r = 2,
                                                    const MinorSystemConfig& cfg = {}) {
  if (e.shape().is_vector() || e.field() != Field::Real) {
    throw std::invalid_argument("verify_kernel_minor_system needs a real matrix ensemble");
  }
  const Coordinates coords(e.shape(), Field::Real);
  const RealifiedOperator op(e, coords);
  MinorSystemResult out;
  out.kernel_dimension = op.kernel_dimension();
  if (op.kernel_dimension() == 0) return out;
  const RealMatrix& basis = op.kernel();
  const int n = e.d();

  auto to_matrix = [&](const RealVector& t) {
    const RealVector z = basis * t;
    RealMatrix q(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) q(i, j) = z(i * n + j);
    return q;
  };
  auto value_and_grad = [&](const RealVector& t, RealVector* g) {
    const RealMatrix q = to_matrix(t);
    RealMatrix gq;
    const double f = detail::minor_objective(q, r, g ? &gq : nullptr);
    if (g) {
      RealVector flat(n * n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) flat(i * n + j) = gq(i, j);
      *g = basis.transpose() * flat;
      *g -= g->dot(t) * t;  // tangent to the sphere
    }
    return f;
  };

  for (int restart = 0; restart < cfg.restarts; ++restart) {
    ++out.restarts;
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(restart)));
    RealVector t(basis.cols());
    for (Eigen::Index i = 0; i < t.size(); ++i) t(i) = rng.normal();
    t.normalize();
    RealVector g;
    double f = value_and_grad(t, &g);
    double step = 1.0;
    for (int it = 0; it < cfg.max_iters && g.norm() > cfg.grad_tol && f > 0.0; ++it) {
      const double gg = g.squaredNorm();
      bool moved = false;
      for (int bt = 0; bt < 60; ++bt) {
        const RealVector cand = (t - step * g).normalized();
        const double fc = value_and_grad(cand, nullptr);
        if (fc <= f - 1e-4 * step * gg) {
          t = cand;
          moved = true;
          break;
        }
        step /= 2.0;
      }
      if (!moved) break;
      f = value_and_grad(t, &g);
      step *= 4.0;
    }
    if (f < out.min_residual) {
      out.min_residual = f;
      out.argmin = t;
      out.best_restart = restart;
    }
  }
  out.matrix = to_matrix(out.argmin).cast<Complex>();
  return out;
}

// -- admissibility probe --------------------------------------------------------

using VarietySampler = std::function<Element(Rng&)>;

/// Real symmetric d x d matrices (G + G^T) / 2.
inline VarietySampler symmetric_sampler(int d) {
  return [d](Rng& rng) {
    const Element g = linalg::gaussian(d, d, Field::Real, rng);
    return Element((g + g.transpose()) / 2.0);
  };
}

/// All d x d matrices over the field.
inline VarietySampler full_sampler(int d, Field field) {
  return [d, field](Rng& rng) { return linalg::gaussian(d, d, field, rng); };
}

struct ProbeResult {
  bool vanishes = true;
  std::optional<Element> sample;  // first non-degenerate point
  int samples_checked = 0;
  double max_ratio = 0.0;  // max |l(X)| / (||X|| ||F||)
};

/// Evaluates l(X) = Tr(F X^T) on random variety points and reports the first
/// point where it is clearly nonzero.
inline ProbeResult admissibility_probe(const VarietySampler& sampler, const Element& functional, int n_samples,
                                       std::uint64_t seed) {
  const double fn = functional.norm();
  if (fn == 0.0) throw std::invalid_argument("admissibility_probe: functional must be nonzero");
  Rng rng(seed);
  ProbeResult out;
  for (int i = 0; i < n_samples; ++i) {
    const Element x = sampler(rng);
    if (x.rows() != functional.rows() || x.cols() != functional.cols()) {
      throw ShapeError("admissibility_probe: sample shape differs from the functional");
    }
    ++out.samples_checked;
    const double value = std::abs((functional.array() * x.array()).sum());
    const double scale = x.norm() * fn;
    if (scale > 0.0) out.max_ratio = std::max(out.max_ratio, value / scale);
    if (value > 1e-10 * scale) {
      out.vanishes = false;
      out.sample = x;
      return out;
    }
  }
  return out;
}

}  // namespace varsample

#pragma once

#include "varsample/linalg.hpp"
#include "varsample/rng.hpp"
#include "varsample/sampling.hpp"
#include "varsample/types.hpp"
#include "varsample/varieties.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>
#include <limits>
#include <optional>

namespace varsample {

struct SearchConfig {
  int restarts = 200;
  int max_iters = 500;
  double tol_feas = 1e-8;
  std::uint64_t seed = 0;
  double margin_threshold = 1e-6;
  int refine_iters = 30;  // factored Gauss-Newton steps after the projections
};

/// The sampling map of an ensemble written as a real matrix acting on the real
/// coordinates of a variety's ambient space. Rows are (Re y_j) then (Im y_j),
/// so ||M z|| = ||sample(e, x)||.
class RealifiedOperator {
 public:
  RealifiedOperator(const MeasurementEnsemble& e, const Coordinates& coords, double kernel_cutoff = 1e-10)
      : coords_(coords) {
    if (!(e.shape() == coords.shape())) throw ShapeError("ensemble shape differs from the variety ambient");
    const Eigen::Index n = coords.size();
    matrix_.resize(2 * e.m(), n);
    RealVector unit = RealVector::Zero(n);
    for (Eigen::Index c = 0; c < n; ++c) {
      unit(c) = 1.0;
      const ComplexVector y = sample(e, coords.from_real(unit));
      unit(c) = 0.0;
      matrix_.col(c).head(e.m()) = y.real();
      matrix_.col(c).tail(e.m()) = y.imag();
    }
    kernel_ = linalg::null_space(matrix_, kernel_cutoff);
  }

  const Coordinates& coords() const { return coords_; }
  const RealMatrix& matrix() const { return matrix_; }
  const RealMatrix& kernel() const { return kernel_.basis; }
  Eigen::Index kernel_dimension() const { return kernel_.basis.cols(); }
  double sigma_max() const { return kernel_.sigma_max; }

  double residual(const Element& x) const { return (matrix_ * coords_.to_real(x)).norm(); }

  /// ||sample(e, x)|| / ||M||_op.
  double relative_residual(const Element& x) const {
    const double r = residual(x);
    return sigma_max() > 0.0 ? r / sigma_max() : r;
  }

  Element project_kernel(const Element& x) const {
    const RealVector z = coords_.to_real(x);
    return coords_.from_real(kernel_.basis * (kernel_.basis.transpose() * z));
  }

  double kernel_distance(const Element& x) const {
    const RealVector z = coords_.to_real(x);
    return (z - kernel_.basis * (kernel_.basis.transpose() * z)).norm();
  }

  /// Unit-norm random kernel element.
  Element random_kernel_element(Rng& rng) const {
    RealVector g(kernel_dimension());
    for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = rng.normal();
    const RealVector z = kernel_.basis * g;
    return coords_.from_real(z / z.norm());
  }

 private:
  Coordinates coords_;
  RealMatrix matrix_;
  linalg::NullSpace kernel_;
};

/// Nonzero element of a difference variety annihilated by the sampling map.
struct Witness {
  Element element;        // unit Frobenius norm, exact member of the variety
  double residual = 0.0;  // ||sample(e, element)|| / ||M||_op
  int restart = 0;
  int iterations = 0;
};

struct SearchResult {
  std::optional<Witness> witness;
  /// Smallest relative residual seen at unit-norm variety points.
  double margin = std::numeric_limits<double>::infinity();
  int restarts_used = 0;
  long long iterations = 0;
  bool trivial_kernel = false;
};

namespace detail {

/// Factored parametrization of a variety near a member x: q(theta) lies in the
/// variety for every real theta and is at most quadratic in theta.
struct Factored {
  RealVector theta;
  std::function<Element(const RealVector&)> build;
  int degree = 2;  // q(c theta) = c^degree q(theta)
};

/// Packs complex (or real) blocks into one real parameter vector.
class BlockPacker {
 public:
  BlockPacker(Field field) : complex_(field == Field::Complex) {}

  void add(const Element& block) {
    blocks_.push_back({block.rows(), block.cols()});
    for (Eigen::Index i = 0; i < block.size(); ++i) {
      values_.push_back(block.data()[i].real());
      if (complex_) values_.push_back(block.data()[i].imag());
    }
  }

  RealVector theta() const { return Eigen::Map<const RealVector>(values_.data(), static_cast<Eigen::Index>(values_.size())); }

  std::vector<Element> unpack(const RealVector& t) const {
    std::vector<Element> out;
    Eigen::Index pos = 0;
    for (const auto& [r, c] : blocks_) {
      Element b(r, c);
      for (Eigen::Index i = 0; i < b.size(); ++i) {
        const double re = t(pos++);
        b.data()[i] = complex_ ? Complex(re, t(pos++)) : Complex(re, 0.0);
      }
      out.push_back(std::move(b));
    }
    return out;
  }

 private:
  bool complex_;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> blocks_;
  std::vector<double> values_;
};

inline Factored factor(const Element& x, const VarietySpec& w) {
  auto packer = std::make_shared<BlockPacker>(w.field());
  switch (w.kind()) {
    case VarietyKind::Sparse: {
      std::vector<Eigen::Index> support;
      for (Eigen::Index i = 0; i < x.size(); ++i)
        if (x.data()[i] != Complex(0.0, 0.0)) support.push_back(i);
      Element vals(static_cast<Eigen::Index>(support.size()), 1);
      for (std::size_t i = 0; i < support.size(); ++i) vals(static_cast<Eigen::Index>(i), 0) = x.data()[support[i]];
      packer->add(vals);
      const Eigen::Index rows = x.rows(), cols = x.cols();
      return {packer->theta(), [packer, support, rows, cols](const RealVector& t) {
                const Element v = packer->unpack(t)[0];
                Element q = Element::Zero(rows, cols);
                for (std::size_t i = 0; i < support.size(); ++i) q.data()[support[i]] = v(static_cast<Eigen::Index>(i), 0);
                return q;
              },
              1};
    }
    case VarietyKind::LowRank:
    case VarietyKind::RankOneReal: {
      const auto s = linalg::svd(x);
      const Eigen::Index r = std::min<Eigen::Index>(w.param(), s.singularValues().size());
      const RealVector root = s.singularValues().head(r).cwiseSqrt();
      Element u = s.matrixU().leftCols(r) * root.asDiagonal();
      Element v = s.matrixV().leftCols(r) * root.asDiagonal();
      if (w.field() == Field::Real) {
        // a real x has a real SVD; recompute it so the factors carry no phase
        const Eigen::JacobiSVD<RealMatrix> rs(RealMatrix(x.real()), Eigen::ComputeThinU | Eigen::ComputeThinV);
        const RealVector rr = rs.singularValues().head(r).cwiseSqrt();
        u = (rs.matrixU().leftCols(r) * rr.asDiagonal()).cast<Complex>();
        v = (rs.matrixV().leftCols(r) * rr.asDiagonal()).cast<Complex>();
      }
      packer->add(u);
      packer->add(v);
      return {packer->theta(), [packer](const RealVector& t) {
                const auto b = packer->unpack(t);
                return Element(b[0] * b[1].adjoint());
              }};
    }
    case VarietyKind::SymLowRank:
    case VarietyKind::HermSignature: {
      const auto eig = linalg::hermitian_eigen(linalg::hermitize(x));
      std::vector<double> signs;
      std::vector<Eigen::Index> keep;
      for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
        if (std::abs(eig.values(i)) > 1e-12 * std::max(1.0, std::abs(eig.values(0)))) keep.push_back(i);
      }
      Element u(x.rows(), static_cast<Eigen::Index>(keep.size()));
      for (std::size_t i = 0; i < keep.size(); ++i) {
        const double l = eig.values(keep[i]);
        signs.push_back(l > 0.0 ? 1.0 : -1.0);
        u.col(static_cast<Eigen::Index>(i)) = std::sqrt(std::abs(l)) * eig.vectors.col(keep[i]);
      }
      if (w.field() == Field::Real) u = u.real().cast<Complex>();
      packer->add(u);
      return {packer->theta(), [packer, signs](const RealVector& t) {
                const Element f = packer->unpack(t)[0];
                Element q = Element::Zero(f.rows(), f.rows());
                for (Eigen::Index i = 0; i < f.cols(); ++i) q += signs[static_cast<std::size_t>(i)] * f.col(i) * f.col(i).adjoint();
                return q;
              }};
    }
  }
  throw std::logic_error("unknown variety kind");
}

/// Levenberg-Marquardt on ||M q(theta)|| with the linearized normalization
/// Re<q0, q(theta)> = 1, where q0 is the current unit iterate. Since q is at
/// most quadratic in theta, central differences with unit step give its
/// Jacobian exactly.
inline Element refine(const RealifiedOperator& op, const VarietySpec& w, const Element& start, int iters, double tol) {
  Factored f = factor(start, w);
  const Coordinates& coords = op.coords();
  const double sigma = op.sigma_max() > 0.0 ? op.sigma_max() : 1.0;
  const Eigen::Index p = f.theta.size();
  if (p == 0) return start;
  auto residual = [&](const RealVector& t, const RealVector& q0) {
    const RealVector z = coords.to_real(f.build(t));
    RealVector r(op.matrix().rows() + 1);
    r.head(op.matrix().rows()) = op.matrix() * z / sigma;
    r(r.size() - 1) = q0.dot(z) - 1.0;
    return r;
  };

  Element q = f.build(f.theta);
  double lambda = 1e-6;
  for (int it = 0; it < iters; ++it) {
    const double qn = q.norm();
    if (qn == 0.0) break;
    f.theta /= std::pow(qn, 1.0 / f.degree);
    q = f.build(f.theta);
    const RealVector q0 = coords.to_real(q);
    const RealVector r = residual(f.theta, q0);
    if (r.norm() <= tol) break;
    RealMatrix jac(r.size(), p);
    RealVector t = f.theta;
    for (Eigen::Index c = 0; c < p; ++c) {
      t(c) += 1.0;
      const RealVector plus = residual(t, q0);
      t(c) -= 2.0;
      const RealVector minus = residual(t, q0);
      t(c) += 1.0;
      jac.col(c) = (plus - minus) / 2.0;
    }
    const RealMatrix jtj = jac.transpose() * jac;
    const RealVector jtr = jac.transpose() * r;
    const double scale = std::max(1e-300, jtj.diagonal().maxCoeff());
    bool improved = false;
    for (int attempt = 0; attempt < 10 && !improved; ++attempt) {
      RealMatrix damped = jtj;
      damped.diagonal().array() += lambda * scale;
      const RealVector cand = f.theta - damped.ldlt().solve(jtr);
      if (residual(cand, q0).norm() < r.norm()) {
        f.theta = cand;
        lambda = std::max(lambda / 10.0, 1e-15);
        improved = true;
      } else {
        lambda *= 10.0;
      }
    }
    if (!improved) break;
    q = f.build(f.theta);
  }
  return q;
}

inline std::optional<Witness> accept(const RealifiedOperator& op, const VarietySpec& w, const SearchConfig& cfg,
                                     Element x, int restart, int it, double& best) {
  x = project(x, w);
  const double nx = x.norm();
  if (nx == 0.0) return std::nullopt;
  x /= nx;
  const double rel = op.relative_residual(x);
  best = std::min(best, rel);
  if (op.kernel_distance(x) <= cfg.tol_feas && rel <= cfg.tol_feas) return Witness{x, rel, restart, it};
  return std::nullopt;
}

inline std::optional<Witness> run_restart(const RealifiedOperator& op, const VarietySpec& w, const SearchConfig& cfg,
                                          int restart, double& best, long long& iterations) {
  Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(restart)));
  Element x = op.random_kernel_element(rng);
  int it = 1;
  for (; it <= cfg.max_iters; ++it) {
    ++iterations;
    x = project(x, w);
    const double nx = x.norm();
    if (nx == 0.0) return std::nullopt;
    x /= nx;
    const double rel = op.relative_residual(x);
    best = std::min(best, rel);
    if (op.kernel_distance(x) <= cfg.tol_feas && rel <= cfg.tol_feas) {
      return Witness{x, rel, restart, it};
    }
    x = op.project_kernel(x);
    const double nk = x.norm();
    if (nk == 0.0) return std::nullopt;
    x /= nk;
  }
  // Alternating projections converge slowly near tangential intersections;
  // finish in factored coordinates from the last variety point.
  if (cfg.refine_iters > 0) {
    const Element start = project(x, w);
    if (start.norm() == 0.0) return std::nullopt;
    const Element refined = refine(op, w, start / start.norm(), cfg.refine_iters, cfg.tol_feas * 1e-3);
    return accept(op, w, cfg, refined, restart, it, best);
  }
  return std::nullopt;
}

}  // namespace detail

/// Alternating projections between ker(M_A) and the variety w, renormalized to
/// the unit sphere each step, from cfg.restarts seeded starts. Returns the
/// first iterate that is an exact variety member within tol_feas of the kernel.
inline SearchResult witness_search(const MeasurementEnsemble& e, const VarietySpec& w, const SearchConfig& cfg = {}) {
  const RealifiedOperator op(e, Coordinates(w.ambient(), w.field()));
  SearchResult out;
  if (op.kernel_dimension() == 0) {
    out.trivial_kernel = true;
    return out;
  }
  for (int r = 0; r < cfg.restarts; ++r) {
    ++out.restarts_used;
    auto found = detail::run_restart(op, w, cfg, r, out.margin, out.iterations);
    if (found) {
      out.witness = std::move(found);
      out.margin = 0.0;
      return out;
    }
  }
  return out;
}

}  // namespace varsample

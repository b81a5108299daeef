#pragma once

#include "varsample/linalg.hpp"
#include "varsample/rng.hpp"
#include "varsample/sampling.hpp"
#include "varsample/types.hpp"
#include "varsample/varieties.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace varsample {

struct RecoveryConfig {
  double tol_fit = 1e-8;  // relative to ||y||
  int max_iters = 2000;
  int stagnation_window = 20;
  double stagnation_tol = 1e-12;
  int restart_budget = 10;
  int power_iters = 50;
  int polish_iters = 100;
  std::uint64_t seed = 0;
};

struct RecoveryOutcome {
  Element estimate;
  double residual = 0.0;  // ||sample(e, estimate) - y||
  std::optional<double> equivalence_distance;
  int iterations = 0;
  int restarts = 0;
  bool converged = false;
  bool ambiguous = false;  // support enumeration found two different fits
};

// -- sparse ---------------------------------------------------------------------

/// Least-squares fit on every support of size k; the best-fitting support wins
/// (first in lexicographic order on ties).
inline RecoveryOutcome recover_sparse(const MeasurementEnsemble& e, const ComplexVector& y, int k,
                                      const RecoveryConfig& cfg = {}, long long budget = 1000000) {
  if (!e.shape().is_vector()) throw ShapeError("recover_sparse needs a vector ensemble");
  if (y.size() != e.m()) throw ShapeError("recover_sparse: sample length differs from m");
  const int d = e.d();
  if (k < 0 || k > d) throw std::domain_error("recover_sparse: k outside [0, d]");
  if (linalg::binomial(d, k, budget) > budget) {
    throw BudgetError("recover_sparse: C(d, k) exceeds the support budget of " + std::to_string(budget));
  }

  // sample(e, x)_j = sum_i a_ji conj(x_i), so conj(y) = conj(A) x.
  Element a(e.m(), d);
  for (int j = 0; j < e.m(); ++j) a.row(j) = e.op(j).col(0).transpose().conjugate();
  const ComplexVector target = y.conjugate();
  const double ynorm = y.norm();
  const double fit = cfg.tol_fit * ynorm;

  RecoveryOutcome out;
  out.estimate = Element::Zero(d, 1);
  out.residual = ynorm;
  std::vector<Element> fits;
  for (const auto& support : linalg::combinations(d, k)) {
    ++out.iterations;
    Element x = Element::Zero(d, 1);
    if (k > 0) {
      Element sub(e.m(), k);
      for (int c = 0; c < k; ++c) sub.col(c) = a.col(support[static_cast<std::size_t>(c)]);
      const ComplexVector coef = sub.completeOrthogonalDecomposition().solve(target);
      for (int c = 0; c < k; ++c) x(support[static_cast<std::size_t>(c)], 0) = coef(c);
    }
    if (e.field() == Field::Real && y.imag().norm() == 0.0) x = x.real().cast<Complex>();
    const double res = (sample(e, x) - y).norm();
    if (res < out.residual || out.iterations == 1) {
      out.residual = res;
      out.estimate = x;
    }
    if (res <= fit) fits.push_back(x);
  }
  out.converged = out.residual <= fit;
  const double sep = cfg.tol_fit * std::max(1.0, out.estimate.norm());
  for (const auto& f : fits) {
    if ((f - out.estimate).norm() > sep) out.ambiguous = true;
  }
  return out;
}

// -- iterative hard thresholding ---------------------------------------------------

/// The unknown of a lifted / low-rank problem: its field, whether it lives in
/// the Hermitian subspace, and the variety projection applied each iteration.
struct LowRankModel {
  Field field = Field::Complex;
  bool hermitian = false;
  int rank = 1;
  bool psd = false;  // keep the top eigenvalues clipped at zero (phase lifts)

  Element restrict(const Element& x) const {
    Element out = hermitian ? linalg::hermitize(x) : x;
    if (field == Field::Real) out = out.real().cast<Complex>();
    return out;
  }

  Element project(const Element& x) const {
    const Element xr = restrict(x);
    if (!hermitian) {
      return restrict(linalg::truncate_rank(xr, rank));
    }
    const auto eig = linalg::hermitian_eigen(xr);
    Element out = Element::Zero(xr.rows(), xr.cols());
    if (psd) {
      for (int i = 0; i < rank; ++i) {
        const double l = std::max(0.0, eig.values(i));
        out += l * eig.vectors.col(i) * eig.vectors.col(i).adjoint();
      }
    } else {
      out = varsample::project(xr, VarietySpec::sym_low_rank(static_cast<int>(xr.rows()), rank, field));
    }
    return restrict(out);
  }

  /// Projection of a direction onto the tangent space at x (rank-r column and
  /// row spaces).
  Element tangent(const Element& x, const Element& g) const {
    const auto s = linalg::svd(x);
    const Eigen::Index r = std::min<Eigen::Index>(rank, s.singularValues().size());
    const Element u = s.matrixU().leftCols(r);
    const Element v = s.matrixV().leftCols(r);
    const Element pu = u * u.adjoint();
    const Element pv = v * v.adjoint();
    return restrict(pu * g + g * pv - pu * g * pv);
  }
};

namespace detail {

/// Largest eigenvalue of the normal operator restricted to the model's
/// subspace, by power iteration.
inline double normal_operator_norm(const MeasurementEnsemble& e, const LowRankModel& model, int iters,
                                   std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x70776572ULL));
  Element x = model.restrict(linalg::gaussian(e.shape().rows(), e.shape().cols(), model.field, rng));
  double lambda = 0.0;
  for (int i = 0; i < iters; ++i) {
    const double nx = x.norm();
    if (nx == 0.0) return 0.0;
    x /= nx;
    const Element nx_img = model.restrict(adjoint(e, sample(e, x)));
    lambda = nx_img.norm();
    x = nx_img;
  }
  return lambda;
}

/// Factor of a low-rank iterate: X = U V^* (V = U for Hermitian PSD models).
struct Factors {
  Element u;
  Element v;
};

inline Factors factorize(const Element& x, const LowRankModel& model) {
  if (model.hermitian && model.psd) {
    const auto eig = linalg::hermitian_eigen(x);
    Element u(x.rows(), model.rank);
    for (int i = 0; i < model.rank; ++i) u.col(i) = std::sqrt(std::max(0.0, eig.values(i))) * eig.vectors.col(i);
    if (model.field == Field::Real) u = u.real().cast<Complex>();
    return {u, u};
  }
  const auto s = linalg::svd(x);
  const Eigen::Index r = std::min<Eigen::Index>(model.rank, s.singularValues().size());
  RealVector root = s.singularValues().head(r).cwiseSqrt();
  Element u = s.matrixU().leftCols(r) * root.asDiagonal();
  Element v = s.matrixV().leftCols(r) * root.asDiagonal();
  if (model.field == Field::Real) {
    u = u.real().cast<Complex>();
    v = v.real().cast<Complex>();
  }
  return {u, v};
}

inline Element compose(const Factors& f, const LowRankModel& model) {
  if (model.hermitian && model.psd) return linalg::hermitize(f.u * f.u.adjoint());
  return f.u * f.v.adjoint();
}

/// Real coordinate c of the factor pair (U first, then V unless shared).
struct FactorCoordinate {
  bool on_v;
  Eigen::Index row, col;
  Complex unit;
};

inline FactorCoordinate factor_coordinate(Eigen::Index c, Eigen::Index per, Eigen::Index cols, Field field) {
  const Eigen::Index local = c % per;
  const Eigen::Index entry = field == Field::Complex ? local / 2 : local;
  const Complex unit = (field == Field::Complex && local % 2 == 1) ? Complex(0, 1) : Complex(1, 0);
  return {c >= per, entry / cols, entry % cols, unit};
}

/// Levenberg-Marquardt on the factored form. The sampling map is smooth in the
/// factors, so this converges quadratically once IHT has found the basin.
inline Element polish(const MeasurementEnsemble& e, const ComplexVector& y, const LowRankModel& model,
                      const Element& start, int iters) {
  Factors f = factorize(start, model);
  const bool shared = model.hermitian && model.psd;
  const Eigen::Index rows = f.u.rows(), cols = f.u.cols();
  const Eigen::Index per = rows * cols * (model.field == Field::Complex ? 2 : 1);
  const Eigen::Index p = shared ? per : 2 * per;

  auto derivative = [&](Eigen::Index c) {
    const FactorCoordinate fc = factor_coordinate(c, per, cols, model.field);
    Element dir = Element::Zero(rows, cols);
    dir(fc.row, fc.col) = fc.unit;
    if (shared) return Element(dir * f.u.adjoint() + f.u * dir.adjoint());
    return fc.on_v ? Element(f.u * dir.adjoint()) : Element(dir * f.v.adjoint());
  };
  auto residual_vec = [&](const Element& x) {
    const ComplexVector r = sample(e, x) - y;
    RealVector out(2 * r.size());
    out << r.real(), r.imag();
    return out;
  };

  Element x = compose(f, model);
  RealVector r = residual_vec(x);
  double lambda = 1e-3;
  for (int it = 0; it < iters && r.norm() > 0.0; ++it) {
    RealMatrix jac(r.size(), p);
    for (Eigen::Index c = 0; c < p; ++c) {
      const ComplexVector col = sample(e, derivative(c));
      jac.col(c) << col.real(), col.imag();
    }
    const RealMatrix jtj = jac.transpose() * jac;
    const RealVector jtr = jac.transpose() * r;
    if (jtr.norm() == 0.0) break;
    const double scale = std::max(1.0, jtj.diagonal().maxCoeff());
    bool improved = false;
    for (int attempt = 0; attempt < 12 && !improved; ++attempt) {
      RealMatrix damped = jtj;
      damped.diagonal().array() += lambda * scale;
      const RealVector step = damped.ldlt().solve(-jtr);
      Factors trial = f;
      for (Eigen::Index c = 0; c < p; ++c) {
        const FactorCoordinate fc = factor_coordinate(c, per, cols, model.field);
        (fc.on_v ? trial.v : trial.u)(fc.row, fc.col) += step(c) * fc.unit;
      }
      if (shared) trial.v = trial.u;
      const Element xt = compose(trial, model);
      const RealVector rt = residual_vec(xt);
      if (rt.norm() < r.norm()) {
        f = std::move(trial);
        x = xt;
        r = rt;
        lambda = std::max(lambda / 10.0, 1e-15);
        improved = true;
      } else {
        lambda *= 10.0;
      }
    }
    if (!improved) break;
  }
  return x;
}

}  // namespace detail

/// Normalized iterative hard thresholding with seeded restarts on stagnation,
/// followed by a factored least-squares polish.
///
/// The first start is model.project(adjoint(y)); the step is the larger of
/// 1/||M||^2 and the tangent-space steepest-descent step, halved until the
/// residual decreases (falling back to 1/||M||^2).
inline RecoveryOutcome iht_solve(const MeasurementEnsemble& e, const ComplexVector& y, const LowRankModel& model,
                                 const RecoveryConfig& cfg = {}) {
  if (y.size() != e.m()) throw ShapeError("sample length differs from m");
  const double ynorm = y.norm();
  const double fit = cfg.tol_fit * ynorm;
  RecoveryOutcome best;
  best.estimate = Element::Zero(e.shape().rows(), e.shape().cols());
  best.residual = ynorm;
  if (ynorm == 0.0) {
    best.converged = true;
    return best;
  }
  const double opnorm = detail::normal_operator_norm(e, model, cfg.power_iters, cfg.seed);
  const double mu0 = opnorm > 0.0 ? 1.0 / opnorm : 1.0;

  for (int restart = 0; restart <= cfg.restart_budget; ++restart) {
    Element x;
    if (restart == 0) {
      x = model.project(adjoint(e, y));
    } else {
      Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(restart)));
      x = model.project(linalg::gaussian(e.shape().rows(), e.shape().cols(), model.field, rng));
      const double s = sample(e, x).norm();
      if (s > 0.0) x *= ynorm / s;
    }
    std::vector<double> history;
    double res = (sample(e, x) - y).norm();
    for (int it = 0; it < cfg.max_iters && res > fit; ++it) {
      ++best.iterations;
      const Element g = model.restrict(adjoint(e, y - sample(e, x)));
      const Element gt = model.tangent(x, g);
      const double den = sample(e, gt).squaredNorm();
      double mu = den > 0.0 ? std::max(mu0, gt.squaredNorm() / den) : mu0;
      Element next = model.project(x + mu * g);
      double next_res = (sample(e, next) - y).norm();
      while (next_res >= res && mu > mu0) {
        mu = std::max(mu0, mu / 2.0);
        next = model.project(x + mu * g);
        next_res = (sample(e, next) - y).norm();
      }
      x = std::move(next);
      res = next_res;
      history.push_back(res);
      const auto w = static_cast<std::size_t>(cfg.stagnation_window);
      if (history.size() > w) {
        const double before = history[history.size() - 1 - w];
        if (before - res < cfg.stagnation_tol * before) break;
      }
    }
    const Element polished = detail::polish(e, y, model, x, cfg.polish_iters);
    const double pres = (sample(e, polished) - y).norm();
    if (pres < res) {
      x = polished;
      res = pres;
    }
    best.restarts = restart;
    if (res < best.residual) {
      best.residual = res;
      best.estimate = x;
    }
    if (res <= fit) break;
  }
  best.converged = best.residual <= fit;
  return best;
}

/// Rank-r recovery from y = sample(e, Q) over the ensemble's field.
inline RecoveryOutcome recover_low_rank(const MeasurementEnsemble& e, const ComplexVector& y, int r,
                                        const RecoveryConfig& cfg = {},
                                        const std::optional<Element>& truth = std::nullopt) {
  if (e.shape().is_vector()) throw ShapeError("recover_low_rank needs a matrix ensemble");
  if (r < 0 || r > e.d()) throw std::domain_error("recover_low_rank: r outside [0, d]");
  LowRankModel model{e.field(), false, r, false};
  RecoveryOutcome out = iht_solve(e, y, model, cfg);
  if (truth) out.equivalence_distance = (out.estimate - *truth).norm();
  return out;
}

/// Phase retrieval through the rank-one lift: solve for X = x x^* with IHT in
/// the Hermitian subspace, then read x from the top eigenpair.
///
/// Vector ensembles are lifted to a_j a_j^*, so y_j = |<a_j, x>|^2; Hermitian
/// matrix ensembles give y_j = x^* A_j x.
inline RecoveryOutcome recover_phase(const MeasurementEnsemble& e, const ComplexVector& y,
                                     const RecoveryConfig& cfg = {},
                                     const std::optional<Element>& truth = std::nullopt) {
  const MeasurementEnsemble lifted = lift_ensemble(e);
  LowRankModel model{e.field(), true, 1, true};
  RecoveryOutcome lifted_out = iht_solve(lifted, y, model, cfg);
  const auto eig = linalg::hermitian_eigen(lifted_out.estimate);
  Element x = std::sqrt(std::max(0.0, eig.values(0))) * eig.vectors.col(0);
  if (e.field() == Field::Real) x = x.real().cast<Complex>();
  x = normalize_phase(x);

  RecoveryOutcome out = lifted_out;
  out.estimate = x;
  out.residual = (sample(lifted, lift_rank_one(x)) - y).norm();
  out.converged = out.residual <= cfg.tol_fit * y.norm();
  if (truth) out.equivalence_distance = equivalence_distance(x, *truth, e.field());
  return out;
}

// -- phase transition sweep ---------------------------------------------------------

struct SweepRow {
  int m = 0;
  int trials = 0;
  int successes = 0;
  double success_rate() const { return trials > 0 ? static_cast<double>(successes) / trials : 0.0; }
};

struct SweepSpec {
  std::string setting;  // sparse | low_rank | real_pr | complex_pr
  int d = 4;
  int param = 1;  // k for sparse, r for low_rank
  Field field = Field::Complex;  // sparse and low_rank only
  int m_from = 1;
  int m_to = 1;
  int trials = 10;
  std::uint64_t seed = 0;
  double success_tol = 1e-6;
};

namespace detail {

inline Element random_sparse(int d, int k, Field field, Rng& rng) {
  std::vector<int> idx(static_cast<std::size_t>(d));
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < k; ++i) std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(i) + rng.below(static_cast<std::uint64_t>(d - i))]);
  const Element vals = linalg::gaussian(k, 1, field, rng);
  Element x = Element::Zero(d, 1);
  for (int i = 0; i < k; ++i) x(idx[static_cast<std::size_t>(i)], 0) = vals(i, 0);
  return x;
}

/// One seeded (ensemble, signal) trial; true when the solver returns the
/// signal (up to the setting's equivalence) within tol relative error.
inline bool sweep_trial(const SweepSpec& spec, int m, int trial) {
  const std::uint64_t ens_seed = derive_seed(spec.seed, static_cast<std::uint64_t>(m), 2ULL * trial);
  Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(m), 2ULL * trial + 1));
  RecoveryConfig cfg;
  cfg.seed = ens_seed;
  if (spec.setting == "sparse") {
    const auto e = gen_gaussian_vectors(spec.d, m, spec.field, ens_seed);
    const Element x = random_sparse(spec.d, spec.param, spec.field, rng);
    const auto out = recover_sparse(e, sample(e, x), spec.param, cfg);
    return !out.ambiguous && out.converged && (out.estimate - x).norm() < spec.success_tol * x.norm();
  }
  if (spec.setting == "low_rank") {
    const auto e = gen_gaussian_matrices(spec.d, m, spec.field, ens_seed);
    const Element q = linalg::gaussian(spec.d, spec.param, spec.field, rng) *
                      linalg::gaussian(spec.d, spec.param, spec.field, rng).adjoint();
    const auto out = recover_low_rank(e, sample(e, q), spec.param, cfg, q);
    return *out.equivalence_distance < spec.success_tol * q.norm();
  }
  if (spec.setting == "real_pr" || spec.setting == "complex_pr") {
    const Field f = spec.setting == "real_pr" ? Field::Real : Field::Complex;
    const auto e = gen_gaussian_vectors(spec.d, m, f, ens_seed);
    const Element x = linalg::gaussian(spec.d, 1, f, rng);
    const auto out = recover_phase(e, sample(lift_ensemble(e), lift_rank_one(x)), cfg, x);
    return *out.equivalence_distance < spec.success_tol * x.norm();
  }
  throw std::invalid_argument("unknown sweep setting '" + spec.setting + "'");
}

}  // namespace detail

/// Success counts of the matching solver for each m in [m_from, m_to].
inline std::vector<SweepRow> phase_transition_sweep(const SweepSpec& spec) {
  std::vector<SweepRow> rows;
  if (spec.trials <= 0) return rows;
  for (int m = spec.m_from; m <= spec.m_to; ++m) {
    SweepRow row{m, spec.trials, 0};
    for (int t = 0; t < spec.trials; ++t) row.successes += detail::sweep_trial(spec, m, t) ? 1 : 0;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace varsample

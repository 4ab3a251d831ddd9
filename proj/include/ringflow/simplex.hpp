#ifndef RINGFLOW_SIMPLEX_HPP_
#define RINGFLOW_SIMPLEX_HPP_

// Dense two-phase primal simplex.
//
// Problems have the form
//
//   minimize    objective . x
//   subject to  eq_matrix   x  = eq_rhs
//               ineq_matrix x <= ineq_rhs
//               x >= 0
//
// Every constraint row is scaled to unit max-norm before the tableau is
// built. Pricing is Dantzig's rule and switches permanently to Bland's rule
// once the iteration count reaches bland_after * (rows + cols). At
// termination the basic values are recomputed from the original (scaled)
// data with an LU solve of the basis matrix, so reported values do not carry
// the roundoff accumulated by the tableau updates.

#include <Eigen/Core>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace ringflow {

template <typename Scalar = double>
struct LpProblem {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Vector objective;
  Matrix eq_matrix;
  Vector eq_rhs;
  Matrix ineq_matrix;
  Vector ineq_rhs;

  Eigen::Index num_variables() const { return objective.size(); }
  Eigen::Index num_constraints() const { return eq_rhs.size() + ineq_rhs.size(); }

  /// Resizes to n variables with no constraints; all data zeroed.
  static LpProblem with_variables(Eigen::Index n) {
    LpProblem p;
    p.objective = Vector::Zero(n);
    p.eq_matrix.resize(0, n);
    p.ineq_matrix.resize(0, n);
    return p;
  }
};

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
    case LpStatus::iteration_limit: return "iteration_limit";
  }
  return "unknown";
}

template <typename Scalar = double>
struct LpSolution {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> x;
  Scalar objective_value = Scalar(0);
  LpStatus status = LpStatus::infeasible;
  int iterations = 0;
  bool used_bland = false;
  // Column indices of the final basis in the internal standard form
  // (original variables, then one slack per inequality, then artificials).
  std::vector<Eigen::Index> basis;
  // Most negative phase-2 reduced cost at termination (scaled objective).
  Scalar min_reduced_cost = Scalar(0);
};

struct SimplexOptions {
  double pivot_tolerance = 1e-10;
  double feasibility_tolerance = 1e-9;
  double optimality_tolerance = 1e-9;
  int bland_after = 3;           // times (rows + cols)
  int iteration_cap = 50;        // times (rows + cols), plus a fixed allowance
  bool scale_rows = true;
  bool refine_basis = true;
};

template <typename Scalar = double>
struct ResidualReport {
  Scalar max_eq_residual = Scalar(0);
  Scalar max_ineq_violation = Scalar(0);
  Scalar min_value = Scalar(0);
};

/// Constraint slacks of `x` against `problem`, recomputed from the unscaled data.
template <typename Scalar = double>
ResidualReport<Scalar> residuals(const LpProblem<Scalar>& problem,
                                 const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x) {
  const auto n = problem.num_variables();
  const bool ok = x.size() == n && problem.eq_matrix.rows() == problem.eq_rhs.size() &&
                  problem.ineq_matrix.rows() == problem.ineq_rhs.size() &&
                  (problem.eq_matrix.rows() == 0 || problem.eq_matrix.cols() == n) &&
                  (problem.ineq_matrix.rows() == 0 || problem.ineq_matrix.cols() == n);
  if (!ok) throw std::invalid_argument("residuals: dimension mismatch");
  ResidualReport<Scalar> r;
  if (problem.eq_matrix.rows() > 0) {
    r.max_eq_residual = (problem.eq_matrix * x - problem.eq_rhs).cwiseAbs().maxCoeff();
  }
  if (problem.ineq_matrix.rows() > 0) {
    r.max_ineq_violation = std::max(
        Scalar(0), (problem.ineq_matrix * x - problem.ineq_rhs).maxCoeff());
  }
  if (x.size() > 0) r.min_value = x.minCoeff();
  return r;
}

template <typename Scalar = double>
ResidualReport<Scalar> residuals(const LpProblem<Scalar>& problem,
                                 const LpSolution<Scalar>& solution) {
  return residuals(problem, solution.x);
}

namespace detail {

template <typename Scalar>
void check_well_formed(const LpProblem<Scalar>& p) {
  const auto n = p.num_variables();
  const bool eq_ok = p.eq_matrix.rows() == p.eq_rhs.size() &&
                     (p.eq_matrix.rows() == 0 || p.eq_matrix.cols() == n);
  const bool ineq_ok = p.ineq_matrix.rows() == p.ineq_rhs.size() &&
                       (p.ineq_matrix.rows() == 0 || p.ineq_matrix.cols() == n);
  if (!eq_ok || !ineq_ok) throw std::invalid_argument("solve_lp: malformed dimensions");
  if (!p.objective.allFinite() || !p.eq_matrix.allFinite() || !p.eq_rhs.allFinite() ||
      !p.ineq_matrix.allFinite() || !p.ineq_rhs.allFinite()) {
    throw std::invalid_argument("solve_lp: non-finite input");
  }
}

template <typename Scalar>
class DenseTableau {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Index = Eigen::Index;

  DenseTableau(const LpProblem<Scalar>& p, const SimplexOptions& opt) : opt_(opt) {
    n_ = p.num_variables();
    m_eq_ = p.eq_rhs.size();
    m_ub_ = p.ineq_rhs.size();
    m_ = m_eq_ + m_ub_;
    const Index slack0 = n_;

    // Standard form rows [A | S] x = rhs with rhs >= 0.
    Matrix a = Matrix::Zero(m_, n_ + m_ub_);
    Vector rhs(m_);
    for (Index i = 0; i < m_eq_; ++i) {
      a.row(i).head(n_) = p.eq_matrix.row(i);
      rhs(i) = p.eq_rhs(i);
    }
    for (Index i = 0; i < m_ub_; ++i) {
      a.row(m_eq_ + i).head(n_) = p.ineq_matrix.row(i);
      a(m_eq_ + i, slack0 + i) = Scalar(1);
      rhs(m_eq_ + i) = p.ineq_rhs(i);
    }
    if (opt_.scale_rows && n_ > 0) {
      for (Index i = 0; i < m_; ++i) {
        const Scalar norm = a.row(i).head(n_).cwiseAbs().maxCoeff();
        if (norm > Scalar(0)) {
          a.row(i).head(n_) /= norm;
          rhs(i) /= norm;
        }
      }
    }
    std::vector<Index> needs_artificial;
    basis_.assign(static_cast<std::size_t>(m_), -1);
    for (Index i = 0; i < m_; ++i) {
      if (rhs(i) < Scalar(0)) {
        a.row(i) *= Scalar(-1);
        rhs(i) = -rhs(i);
      }
      // Slacks are measured in scaled units, so an unnegated slack column is a unit vector.
      if (i >= m_eq_ && a(i, slack0 + (i - m_eq_)) > Scalar(0)) {
        basis_[static_cast<std::size_t>(i)] = slack0 + (i - m_eq_);
      } else {
        needs_artificial.push_back(i);
      }
    }
    n_art_ = static_cast<Index>(needs_artificial.size());
    art0_ = n_ + m_ub_;
    cols_ = art0_ + n_art_;

    std_matrix_ = Matrix::Zero(m_, cols_);
    std_matrix_.leftCols(n_ + m_ub_) = a;
    for (Index k = 0; k < n_art_; ++k) {
      const Index row = needs_artificial[static_cast<std::size_t>(k)];
      std_matrix_(row, art0_ + k) = Scalar(1);
      basis_[static_cast<std::size_t>(row)] = art0_ + k;
    }
    std_rhs_ = rhs;

    tableau_.resize(m_ + 1, cols_ + 1);
    tableau_.topLeftCorner(m_, cols_) = std_matrix_;
    tableau_.topRightCorner(m_, 1) = std_rhs_;
    tableau_.row(m_).setZero();

    cost_scale_ = Scalar(1);
    if (n_ > 0) {
      const Scalar cmax = p.objective.cwiseAbs().maxCoeff();
      if (cmax > Scalar(0)) cost_scale_ = cmax;
    }
    objective_ = p.objective / cost_scale_;
    size_hint_ = static_cast<long>(p.num_constraints() + p.num_variables());
  }

  LpSolution<Scalar> solve() {
    LpSolution<Scalar> out;
    const long bland_at = static_cast<long>(opt_.bland_after) * size_hint_;
    const long cap = static_cast<long>(opt_.iteration_cap) * size_hint_ + 1000;

    // Phase 1: minimize the sum of artificials.
    if (n_art_ > 0) {
      tableau_.row(m_).setZero();
      for (Index k = 0; k < n_art_; ++k) tableau_(m_, art0_ + k) = Scalar(1);
      price_out_basis();
      const LpStatus s = iterate(/*allow_artificial=*/true, bland_at, cap);
      if (s == LpStatus::iteration_limit) return finish(out, s);
      const Scalar infeasibility = -tableau_(m_, cols_);
      const Scalar scale = std::max(Scalar(1), std_rhs_.sum());
      if (infeasibility > Scalar(opt_.feasibility_tolerance) * scale) {
        return finish(out, LpStatus::infeasible);
      }
      drive_out_artificials();
    }

    // Phase 2: original objective, artificial columns barred.
    tableau_.row(m_).setZero();
    tableau_.row(m_).head(n_) = objective_.transpose();
    price_out_basis();
    const LpStatus s = iterate(/*allow_artificial=*/false, bland_at, cap);
    return finish(out, s);
  }

 private:
  void price_out_basis() {
    for (Index i = 0; i < m_; ++i) {
      const Index col = basis_[static_cast<std::size_t>(i)];
      const Scalar cb = tableau_(m_, col);
      if (cb != Scalar(0)) tableau_.row(m_) -= cb * tableau_.row(i);
    }
  }

  void pivot(Index r, Index q) {
    const Scalar piv = tableau_(r, q);
    tableau_.row(r) /= piv;
    const RowVector prow = tableau_.row(r);
    Vector col = tableau_.col(q);
    col(r) = Scalar(0);
    tableau_.noalias() -= col * prow;
    tableau_.col(q).setZero();
    tableau_(r, q) = Scalar(1);
    basis_[static_cast<std::size_t>(r)] = q;
  }

  Index choose_entering(bool allow_artificial) const {
    const Index limit = allow_artificial ? cols_ : art0_;
    const Scalar tol = Scalar(opt_.optimality_tolerance);
    Index best = -1;
    Scalar best_value = -tol;
    for (Index j = 0; j < limit; ++j) {
      const Scalar dj = tableau_(m_, j);
      if (bland_) {
        if (dj < -tol) return j;
      } else if (dj < best_value) {
        best_value = dj;
        best = j;
      }
    }
    return best;
  }

  Index choose_leaving(Index q) const {
    const Scalar ptol = Scalar(opt_.pivot_tolerance);
    Index best = -1;
    Scalar best_ratio = std::numeric_limits<Scalar>::infinity();
    for (Index i = 0; i < m_; ++i) {
      const Scalar aiq = tableau_(i, q);
      if (aiq <= ptol) continue;
      const Scalar ratio = std::max(Scalar(0), tableau_(i, cols_)) / aiq;
      const Scalar tie = Scalar(1e-12) * std::max(Scalar(1), best_ratio);
      if (best < 0 || ratio < best_ratio - tie) {
        best = i;
        best_ratio = ratio;
      } else if (bland_ && ratio <= best_ratio + tie &&
                 basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(best)]) {
        // Bland's rule needs the smallest basic index among tied rows.
        best = i;
      }
    }
    return best;
  }

  LpStatus iterate(bool allow_artificial, long bland_at, long cap) {
    for (;;) {
      if (!bland_ && iterations_ >= bland_at) bland_ = true;
      if (iterations_ >= cap) return LpStatus::iteration_limit;
      const Index q = choose_entering(allow_artificial);
      if (q < 0) return LpStatus::optimal;
      const Index r = choose_leaving(q);
      if (r < 0) return LpStatus::unbounded;
      pivot(r, q);
      ++iterations_;
    }
  }

  void drive_out_artificials() {
    const Scalar ptol = Scalar(opt_.pivot_tolerance);
    for (Index i = 0; i < m_; ++i) {
      if (basis_[static_cast<std::size_t>(i)] < art0_) continue;
      Index best = -1;
      Scalar best_mag = ptol;
      for (Index j = 0; j < art0_; ++j) {
        const Scalar mag = std::abs(tableau_(i, j));
        if (mag > best_mag) {
          best_mag = mag;
          best = j;
        }
      }
      // A row with no usable entry is redundant; its artificial stays basic at zero.
      if (best >= 0) pivot(i, best);
    }
  }

  Vector basic_values() const {
    Vector xb = tableau_.topRightCorner(m_, 1);
    if (!opt_.refine_basis || m_ == 0) return xb;
    Matrix bmat(m_, m_);
    for (Index i = 0; i < m_; ++i) bmat.col(i) = std_matrix_.col(basis_[static_cast<std::size_t>(i)]);
    Eigen::PartialPivLU<Matrix> lu(bmat);
    Vector refined = lu.solve(std_rhs_);
    if (!refined.allFinite()) return xb;
    // Keep the refined values only if the basis solve reproduces the rows.
    const Scalar err = (bmat * refined - std_rhs_).cwiseAbs().maxCoeff();
    const Scalar scale = std::max(Scalar(1), std_rhs_.cwiseAbs().maxCoeff());
    if (err > Scalar(opt_.feasibility_tolerance) * scale) return xb;
    return refined;
  }

  LpSolution<Scalar>& finish(LpSolution<Scalar>& out, LpStatus s) {
    out.status = s;
    out.iterations = static_cast<int>(iterations_);
    out.used_bland = bland_;
    out.basis = basis_;
    out.x = Vector::Zero(n_);
    if (s == LpStatus::optimal) {
      const Vector xb = basic_values();
      for (Index i = 0; i < m_; ++i) {
        const Index col = basis_[static_cast<std::size_t>(i)];
        if (col < n_) out.x(col) = xb(i);
      }
      out.objective_value = (objective_.dot(out.x)) * cost_scale_;
      out.min_reduced_cost =
          art0_ > 0 ? std::min(Scalar(0), tableau_.row(m_).head(art0_).minCoeff()) : Scalar(0);
    } else {
      out.objective_value = s == LpStatus::unbounded ? -std::numeric_limits<Scalar>::infinity()
                                                     : std::numeric_limits<Scalar>::quiet_NaN();
    }
    return out;
  }

  SimplexOptions opt_;
  Index n_ = 0, m_eq_ = 0, m_ub_ = 0, m_ = 0;
  Index art0_ = 0, n_art_ = 0, cols_ = 0;
  long size_hint_ = 0;
  Matrix std_matrix_;
  Vector std_rhs_;
  Matrix tableau_;
  Vector objective_;
  Scalar cost_scale_ = Scalar(1);
  std::vector<Index> basis_;
  long iterations_ = 0;
  bool bland_ = false;
};

}  // namespace detail

template <typename Scalar = double>
LpSolution<Scalar> solve_lp(const LpProblem<Scalar>& problem, const SimplexOptions& options = {}) {
  detail::check_well_formed(problem);
  detail::DenseTableau<Scalar> tableau(problem, options);
  return tableau.solve();
}

}  // namespace ringflow

#endif  // RINGFLOW_SIMPLEX_HPP_

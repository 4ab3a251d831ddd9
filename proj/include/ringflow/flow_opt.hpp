#ifndef RINGFLOW_FLOW_OPT_HPP_
#define RINGFLOW_FLOW_OPT_HPP_

#include "ringflow/ring_model.hpp"
#include "ringflow/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace ringflow {

/// x_{to,from}: information per unit time sent by node `from` to node `to`.
struct Arc {
  int to = 0;
  int from = 1;
  bool operator==(const Arc&) const = default;
};

/// Admissible transmissions: to in 0..N, from in 1..N, to != from; when any
/// node compresses, only transmissions towards the sink (to < from).
inline std::vector<Arc> admissible_arcs(int n_rings, bool forward_only) {
  std::vector<Arc> arcs;
  for (int from = 1; from <= n_rings; ++from) {
    for (int to = 0; to <= n_rings; ++to) {
      if (to == from) continue;
      if (forward_only && to > from) continue;
      arcs.push_back({to, from});
    }
  }
  return arcs;
}

/// A flow LP together with its variable layout: one column per arc, plus a
/// trailing depletion-rate column for the lifetime problem.
template <typename Scalar = double>
struct FlowLp {
  LpProblem<Scalar> problem;
  std::vector<Arc> arcs;
  int n_rings = 0;
  bool has_phi = false;

  Eigen::Index phi_index() const { return static_cast<Eigen::Index>(arcs.size()); }
};

namespace detail {

// One equality per node j: sum_i x_ij - b_j sum_i x_ji = b_j a_j.
template <typename Scalar>
void add_conservation_rows(const NodeProfile<Scalar>& profile, FlowLp<Scalar>& lp) {
  const int n = profile.size();
  const Eigen::Index cols = lp.problem.num_variables();
  lp.problem.eq_matrix = MatrixX<Scalar>::Zero(n, cols);
  lp.problem.eq_rhs.resize(n);
  for (std::size_t k = 0; k < lp.arcs.size(); ++k) {
    const Arc& arc = lp.arcs[k];
    const auto col = static_cast<Eigen::Index>(k);
    lp.problem.eq_matrix(arc.from - 1, col) += Scalar(1);
    if (arc.to >= 1) lp.problem.eq_matrix(arc.to - 1, col) -= profile.b(arc.to - 1);
  }
  for (int j = 0; j < n; ++j) lp.problem.eq_rhs(j) = profile.b(j) * profile.a(j);
}

}  // namespace detail

template <typename Scalar = double>
FlowLp<Scalar> build_max_lifetime_lp(const NodeProfile<Scalar>& profile) {
  FlowLp<Scalar> lp;
  lp.n_rings = profile.size();
  lp.arcs = admissible_arcs(lp.n_rings, profile.uses_compression());
  lp.has_phi = true;
  const Eigen::Index cols = static_cast<Eigen::Index>(lp.arcs.size()) + 1;
  lp.problem = LpProblem<Scalar>::with_variables(cols);
  lp.problem.objective(lp.phi_index()) = Scalar(1);
  detail::add_conservation_rows(profile, lp);

  // Depletion of node j: sum_i (t_ij / c_j) x_ij - Phi <= 0.
  const int n = lp.n_rings;
  lp.problem.ineq_matrix = MatrixX<Scalar>::Zero(n, cols);
  lp.problem.ineq_rhs = VectorX<Scalar>::Zero(n);
  for (std::size_t k = 0; k < lp.arcs.size(); ++k) {
    const Arc& arc = lp.arcs[k];
    lp.problem.ineq_matrix(arc.from - 1, static_cast<Eigen::Index>(k)) =
        transmission_cost(arc.to, arc.from, profile) / profile.c(arc.from - 1);
  }
  lp.problem.ineq_matrix.col(lp.phi_index()).setConstant(Scalar(-1));
  return lp;
}

template <typename Scalar = double>
FlowLp<Scalar> build_min_power_lp(const NodeProfile<Scalar>& profile) {
  FlowLp<Scalar> lp;
  lp.n_rings = profile.size();
  lp.arcs = admissible_arcs(lp.n_rings, profile.uses_compression());
  lp.problem = LpProblem<Scalar>::with_variables(static_cast<Eigen::Index>(lp.arcs.size()));
  for (std::size_t k = 0; k < lp.arcs.size(); ++k) {
    lp.problem.objective(static_cast<Eigen::Index>(k)) =
        transmission_cost(lp.arcs[k].to, lp.arcs[k].from, profile);
  }
  detail::add_conservation_rows(profile, lp);
  return lp;
}

/// Flow matrix (rows: receiver 0..N, cols: sender 0..N; column 0 unused) from an LP point.
template <typename Scalar = double>
MatrixX<Scalar> flow_matrix(const FlowLp<Scalar>& lp, const VectorX<Scalar>& x) {
  MatrixX<Scalar> m = MatrixX<Scalar>::Zero(lp.n_rings + 1, lp.n_rings + 1);
  for (std::size_t k = 0; k < lp.arcs.size(); ++k) {
    m(lp.arcs[k].to, lp.arcs[k].from) = x(static_cast<Eigen::Index>(k));
  }
  return m;
}

/// Inverse of flow_matrix. Mass on non-admissible entries is reported through
/// `dropped` (sum of absolute values) so callers can reject such points.
template <typename Scalar = double>
VectorX<Scalar> lp_point(const FlowLp<Scalar>& lp, const MatrixX<Scalar>& flows, Scalar phi,
                         Scalar* dropped = nullptr) {
  VectorX<Scalar> x = VectorX<Scalar>::Zero(lp.problem.num_variables());
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> used =
      Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(flows.rows(), flows.cols(), false);
  for (std::size_t k = 0; k < lp.arcs.size(); ++k) {
    const Arc& arc = lp.arcs[k];
    x(static_cast<Eigen::Index>(k)) = flows(arc.to, arc.from);
    used(arc.to, arc.from) = true;
  }
  if (lp.has_phi) x(lp.phi_index()) = phi;
  if (dropped) {
    *dropped = Scalar(0);
    for (Eigen::Index j = 0; j < flows.cols(); ++j)
      for (Eigen::Index i = 0; i < flows.rows(); ++i)
        if (!used(i, j)) *dropped += std::abs(flows(i, j));
  }
  return x;
}

enum class ObjectiveKind { max_lifetime, min_total_power };

template <typename Scalar = double>
struct NodeFlow {
  Scalar direct_info = Scalar(0);    // x_{0j}
  Scalar stepwise_info = Scalar(0);  // x_{j-1,j}, zero for j = 1
  Scalar other_info = Scalar(0);
  Scalar direct_power = Scalar(0);
  Scalar stepwise_power = Scalar(0);
  Scalar other_power = Scalar(0);
  Scalar depletion_rate = Scalar(0);

  Scalar total_info() const { return direct_info + stepwise_info + other_info; }
  Scalar total_power() const { return direct_power + stepwise_power + other_power; }
};

template <typename Scalar = double>
struct FlowSolution {
  MatrixX<Scalar> x;
  Scalar phi = Scalar(0);
  std::vector<NodeFlow<Scalar>> per_node;
  ObjectiveKind objective_kind = ObjectiveKind::max_lifetime;
  Scalar total_power = Scalar(0);
  LpSolution<Scalar> lp;
  ResidualReport<Scalar> residual;

  int size() const { return static_cast<int>(per_node.size()); }
};

/// Per-node decomposition of a flow matrix. Node 1's single inward hop is the
/// sink, so all of its output counts as direct.
template <typename Scalar = double>
std::vector<NodeFlow<Scalar>> decompose_flows(const NodeProfile<Scalar>& profile,
                                              const MatrixX<Scalar>& x) {
  const int n = profile.size();
  std::vector<NodeFlow<Scalar>> nodes(static_cast<std::size_t>(n));
  for (int j = 1; j <= n; ++j) {
    NodeFlow<Scalar>& node = nodes[static_cast<std::size_t>(j - 1)];
    node.direct_info = x(0, j);
    node.direct_power = transmission_cost(0, j, profile) * node.direct_info;
    if (j >= 2) {
      node.stepwise_info = x(j - 1, j);
      node.stepwise_power = transmission_cost(j - 1, j, profile) * node.stepwise_info;
    }
    for (int i = 1; i <= n; ++i) {
      if (i == j || i == j - 1) continue;
      node.other_info += x(i, j);
      node.other_power += transmission_cost(i, j, profile) * x(i, j);
    }
    node.depletion_rate = node.total_power() / profile.c(j - 1);
  }
  return nodes;
}

/// Largest |conservation residual| over nodes for a flow matrix.
template <typename Scalar = double>
Scalar conservation_residual(const NodeProfile<Scalar>& profile, const MatrixX<Scalar>& x) {
  const int n = profile.size();
  Scalar worst(0);
  for (int j = 1; j <= n; ++j) {
    const Scalar out = x.col(j).sum() - x(j, j);
    const Scalar in = x.row(j).segment(1, n).sum() - x(j, j);
    worst = std::max(worst, std::abs(out - profile.b(j - 1) * (profile.a(j - 1) + in)));
  }
  return worst;
}

/// Total information arriving at the sink.
template <typename Scalar = double>
Scalar sink_inflow(const MatrixX<Scalar>& x) {
  return x.row(0).sum();
}

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

template <typename Scalar>
FlowSolution<Scalar> solve_flow_lp(const NodeProfile<Scalar>& profile, const FlowLp<Scalar>& lp,
                                   ObjectiveKind kind, const SimplexOptions& options) {
  FlowSolution<Scalar> sol;
  sol.objective_kind = kind;
  sol.lp = solve_lp(lp.problem, options);
  if (sol.lp.status != LpStatus::optimal) {
    throw SolverError(std::string("flow LP terminated with status ") + to_string(sol.lp.status));
  }
  sol.residual = residuals(lp.problem, sol.lp);
  sol.x = flow_matrix(lp, sol.lp.x);
  sol.per_node = decompose_flows(profile, sol.x);
  sol.total_power = Scalar(0);
  Scalar worst(0);
  for (const auto& node : sol.per_node) {
    sol.total_power += node.total_power();
    worst = std::max(worst, node.depletion_rate);
  }
  sol.phi = lp.has_phi ? sol.lp.x(lp.phi_index()) : worst;
  return sol;
}

}  // namespace detail

template <typename Scalar = double>
FlowSolution<Scalar> solve_max_lifetime(const NodeProfile<Scalar>& profile,
                                        const SimplexOptions& options = {}) {
  return detail::solve_flow_lp(profile, build_max_lifetime_lp(profile), ObjectiveKind::max_lifetime,
                               options);
}

/// The `phi` field holds the largest per-node depletion rate this schedule induces.
template <typename Scalar = double>
FlowSolution<Scalar> solve_min_power(const NodeProfile<Scalar>& profile,
                                     const SimplexOptions& options = {}) {
  return detail::solve_flow_lp(profile, build_min_power_lp(profile),
                               ObjectiveKind::min_total_power, options);
}

template <typename Scalar = double>
struct StructureReport {
  bool is_direct_stepwise_only = true;
  Scalar max_other_mass = Scalar(0);
};

/// Direct-plus-stepwise test: every x_ij with i != 0 and i != j-1 is at most `tol`.
template <typename Scalar = double>
StructureReport<Scalar> classify_flows(const MatrixX<Scalar>& x, Scalar tol) {
  StructureReport<Scalar> report;
  const int n = static_cast<int>(x.cols()) - 1;
  for (int j = 1; j <= n; ++j) {
    for (int i = 1; i <= n; ++i) {
      if (i == j || i == j - 1) continue;
      report.max_other_mass = std::max(report.max_other_mass, x(i, j));
    }
  }
  report.is_direct_stepwise_only = report.max_other_mass <= tol;
  return report;
}

template <typename Scalar = double>
StructureReport<Scalar> classify_flows(const FlowSolution<Scalar>& sol, Scalar tol) {
  return classify_flows(sol.x, tol);
}

/// 1e-6 * sum_j a_j.
template <typename Scalar = double>
Scalar default_structure_tolerance(const NodeProfile<Scalar>& profile) {
  return Scalar(1e-6) * profile.a.sum();
}

}  // namespace ringflow

#endif  // RINGFLOW_FLOW_OPT_HPP_

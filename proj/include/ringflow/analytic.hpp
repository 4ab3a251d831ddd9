#ifndef RINGFLOW_ANALYTIC_HPP_
#define RINGFLOW_ANALYTIC_HPP_

// Closed-form solution of the lifetime problem under the equal-depletion
// ansatz (every node transmits only directly to the sink or one hop inward,
// and every node depletes at the same rate), the minimum-power closed forms,
// and the asymptotic approximations of the depletion rate.
//
// Sequences are 0-based: entry j-1 holds node j.

#include "ringflow/fit.hpp"
#include "ringflow/ring_model.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ringflow {

template <typename Scalar = double>
struct PqwSequences {
  VectorX<Scalar> p;  // (c_j / b_j) (j d)^-lambda
  VectorX<Scalar> q;  // (1 - j^-lambda) / b_j
  VectorX<Scalar> w;  // p_j Phi - a_j
};

template <typename Scalar = double>
PqwSequences<Scalar> pqw(const NodeProfile<Scalar>& profile, Scalar phi) {
  using std::pow;
  const int n = profile.size();
  const Scalar d = profile.spacing();
  const Scalar lambda = profile.lambda();
  PqwSequences<Scalar> s;
  s.p.resize(n);
  s.q.resize(n);
  for (int j = 1; j <= n; ++j) {
    const Scalar bj = profile.b(j - 1);
    s.p(j - 1) = profile.c(j - 1) / bj * pow(Scalar(j) * d, -lambda);
    s.q(j - 1) = (Scalar(1) - pow(Scalar(j), -lambda)) / bj;
  }
  s.w = s.p * phi - profile.a;
  return s;
}

/// phi_1 = 1, phi_j = prod_{k=2}^{j} b_k / (1 - k^-lambda).
template <typename Scalar = double>
VectorX<Scalar> phi_sequence(const NodeProfile<Scalar>& profile) {
  using std::pow;
  const int n = profile.size();
  const Scalar lambda = profile.lambda();
  VectorX<Scalar> phi(n);
  if (n == 0) return phi;
  phi(0) = Scalar(1);
  for (int k = 2; k <= n; ++k) {
    phi(k - 1) = phi(k - 2) * profile.b(k - 1) / (Scalar(1) - pow(Scalar(k), -lambda));
  }
  return phi;
}

/// Phi = (a . phi) / (p . phi).
template <typename Scalar = double>
Scalar phi_exact(const NodeProfile<Scalar>& profile) {
  const VectorX<Scalar> weights = phi_sequence(profile);
  const PqwSequences<Scalar> s = pqw(profile, Scalar(0));
  return profile.a.dot(weights) / s.p.dot(weights);
}

template <typename Scalar = double>
struct AnalyticSolution {
  VectorX<Scalar> p, q, w;
  VectorX<Scalar> phi_seq;
  VectorX<Scalar> y;       // y_2..y_N (length N-1); y_1 = y_{N+1} = 0
  VectorX<Scalar> direct;  // b_j (a_j + y_{j+1}) - y_j, length N
  Scalar phi = Scalar(0);
  bool valid = false;
  std::optional<std::string> infeasibility_reason;
  // |q_N y_N + w_N| relative to p_N Phi + a_N.
  Scalar terminal_residual = Scalar(0);

  int size() const { return static_cast<int>(direct.size()); }

  /// y_j for j in 1..N+1 (zero at both ends).
  Scalar stepwise(int j) const {
    if (j <= 1 || j > size()) return Scalar(0);
    return y(j - 2);
  }

  /// (N+1) x (N+1) flow matrix with x(0, j) = direct and x(j-1, j) = y_j.
  MatrixX<Scalar> flow_matrix() const {
    const int n = size();
    MatrixX<Scalar> x = MatrixX<Scalar>::Zero(n + 1, n + 1);
    for (int j = 1; j <= n; ++j) {
      x(0, j) += direct(j - 1);
      if (j >= 2) x(j - 1, j) += stepwise(j);
    }
    return x;
  }
};

/// Tolerance below zero still accepted as a nonnegative flow: 1e-10 * sum_j a_j.
template <typename Scalar = double>
Scalar ansatz_tolerance(const NodeProfile<Scalar>& profile) {
  return Scalar(1e-10) * std::max(Scalar(1), profile.a.sum());
}

/// Equal-depletion solution of y_{j+1} = w_j + q_j y_j with y_1 = y_{N+1} = 0.
/// Forward substitution from y_2 = w_1 when prod q_j <= 1; otherwise the same
/// equations are solved backward from y_N = -w_N / q_N, which damps rounding
/// instead of amplifying it. `terminal_residual` measures the equation left over.
template <typename Scalar = double>
AnalyticSolution<Scalar> stepwise_flows(const NodeProfile<Scalar>& profile) {
  using std::abs;
  using std::log;
  const int n = profile.size();
  AnalyticSolution<Scalar> sol;
  sol.phi = phi_exact(profile);
  sol.phi_seq = phi_sequence(profile);
  {
    PqwSequences<Scalar> s = pqw(profile, sol.phi);
    sol.p = std::move(s.p);
    sol.q = std::move(s.q);
    sol.w = std::move(s.w);
  }
  sol.y = VectorX<Scalar>::Zero(std::max(0, n - 1));
  Scalar growth(0);
  for (int j = 2; j <= n - 1; ++j) growth += log(sol.q(j - 1));
  const bool backward = n >= 2 && growth > Scalar(0);
  if (n >= 2 && !backward) {
    sol.y(0) = sol.w(0);
    for (int j = 2; j <= n - 1; ++j) sol.y(j - 1) = sol.w(j - 1) + sol.q(j - 1) * sol.y(j - 2);
  } else if (backward) {
    sol.y(n - 2) = -sol.w(n - 1) / sol.q(n - 1);
    for (int j = n - 1; j >= 2; --j) sol.y(j - 2) = (sol.y(j - 1) - sol.w(j - 1)) / sol.q(j - 1);
  }

  sol.direct.resize(n);
  for (int j = 1; j <= n; ++j) {
    sol.direct(j - 1) = profile.b(j - 1) * (profile.a(j - 1) + sol.stepwise(j + 1)) - sol.stepwise(j);
  }

  // Forward: y_{N+1} = 0 closes the recurrence, w_N + q_N y_N = 0.
  // Backward: the first equation, y_2 = w_1.
  const int check = backward ? 1 : n;
  const Scalar lhs = backward ? sol.stepwise(2) - sol.w(0)
                              : sol.w(n - 1) + sol.q(n - 1) * sol.stepwise(n);
  const Scalar scale = sol.p(check - 1) * sol.phi + profile.a(check - 1);
  sol.terminal_residual = abs(lhs) / (scale > Scalar(0) ? scale : Scalar(1));

  const Scalar tol = ansatz_tolerance(profile);
  sol.valid = true;
  for (int j = 2; j <= n; ++j) {
    if (sol.stepwise(j) < -tol) {
      sol.valid = false;
      sol.infeasibility_reason = "negative stepwise flow y_" + std::to_string(j);
      break;
    }
  }
  if (sol.valid) {
    for (int j = 1; j <= n; ++j) {
      if (sol.direct(j - 1) < -tol) {
        sol.valid = false;
        sol.infeasibility_reason = "negative direct flow from node " + std::to_string(j);
        break;
      }
    }
  }
  return sol;
}

/// Stepwise flows from the closed vector form y_j = phi_{j-1}^{-1} sum_{k<j} phi_k w_k.
template <typename Scalar = double>
VectorX<Scalar> stepwise_flows_vector_form(const NodeProfile<Scalar>& profile) {
  const int n = profile.size();
  const Scalar phi = phi_exact(profile);
  const VectorX<Scalar> weights = phi_sequence(profile);
  const PqwSequences<Scalar> s = pqw(profile, phi);
  VectorX<Scalar> y = VectorX<Scalar>::Zero(std::max(0, n - 1));
  for (int j = 2; j <= n; ++j) {
    y(j - 2) = weights.head(j - 1).dot(s.w.head(j - 1)) / weights(j - 2);
  }
  return y;
}

/// Power of node j divided by c_j for the analytic schedule.
template <typename Scalar = double>
VectorX<Scalar> analytic_depletion(const NodeProfile<Scalar>& profile,
                                   const AnalyticSolution<Scalar>& sol) {
  using std::pow;
  const int n = profile.size();
  const Scalar d = profile.spacing();
  const Scalar lambda = profile.lambda();
  VectorX<Scalar> rate(n);
  for (int j = 1; j <= n; ++j) {
    const Scalar power = profile.k_t * (sol.stepwise(j) * pow(d, lambda) +
                                        sol.direct(j - 1) * pow(Scalar(j) * d, lambda));
    rate(j - 1) = power / profile.c(j - 1);
  }
  return rate;
}

// ---------------------------------------------------------------------------
// Minimum total power. With convex costs every unit of information follows the
// unit-step chain j, j-1, ..., 0.

/// Power spent by node j: t_1 sum_{m=j}^{N} a_m prod_{l=j}^{m} b_l.
template <typename Scalar = double>
Scalar min_power_node(const NodeProfile<Scalar>& profile, int j) {
  const int n = profile.size();
  if (j < 1 || j > n) throw std::out_of_range("min_power_node: node index out of range");
  Scalar sum(0);
  Scalar carried(1);
  for (int m = j; m <= n; ++m) {
    carried *= profile.b(m - 1);
    sum += profile.a(m - 1) * carried;
  }
  return unit_hop_cost(profile) * sum;
}

/// Same quantity for constant compression beta: t_1 sum_{m=0}^{N-j} a_{j+m} beta^{m+1}.
template <typename Scalar = double>
Scalar min_power_node_constant_compression(const NodeProfile<Scalar>& profile, Scalar beta, int j) {
  using std::pow;
  const int n = profile.size();
  if (j < 1 || j > n) throw std::out_of_range("min_power_node: node index out of range");
  Scalar sum(0);
  for (int m = 0; m <= n - j; ++m) sum += profile.a(j + m - 1) * pow(beta, Scalar(m + 1));
  return unit_hop_cost(profile) * sum;
}

/// Closed form for constant compression and a_j = j a_1.
template <typename Scalar = double>
Scalar min_power_node_uniform_density(Scalar beta, Scalar a1, Scalar t1, int n, int j) {
  using std::pow;
  if (j < 1 || j > n) throw std::out_of_range("min_power_node: node index out of range");
  if (beta == Scalar(1)) return t1 * a1 / Scalar(2) * Scalar(n * (n + 1) - j * (j - 1));
  const Scalar om = Scalar(1) - beta;
  return beta * t1 * a1 / (om * om) *
         (beta + Scalar(j) * om - pow(beta, Scalar(n - j + 1)) * (om * Scalar(n) + Scalar(1)));
}

/// t_1 sum_j a_j sum_{m=1}^{j} prod_{l=m}^{j} b_l.
template <typename Scalar = double>
Scalar min_power_total(const NodeProfile<Scalar>& profile) {
  const int n = profile.size();
  Scalar total(0);
  for (int j = 1; j <= n; ++j) {
    Scalar per_unit(0);
    Scalar carried(1);
    for (int m = j; m >= 1; --m) {
      carried *= profile.b(m - 1);
      per_unit += carried;
    }
    total += profile.a(j - 1) * per_unit;
  }
  return unit_hop_cost(profile) * total;
}

// ---------------------------------------------------------------------------
// Approximations of Phi for the power-law profile.

enum class InverseQForm {
  exponential,  // 1/Q(j) ~ exp(-u_j)
  polynomial,   // 1/Q(j) ~ 1 - u_j + u_j^2 / 2
};

/// The two beta-weighted sums sum j^alpha beta^j E_j and sum j^(gamma-lambda) beta^j E_j
/// with u_j = j^(1-lambda) / (lambda-1). The constant factor of 1/Q(j) is dropped.
template <typename Scalar = double>
std::pair<Scalar, Scalar> weighted_sums(const SystemParams& params,
                                        InverseQForm form = InverseQForm::exponential) {
  using std::exp;
  using std::pow;
  validate(params);
  const Scalar lambda = Scalar(params.lambda);
  const Scalar beta = Scalar(params.beta);
  Scalar num(0), den(0);
  for (int j = 1; j <= params.n_rings; ++j) {
    const Scalar jj = Scalar(j);
    const Scalar u = pow(jj, Scalar(1) - lambda) / (lambda - Scalar(1));
    const Scalar e = form == InverseQForm::exponential ? exp(-u) : Scalar(1) - u + u * u / Scalar(2);
    const Scalar bj = pow(beta, jj);
    num += pow(jj, Scalar(params.alpha)) * bj * e;
    den += pow(jj, Scalar(params.gamma) - lambda) * bj * e;
  }
  return {num, den};
}

/// Summation approximation of Phi.
template <typename Scalar = double>
Scalar phi_sum_approx(const SystemParams& params, InverseQForm form = InverseQForm::exponential) {
  using std::pow;
  validate(params);
  const auto [num, den] = weighted_sums<Scalar>(params, form);
  const int n = params.n_rings;
  return Scalar(params.beta) * pow(Scalar(params.spacing), Scalar(params.lambda)) *
         power_sum<Scalar>(n, Scalar(params.gamma)) / power_sum<Scalar>(n, Scalar(params.alpha)) *
         num / den;
}

/// Raised for parameter regions the integral approximation does not cover.
struct UnsupportedBranch : std::domain_error {
  using std::domain_error::domain_error;
};

/// Low-compression integral approximation of Phi, first order in 1 - beta^N
/// and in N^(1-lambda), with N~ = N + 1/2. Covers 1 + gamma - lambda >= 0.
template <typename Scalar = double>
Scalar phi_integral_approx(const SystemParams& params) {
  using std::abs;
  using std::log;
  using std::pow;
  validate(params);
  const Scalar alpha = Scalar(params.alpha);
  const Scalar beta = Scalar(params.beta);
  const Scalar gamma = Scalar(params.gamma);
  const Scalar lambda = Scalar(params.lambda);
  const Scalar n = Scalar(params.n_rings);
  const Scalar nt = n + Scalar(0.5);
  const Scalar lm1 = lambda - Scalar(1);
  const Scalar excess = Scalar(1) + gamma - lambda;

  const bool at_boundary = abs(excess) <= Scalar(1e-12);
  if (!at_boundary && excess < Scalar(0)) {
    throw UnsupportedBranch("integral approximation requires 1 + gamma - lambda >= 0");
  }
  const Scalar c2_den = lm1 * (alpha - lambda + Scalar(2));
  if (c2_den == Scalar(0)) throw UnsupportedBranch("integral approximation singular at alpha = lambda - 2");

  const Scalar c1 = (alpha + Scalar(1)) / (alpha + Scalar(2));
  const Scalar c2 = (alpha + Scalar(1)) / c2_den;
  const Scalar prefactor = beta * pow(nt * Scalar(params.spacing), lambda) / (gamma + Scalar(1)) *
                           (Scalar(1) - c1 * (Scalar(1) - pow(beta, n)) - c2 * pow(nt, -lm1));

  if (at_boundary) {
    const Scalar c5 = Scalar(1) / (lm1 * lm1);
    const Scalar c6 = Scalar(1) / (Scalar(4) * lm1 * lm1 * lm1);
    const Scalar c7 = -pow(Scalar(2), lm1) / (lm1 * lm1) +
                      pow(Scalar(4), lambda - Scalar(2)) / (lm1 * lm1 * lm1) + log(Scalar(2));
    return prefactor /
           (log(nt) + c5 * pow(nt, -lm1) - c6 * pow(nt, Scalar(2) - Scalar(2) * lambda) - c7);
  }
  const Scalar c34_den = lm1 * (gamma - Scalar(2) * lambda + Scalar(2));
  if (c34_den == Scalar(0)) {
    throw UnsupportedBranch("integral approximation singular at gamma = 2 lambda - 2");
  }
  const Scalar c3 = excess / c34_den;
  const Scalar c4 = Scalar(1) - excess * pow(Scalar(2), Scalar(-2) + Scalar(2) * lambda - gamma) / c34_den;
  return prefactor * excess / (Scalar(1) - c3 * pow(nt, -lm1) - c4 * pow(nt, -excess));
}

/// Least-squares slope of log Phi_exact against log N over N in [n_lo, n_hi].
/// Requires beta < 1 and beta^n_lo < 1e-6 so the weighted sums have converged.
inline double high_compression_slope(const SystemParams& params, int n_lo, int n_hi) {
  validate(params);
  if (!(params.beta < 1.0)) throw std::invalid_argument("high-compression slope needs beta < 1");
  if (n_lo < 1 || n_hi - n_lo < 2) throw std::invalid_argument("need at least three ring counts");
  if (!(std::pow(params.beta, n_lo) < 1e-6)) {
    throw std::invalid_argument("beta^n_lo must be below 1e-6 for the high-compression regime");
  }
  std::vector<double> ns, phis;
  for (int n = n_lo; n <= n_hi; ++n) {
    SystemParams p = params;
    p.n_rings = n;
    ns.push_back(n);
    phis.push_back(phi_exact(build_profile<double>(p)));
  }
  return fit_loglog_slope(ns, phis);
}

}  // namespace ringflow

#endif  // RINGFLOW_ANALYTIC_HPP_

#ifndef RINGFLOW_RING_MODEL_HPP_
#define RINGFLOW_RING_MODEL_HPP_

#include <Eigen/Core>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

namespace ringflow {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// How k_a and k_c are normalized.
///
/// `classic` uses the area factor pi * N^2 * (d + 1/2)^2.
/// `unit_density` uses the disk area pi * ((N + 1/2) * d)^2, which makes the
/// information and capacity per unit area exactly one. The depletion rate only
/// depends on k_a / k_c, so both modes give the same Phi; flows differ by a
/// constant factor.
enum class Normalization { classic, unit_density };

inline const char* to_string(Normalization n) {
  return n == Normalization::classic ? "classic" : "unit_density";
}

inline Normalization normalization_from_string(const std::string& s) {
  if (s == "classic") return Normalization::classic;
  if (s == "unit_density") return Normalization::unit_density;
  throw std::invalid_argument("unknown normalization '" + s + "'");
}

/// The scalar knobs of the line-of-nodes model. Defaults are the baseline
/// configuration (alpha = beta = gamma = 1, lambda = 2, N = 20, d = 1).
struct SystemParams {
  double alpha = 1.0;    // information density exponent
  double beta = 1.0;     // compression ratio, (0, 1]
  double gamma = 1.0;    // capacity exponent
  double lambda = 2.0;   // transmission power exponent, > 1
  int n_rings = 20;      // N
  double spacing = 1.0;  // ring spacing d
  Normalization normalization = Normalization::classic;

  bool operator==(const SystemParams&) const = default;
};

/// Throws std::invalid_argument when a hard invariant is violated.
inline void validate(const SystemParams& p) {
  auto fail = [](const std::string& what) { throw std::invalid_argument(what); };
  if (!std::isfinite(p.alpha) || !std::isfinite(p.gamma)) fail("alpha and gamma must be finite");
  if (!(p.beta > 0.0 && p.beta <= 1.0)) fail("beta must lie in (0, 1]");
  if (!(p.lambda > 1.0) || !std::isfinite(p.lambda)) fail("lambda must exceed 1");
  if (p.n_rings < 1) fail("number of rings must be at least 1");
  if (!(p.spacing > 0.0) || !std::isfinite(p.spacing)) fail("ring spacing must be positive");
}

/// True when every knob lies in the simulated ranges (alpha, gamma in [0, 3],
/// beta in [0.5, 1], lambda in [1.1, 3], N in [1, 200], d in (0, 1]).
inline bool within_table_ranges(const SystemParams& p) {
  return p.alpha >= 0.0 && p.alpha <= 3.0 && p.beta >= 0.5 && p.beta <= 1.0 &&
         p.gamma >= 0.0 && p.gamma <= 3.0 && p.lambda >= 1.1 && p.lambda <= 3.0 &&
         p.n_rings >= 1 && p.n_rings <= 200 && p.spacing > 0.0 && p.spacing <= 1.0;
}

/// Sum_{j=1}^{n} j^exponent.
template <typename Scalar = double>
Scalar power_sum(int n, Scalar exponent) {
  using std::pow;
  Scalar s(0);
  for (int j = 1; j <= n; ++j) s += pow(Scalar(j), exponent);
  return s;
}

template <typename Scalar = double>
Scalar area_factor(const SystemParams& p) {
  const Scalar pi = std::numbers::pi_v<Scalar>;
  const Scalar n = Scalar(p.n_rings);
  const Scalar d = Scalar(p.spacing);
  if (p.normalization == Normalization::classic) {
    return pi * n * n * (d + Scalar(0.5)) * (d + Scalar(0.5));
  }
  const Scalar radius = (n + Scalar(0.5)) * d;
  return pi * radius * radius;
}

/// Returns (k_a, k_c).
template <typename Scalar = double>
std::pair<Scalar, Scalar> normalizers(const SystemParams& p) {
  validate(p);
  const Scalar area = area_factor<Scalar>(p);
  return {area / power_sum<Scalar>(p.n_rings, Scalar(p.alpha)),
          area / power_sum<Scalar>(p.n_rings, Scalar(p.gamma))};
}

/// Per-node sequences of the line-of-nodes model. Entry j-1 of each vector
/// holds ring j (the sink is node 0 and has no entry).
template <typename Scalar = double>
struct NodeProfile {
  SystemParams params;
  VectorX<Scalar> a;  // information rate
  VectorX<Scalar> b;  // compression
  VectorX<Scalar> c;  // remaining energy capacity
  Scalar k_a = Scalar(1);
  Scalar k_c = Scalar(1);
  Scalar k_t = Scalar(1);

  int size() const { return static_cast<int>(a.size()); }
  Scalar spacing() const { return Scalar(params.spacing); }
  Scalar lambda() const { return Scalar(params.lambda); }
  bool uses_compression() const { return size() > 0 && b.minCoeff() < Scalar(1); }
};

/// k_t * (d * |i - j|)^lambda; i = j is rejected.
template <typename Scalar = double>
Scalar transmission_cost(int i, int j, Scalar spacing, Scalar lambda, Scalar k_t = Scalar(1)) {
  using std::pow;
  if (i == j) throw std::invalid_argument("self-transmission is not allowed");
  const int hops = i > j ? i - j : j - i;
  return k_t * pow(spacing * Scalar(hops), lambda);
}

template <typename Scalar = double>
Scalar transmission_cost(int i, int j, const SystemParams& p) {
  return transmission_cost<Scalar>(i, j, Scalar(p.spacing), Scalar(p.lambda));
}

template <typename Scalar = double>
Scalar transmission_cost(int i, int j, const NodeProfile<Scalar>& profile) {
  return transmission_cost<Scalar>(i, j, profile.spacing(), profile.lambda(), profile.k_t);
}

/// Cost of one unit hop, t_1 = k_t * d^lambda.
template <typename Scalar = double>
Scalar unit_hop_cost(const NodeProfile<Scalar>& profile) {
  return transmission_cost<Scalar>(1, 0, profile);
}

/// a_j = k_a j^alpha, b_j = beta, c_j = k_c j^gamma with the normalizers applied.
template <typename Scalar = double>
NodeProfile<Scalar> build_profile(const SystemParams& p) {
  using std::pow;
  validate(p);
  const auto [k_a, k_c] = normalizers<Scalar>(p);
  NodeProfile<Scalar> out;
  out.params = p;
  out.k_a = k_a;
  out.k_c = k_c;
  out.k_t = Scalar(1);
  const int n = p.n_rings;
  out.a.resize(n);
  out.b.setConstant(n, Scalar(p.beta));
  out.c.resize(n);
  for (int j = 1; j <= n; ++j) {
    out.a(j - 1) = k_a * pow(Scalar(j), Scalar(p.alpha));
    out.c(j - 1) = k_c * pow(Scalar(j), Scalar(p.gamma));
  }
  return out;
}

/// Profile with caller-supplied sequences. `params` still provides d and lambda;
/// its alpha/beta/gamma are not consulted.
template <typename Scalar = double>
NodeProfile<Scalar> make_profile(const SystemParams& p, VectorX<Scalar> a, VectorX<Scalar> b,
                                 VectorX<Scalar> c, Scalar k_t = Scalar(1)) {
  if (a.size() == 0 || a.size() != b.size() || a.size() != c.size()) {
    throw std::invalid_argument("profile sequences must be nonempty and of equal length");
  }
  if ((a.array() < Scalar(0)).any()) throw std::invalid_argument("a_j must be nonnegative");
  if ((b.array() <= Scalar(0)).any() || (b.array() > Scalar(1)).any()) {
    throw std::invalid_argument("b_j must lie in (0, 1]");
  }
  if ((c.array() <= Scalar(0)).any()) throw std::invalid_argument("c_j must be positive");
  NodeProfile<Scalar> out;
  out.params = p;
  out.params.n_rings = static_cast<int>(a.size());
  validate(out.params);
  out.a = std::move(a);
  out.b = std::move(b);
  out.c = std::move(c);
  out.k_t = k_t;
  return out;
}

}  // namespace ringflow

#endif  // RINGFLOW_RING_MODEL_HPP_

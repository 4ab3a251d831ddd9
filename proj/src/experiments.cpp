#include "ringflow/experiments.hpp"

#include "ringflow/flow_opt.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ringflow {

const char* to_string(Param p) {
  switch (p) {
    case Param::alpha: return "alpha";
    case Param::beta: return "beta";
    case Param::gamma: return "gamma";
    case Param::lambda: return "lambda";
    case Param::n: return "n";
    case Param::d: return "d";
  }
  return "?";
}

Param param_from_string(std::string_view name) {
  if (name == "alpha") return Param::alpha;
  if (name == "beta") return Param::beta;
  if (name == "gamma") return Param::gamma;
  if (name == "lambda") return Param::lambda;
  if (name == "n" || name == "N") return Param::n;
  if (name == "d") return Param::d;
  throw std::invalid_argument("unknown parameter '" + std::string(name) + "'");
}

double get_param(const SystemParams& params, Param p) {
  switch (p) {
    case Param::alpha: return params.alpha;
    case Param::beta: return params.beta;
    case Param::gamma: return params.gamma;
    case Param::lambda: return params.lambda;
    case Param::n: return params.n_rings;
    case Param::d: return params.spacing;
  }
  return 0.0;
}

void set_param(SystemParams& params, Param p, double value) {
  switch (p) {
    case Param::alpha: params.alpha = value; break;
    case Param::beta: params.beta = value; break;
    case Param::gamma: params.gamma = value; break;
    case Param::lambda: params.lambda = value; break;
    case Param::d: params.spacing = value; break;
    case Param::n:
      if (!std::isfinite(value) || value != std::round(value) || value < 1 || value > 1e6)
        throw std::invalid_argument("ring count must be a positive integer");
      params.n_rings = static_cast<int>(value);
      break;
  }
}

SystemParams with_param(SystemParams params, Param p, double value) {
  set_param(params, p, value);
  return params;
}

AxisSpec AxisSpec::linspace(Param name, double lo, double hi, int count) {
  if (count < 2) throw std::invalid_argument("axis needs at least 2 samples");
  if (!(lo < hi)) throw std::invalid_argument("axis range must satisfy lo < hi");
  AxisSpec axis{name, {}};
  axis.values.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) axis.values.push_back(lo + (hi - lo) * i / (count - 1));
  axis.values.back() = hi;
  return axis;
}

// ---- node study -------------------------------------------------------------

NodeStudyTable node_study(const SystemParams& params) {
  const auto profile = build_profile(params);
  const auto sol = solve_max_lifetime(profile);
  NodeStudyTable table;
  table.params = params;
  table.phi = sol.phi;
  table.analytic_valid = stepwise_flows(profile).valid;
  const int n = profile.size();
  table.rows.reserve(static_cast<std::size_t>(n));
  for (int j = 1; j <= n; ++j) {
    const auto& node = sol.per_node[static_cast<std::size_t>(j - 1)];
    const double c = profile.c(j - 1);
    NodeStudyRow row;
    row.j = j;
    row.rel_pos = static_cast<double>(j) / n;
    row.info_direct = node.direct_info;
    row.info_stepwise = node.stepwise_info;
    row.info_other = node.other_info;
    row.info_total = node.total_info();
    row.power_direct = node.direct_power;
    row.power_stepwise = node.stepwise_power;
    row.power_total = node.total_power();
    row.depl_direct = node.direct_power / c;
    row.depl_stepwise = node.stepwise_power / c;
    row.depl_total = node.depletion_rate;
    table.rows.push_back(row);
  }
  return table;
}

std::vector<NodeStudyTable> run_node_study(const SystemParams& base, Param varied,
                                           std::span<const double> values) {
  std::vector<NodeStudyTable> out;
  out.reserve(values.size());
  for (double v : values) out.push_back(node_study(with_param(base, varied, v)));
  return out;
}

// ---- heatmaps ---------------------------------------------------------------

GridCell solve_cell(const SystemParams& params) {
  const auto profile = build_profile(params);
  const auto lp = build_max_lifetime_lp(profile);
  const auto sol = solve_max_lifetime(profile);
  const auto an = stepwise_flows(profile);
  GridCell cell;
  cell.phi_lp = sol.phi;
  cell.phi_exact = an.phi;
  cell.log10_phi = std::log10(sol.phi);
  cell.structure_ok = classify_flows(sol, default_structure_tolerance(profile)).is_direct_stepwise_only;
  cell.analytic_valid = an.valid;
  cell.consistent = !an.valid || std::abs(sol.phi - an.phi) <= consistency_tolerance * an.phi;
  cell.lp_iterations = sol.lp.iterations;
  cell.lp_size = static_cast<int>(lp.problem.num_constraints() + lp.problem.num_variables());
  return cell;
}

SweepGrid run_heatmap(const SystemParams& base, const AxisSpec& x, const AxisSpec& y) {
  if (x.name == y.name) throw std::invalid_argument("heatmap axes must differ");
  SweepGrid grid{base, x, y, {}};
  grid.cells.reserve(x.size() * y.size());
  for (double xv : x.values) {
    for (double yv : y.values) {
      SystemParams p = with_param(with_param(base, x.name, xv), y.name, yv);
      GridCell cell = solve_cell(p);
      cell.x_value = xv;
      cell.y_value = yv;
      grid.cells.push_back(cell);
    }
  }
  return grid;
}

AxisSpec table_axis(Param name, int count) {
  switch (name) {
    case Param::alpha: return AxisSpec::linspace(name, 0.0, 3.0, count);
    case Param::beta: return AxisSpec::linspace(name, 0.5, 1.0, count);
    case Param::gamma: return AxisSpec::linspace(name, 0.0, 3.0, count);
    case Param::lambda: return AxisSpec::linspace(name, 1.1, 3.0, count);
    case Param::d: return AxisSpec::linspace(name, 0.05, 1.0, count);
    case Param::n: break;
  }
  throw std::invalid_argument("no default heatmap range for the ring count");
}

int count_inconsistent(const SweepGrid& grid) {
  return static_cast<int>(std::count_if(grid.cells.begin(), grid.cells.end(),
                                        [](const GridCell& c) { return !c.consistent; }));
}

// ---- ring-count scaling -----------------------------------------------------

const char* to_string(SpacingMode m) {
  switch (m) {
    case SpacingMode::fixed: return "fixed";
    case SpacingMode::constant_area: return "area";
    case SpacingMode::constant_area_outer: return "area-n";
  }
  return "?";
}

SpacingMode spacing_mode_from_string(std::string_view text) {
  if (text == "fixed") return SpacingMode::fixed;
  if (text == "area") return SpacingMode::constant_area;
  if (text == "area-n") return SpacingMode::constant_area_outer;
  throw std::invalid_argument("unknown area mode '" + std::string(text) +
                              "' (expected fixed, area or area-n)");
}

double spacing_for(SpacingMode mode, double base_spacing, int n_rings) {
  switch (mode) {
    case SpacingMode::fixed: return base_spacing;
    case SpacingMode::constant_area: return 1.0 / (n_rings + 0.5);
    case SpacingMode::constant_area_outer: return 1.0 / n_rings;
  }
  return base_spacing;
}

std::vector<double> ScalingTable::ns() const {
  std::vector<double> out;
  for (const auto& r : rows) out.push_back(r.n);
  return out;
}

std::vector<double> ScalingTable::phi_exact_column() const {
  std::vector<double> out;
  for (const auto& r : rows) {
    if (!r.phi_exact) throw std::logic_error("scaling row lacks phi_exact");
    out.push_back(*r.phi_exact);
  }
  return out;
}

ScalingRow scaling_row(const SystemParams& params, const MethodSet& methods) {
  const auto profile = build_profile(params);
  ScalingRow row;
  row.n = params.n_rings;
  row.d = params.spacing;
  if (methods.lp) row.phi_lp = solve_max_lifetime(profile).phi;
  const auto an = stepwise_flows(profile);
  row.analytic_valid = an.valid;
  if (methods.exact) row.phi_exact = an.phi;
  if (methods.sum) row.phi_sum = phi_sum_approx<double>(params);
  if (methods.integral) {
    try {
      row.phi_integral = phi_integral_approx<double>(params);
    } catch (const UnsupportedBranch&) {
      row.phi_integral.reset();
    }
  }
  return row;
}

ScalingTable run_scaling(const SystemParams& base, std::span<const int> n_values, SpacingMode mode,
                         const MethodSet& methods) {
  ScalingTable table;
  table.base = base;
  table.mode = mode;
  table.rows.reserve(n_values.size());
  for (int n : n_values) {
    SystemParams p = base;
    p.n_rings = n;
    p.spacing = spacing_for(mode, base.spacing, n);
    table.rows.push_back(scaling_row(p, methods));
  }
  return table;
}

std::vector<ScalingTable> run_scaling_series(const SystemParams& base, std::span<const int> n_values,
                                             Param series, std::span<const double> series_values,
                                             SpacingMode mode, const MethodSet& methods) {
  if (series == Param::n) throw std::invalid_argument("series parameter cannot be the ring count");
  if (series == Param::d && mode != SpacingMode::fixed)
    throw std::invalid_argument("spacing is determined by the area mode");
  std::vector<ScalingTable> out;
  for (double v : series_values) {
    ScalingTable t = run_scaling(with_param(base, series, v), n_values, mode, methods);
    t.series = series;
    t.series_value = v;
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<ScalingTable> run_scaling_fixed_spacing(const SystemParams& base,
                                                    std::span<const int> n_values,
                                                    std::span<const double> beta_values,
                                                    const MethodSet& methods) {
  return run_scaling_series(base, n_values, Param::beta, beta_values, SpacingMode::fixed, methods);
}

std::vector<ScalingTable> run_scaling_fixed_area(const SystemParams& base,
                                                 std::span<const int> n_values,
                                                 std::span<const double> gamma_values,
                                                 const MethodSet& methods, SpacingMode mode) {
  if (mode == SpacingMode::fixed) throw std::invalid_argument("fixed-area scaling needs an area mode");
  return run_scaling_series(base, n_values, Param::gamma, gamma_values, mode, methods);
}

std::vector<int> int_range(int lo, int hi) {
  std::vector<int> out;
  for (int n = lo; n <= hi; ++n) out.push_back(n);
  return out;
}

}  // namespace ringflow

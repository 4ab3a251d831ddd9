#pragma once

#include "ringflow/analytic.hpp"
#include "ringflow/fit.hpp"
#include "ringflow/ring_model.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ringflow {

enum class Param { alpha, beta, gamma, lambda, n, d };

const char* to_string(Param p);
/// Accepts alpha, beta, gamma, lambda, n, d (also N). Throws std::invalid_argument.
Param param_from_string(std::string_view name);

double get_param(const SystemParams& params, Param p);
/// Ring counts must be integral; throws std::invalid_argument otherwise.
void set_param(SystemParams& params, Param p, double value);
SystemParams with_param(SystemParams params, Param p, double value);

struct AxisSpec {
  Param name = Param::alpha;
  std::vector<double> values;

  /// count >= 2 evenly spaced samples from lo to hi inclusive.
  static AxisSpec linspace(Param name, double lo, double hi, int count);
  std::size_t size() const { return values.size(); }
  bool operator==(const AxisSpec&) const = default;
};

// ---- node study -------------------------------------------------------------

struct NodeStudyRow {
  int j = 0;
  double rel_pos = 0;
  double info_direct = 0, info_stepwise = 0, info_other = 0, info_total = 0;
  double power_direct = 0, power_stepwise = 0, power_total = 0;
  double depl_direct = 0, depl_stepwise = 0, depl_total = 0;
};

struct NodeStudyTable {
  SystemParams params;
  double phi = 0;
  bool analytic_valid = false;
  std::vector<NodeStudyRow> rows;
};

/// Per-node breakdown of the max-lifetime LP at `params`.
NodeStudyTable node_study(const SystemParams& params);
std::vector<NodeStudyTable> run_node_study(const SystemParams& base, Param varied,
                                           std::span<const double> values);

// ---- heatmaps ---------------------------------------------------------------

struct GridCell {
  double x_value = 0, y_value = 0;
  double phi_lp = 0, phi_exact = 0, log10_phi = 0;
  bool structure_ok = false;
  bool analytic_valid = false;
  // analytic_valid implies |phi_lp - phi_exact| <= 1e-6 phi_exact.
  bool consistent = true;
  int lp_iterations = 0;
  int lp_size = 0;  // rows + columns of the LP
};

struct SweepGrid {
  SystemParams base;
  AxisSpec x, y;
  std::vector<GridCell> cells;  // x-major: index = ix * y.size() + iy

  const GridCell& at(std::size_t ix, std::size_t iy) const { return cells.at(ix * y.size() + iy); }
  bool empty() const { return cells.empty(); }
};

inline constexpr double consistency_tolerance = 1e-6;
inline constexpr int default_heatmap_resolution = 13;

GridCell solve_cell(const SystemParams& params);
SweepGrid run_heatmap(const SystemParams& base, const AxisSpec& x, const AxisSpec& y);
/// Default heatmap range for a parameter (13 samples).
AxisSpec table_axis(Param name, int count = default_heatmap_resolution);
int count_inconsistent(const SweepGrid& grid);

// ---- ring-count scaling -----------------------------------------------------

enum class SpacingMode { fixed, constant_area, constant_area_outer };

const char* to_string(SpacingMode m);
SpacingMode spacing_mode_from_string(std::string_view text);
/// Spacing for N rings: base spacing, 1/(N+0.5), or 1/N.
double spacing_for(SpacingMode mode, double base_spacing, int n_rings);

struct MethodSet {
  bool lp = true, exact = true, sum = true, integral = true;

  bool any() const { return lp || exact || sum || integral; }
  bool operator==(const MethodSet&) const = default;
};

struct ScalingRow {
  int n = 0;
  double d = 0;
  std::optional<double> phi_lp, phi_exact, phi_sum, phi_integral;
  bool analytic_valid = false;
};

struct ScalingTable {
  SystemParams base;
  SpacingMode mode = SpacingMode::fixed;
  std::optional<Param> series;
  double series_value = 0;
  std::vector<ScalingRow> rows;

  std::vector<double> ns() const;
  /// Requires every row to carry phi_exact.
  std::vector<double> phi_exact_column() const;
};

ScalingRow scaling_row(const SystemParams& params, const MethodSet& methods);
ScalingTable run_scaling(const SystemParams& base, std::span<const int> n_values,
                         SpacingMode mode, const MethodSet& methods = {});
/// One table per series value, each a copy of `base` with `series` set.
std::vector<ScalingTable> run_scaling_series(const SystemParams& base, std::span<const int> n_values,
                                             Param series, std::span<const double> series_values,
                                             SpacingMode mode, const MethodSet& methods = {});
std::vector<ScalingTable> run_scaling_fixed_spacing(const SystemParams& base,
                                                    std::span<const int> n_values,
                                                    std::span<const double> beta_values,
                                                    const MethodSet& methods = {});
std::vector<ScalingTable> run_scaling_fixed_area(const SystemParams& base,
                                                 std::span<const int> n_values,
                                                 std::span<const double> gamma_values,
                                                 const MethodSet& methods = {},
                                                 SpacingMode mode = SpacingMode::constant_area);

std::vector<int> int_range(int lo, int hi);

}  // namespace ringflow

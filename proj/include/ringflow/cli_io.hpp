#pragma once

#include "ringflow/experiments.hpp"

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ringflow {

inline constexpr const char* version_string = "0.1.0";

enum class Subcommand { solve, study, heatmap, scaling };

const char* to_string(Subcommand s);

struct RunConfig {
  Subcommand subcommand = Subcommand::solve;
  SystemParams params;
  std::optional<AxisSpec> x, y;
  MethodSet methods;
  std::string out = "ringflow";
  bool svg = false;
  SpacingMode area_mode = SpacingMode::fixed;
  std::optional<std::pair<double, double>> svg_range;  // fixed log10 colour range

  bool operator==(const RunConfig&) const = default;
};

/// Validation failure: bad flag, bad value or inconsistent axes. Exit code 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised by parse_config for --help; what() is the usage text.
struct HelpRequested : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// LP and closed form disagree where the closed form is valid. Exit code 2.
struct InconsistencyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// `args` starts with the subcommand. `file_text` holds `key = value` lines
/// (keys are flag names without dashes; `#` starts a comment).
/// Precedence: flags, then file, then the baseline parameters.
RunConfig parse_config(const std::vector<std::string>& args,
                       const std::optional<std::string>& file_text = std::nullopt);

/// Canonical argument list; parse_config(to_args(c)) == c.
std::vector<std::string> to_args(const RunConfig& config);

/// `# ringflow <version> | args: ... | params: ...`
std::string metadata_line(const RunConfig& config);
/// Tokens between "args:" and the next '|' of a metadata line.
std::vector<std::string> args_from_metadata(const std::string& line);

AxisSpec parse_axis(const std::string& text);
std::string format_axis(const AxisSpec& axis);

/// Fixed-point, 12 decimals.
std::string format_number(double v);

// Every emitter writes the metadata line first when it is non-empty.
void emit_csv(const NodeStudyTable& table, std::ostream& os, const std::string& metadata = {});
void emit_csv(const SweepGrid& grid, std::ostream& os, const std::string& metadata = {});
void emit_csv(const ScalingTable& table, std::ostream& os, const std::string& metadata = {});
/// Single-row summary for `solve`.
void emit_csv(const ScalingRow& row, bool structure_ok, std::ostream& os,
              const std::string& metadata = {});

template <typename Table>
void emit_csv(const Table& table, const std::string& path, const std::string& metadata = {});

std::string heatmap_svg(const SweepGrid& grid,
                        std::optional<std::pair<double, double>> range = std::nullopt);
void render_heatmap_svg(const SweepGrid& grid, const std::string& path,
                        std::optional<std::pair<double, double>> range = std::nullopt);

void write_file(const std::string& path, const std::string& contents);

/// Runs the configured experiment, writes its files and returns the paths written.
/// Throws InconsistencyError after writing if any valid closed form disagrees with the LP.
std::vector<std::string> run(const RunConfig& config, std::ostream& log);

/// Full command-line entry point: handles --config, maps errors to exit codes.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ringflow

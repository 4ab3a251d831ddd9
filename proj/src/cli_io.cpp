#include "ringflow/cli_io.hpp"

#include "ringflow/flow_opt.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

namespace ringflow {

namespace {

constexpr std::array<const char*, 13> kKeys = {"alpha", "beta",   "gamma", "lambda",   "n",
                                               "d",     "normalization", "method", "x",
                                               "y",     "out",    "svg",   "area-mode"};
constexpr const char* kSvgRangeKey = "svg-range";

bool known_key(const std::string& key) {
  return key == kSvgRangeKey || std::find(kKeys.begin(), kKeys.end(), key) != kKeys.end();
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_number(const std::string& text, const std::string& what) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (text.empty() || ec != std::errc() || ptr != last || !std::isfinite(v))
    throw ConfigError(fmt::format("{}: '{}' is not a number", what, text));
  return v;
}

int parse_count(const std::string& text, const std::string& what) {
  const double v = parse_number(text, what);
  if (v != std::round(v) || v < 1 || v > 1e6)
    throw ConfigError(fmt::format("{}: '{}' is not a positive integer", what, text));
  return static_cast<int>(v);
}

bool parse_bool(const std::string& text, const std::string& what) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError(fmt::format("{}: '{}' is not a boolean", what, text));
}

MethodSet parse_methods(const std::string& text) {
  MethodSet m{false, false, false, false};
  for (const auto& item : split(text, ',')) {
    if (item == "all") m = MethodSet{};
    else if (item == "lp") m.lp = true;
    else if (item == "exact") m.exact = true;
    else if (item == "sum") m.sum = true;
    else if (item == "integral") m.integral = true;
    else throw ConfigError(fmt::format("method: unknown method '{}'", item));
  }
  if (!m.any()) throw ConfigError("method: at least one method is required");
  return m;
}

std::string format_methods(const MethodSet& m) {
  std::vector<std::string> parts;
  if (m.lp) parts.emplace_back("lp");
  if (m.exact) parts.emplace_back("exact");
  if (m.sum) parts.emplace_back("sum");
  if (m.integral) parts.emplace_back("integral");
  return fmt::format("{}", fmt::join(parts, ","));
}

std::pair<double, double> parse_range(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() != 2) throw ConfigError("svg-range: expected lo:hi");
  const double lo = parse_number(parts[0], "svg-range");
  const double hi = parse_number(parts[1], "svg-range");
  if (!(lo < hi)) throw ConfigError("svg-range: need lo < hi");
  return {lo, hi};
}

Subcommand parse_subcommand(const std::string& s) {
  if (s == "solve") return Subcommand::solve;
  if (s == "study") return Subcommand::study;
  if (s == "heatmap") return Subcommand::heatmap;
  if (s == "scaling") return Subcommand::scaling;
  throw ConfigError(fmt::format("unknown subcommand '{}' (expected solve, study, heatmap or scaling)", s));
}

std::map<std::string, std::string> parse_file(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(fmt::format("config line {}: expected key = value", lineno));
    std::string key = trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    if (!known_key(key)) throw ConfigError(fmt::format("config line {}: unknown key '{}'", lineno, key));
    out[key] = value;
  }
  return out;
}

std::string usage_text() {
  return "usage: ringflow <solve|study|heatmap|scaling> [options]\n"
         "  --alpha --beta --gamma --lambda --n --d   model parameters\n"
         "  --normalization classic|unit_density\n"
         "  --method lp,exact,sum,integral            Phi routes (scaling, solve)\n"
         "  --x NAME:lo:hi:count | NAME:v1,v2,...     first axis\n"
         "  --y NAME:lo:hi:count | NAME:v1,v2,...     second axis\n"
         "  --out PREFIX                              output path prefix\n"
         "  --svg                                     also write the heatmap SVG\n"
         "  --svg-range lo:hi                         fixed log10 colour range\n"
         "  --area-mode fixed|area|area-n             spacing rule for scaling\n"
         "  --config FILE                             key = value defaults\n";
}

void check_axis_values(const SystemParams& base, const AxisSpec& axis, const char* which) {
  for (double v : axis.values) {
    try {
      validate(with_param(base, axis.name, v));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(fmt::format("{} axis value {}: {}", which, v, e.what()));
    }
  }
}

void check_axes(const RunConfig& c) {
  switch (c.subcommand) {
    case Subcommand::solve:
      if (c.x || c.y) throw ConfigError("solve takes no axis specs");
      break;
    case Subcommand::study:
      if (!c.x) throw ConfigError("study needs --x (the varied parameter)");
      if (c.y) throw ConfigError("study takes a single axis");
      break;
    case Subcommand::heatmap:
      if (!c.x || !c.y) throw ConfigError("heatmap needs both --x and --y");
      if (c.x->name == c.y->name) throw ConfigError("heatmap axes name the same parameter");
      if (c.x->size() < 2 || c.y->size() < 2) throw ConfigError("heatmap axes need at least 2 samples");
      break;
    case Subcommand::scaling:
      if (!c.x || c.x->name != Param::n) throw ConfigError("scaling needs --x n:... (ring counts)");
      if (c.y && c.y->name == Param::n) throw ConfigError("scaling series cannot be the ring count");
      if (c.y && c.y->name == Param::d && c.area_mode != SpacingMode::fixed)
        throw ConfigError("spacing series contradicts the constant-area mode");
      break;
  }
  if (c.subcommand != Subcommand::scaling && c.area_mode != SpacingMode::fixed)
    throw ConfigError("--area-mode applies to scaling only");
  if (c.x) check_axis_values(c.params, *c.x, "x");
  if (c.y) check_axis_values(c.params, *c.y, "y");
  if (c.x && c.y) {
    // Every combination must be a valid system.
    for (double xv : c.x->values) check_axis_values(with_param(c.params, c.x->name, xv), *c.y, "y");
  }
}

std::string bool_field(bool b) { return b ? "1" : "0"; }

std::string optional_field(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

std::string params_summary(const SystemParams& p) {
  return fmt::format("alpha={} beta={} gamma={} lambda={} n={} d={} normalization={}", p.alpha, p.beta,
                     p.gamma, p.lambda, p.n_rings, p.spacing, to_string(p.normalization));
}

}  // namespace

const char* to_string(Subcommand s) {
  switch (s) {
    case Subcommand::solve: return "solve";
    case Subcommand::study: return "study";
    case Subcommand::heatmap: return "heatmap";
    case Subcommand::scaling: return "scaling";
  }
  return "?";
}

AxisSpec parse_axis(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ConfigError(fmt::format("axis '{}': expected NAME:...", text));
  AxisSpec axis;
  try {
    axis.name = param_from_string(trim(std::string_view(text).substr(0, colon)));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(fmt::format("axis '{}': {}", text, e.what()));
  }
  const auto parts = split(std::string_view(text).substr(colon + 1), ':');
  if (parts.size() == 3) {
    const double lo = parse_number(parts[0], "axis lo");
    const double hi = parse_number(parts[1], "axis hi");
    const int count = parse_count(parts[2], "axis count");
    try {
      axis = AxisSpec::linspace(axis.name, lo, hi, count);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(fmt::format("axis '{}': {}", text, e.what()));
    }
  } else if (parts.size() == 1) {
    for (const auto& item : split(parts[0], ',')) axis.values.push_back(parse_number(item, "axis value"));
    std::sort(axis.values.begin(), axis.values.end());
    axis.values.erase(std::unique(axis.values.begin(), axis.values.end()), axis.values.end());
  } else {
    throw ConfigError(fmt::format("axis '{}': expected NAME:lo:hi:count or NAME:v1,v2,...", text));
  }
  if (axis.name == Param::n) {
    for (double v : axis.values) parse_count(fmt::format("{}", v), "ring count");
  }
  return axis;
}

std::string format_axis(const AxisSpec& axis) {
  return fmt::format("{}:{}", to_string(axis.name), fmt::join(axis.values, ","));
}

RunConfig parse_config(const std::vector<std::string>& args, const std::optional<std::string>& file_text) {
  if (args.empty()) throw ConfigError("missing subcommand\n" + usage_text());
  if (args[0] == "-h" || args[0] == "--help") throw HelpRequested(usage_text());
  RunConfig config;
  config.subcommand = parse_subcommand(args[0]);

  CLI::App app("ringflow", "ringflow");
  app.set_help_flag("-h,--help");
  std::map<std::string, std::string> flag_values;
  std::map<std::string, CLI::Option*> options;
  for (const char* key : kKeys) {
    if (std::string(key) == "svg") continue;
    options[key] = app.add_option(std::string("--") + key, flag_values[key]);
  }
  options[kSvgRangeKey] = app.add_option(std::string("--") + kSvgRangeKey, flag_values[kSvgRangeKey]);
  bool svg_flag = false;
  CLI::Option* svg_opt = app.add_flag("--svg", svg_flag);

  std::vector<std::string> rest(args.rbegin(), args.rend() - 1);  // CLI11 consumes from the back
  try {
    app.parse(rest);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested(usage_text());
  } catch (const CLI::ParseError& e) {
    throw ConfigError(e.what());
  }

  std::map<std::string, std::string> merged = file_text ? parse_file(*file_text) : std::map<std::string, std::string>{};
  for (const auto& [key, opt] : options) {
    if (opt->count() > 0) merged[key] = flag_values[key];
  }
  if (svg_opt->count() > 0) merged["svg"] = svg_flag ? "true" : "false";

  auto get = [&](const char* key) -> const std::string* {
    auto it = merged.find(key);
    return it == merged.end() ? nullptr : &it->second;
  };
  SystemParams& p = config.params;
  if (auto v = get("alpha")) p.alpha = parse_number(*v, "alpha");
  if (auto v = get("beta")) p.beta = parse_number(*v, "beta");
  if (auto v = get("gamma")) p.gamma = parse_number(*v, "gamma");
  if (auto v = get("lambda")) p.lambda = parse_number(*v, "lambda");
  if (auto v = get("n")) p.n_rings = parse_count(*v, "n");
  if (auto v = get("d")) p.spacing = parse_number(*v, "d");
  try {
    if (auto v = get("normalization")) p.normalization = normalization_from_string(*v);
    if (auto v = get("area-mode")) config.area_mode = spacing_mode_from_string(*v);
    validate(p);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (auto v = get("method")) config.methods = parse_methods(*v);
  if (auto v = get("x")) config.x = parse_axis(*v);
  if (auto v = get("y")) config.y = parse_axis(*v);
  if (auto v = get("out")) {
    if (v->empty() || v->find_first_of(" \t\n|") != std::string::npos)
      throw ConfigError("out: prefix must be nonempty without whitespace or '|'");
    config.out = *v;
  }
  if (auto v = get("svg")) config.svg = parse_bool(*v, "svg");
  if (auto v = get(kSvgRangeKey)) config.svg_range = parse_range(*v);
  check_axes(config);
  return config;
}

std::vector<std::string> to_args(const RunConfig& c) {
  const SystemParams& p = c.params;
  std::vector<std::string> args = {
      to_string(c.subcommand),
      "--alpha", fmt::format("{}", p.alpha),
      "--beta", fmt::format("{}", p.beta),
      "--gamma", fmt::format("{}", p.gamma),
      "--lambda", fmt::format("{}", p.lambda),
      "--n", fmt::format("{}", p.n_rings),
      "--d", fmt::format("{}", p.spacing),
      "--normalization", to_string(p.normalization),
      "--method", format_methods(c.methods),
  };
  if (c.x) args.insert(args.end(), {"--x", format_axis(*c.x)});
  if (c.y) args.insert(args.end(), {"--y", format_axis(*c.y)});
  args.insert(args.end(), {"--out", c.out, "--area-mode", to_string(c.area_mode)});
  if (c.svg) args.emplace_back("--svg");
  if (c.svg_range)
    args.insert(args.end(), {"--svg-range", fmt::format("{}:{}", c.svg_range->first, c.svg_range->second)});
  return args;
}

std::string metadata_line(const RunConfig& config) {
  return fmt::format("# ringflow {} | args: {} | params: {}", version_string,
                     fmt::join(to_args(config), " "), params_summary(config.params));
}

std::vector<std::string> args_from_metadata(const std::string& line) {
  const std::string tag = "args: ";
  const auto start = line.find(tag);
  if (start == std::string::npos) throw ConfigError("metadata line has no args");
  const auto end = line.find(" |", start);
  std::istringstream in(line.substr(start + tag.size(), end == std::string::npos ? end : end - start - tag.size()));
  std::vector<std::string> out;
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

std::string format_number(double v) { return fmt::format("{:.12f}", v); }

// ---- CSV --------------------------------------------------------------------

void emit_csv(const NodeStudyTable& table, std::ostream& os, const std::string& metadata) {
  if (!metadata.empty()) os << metadata << '\n';
  os << "j,rel_pos,info_direct,info_stepwise,info_other,info_total,power_direct,power_stepwise,"
        "power_total,depl_direct,depl_stepwise,depl_total\n";
  for (const auto& r : table.rows) {
    os << r.j;
    for (double v : {r.rel_pos, r.info_direct, r.info_stepwise, r.info_other, r.info_total, r.power_direct,
                     r.power_stepwise, r.power_total, r.depl_direct, r.depl_stepwise, r.depl_total})
      os << ',' << format_number(v);
    os << '\n';
  }
}

void emit_csv(const SweepGrid& grid, std::ostream& os, const std::string& metadata) {
  if (!metadata.empty()) os << metadata << '\n';
  os << "x_value,y_value,phi_lp,log10_phi,structure_ok,analytic_valid\n";
  for (const auto& c : grid.cells) {
    os << format_number(c.x_value) << ',' << format_number(c.y_value) << ',' << format_number(c.phi_lp) << ','
       << format_number(c.log10_phi) << ',' << bool_field(c.structure_ok) << ',' << bool_field(c.analytic_valid)
       << '\n';
  }
}

void emit_csv(const ScalingTable& table, std::ostream& os, const std::string& metadata) {
  if (!metadata.empty()) os << metadata << '\n';
  os << "N,d,phi_lp,phi_exact,phi_sum,phi_integral\n";
  for (const auto& r : table.rows) {
    os << r.n << ',' << format_number(r.d) << ',' << optional_field(r.phi_lp) << ','
       << optional_field(r.phi_exact) << ',' << optional_field(r.phi_sum) << ','
       << optional_field(r.phi_integral) << '\n';
  }
}

void emit_csv(const ScalingRow& r, bool structure_ok, std::ostream& os, const std::string& metadata) {
  if (!metadata.empty()) os << metadata << '\n';
  os << "N,d,phi_lp,phi_exact,phi_sum,phi_integral,analytic_valid,structure_ok\n";
  os << r.n << ',' << format_number(r.d) << ',' << optional_field(r.phi_lp) << ','
     << optional_field(r.phi_exact) << ',' << optional_field(r.phi_sum) << ','
     << optional_field(r.phi_integral) << ',' << bool_field(r.analytic_valid) << ','
     << bool_field(structure_ok) << '\n';
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::ios_base::failure("cannot open '" + path + "' for writing");
  f << contents;
  f.close();
  if (!f) throw std::ios_base::failure("write to '" + path + "' failed");
}

template <typename Table>
void emit_csv(const Table& table, const std::string& path, const std::string& metadata) {
  std::ostringstream os;
  emit_csv(table, os, metadata);
  write_file(path, os.str());
}

template void emit_csv(const NodeStudyTable&, const std::string&, const std::string&);
template void emit_csv(const SweepGrid&, const std::string&, const std::string&);
template void emit_csv(const ScalingTable&, const std::string&, const std::string&);

// ---- SVG --------------------------------------------------------------------

namespace {

struct Rgb {
  double r, g, b;
};

constexpr Rgb kDark{12, 30, 74};
constexpr Rgb kLight{255, 244, 190};

std::string ramp_colour(double t) {
  t = std::clamp(t, 0.0, 1.0);
  auto ch = [t](double lo, double hi) { return static_cast<int>(std::lround(lo + (hi - lo) * t)); };
  return fmt::format("#{:02x}{:02x}{:02x}", ch(kDark.r, kLight.r), ch(kDark.g, kLight.g), ch(kDark.b, kLight.b));
}

std::string tick_label(double v) { return fmt::format("{:.3g}", v); }

}  // namespace

std::string heatmap_svg(const SweepGrid& grid, std::optional<std::pair<double, double>> range) {
  if (grid.empty()) throw std::invalid_argument("cannot render an empty grid");
  const std::size_t nx = grid.x.size(), ny = grid.y.size();
  double lo = grid.cells.front().log10_phi, hi = lo;
  for (const auto& c : grid.cells) {
    lo = std::min(lo, c.log10_phi);
    hi = std::max(hi, c.log10_phi);
  }
  if (range) std::tie(lo, hi) = *range;
  auto scale = [&](double v) { return hi > lo ? (v - lo) / (hi - lo) : 0.5; };

  constexpr int cell = 32, left = 70, top = 40, legend_w = 18, legend_steps = 24;
  const int plot_w = static_cast<int>(nx) * cell, plot_h = static_cast<int>(ny) * cell;
  const int legend_x = left + plot_w + 30;
  const int width = legend_x + legend_w + 80, height = top + plot_h + 60;

  std::string s;
  auto out = std::back_inserter(s);
  fmt::format_to(out, "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
  fmt::format_to(out,
                 "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{}\" height=\"{}\" "
                 "viewBox=\"0 0 {} {}\" font-family=\"sans-serif\" font-size=\"11\">\n",
                 width, height, width, height);
  fmt::format_to(out, "<title>log10(phi) over {} and {}</title>\n", to_string(grid.x.name), to_string(grid.y.name));
  fmt::format_to(out, "<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"#ffffff\"/>\n", width, height);

  fmt::format_to(out, "<g class=\"cells\">\n");
  for (std::size_t ix = 0; ix < nx; ++ix) {
    for (std::size_t iy = 0; iy < ny; ++iy) {
      const auto& c = grid.at(ix, iy);
      const int px = left + static_cast<int>(ix) * cell;
      const int py = top + static_cast<int>(ny - 1 - iy) * cell;  // y grows upward
      fmt::format_to(out,
                     "<rect class=\"cell\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\">"
                     "<title>{}={} {}={} log10(phi)={:.6f}</title></rect>\n",
                     px, py, cell, cell, ramp_colour(scale(c.log10_phi)), to_string(grid.x.name),
                     tick_label(c.x_value), to_string(grid.y.name), tick_label(c.y_value), c.log10_phi);
    }
  }
  fmt::format_to(out, "</g>\n");

  const std::size_t xstep = std::max<std::size_t>(1, nx / 7), ystep = std::max<std::size_t>(1, ny / 7);
  fmt::format_to(out, "<g class=\"ticks\" fill=\"#000000\" stroke=\"#000000\">\n");
  for (std::size_t ix = 0; ix < nx; ix += xstep) {
    const int cx = left + static_cast<int>(ix) * cell + cell / 2;
    fmt::format_to(out, "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\"/>\n", cx, top + plot_h, top + plot_h + 4);
    fmt::format_to(out, "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" stroke=\"none\">{}</text>\n", cx,
                   top + plot_h + 16, tick_label(grid.x.values[ix]));
  }
  for (std::size_t iy = 0; iy < ny; iy += ystep) {
    const int cy = top + static_cast<int>(ny - 1 - iy) * cell + cell / 2;
    fmt::format_to(out, "<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\"/>\n", left - 4, cy, left);
    fmt::format_to(out, "<text x=\"{}\" y=\"{}\" text-anchor=\"end\" stroke=\"none\">{}</text>\n", left - 6,
                   cy + 4, tick_label(grid.y.values[iy]));
  }
  fmt::format_to(out, "</g>\n");
  fmt::format_to(out, "<text class=\"axis-label\" x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
                 left + plot_w / 2, top + plot_h + 36, to_string(grid.x.name));
  fmt::format_to(out,
                 "<text class=\"axis-label\" x=\"{0}\" y=\"{1}\" text-anchor=\"middle\" "
                 "transform=\"rotate(-90 {0} {1})\">{2}</text>\n",
                 20, top + plot_h / 2, to_string(grid.y.name));

  fmt::format_to(out, "<g class=\"legend\">\n");
  const double step_h = static_cast<double>(plot_h) / legend_steps;
  for (int k = 0; k < legend_steps; ++k) {
    const double t = (k + 0.5) / legend_steps;
    fmt::format_to(out,
                   "<rect class=\"legend-swatch\" x=\"{}\" y=\"{:.3f}\" width=\"{}\" height=\"{:.3f}\" fill=\"{}\"/>\n",
                   legend_x, top + plot_h - (k + 1) * step_h, legend_w, step_h, ramp_colour(t));
  }
  fmt::format_to(out, "<text x=\"{}\" y=\"{}\">{:.3f}</text>\n", legend_x + legend_w + 4, top + plot_h, lo);
  fmt::format_to(out, "<text x=\"{}\" y=\"{}\">{:.3f}</text>\n", legend_x + legend_w + 4, top + 10, hi);
  fmt::format_to(out, "<text x=\"{}\" y=\"{}\">log10(phi)</text>\n", legend_x, top - 8);
  fmt::format_to(out, "</g>\n</svg>\n");
  return s;
}

void render_heatmap_svg(const SweepGrid& grid, const std::string& path,
                        std::optional<std::pair<double, double>> range) {
  write_file(path, heatmap_svg(grid, range));
}

// ---- dispatch ---------------------------------------------------------------

namespace {

std::string table_tag(Param p, double v) { return fmt::format("{}_{}", to_string(p), v); }

bool agrees(double lp, double exact) { return std::abs(lp - exact) <= consistency_tolerance * exact; }

}  // namespace

std::vector<std::string> run(const RunConfig& config, std::ostream& log) {
  const std::string meta = metadata_line(config);
  std::vector<std::string> written;
  std::vector<std::string> problems;
  auto emit = [&](const auto& table, const std::string& path, const std::string& extra) {
    emit_csv(table, path, extra.empty() ? meta : meta + " | " + extra);
    written.push_back(path);
  };

  switch (config.subcommand) {
    case Subcommand::solve: {
      const ScalingRow row = scaling_row(config.params, config.methods);
      const auto profile = build_profile(config.params);
      const auto sol = solve_max_lifetime(profile);
      const bool structure_ok =
          classify_flows(sol, default_structure_tolerance(profile)).is_direct_stepwise_only;
      const std::string path = config.out + "_solve.csv";
      std::ostringstream os;
      emit_csv(row, structure_ok, os, meta);
      write_file(path, os.str());
      written.push_back(path);
      emit(node_study(config.params), config.out + "_nodes.csv", "");
      if (row.analytic_valid && !agrees(sol.phi, stepwise_flows(profile).phi))
        problems.push_back(fmt::format("solve: LP {} vs closed form", sol.phi));
      log << fmt::format("phi_lp = {}\n", format_number(sol.phi));
      if (row.phi_exact) log << fmt::format("phi_exact = {}\n", format_number(*row.phi_exact));
      break;
    }
    case Subcommand::study: {
      for (double v : config.x->values) {
        const SystemParams p = with_param(config.params, config.x->name, v);
        const NodeStudyTable t = node_study(p);
        if (t.analytic_valid && !agrees(t.phi, phi_exact(build_profile(p))))
          problems.push_back(fmt::format("study {}: LP and closed form disagree", table_tag(config.x->name, v)));
        emit(t, fmt::format("{}_study_{}.csv", config.out, table_tag(config.x->name, v)),
             fmt::format("table: {}={}", to_string(config.x->name), v));
      }
      break;
    }
    case Subcommand::heatmap: {
      const SweepGrid grid = run_heatmap(config.params, *config.x, *config.y);
      emit(grid, config.out + "_heatmap.csv", "");
      if (config.svg) {
        const std::string path = config.out + "_heatmap.svg";
        render_heatmap_svg(grid, path, config.svg_range);
        written.push_back(path);
      }
      if (int bad = count_inconsistent(grid); bad > 0)
        problems.push_back(fmt::format("heatmap: {} cells disagree with the closed form", bad));
      break;
    }
    case Subcommand::scaling: {
      std::vector<int> ns;
      for (double v : config.x->values) ns.push_back(static_cast<int>(v));
      std::vector<ScalingTable> tables;
      if (config.y) {
        tables = run_scaling_series(config.params, ns, config.y->name, config.y->values, config.area_mode,
                                    config.methods);
      } else {
        tables.push_back(run_scaling(config.params, ns, config.area_mode, config.methods));
      }
      for (const auto& t : tables) {
        for (const auto& r : t.rows) {
          if (r.analytic_valid && r.phi_lp && r.phi_exact && !agrees(*r.phi_lp, *r.phi_exact))
            problems.push_back(fmt::format("scaling N={}: LP and closed form disagree", r.n));
        }
        if (t.series) {
          emit(t, fmt::format("{}_scaling_{}.csv", config.out, table_tag(*t.series, t.series_value)),
               fmt::format("table: {}={}", to_string(*t.series), t.series_value));
        } else {
          emit(t, config.out + "_scaling.csv", "");
        }
      }
      break;
    }
  }
  for (const auto& path : written) log << "wrote " << path << '\n';
  if (!problems.empty()) {
    throw InconsistencyError(fmt::format("{}", fmt::join(problems, "; ")));
  }
  return written;
}

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<std::string> rest;
  std::optional<std::string> config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a == "--config") {
      if (i + 1 >= args.size()) {
        err << "error: --config needs a path\n";
        return 1;
      }
      config_path = args[++i];
    } else if (a.rfind("--config=", 0) == 0) {
      config_path = a.substr(9);
    } else {
      rest.push_back(a);
    }
  }
  try {
    std::optional<std::string> file_text;
    if (config_path) {
      std::ifstream f(*config_path, std::ios::binary);
      if (!f) throw ConfigError("cannot read config file '" + *config_path + "'");
      std::ostringstream ss;
      ss << f.rdbuf();
      file_text = ss.str();
    }
    const RunConfig config = parse_config(rest, file_text);
    run(config, out);
    return 0;
  } catch (const HelpRequested& h) {
    out << h.what();
    return 0;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::ios_base::failure& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const InconsistencyError& e) {
    err << "inconsistency: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace ringflow

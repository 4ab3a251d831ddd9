#include <doctest.h>

#include "oracles.hpp"
#include "ringflow/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

using namespace ringflow;

namespace {

double spread(const NodeStudyTable& t) {
  double lo = t.rows.front().depl_total, hi = lo;
  for (const auto& r : t.rows) {
    lo = std::min(lo, r.depl_total);
    hi = std::max(hi, r.depl_total);
  }
  return (hi - lo) / hi;
}

bool cells_equal(const GridCell& a, const GridCell& b) {
  return a.x_value == b.x_value && a.y_value == b.y_value && a.phi_lp == b.phi_lp &&
         a.phi_exact == b.phi_exact && a.structure_ok == b.structure_ok &&
         a.analytic_valid == b.analytic_valid;
}

}  // namespace

TEST_SUITE("experiments") {
  TEST_CASE("parameter names and setters") {
    for (Param p : {Param::alpha, Param::beta, Param::gamma, Param::lambda, Param::n, Param::d})
      CHECK(param_from_string(to_string(p)) == p);
    CHECK(param_from_string("N") == Param::n);
    CHECK_THROWS_AS(param_from_string("kappa"), std::invalid_argument);

    SystemParams p;
    set_param(p, Param::n, 7);
    CHECK(p.n_rings == 7);
    CHECK_THROWS_AS(set_param(p, Param::n, 7.5), std::invalid_argument);
    CHECK_THROWS_AS(set_param(p, Param::n, 0), std::invalid_argument);
    CHECK(get_param(with_param(p, Param::gamma, 2.5), Param::gamma) == 2.5);
  }

  TEST_CASE("linspace axes") {
    auto beta = AxisSpec::linspace(Param::beta, 0.5, 1.0, 13);
    REQUIRE(beta.size() == 13);
    CHECK(beta.values.front() == 0.5);
    CHECK(beta.values.back() == 1.0);
    CHECK(beta.values[6] == doctest::Approx(0.75));
    CHECK(std::is_sorted(beta.values.begin(), beta.values.end()));
    CHECK_THROWS(AxisSpec::linspace(Param::beta, 0.5, 1.0, 1));
    CHECK_THROWS(AxisSpec::linspace(Param::beta, 1.0, 0.5, 4));
    auto gamma = table_axis(Param::gamma);
    CHECK(gamma.values[4] == 1.0);
    CHECK_THROWS(table_axis(Param::n));
  }

  TEST_CASE("node study invariants") {
    SystemParams base;
    base.n_rings = 12;
    const std::vector<double> alphas = {0.0, 0.5, 3.0};
    auto tables = run_node_study(base, Param::alpha, alphas);
    REQUIRE(tables.size() == 3);
    for (std::size_t k = 0; k < tables.size(); ++k) {
      const auto& t = tables[k];
      CHECK(t.params.alpha == alphas[k]);
      REQUIRE(t.rows.size() == 12);
      for (const auto& r : t.rows) {
        CHECK(r.rel_pos == doctest::Approx(r.j / 12.0));
        CHECK(r.info_total == doctest::Approx(r.info_direct + r.info_stepwise + r.info_other));
        CHECK(r.depl_total <= t.phi + 1e-8);
      }
    }
  }

  TEST_CASE("node study at N = 2 matches the hand solution") {
    SystemParams p;
    p.n_rings = 2;
    auto t = node_study(p);
    const double pi = std::numbers::pi;
    CHECK(t.phi == doctest::Approx(2.2).epsilon(1e-12));
    CHECK(t.rows[1].info_stepwise == doctest::Approx(3.6 * pi).epsilon(1e-12));
    CHECK(t.rows[1].info_direct == doctest::Approx(2.4 * pi).epsilon(1e-12));
    CHECK(t.rows[0].info_direct == doctest::Approx(6.6 * pi).epsilon(1e-12));
    CHECK(t.rows[0].info_stepwise == 0.0);
    CHECK(t.rows[1].info_total == doctest::Approx(6.0 * pi).epsilon(1e-12));
  }

  TEST_CASE("baseline node studies deplete evenly") {
    SystemParams base;
    const std::vector<double> alphas = {0.0, 0.5, 3.0};
    for (const auto& t : run_node_study(base, Param::alpha, alphas)) {
      CHECK(t.analytic_valid);
      CHECK(spread(t) <= 1e-6);
    }
    auto t = node_study(base);
    double best = -1.0, where = 0.0;
    for (const auto& r : t.rows) {
      if (r.info_stepwise > best) {
        best = r.info_stepwise;
        where = r.rel_pos;
      }
    }
    CHECK(where >= 0.4);
    CHECK(where <= 0.8);
  }

  TEST_CASE("heatmap layout and consistency") {
    SystemParams base;
    base.n_rings = 8;
    auto x = AxisSpec::linspace(Param::beta, 0.5, 1.0, 4);
    auto y = AxisSpec::linspace(Param::gamma, 0.0, 3.0, 5);
    auto grid = run_heatmap(base, x, y);
    REQUIRE(grid.cells.size() == 20);
    for (std::size_t ix = 0; ix < 4; ++ix) {
      for (std::size_t iy = 0; iy < 5; ++iy) {
        const auto& c = grid.at(ix, iy);
        CHECK(c.x_value == x.values[ix]);
        CHECK(c.y_value == y.values[iy]);
        CHECK(c.phi_lp > 0.0);
        CHECK(c.log10_phi == std::log10(c.phi_lp));
        CHECK(c.consistent);
        CHECK(c.lp_iterations <= 10 * c.lp_size);
        if (c.analytic_valid) CHECK(std::abs(c.phi_lp - c.phi_exact) <= 1e-6 * c.phi_exact);
      }
    }
    CHECK(count_inconsistent(grid) == 0);
    auto again = run_heatmap(base, x, y);
    CHECK(std::equal(grid.cells.begin(), grid.cells.end(), again.cells.begin(), cells_equal));
    CHECK_THROWS(run_heatmap(base, x, x));
  }

  TEST_CASE("compression and capacity exponent move phi as expected") {
    SystemParams base;
    auto grid = run_heatmap(base, AxisSpec{Param::alpha, {1.0}}, AxisSpec{Param::gamma, {0.0, 1.0}});
    const double ratio = grid.at(0, 1).phi_lp / grid.at(0, 0).phi_lp;
    CHECK(ratio >= 2.5);
    CHECK(ratio <= 4.0);

    auto corners = run_heatmap(base, AxisSpec{Param::beta, {0.5, 1.0}}, AxisSpec{Param::gamma, {0.0, 3.0}});
    CHECK(corners.at(1, 1).phi_lp / corners.at(0, 0).phi_lp > 100.0);
  }

  TEST_CASE("alpha barely matters at low capacity exponents") {
    SystemParams base;
    auto grid = run_heatmap(base, AxisSpec::linspace(Param::alpha, 0.0, 3.0, 7),
                            AxisSpec{Param::gamma, {0.0, 0.5, 1.0}});
    for (std::size_t iy = 0; iy < 3; ++iy) {
      double lo = grid.at(0, iy).phi_lp, hi = lo;
      for (std::size_t ix = 0; ix < 7; ++ix) {
        lo = std::min(lo, grid.at(ix, iy).phi_lp);
        hi = std::max(hi, grid.at(ix, iy).phi_lp);
      }
      CHECK(hi / lo <= 1.15);
    }
  }

  TEST_CASE("phi is nondecreasing in lambda") {
    SystemParams base;
    base.n_rings = 10;
    auto grid = run_heatmap(base, AxisSpec::linspace(Param::gamma, 0.0, 3.0, 5),
                            AxisSpec::linspace(Param::lambda, 1.1, 3.0, 6));
    for (std::size_t ix = 0; ix < 5; ++ix)
      for (std::size_t iy = 1; iy < 6; ++iy) CHECK(grid.at(ix, iy).phi_lp >= grid.at(ix, iy - 1).phi_lp * (1.0 - 1e-9));
  }

  TEST_CASE("fixed-spacing scaling") {
    SystemParams base;
    const auto ns = int_range(5, 20);
    const std::vector<double> betas = {1.0, 0.95};
    auto tables = run_scaling_fixed_spacing(base, ns, betas);
    REQUIRE(tables.size() == 2);
    CHECK(*tables[0].series == Param::beta);
    CHECK(tables[1].base.beta == 0.95);
    const auto& t = tables[0];
    REQUIRE(t.rows.size() == ns.size());
    for (const auto& r : t.rows) {
      CHECK(r.d == 1.0);
      CHECK(r.phi_lp.has_value());
      CHECK(r.phi_sum.has_value());
      CHECK(r.phi_integral.has_value());
      CHECK(*r.phi_lp == doctest::Approx(*r.phi_exact).epsilon(1e-6));
    }
    const auto phi = t.phi_exact_column();
    for (std::size_t k = 1; k < phi.size(); ++k) CHECK(phi[k] > phi[k - 1]);
    CHECK(phi.back() == doctest::Approx(static_cast<double>(oracle::baseline_phi_telescoping(20))).epsilon(1e-12));
    CHECK(phi.back() == doctest::Approx(72.8239).epsilon(1e-6));
  }

  TEST_CASE("strong compression saturates phi") {
    SystemParams base;
    base.beta = 0.8;
    const std::vector<int> ns = {50, 60};
    auto t = run_scaling(base, ns, SpacingMode::fixed, MethodSet{false, true, false, false});
    CHECK_FALSE(t.rows[0].phi_lp.has_value());
    const double a = *t.rows[0].phi_exact, b = *t.rows[1].phi_exact;
    CHECK(std::abs(b - a) / a < 0.01);
  }

  TEST_CASE("constant-area scaling") {
    SystemParams base;
    const auto ns = int_range(5, 20);
    const std::vector<double> gammas = {1.0};
    auto t = run_scaling_fixed_area(base, ns, gammas)[0];
    for (const auto& r : t.rows) CHECK(r.d == 1.0 / (r.n + 0.5));
    const auto phi = t.phi_exact_column();
    for (std::size_t k = 1; k < phi.size(); ++k) CHECK(phi[k] < phi[k - 1]);
    std::vector<double> logn, inv;
    for (std::size_t k = 0; k < phi.size(); ++k) {
      logn.push_back(std::log(ns[k]));
      inv.push_back(1.0 / phi[k]);
    }
    CHECK(linear_fit(logn, inv).r_squared > 0.98);

    base.gamma = 1.5;
    const std::vector<int> far = {40, 60};
    auto flat = run_scaling(base, far, SpacingMode::constant_area, MethodSet{false, true, false, false});
    CHECK(std::abs(*flat.rows[1].phi_exact - *flat.rows[0].phi_exact) / *flat.rows[0].phi_exact < 0.05);

    auto alt = run_scaling(base, far, SpacingMode::constant_area_outer);
    CHECK(alt.rows[0].d == 1.0 / 40.0);
    CHECK_THROWS(run_scaling_fixed_area(base, far, gammas, {}, SpacingMode::fixed));
    CHECK_THROWS(run_scaling_series(base, far, Param::n, gammas, SpacingMode::fixed));
  }

  TEST_CASE("unsupported integral branch is an absent value") {
    SystemParams base;
    base.gamma = 0.5;  // 1 + gamma - lambda < 0
    const std::vector<int> ns = {5, 10};
    auto t = run_scaling(base, ns, SpacingMode::fixed);
    for (const auto& r : t.rows) {
      CHECK_FALSE(r.phi_integral.has_value());
      CHECK(r.phi_sum.has_value());
    }
  }

  TEST_CASE("spacing modes") {
    CHECK(spacing_for(SpacingMode::fixed, 0.3, 9) == 0.3);
    CHECK(spacing_for(SpacingMode::constant_area, 0.3, 9) == 1.0 / 9.5);
    CHECK(spacing_for(SpacingMode::constant_area_outer, 0.3, 9) == 1.0 / 9.0);
    for (auto m : {SpacingMode::fixed, SpacingMode::constant_area, SpacingMode::constant_area_outer})
      CHECK(spacing_mode_from_string(to_string(m)) == m);
    CHECK_THROWS(spacing_mode_from_string("radius"));
  }

  TEST_CASE("log-log slope") {
    const std::vector<double> xs = {1, 2, 3, 5, 8};
    std::vector<double> sq, flat;
    for (double x : xs) {
      sq.push_back(x * x);
      flat.push_back(4.2);
    }
    CHECK(fit_loglog_slope(xs, sq) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(fit_loglog_slope(xs, flat) == doctest::Approx(0.0).epsilon(1e-12));

    SystemParams p;
    p.beta = 0.5;
    p.gamma = 2.0;
    const auto ns = int_range(40, 80);
    auto t = run_scaling(p, ns, SpacingMode::fixed, MethodSet{false, true, false, false});
    CHECK(std::abs(fit_loglog_slope(t.ns(), t.phi_exact_column()) - 1.0) <= 0.15);
  }
}

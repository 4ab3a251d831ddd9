#include <doctest.h>

#include "ringflow/ring_model.hpp"

#include <cmath>
#include <numbers>

using namespace ringflow;

namespace {
constexpr double kPi = std::numbers::pi;

SystemParams with_n(int n) {
  SystemParams p;
  p.n_rings = n;
  return p;
}
}  // namespace

TEST_SUITE("ring_model") {
  TEST_CASE("normalizers use the annulus area factor") {
    SystemParams p = with_n(20);
    auto [ka, kc] = normalizers(p);
    CHECK(ka == doctest::Approx(30.0 * kPi / 7.0).epsilon(1e-14));
    CHECK(kc == doctest::Approx(30.0 * kPi / 7.0).epsilon(1e-14));

    p = with_n(1);
    p.alpha = 0.0;
    CHECK(normalizers(p).first == doctest::Approx(2.25 * kPi).epsilon(1e-15));

    p = with_n(7);
    p.alpha = p.gamma = 2.3;
    p.spacing = 0.4;
    auto [ka2, kc2] = normalizers(p);
    CHECK(ka2 == kc2);
  }

  TEST_CASE("unit density mode uses the disk area") {
    SystemParams p = with_n(20);
    p.spacing = 0.5;
    p.normalization = Normalization::unit_density;
    const double area = kPi * (20.5 * 0.5) * (20.5 * 0.5);
    CHECK(normalizers(p).first == doctest::Approx(area / 210.0).epsilon(1e-14));
    // Sum of a_j over nodes equals the disk area: one unit of information per unit area.
    auto prof = build_profile(p);
    CHECK(prof.a.sum() == doctest::Approx(area).epsilon(1e-14));
  }

  TEST_CASE("k_a / k_c does not depend on the ring spacing") {
    SystemParams p = with_n(13);
    p.alpha = 0.7;
    p.gamma = 2.2;
    double reference = 0.0;
    for (double d : {0.05, 0.5, 1.0}) {
      p.spacing = d;
      for (auto mode : {Normalization::classic, Normalization::unit_density}) {
        p.normalization = mode;
        auto [ka, kc] = normalizers(p);
        if (reference == 0.0) reference = ka / kc;
        CHECK(ka / kc == doctest::Approx(reference).epsilon(1e-14));
      }
    }
  }

  TEST_CASE("transmission cost") {
    CHECK(transmission_cost(0, 4, 1.0, 2.0) == 16.0);
    CHECK(transmission_cost(3, 4, 1.0, 3.0) == 1.0);
    CHECK(transmission_cost(0, 2, 0.5, 1.1) == 1.0);
    CHECK(transmission_cost(4, 0, 1.0, 2.0) == transmission_cost(0, 4, 1.0, 2.0));
    CHECK_THROWS_AS(transmission_cost(3, 3, 1.0, 2.0), std::invalid_argument);
  }

  TEST_CASE("transmission cost is strictly convex in hop count") {
    for (double lambda : {1.01, 1.1, 1.5, 2.0, 3.0}) {
      for (double d : {0.05, 0.5, 1.0}) {
        const double one = transmission_cost(4, 5, d, lambda);
        const double two = transmission_cost(3, 5, d, lambda);
        const double three = transmission_cost(2, 5, d, lambda);
        CHECK(two > 2.0 * one);
        CHECK(three - two > two - one);
      }
    }
  }

  TEST_CASE("baseline profile") {
    auto prof = build_profile(SystemParams{});
    REQUIRE(prof.size() == 20);
    CHECK(prof.a(0) == doctest::Approx(30.0 * kPi / 7.0).epsilon(1e-14));
    CHECK(prof.c(0) == doctest::Approx(30.0 * kPi / 7.0).epsilon(1e-14));
    CHECK(prof.a(19) == doctest::Approx(600.0 * kPi / 7.0).epsilon(1e-14));
    CHECK(prof.c(19) == doctest::Approx(600.0 * kPi / 7.0).epsilon(1e-14));
    CHECK(prof.k_t == 1.0);
    CHECK_FALSE(prof.uses_compression());
  }

  TEST_CASE("zero exponent and constant compression") {
    SystemParams p = with_n(3);
    p.alpha = 0.0;
    p.beta = 0.5;
    auto prof = build_profile(p);
    CHECK(prof.a(0) == prof.a(1));
    CHECK(prof.a(1) == prof.a(2));
    CHECK(prof.a(0) == prof.k_a);
    CHECK((prof.b.array() == 0.5).all());
    CHECK(prof.uses_compression());
  }

  TEST_CASE("build_profile is pure") {
    SystemParams p = with_n(17);
    p.alpha = 1.3;
    p.gamma = 2.7;
    p.spacing = 0.3;
    auto first = build_profile(p);
    auto second = build_profile(p);
    CHECK(first.a == second.a);
    CHECK(first.b == second.b);
    CHECK(first.c == second.c);
  }

  TEST_CASE("long double profile agrees with double") {
    SystemParams p = with_n(40);
    p.alpha = 2.5;
    p.gamma = 0.5;
    auto pd = build_profile<double>(p);
    auto pl = build_profile<long double>(p);
    for (int j = 0; j < 40; ++j) {
      CHECK(pd.a(j) == doctest::Approx(static_cast<double>(pl.a(j))).epsilon(1e-14));
      CHECK(pd.c(j) == doctest::Approx(static_cast<double>(pl.c(j))).epsilon(1e-14));
    }
  }

  TEST_CASE("parameter validation") {
    SystemParams p;
    p.beta = 0.0;
    CHECK_THROWS_AS(build_profile(p), std::invalid_argument);
    p = {};
    p.beta = 1.2;
    CHECK_THROWS_AS(validate(p), std::invalid_argument);
    p = {};
    p.lambda = 1.0;
    CHECK_THROWS_AS(validate(p), std::invalid_argument);
    p = {};
    p.n_rings = 0;
    CHECK_THROWS_AS(validate(p), std::invalid_argument);
    p = {};
    p.spacing = 0.0;
    CHECK_THROWS_AS(validate(p), std::invalid_argument);
    p = {};
    CHECK(within_table_ranges(p));
    p.n_rings = 500;
    CHECK_NOTHROW(validate(p));
    CHECK_FALSE(within_table_ranges(p));
  }

  TEST_CASE("custom profiles are validated") {
    using V = VectorX<double>;
    SystemParams p;
    CHECK_NOTHROW(make_profile<double>(p, V::Ones(3), V::Ones(3), V::Ones(3)));
    CHECK_THROWS(make_profile<double>(p, V::Ones(3), V::Ones(2), V::Ones(3)));
    CHECK_THROWS(make_profile<double>(p, -V::Ones(3), V::Ones(3), V::Ones(3)));
    CHECK_THROWS(make_profile<double>(p, V::Ones(3), V::Zero(3), V::Ones(3)));
    CHECK_THROWS(make_profile<double>(p, V::Ones(3), V::Ones(3), V::Zero(3)));
    auto prof = make_profile<double>(p, V::Ones(4), V::Ones(4), V::Ones(4));
    CHECK(prof.params.n_rings == 4);
  }
}

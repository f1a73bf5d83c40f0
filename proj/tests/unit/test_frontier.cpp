#include <catch_amalgamated.hpp>

#include <cmath>

#include "fairalloc/errors.hpp"
#include "fairalloc/frontier.hpp"

using namespace fairalloc;
using namespace fairalloc::frontier;
using Catch::Approx;

namespace {

// Independent oracle: (1-l) * a + l * b computed from raw numbers.
std::pair<double, double> mix(double ae, double as, double be, double bs, double l) {
    return {(1.0 - l) * ae + l * be, (1.0 - l) * as + l * bs};
}

}  // namespace

TEST_CASE("interpolate at 0.2 on the high arm", "[frontier]") {
    const auto p = interpolate(default_high_arm().endpoints, 0.2);
    const auto [e, s] = mix(36, 3, 7, 13, 0.2);
    CHECK(p.expected.english == Approx(e).margin(1e-12));
    CHECK(p.expected.spanish == Approx(s).margin(1e-12));
    CHECK(p.expected.english == Approx(30.2).margin(1e-12));
    CHECK(p.expected.spanish == Approx(5.0).margin(1e-12));
    CHECK(display_round(p.expected.english) == 30);
    CHECK(display_round(p.expected.spanish) == 5);
}

TEST_CASE("high frontier totals and shares", "[frontier]") {
    const auto f = build_frontier(default_high_arm());
    REQUIRE(f.size() == 6);
    const double totals[] = {39, 35.2, 31.4, 27.6, 23.8, 20};
    for (std::size_t i = 0; i < 6; ++i) {
        const double l = static_cast<double>(i) / 5.0;
        const auto [e, s] = mix(36, 3, 7, 13, l);
        CHECK(f[i].spanish_budget_share == Approx(l).margin(1e-15));
        CHECK(f[i].total_conversions == Approx(totals[i]).margin(1e-12));
        CHECK(f[i].spanish_share == Approx(s / (e + s)).margin(1e-12));
    }
    CHECK(f.points.back().spanish_budget_share == 1.0);
}

TEST_CASE("efficiency and parity points", "[frontier]") {
    const auto f = build_frontier(default_high_arm());
    CHECK(efficiency_index(f) == 0);
    CHECK(efficiency_point(f).spanish_share == Approx(3.0 / 39.0).margin(1e-12));
    CHECK(parity_index(f, 0.23) == 2);
    CHECK(parity_point(f, 0.23).spanish_share == Approx(7.0 / 31.4).margin(1e-12));
    CHECK(std::abs(parity_point(f, 0.23).spanish_share - 0.23) < 0.01);
    CHECK(max_english_index(f) == 0);
}

TEST_CASE("tradeoff slopes", "[frontier]") {
    CHECK(implied_tradeoff_slope(default_high_arm().endpoints) == Approx(2.9).margin(1e-12));
    CHECK(implied_tradeoff_slope(default_low_arm().endpoints) == Approx(3.0).margin(1e-12));
    const auto eq = make_synthetic_arm(SyntheticKind::equal, default_high_arm());
    CHECK(implied_tradeoff_slope(eq.endpoints) == Approx(1.0).margin(1e-12));
    const auto fh = make_synthetic_arm(SyntheticKind::flip_high, default_high_arm());
    CHECK(spanish_per_english_slope(fh.endpoints) == Approx(2.9).margin(1e-12));
}

TEST_CASE("equal arm trades one for one", "[frontier]") {
    const auto eq = make_synthetic_arm(SyntheticKind::equal, default_high_arm());
    const auto f = build_frontier(eq);
    for (std::size_t i = 0; i < f.size(); ++i) {
        CHECK(f[i].total_conversions == Approx(f[0].total_conversions).margin(1e-12));
    }
    CHECK(eq.endpoints.full_spanish.english == eq.endpoints.full_english.spanish);
    CHECK(eq.endpoints.full_spanish.spanish == eq.endpoints.full_english.english);
}

TEST_CASE("flip is an involution", "[frontier]") {
    for (const auto& base : {default_high_arm(), default_low_arm()}) {
        const auto kind = base.id == ArmId::high ? SyntheticKind::flip_high : SyntheticKind::flip_low;
        const auto once = make_synthetic_arm(kind, base);
        const auto twice = make_synthetic_arm(kind, once);
        CHECK(is_flipped(once.id));
        CHECK(twice.id == base.id);
        CHECK(twice.endpoints == base.endpoints);
    }
}

TEST_CASE("flipped frontier puts efficiency at the Spanish end", "[frontier]") {
    const auto f = build_frontier(make_synthetic_arm(SyntheticKind::flip_high, default_high_arm()));
    CHECK(efficiency_index(f) == f.size() - 1);
    CHECK(max_english_index(f) == 0);
}

TEST_CASE("interpolation is linear in lambda", "[frontier][property]") {
    const auto ep = default_low_arm().endpoints;
    for (int k = 0; k <= 100; ++k) {
        const double l = k / 100.0;
        const auto p = interpolate(ep, l);
        const auto [e, s] = mix(36, 4, 15, 11, l);
        CHECK(p.expected.english == Approx(e).margin(1e-12));
        CHECK(p.expected.spanish == Approx(s).margin(1e-12));
        CHECK(p.total_conversions == Approx(e + s).margin(1e-12));
    }
}

TEST_CASE("frontier errors and degenerate endpoints", "[frontier]") {
    CHECK_THROWS_AS(interpolate(default_high_arm().endpoints, -0.01), DomainError);
    CHECK_THROWS_AS(interpolate(default_high_arm().endpoints, 1.01), DomainError);

    TradeoffArm same = default_high_arm();
    same.endpoints.full_spanish = same.endpoints.full_english;
    const auto f = build_frontier(same);
    for (const auto& p : f.points) CHECK(p.expected == same.endpoints.full_english);
    CHECK_THROWS_AS(same.validate(true), ValidationError);

    TradeoffArm zero = default_high_arm();
    zero.endpoints.full_english = {0, 0};
    zero.endpoints.full_spanish = {0, 0};
    const auto fz = build_frontier(zero);
    CHECK(std::isnan(fz[0].spanish_share));
    CHECK_THROWS_AS((GroupOutcome{0, 0}.spanish_share()), DomainError);
}

TEST_CASE("display rounding is half up", "[frontier]") {
    CHECK(display_round(2.5) == 3);
    CHECK(display_round(2.4999) == 2);
    CHECK(display_round(0.5) == 1);
    CHECK(display_round(35.2) == 35);
}

TEST_CASE("arm json round trip and validation", "[frontier]") {
    const auto arms = default_arms();
    REQUIRE(arms.size() == 5);
    const auto back = arms_from_json(arms_to_json(arms));
    REQUIRE(back.size() == arms.size());
    for (std::size_t i = 0; i < arms.size(); ++i) {
        CHECK(back[i].id == arms[i].id);
        CHECK(back[i].endpoints == arms[i].endpoints);
        CHECK(back[i].parity_share == arms[i].parity_share);
    }
    auto doc = arms_to_json(arms);
    doc["arms"].push_back(doc["arms"][0]);
    CHECK_THROWS_AS(arms_from_json(doc), ValidationError);
    CHECK_THROWS_AS(arm_from_string("medium"), ValidationError);
    CHECK(&find_arm(arms, ArmId::equal) == &arms[2]);
}

TEST_CASE("display-rounded point json", "[frontier]") {
    const auto f = build_frontier(default_high_arm());
    const auto j = to_json(f[1], true);
    CHECK(j.at("english_conversions").get<long>() == 30);
    CHECK(j.at("spanish_conversions").get<long>() == 5);
    CHECK(j.at("total_conversions").get<long>() == 35);
}

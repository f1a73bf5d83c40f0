#include "fairalloc/frontier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "fairalloc/errors.hpp"

namespace fairalloc::frontier {

using nlohmann::json;

double GroupOutcome::spanish_share() const {
    const double t = total();
    if (!(t > 0.0)) {
        throw DomainError("spanish_share undefined for zero total conversions");
    }
    return spanish / t;
}

GroupOutcome operator*(double s, const GroupOutcome& g) { return {s * g.english, s * g.spanish}; }

GroupOutcome operator+(const GroupOutcome& a, const GroupOutcome& b) {
    return {a.english + b.english, a.spanish + b.spanish};
}

void CampaignEndpoints::validate(bool strict) const {
    for (const GroupOutcome* g : {&full_english, &full_spanish}) {
        if (!(g->english >= 0.0) || !(g->spanish >= 0.0)) {
            throw ValidationError("campaign endpoints must have non-negative conversions");
        }
    }
    if (!(daily_budget > 0.0)) {
        throw ValidationError("daily_budget must be positive");
    }
    if (strict) {
        if (!(full_english.total() > 0.0) || !(full_spanish.total() > 0.0) ||
            !(full_spanish.spanish_share() > full_english.spanish_share())) {
            throw ValidationError(
                "full_spanish must have a strictly larger Spanish share than full_english");
        }
    }
}

std::string_view to_string(ArmId id) {
    switch (id) {
        case ArmId::high: return "high";
        case ArmId::low: return "low";
        case ArmId::equal: return "equal";
        case ArmId::flip_low: return "flip_low";
        case ArmId::flip_high: return "flip_high";
    }
    return "unknown";
}

ArmId arm_from_string(std::string_view name) {
    for (ArmId id : kAllArms) {
        if (to_string(id) == name) return id;
    }
    throw ValidationError("unknown arm id: " + std::string(name));
}

bool is_flipped(ArmId id) { return id == ArmId::flip_low || id == ArmId::flip_high; }

void TradeoffArm::validate(bool strict_endpoints) const {
    endpoints.validate(strict_endpoints);
    if (!(parity_share > 0.0 && parity_share < 1.0)) {
        throw ValidationError("parity_share must lie in (0,1)");
    }
    if (!(nominal_ratio > 0.0)) {
        throw ValidationError("nominal_ratio must be positive");
    }
    if (n_points < 2) {
        throw ValidationError("n_points must be at least 2");
    }
}

AllocationPoint interpolate(const CampaignEndpoints& endpoints, double lambda) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) {
        throw DomainError("budget share must lie in [0,1]");
    }
    AllocationPoint p;
    p.spanish_budget_share = lambda;
    // std::lerp is exact at both ends and constant when the endpoints coincide.
    p.expected = {std::lerp(endpoints.full_english.english, endpoints.full_spanish.english, lambda),
                  std::lerp(endpoints.full_english.spanish, endpoints.full_spanish.spanish, lambda)};
    p.total_conversions = p.expected.total();
    p.spanish_share = p.total_conversions > 0.0 ? p.expected.spanish / p.total_conversions
                                                : std::numeric_limits<double>::quiet_NaN();
    return p;
}

Frontier build_frontier(const TradeoffArm& arm) {
    arm.validate(/*strict_endpoints=*/false);
    Frontier f;
    f.arm = arm.id;
    f.points.reserve(static_cast<std::size_t>(arm.n_points));
    const double last = static_cast<double>(arm.n_points - 1);
    for (int i = 0; i < arm.n_points; ++i) {
        // Last point pinned to exactly 1 so the endpoint identity holds bit-for-bit.
        const double lambda = (i == arm.n_points - 1) ? 1.0 : static_cast<double>(i) / last;
        f.points.push_back(interpolate(arm.endpoints, lambda));
    }
    return f;
}

namespace {

void require_points(const Frontier& frontier) {
    if (frontier.points.empty()) {
        throw DomainError("frontier has no points");
    }
}

// Strictly-better-than with ties resolved toward lower Spanish share, then
// toward lower index (the caller iterates ascending so keeping the incumbent
// on a full tie does that).
template <class Key>
std::size_t argbest(const Frontier& frontier, Key better_key) {
    require_points(frontier);
    std::size_t best = 0;
    for (std::size_t i = 1; i < frontier.points.size(); ++i) {
        const int cmp = better_key(frontier.points[i], frontier.points[best]);
        if (cmp > 0) {
            best = i;
        } else if (cmp == 0 &&
                   frontier.points[i].spanish_share < frontier.points[best].spanish_share) {
            best = i;
        }
    }
    return best;
}

int compare(double a, double b) { return (a > b) - (a < b); }

}  // namespace

std::size_t efficiency_index(const Frontier& frontier) {
    return argbest(frontier, [](const AllocationPoint& a, const AllocationPoint& b) {
        return compare(a.total_conversions, b.total_conversions);
    });
}

std::size_t max_english_index(const Frontier& frontier) {
    return argbest(frontier, [](const AllocationPoint& a, const AllocationPoint& b) {
        return compare(a.expected.english, b.expected.english);
    });
}

std::size_t parity_index(const Frontier& frontier, double parity_share) {
    return argbest(frontier, [parity_share](const AllocationPoint& a, const AllocationPoint& b) {
        // closer is better
        return compare(std::abs(b.spanish_share - parity_share),
                       std::abs(a.spanish_share - parity_share));
    });
}

AllocationPoint efficiency_point(const Frontier& frontier) {
    return frontier.points[efficiency_index(frontier)];
}

AllocationPoint parity_point(const Frontier& frontier, double parity_share) {
    return frontier.points[parity_index(frontier, parity_share)];
}

double implied_tradeoff_slope(const CampaignEndpoints& e) {
    const double gained = e.full_spanish.spanish - e.full_english.spanish;
    if (gained == 0.0) {
        throw DomainError("endpoints have identical Spanish conversions; slope undefined");
    }
    return (e.full_english.english - e.full_spanish.english) / gained;
}

double spanish_per_english_slope(const CampaignEndpoints& e) {
    const double gained = e.full_english.english - e.full_spanish.english;
    if (gained == 0.0) {
        throw DomainError("endpoints have identical English conversions; slope undefined");
    }
    return (e.full_spanish.spanish - e.full_english.spanish) / gained;
}

namespace {

GroupOutcome swap_languages(const GroupOutcome& g) { return {g.spanish, g.english}; }

CampaignEndpoints flip(const CampaignEndpoints& e) {
    return {swap_languages(e.full_spanish), swap_languages(e.full_english), e.daily_budget};
}

}  // namespace

TradeoffArm make_synthetic_arm(SyntheticKind kind, const TradeoffArm& base) {
    TradeoffArm arm = base;
    switch (kind) {
        case SyntheticKind::equal:
            arm.id = ArmId::equal;
            arm.label = "Equal trade-off";
            arm.endpoints.full_spanish = swap_languages(base.endpoints.full_english);
            arm.nominal_ratio = 1.0;
            break;
        case SyntheticKind::flip_low:
        case SyntheticKind::flip_high: {
            const bool low = kind == SyntheticKind::flip_low;
            const ArmId plain = low ? ArmId::low : ArmId::high;
            const ArmId flipped = low ? ArmId::flip_low : ArmId::flip_high;
            if (base.id != plain && base.id != flipped) {
                throw ValidationError(std::string("cannot flip arm '") +
                                      std::string(to_string(base.id)) + "' as " +
                                      std::string(to_string(flipped)));
            }
            arm.endpoints = flip(base.endpoints);
            if (base.id == plain) {
                arm.id = flipped;
                arm.label = low ? "Flipped low trade-off" : "Flipped high trade-off";
            } else {
                arm.id = plain;
                arm.label = low ? "Low trade-off" : "High trade-off";
            }
            break;
        }
    }
    return arm;
}

TradeoffArm default_high_arm() {
    TradeoffArm arm;
    arm.id = ArmId::high;
    arm.label = "High trade-off";
    arm.endpoints = {{36.0, 3.0}, {7.0, 13.0}, 400.0};
    arm.parity_share = 0.23;
    arm.nominal_ratio = 6.0;
    arm.n_points = 6;
    return arm;
}

TradeoffArm default_low_arm() {
    TradeoffArm arm;
    arm.id = ArmId::low;
    arm.label = "Low trade-off";
    arm.endpoints = {{36.0, 4.0}, {15.0, 11.0}, 400.0};
    arm.parity_share = 0.23;
    arm.nominal_ratio = 3.0;
    arm.n_points = 6;
    return arm;
}

std::vector<TradeoffArm> default_arms() {
    const TradeoffArm high = default_high_arm();
    const TradeoffArm low = default_low_arm();
    return {high, low, make_synthetic_arm(SyntheticKind::equal, high),
            make_synthetic_arm(SyntheticKind::flip_low, low),
            make_synthetic_arm(SyntheticKind::flip_high, high)};
}

long display_round(double x) { return static_cast<long>(std::floor(x + 0.5)); }

json to_json(const TradeoffArm& arm) {
    const auto& e = arm.endpoints;
    return {{"id", to_string(arm.id)},
            {"label", arm.label},
            {"daily_budget", e.daily_budget},
            {"full_english", {{"english", e.full_english.english}, {"spanish", e.full_english.spanish}}},
            {"full_spanish", {{"english", e.full_spanish.english}, {"spanish", e.full_spanish.spanish}}},
            {"parity_share", arm.parity_share},
            {"nominal_ratio", arm.nominal_ratio},
            {"n_points", arm.n_points}};
}

TradeoffArm arm_from_json(const json& j) {
    try {
        TradeoffArm arm;
        arm.id = arm_from_string(j.at("id").get<std::string>());
        arm.label = j.value("label", std::string(to_string(arm.id)));
        arm.endpoints.daily_budget = j.at("daily_budget").get<double>();
        arm.endpoints.full_english = {j.at("full_english").at("english").get<double>(),
                                      j.at("full_english").at("spanish").get<double>()};
        arm.endpoints.full_spanish = {j.at("full_spanish").at("english").get<double>(),
                                      j.at("full_spanish").at("spanish").get<double>()};
        arm.parity_share = j.at("parity_share").get<double>();
        arm.nominal_ratio = j.at("nominal_ratio").get<double>();
        arm.n_points = j.value("n_points", 6);
        return arm;
    } catch (const json::exception& ex) {
        throw ValidationError(std::string("malformed arm configuration: ") + ex.what());
    }
}

json to_json(const AllocationPoint& p, bool display_rounded) {
    json j{{"spanish_budget_share", p.spanish_budget_share}};
    if (display_rounded) {
        const long en = display_round(p.expected.english);
        const long sp = display_round(p.expected.spanish);
        j["english_conversions"] = en;
        j["spanish_conversions"] = sp;
        j["total_conversions"] = display_round(p.total_conversions);
        j["spanish_share_percent"] = display_round(100.0 * p.spanish_share);
    } else {
        j["english_conversions"] = p.expected.english;
        j["spanish_conversions"] = p.expected.spanish;
        j["total_conversions"] = p.total_conversions;
        j["spanish_share"] = p.spanish_share;
    }
    return j;
}

json to_json(const Frontier& f, bool display_rounded) {
    json pts = json::array();
    for (const auto& p : f.points) pts.push_back(to_json(p, display_rounded));
    return {{"arm", to_string(f.arm)}, {"points", std::move(pts)}};
}

std::vector<TradeoffArm> arms_from_json(const json& doc) {
    if (!doc.contains("arms") || !doc["arms"].is_array()) {
        throw ValidationError("arm configuration must contain an 'arms' array");
    }
    std::vector<TradeoffArm> arms;
    std::set<ArmId> seen;
    for (const auto& j : doc["arms"]) {
        TradeoffArm arm = arm_from_json(j);
        arm.validate(/*strict_endpoints=*/true);
        if (!seen.insert(arm.id).second) {
            throw ValidationError("duplicate arm id: " + std::string(to_string(arm.id)));
        }
        arms.push_back(std::move(arm));
    }
    if (arms.empty()) throw ValidationError("arm configuration lists no arms");
    return arms;
}

json arms_to_json(const std::vector<TradeoffArm>& arms) {
    json a = json::array();
    for (const auto& arm : arms) a.push_back(to_json(arm));
    return {{"arms", std::move(a)}};
}

std::vector<TradeoffArm> load_arms(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open arm configuration: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& ex) {
        throw ConfigError("cannot parse arm configuration " + path + ": " + ex.what());
    }
    return arms_from_json(doc);
}

const TradeoffArm& find_arm(const std::vector<TradeoffArm>& arms, ArmId id) {
    for (const auto& a : arms) {
        if (a.id == id) return a;
    }
    throw NotFoundError("arm not configured: " + std::string(to_string(id)));
}

}  // namespace fairalloc::frontier

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace fairalloc::frontier {

/// Expected conversions per day, split by the language the applicant used.
struct GroupOutcome {
    double english = 0.0;
    double spanish = 0.0;

    double total() const { return english + spanish; }
    /// Throws DomainError when total() == 0.
    double spanish_share() const;

    friend bool operator==(const GroupOutcome&, const GroupOutcome&) = default;
};

GroupOutcome operator*(double s, const GroupOutcome& g);
GroupOutcome operator+(const GroupOutcome& a, const GroupOutcome& b);

/// Outcomes when the whole daily budget goes to one campaign.
struct CampaignEndpoints {
    GroupOutcome full_english;
    GroupOutcome full_spanish;
    double daily_budget = 400.0;

    /// Non-negative outcomes and positive budget. With `strict`, also
    /// requires full_spanish to carry a strictly larger Spanish share.
    void validate(bool strict = true) const;

    friend bool operator==(const CampaignEndpoints&, const CampaignEndpoints&) = default;
};

enum class ArmId { high, low, equal, flip_low, flip_high };

inline constexpr ArmId kAllArms[] = {ArmId::high, ArmId::low, ArmId::equal, ArmId::flip_low,
                                     ArmId::flip_high};

std::string_view to_string(ArmId id);
/// Throws ValidationError for unknown names.
ArmId arm_from_string(std::string_view name);
bool is_flipped(ArmId id);

struct TradeoffArm {
    ArmId id = ArmId::high;
    std::string label;
    CampaignEndpoints endpoints;
    double parity_share = 0.23;
    /// Declared English-per-Spanish cost ratio (3 or 6). Metadata only.
    double nominal_ratio = 1.0;
    int n_points = 6;

    void validate(bool strict_endpoints = true) const;
};

struct AllocationPoint {
    double spanish_budget_share = 0.0;
    GroupOutcome expected;
    double total_conversions = 0.0;
    /// NaN when total_conversions == 0.
    double spanish_share = 0.0;
};

struct Frontier {
    ArmId arm = ArmId::high;
    std::vector<AllocationPoint> points;

    std::size_t size() const { return points.size(); }
    const AllocationPoint& operator[](std::size_t i) const { return points[i]; }
};

AllocationPoint interpolate(const CampaignEndpoints& endpoints, double lambda);

Frontier build_frontier(const TradeoffArm& arm);

// Selection helpers return indices so callers can map back to survey options;
// the point-returning overloads are thin wrappers.
std::size_t efficiency_index(const Frontier& frontier);
std::size_t parity_index(const Frontier& frontier, double parity_share);
std::size_t max_english_index(const Frontier& frontier);

AllocationPoint efficiency_point(const Frontier& frontier);
AllocationPoint parity_point(const Frontier& frontier, double parity_share);

/// English conversions forgone per Spanish conversion gained when moving the
/// whole budget from the English to the Spanish campaign.
double implied_tradeoff_slope(const CampaignEndpoints& endpoints);
/// Reciprocal view used for flipped arms.
double spanish_per_english_slope(const CampaignEndpoints& endpoints);

enum class SyntheticKind { equal, flip_low, flip_high };

TradeoffArm make_synthetic_arm(SyntheticKind kind, const TradeoffArm& base);

// Defaults. High-arm endpoints are field estimates; the low arm is synthetic
// (10% Spanish at the efficiency point, slope exactly 3).
TradeoffArm default_high_arm();
TradeoffArm default_low_arm();
std::vector<TradeoffArm> default_arms();

/// Half-up rounding used everywhere numbers are shown to people.
long display_round(double x);

nlohmann::json to_json(const TradeoffArm& arm);
TradeoffArm arm_from_json(const nlohmann::json& j);
nlohmann::json to_json(const AllocationPoint& p, bool display_rounded = false);
nlohmann::json to_json(const Frontier& f, bool display_rounded = false);

/// Arm configuration document: {"arms": [...]}. Ids must be unique and every
/// arm must satisfy the strict endpoint invariant.
std::vector<TradeoffArm> load_arms(const std::string& path);
std::vector<TradeoffArm> arms_from_json(const nlohmann::json& doc);
nlohmann::json arms_to_json(const std::vector<TradeoffArm>& arms);

const TradeoffArm& find_arm(const std::vector<TradeoffArm>& arms, ArmId id);

}  // namespace fairalloc::frontier

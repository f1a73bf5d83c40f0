#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fairalloc/errors.hpp"
#include "fairalloc/frontier.hpp"

namespace fairalloc::simulator {

using Date = std::chrono::sys_days;

/// "YYYY-MM-DD"; throws ValidationError on malformed input.
Date parse_date(const std::string& text);
std::string format_date(Date d);

enum class Language { english, spanish };
std::string_view to_string(Language l);
Language language_from_string(std::string_view s);

/// One of six 4-hour blocks: 0 = 00-04, 1 = 04-08, ..., 5 = 20-24 local time.
class TimeBlock {
public:
    constexpr explicit TimeBlock(int index) : index_(index) {
        if (index < 0 || index > 5) throw DomainError("time block index must be in 0..5");
    }
    int index() const { return index_; }
    int start_hour() const { return 4 * index_; }
    friend auto operator<=>(const TimeBlock&, const TimeBlock&) = default;

private:
    int index_;
};

struct DaySchedule {
    Date date;
    std::array<TimeBlock, 3> english_blocks{TimeBlock(0), TimeBlock(2), TimeBlock(4)};
    std::array<TimeBlock, 3> spanish_blocks{TimeBlock(1), TimeBlock(3), TimeBlock(5)};

    const std::array<TimeBlock, 3>& blocks(Language l) const {
        return l == Language::english ? english_blocks : spanish_blocks;
    }
};

/// Round-robin plan. A seeded coin picks which campaign takes blocks {0,2,4}
/// on the first day; the block sets then swap between campaigns every day,
/// so consecutive days always cover all six blocks for each campaign.
std::vector<DaySchedule> build_schedule(Date start, int n_days, std::uint64_t seed);

struct CampaignParams {
    Language language = Language::english;
    double daily_budget = 0.0;
    double cost_per_conversion = 1.0;
    /// Fraction of this campaign's conversions that apply in the other language.
    double cross_language_rate = 0.0;

    void validate() const;
};

struct CampaignPair {
    CampaignParams english;
    CampaignParams spanish;

    const CampaignParams& operator[](Language l) const {
        return l == Language::english ? english : spanish;
    }
};

struct CampaignDay {
    double spend = 0.0;
    std::int64_t english_conversions = 0;
    std::int64_t spanish_conversions = 0;

    std::int64_t total() const { return english_conversions + spanish_conversions; }
};

struct DailyLog {
    Date date;
    std::optional<CampaignDay> english;
    std::optional<CampaignDay> spanish;

    const std::optional<CampaignDay>& campaign(Language l) const {
        return l == Language::english ? english : spanish;
    }
};

/// Poisson(budget / CPC) conversions per campaign, each reassigned to the other
/// language with probability cross_language_rate. Spend equals the budget.
DailyLog simulate_day(const DaySchedule& schedule, const CampaignPair& params, std::uint64_t seed);

/// Simulates every day of the plan with per-day seeds derived from
/// (seed, date), so the result does not depend on evaluation order.
std::vector<DailyLog> simulate(const std::vector<DaySchedule>& plan, const CampaignPair& params,
                               std::uint64_t seed);

/// Per-day averages of each campaign, rescaled as if `daily_budget` had been
/// spent on that campaign alone.
frontier::CampaignEndpoints estimate_endpoints(const std::vector<DailyLog>& logs, double daily_budget);

/// Total spend over total conversions for one campaign.
double cost_per_conversion(const std::vector<DailyLog>& logs, Language language);

/// Simulation configuration document.
struct SimulationConfig {
    std::string name = "high";
    std::string bidding = "maximize_conversions";
    std::optional<double> target_cpa;  // metadata only
    CampaignPair campaigns;
    /// Budget the endpoints are normalised to.
    double daily_budget = 385.0;
    Date start = parse_date("2020-09-28");
    int n_days = 15;
    std::uint64_t seed = 1;
};

/// High-arm experiment: $385 English / $115 Spanish with rates back-solved from
/// the (36,3) / (7,13) endpoints.
SimulationConfig default_high_config();
/// Observed "maximize conversions" cost structure: Spanish CPC = 3.8 x English.
/// Endpoints estimated from it do not match the high-arm frontier.
SimulationConfig max_conversions_cost_config();
/// Low-arm (target-CPA) experiment back-solved from the default low endpoints.
SimulationConfig default_low_config();

SimulationConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SimulationConfig& c);

/// One record per day per campaign:
/// {date, campaign, spend, english_conversions, spanish_conversions}.
std::string export_logs_jsonl(const std::vector<DailyLog>& logs);
std::vector<DailyLog> import_logs_jsonl(const std::string& text);

}  // namespace fairalloc::simulator

#include "fairalloc/simulator.hpp"

#include <algorithm>
#include <cstdio>
#include <random>
#include <sstream>

#include "fairalloc/errors.hpp"
#include "fairalloc/random.hpp"

namespace fairalloc::simulator {

using nlohmann::json;
namespace chr = std::chrono;

Date parse_date(const std::string& text) {
    int y = 0;
    unsigned m = 0;
    unsigned d = 0;
    char tail = 0;
    if (text.size() != 10 || std::sscanf(text.c_str(), "%4d-%2u-%2u%c", &y, &m, &d, &tail) != 3) {
        throw ValidationError("malformed date (expected YYYY-MM-DD): " + text);
    }
    const chr::year_month_day ymd{chr::year{y}, chr::month{m}, chr::day{d}};
    if (!ymd.ok()) throw ValidationError("invalid calendar date: " + text);
    return chr::sys_days{ymd};
}

std::string format_date(Date d) {
    const chr::year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

std::string_view to_string(Language l) { return l == Language::english ? "english" : "spanish"; }

Language language_from_string(std::string_view s) {
    if (s == "english") return Language::english;
    if (s == "spanish") return Language::spanish;
    throw ValidationError("unknown campaign language: " + std::string(s));
}

namespace {

constexpr std::array<TimeBlock, 3> kEvenBlocks{TimeBlock(0), TimeBlock(2), TimeBlock(4)};
constexpr std::array<TimeBlock, 3> kOddBlocks{TimeBlock(1), TimeBlock(3), TimeBlock(5)};

}  // namespace

std::vector<DaySchedule> build_schedule(Date start, int n_days, std::uint64_t seed) {
    if (n_days < 1) throw DomainError("n_days must be at least 1");
    Rng rng = make_rng(derive_seed(seed, static_cast<std::uint64_t>(start.time_since_epoch().count())));
    const bool english_first = std::bernoulli_distribution(0.5)(rng);

    std::vector<DaySchedule> plan;
    plan.reserve(static_cast<std::size_t>(n_days));
    for (int day = 0; day < n_days; ++day) {
        // Weeks have an odd number of days, so plain daily alternation already
        // gives each campaign the opening slot on alternate weeks.
        const bool english_even = english_first == (day % 2 == 0);
        DaySchedule s;
        s.date = start + chr::days{day};
        s.english_blocks = english_even ? kEvenBlocks : kOddBlocks;
        s.spanish_blocks = english_even ? kOddBlocks : kEvenBlocks;
        plan.push_back(s);
    }
    return plan;
}

void CampaignParams::validate() const {
    if (!(cost_per_conversion > 0.0)) throw ValidationError("cost_per_conversion must be positive");
    if (!(daily_budget >= 0.0)) throw ValidationError("daily_budget must be non-negative");
    if (!(cross_language_rate >= 0.0 && cross_language_rate <= 1.0)) {
        throw ValidationError("cross_language_rate must lie in [0,1]");
    }
}

namespace {

CampaignDay simulate_campaign(const CampaignParams& p, Rng& rng) {
    p.validate();
    CampaignDay day;
    if (p.daily_budget == 0.0) return day;
    day.spend = p.daily_budget;
    const double mean = p.daily_budget / p.cost_per_conversion;
    const std::int64_t n = std::poisson_distribution<std::int64_t>(mean)(rng);
    const std::int64_t crossed =
        n > 0 ? std::binomial_distribution<std::int64_t>(n, p.cross_language_rate)(rng) : 0;
    const std::int64_t own = n - crossed;
    if (p.language == Language::english) {
        day.english_conversions = own;
        day.spanish_conversions = crossed;
    } else {
        day.spanish_conversions = own;
        day.english_conversions = crossed;
    }
    return day;
}

}  // namespace

DailyLog simulate_day(const DaySchedule& schedule, const CampaignPair& params, std::uint64_t seed) {
    Rng rng = make_rng(seed);
    DailyLog log;
    log.date = schedule.date;
    log.english = simulate_campaign(params.english, rng);
    log.spanish = simulate_campaign(params.spanish, rng);
    return log;
}

std::vector<DailyLog> simulate(const std::vector<DaySchedule>& plan, const CampaignPair& params,
                               std::uint64_t seed) {
    std::vector<DailyLog> logs;
    logs.reserve(plan.size());
    for (const auto& day : plan) {
        const auto day_key = static_cast<std::uint64_t>(day.date.time_since_epoch().count());
        logs.push_back(simulate_day(day, params, derive_seed(seed, day_key)));
    }
    return logs;
}

frontier::CampaignEndpoints estimate_endpoints(const std::vector<DailyLog>& logs, double daily_budget) {
    if (!(daily_budget > 0.0)) throw DomainError("daily_budget must be positive");
    frontier::CampaignEndpoints out;
    out.daily_budget = daily_budget;
    for (Language lang : {Language::english, Language::spanish}) {
        double spend = 0.0;
        double en = 0.0;
        double sp = 0.0;
        std::size_t days = 0;
        for (const auto& log : logs) {
            const auto& c = log.campaign(lang);
            if (!c) continue;
            ++days;
            spend += c->spend;
            en += static_cast<double>(c->english_conversions);
            sp += static_cast<double>(c->spanish_conversions);
        }
        if (days == 0 || !(spend > 0.0)) {
            throw ValidationError("logs contain no spend for the " + std::string(to_string(lang)) +
                                  " campaign");
        }
        // mean conversions / mean spend * budget
        const double scale = daily_budget / spend;
        const frontier::GroupOutcome g{en * scale, sp * scale};
        (lang == Language::english ? out.full_english : out.full_spanish) = g;
    }
    return out;
}

double cost_per_conversion(const std::vector<DailyLog>& logs, Language language) {
    double spend = 0.0;
    std::int64_t conversions = 0;
    for (const auto& log : logs) {
        if (const auto& c = log.campaign(language)) {
            spend += c->spend;
            conversions += c->total();
        }
    }
    if (conversions == 0) {
        throw DomainError("no conversions recorded for the " + std::string(to_string(language)) +
                          " campaign; cost per conversion undefined");
    }
    return spend / static_cast<double>(conversions);
}

SimulationConfig default_high_config() {
    SimulationConfig c;
    c.name = "high";
    c.bidding = "maximize_conversions";
    c.campaigns.english = {Language::english, 385.0, 9.87, 3.0 / 39.0};
    // 385 / 19.25 = 20 conversions at full budget, 7 of them in English.
    c.campaigns.spanish = {Language::spanish, 115.0, 19.25, 7.0 / 20.0};
    c.daily_budget = 385.0;
    c.start = parse_date("2020-09-28");
    c.n_days = 15;
    c.seed = 20200928;
    return c;
}

SimulationConfig max_conversions_cost_config() {
    SimulationConfig c = default_high_config();
    c.name = "max_conversions_observed";
    c.campaigns.spanish.cost_per_conversion = 3.8 * c.campaigns.english.cost_per_conversion;
    return c;
}

SimulationConfig default_low_config() {
    SimulationConfig c;
    c.name = "low";
    c.bidding = "target_cpa";
    c.target_cpa = 2.97;
    c.campaigns.english = {Language::english, 385.0, 385.0 / 40.0, 4.0 / 40.0};
    c.campaigns.spanish = {Language::spanish, 115.0, 385.0 / 26.0, 15.0 / 26.0};
    c.daily_budget = 385.0;
    c.start = parse_date("2020-10-13");
    c.n_days = 13;
    c.seed = 20201013;
    return c;
}

namespace {

json campaign_json(const CampaignParams& p) {
    return {{"daily_budget", p.daily_budget},
            {"cost_per_conversion", p.cost_per_conversion},
            {"cross_language_rate", p.cross_language_rate}};
}

CampaignParams campaign_from(const json& j, Language lang) {
    CampaignParams p;
    p.language = lang;
    p.daily_budget = j.at("daily_budget").get<double>();
    p.cost_per_conversion = j.at("cost_per_conversion").get<double>();
    p.cross_language_rate = j.value("cross_language_rate", 0.0);
    p.validate();
    return p;
}

}  // namespace

SimulationConfig config_from_json(const json& j) {
    try {
        SimulationConfig c;
        c.name = j.value("name", c.name);
        c.bidding = j.value("bidding", c.bidding);
        if (j.contains("target_cpa") && !j["target_cpa"].is_null()) {
            c.target_cpa = j["target_cpa"].get<double>();
        }
        c.campaigns.english = campaign_from(j.at("campaigns").at("english"), Language::english);
        c.campaigns.spanish = campaign_from(j.at("campaigns").at("spanish"), Language::spanish);
        c.daily_budget = j.value("daily_budget", c.campaigns.english.daily_budget);
        c.start = parse_date(j.value("start_date", format_date(c.start)));
        c.n_days = j.value("days", c.n_days);
        c.seed = j.value("seed", c.seed);
        return c;
    } catch (const json::exception& ex) {
        throw ValidationError(std::string("malformed simulation config: ") + ex.what());
    }
}

json to_json(const SimulationConfig& c) {
    json j{{"name", c.name},
           {"bidding", c.bidding},
           {"campaigns",
            {{"english", campaign_json(c.campaigns.english)},
             {"spanish", campaign_json(c.campaigns.spanish)}}},
           {"daily_budget", c.daily_budget},
           {"start_date", format_date(c.start)},
           {"days", c.n_days},
           {"seed", c.seed}};
    j["target_cpa"] = c.target_cpa ? json(*c.target_cpa) : json(nullptr);
    return j;
}

std::string export_logs_jsonl(const std::vector<DailyLog>& logs) {
    std::ostringstream out;
    for (const auto& log : logs) {
        for (Language lang : {Language::english, Language::spanish}) {
            const auto& c = log.campaign(lang);
            if (!c) continue;
            const json rec{{"date", format_date(log.date)},
                           {"campaign", to_string(lang)},
                           {"spend", c->spend},
                           {"english_conversions", c->english_conversions},
                           {"spanish_conversions", c->spanish_conversions}};
            out << rec.dump() << '\n';
        }
    }
    return out.str();
}

std::vector<DailyLog> import_logs_jsonl(const std::string& text) {
    std::vector<DailyLog> logs;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const json rec = json::parse(line);
            const Date date = parse_date(rec.at("date").get<std::string>());
            CampaignDay day;
            day.spend = rec.at("spend").get<double>();
            day.english_conversions = rec.at("english_conversions").get<std::int64_t>();
            day.spanish_conversions = rec.at("spanish_conversions").get<std::int64_t>();
            if (day.english_conversions < 0 || day.spanish_conversions < 0 || day.spend < 0) {
                throw ValidationError("negative values");
            }
            auto it = std::find_if(logs.begin(), logs.end(),
                                   [&](const DailyLog& l) { return l.date == date; });
            if (it == logs.end()) {
                logs.push_back(DailyLog{date, std::nullopt, std::nullopt});
                it = std::prev(logs.end());
            }
            const Language lang = language_from_string(rec.at("campaign").get<std::string>());
            (lang == Language::english ? it->english : it->spanish) = day;
        } catch (const std::exception& ex) {
            throw ValidationError("log line " + std::to_string(lineno) + ": " + ex.what());
        }
    }
    return logs;
}

}  // namespace fairalloc::simulator

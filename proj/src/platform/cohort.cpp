#include "fairalloc/platform/cohort.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "fairalloc/errors.hpp"
#include "fairalloc/random.hpp"

namespace fairalloc::platform {

using frontier::ArmId;
using nlohmann::json;

namespace {

constexpr std::uint64_t kCohortStream = 0xc0407;

struct Planned {
    Demographics demographics;
    RespondentType type = RespondentType::efficiency;
    ArmId arm = ArmId::high;
};

json answer_for(const json& item, const Planned& p, const frontier::TradeoffArm& arm,
                const frontier::Frontier& f, const std::vector<elicitation::CheckItem>& checks) {
    const std::string kind = item.at("kind").get<std::string>();
    if (kind == "comprehension" || kind == "attention") {
        const int k = std::stoi(item.at("item_id").get<std::string>().substr(6)) - 1;
        return checks.at(static_cast<std::size_t>(k)).correct;
    }
    if (kind == "pair") {
        return planted_choice(p.type, f, arm.parity_share, item["left"]["option"].get<int>(),
                              item["right"]["option"].get<int>());
    }
    if (kind == "ideology") return p.type == RespondentType::efficiency ? "efficiency" : "parity";
    if (kind == "trolley") return p.type == RespondentType::efficiency ? "english" : "spanish";
    if (kind == "demographics") return to_json(p.demographics);
    throw ValidationError("unexpected survey item kind '" + kind + "'");
}

}  // namespace

CohortMix CohortMix::parse(std::string_view text) {
    std::optional<double> eff;
    std::optional<double> par;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t slash = std::min(text.find('/', pos), text.size());
        const std::string part(text.substr(pos, slash - pos));
        const std::size_t dash = part.find('-');
        if (dash == std::string::npos) throw ValidationError("mix part '" + part + "' is not <share>-<type>");
        double share = 0.0;
        try {
            std::size_t used = 0;
            share = std::stod(part.substr(0, dash), &used);
            if (used != dash) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            throw ValidationError("mix share in '" + part + "' is not a number");
        }
        if (!(share >= 0.0 && share <= 1.0)) throw ValidationError("mix shares must lie in [0,1]");
        const std::string type = part.substr(dash + 1);
        std::optional<double>* slot = nullptr;
        if (type == "efficiency") {
            slot = &eff;
        } else if (type == "parity") {
            slot = &par;
        } else {
            throw ValidationError("mix type must be 'efficiency' or 'parity', got '" + type + "'");
        }
        if (*slot) throw ValidationError("mix names '" + type + "' twice");
        *slot = share;
        pos = slash + 1;
    }
    if (!eff && !par) throw ValidationError("empty mix");
    const double e = eff.value_or(1.0 - par.value_or(0.0));
    const double q = par.value_or(1.0 - e);
    if (std::abs(e + q - 1.0) > 1e-9) throw ValidationError("mix shares must sum to 1");
    return {e};
}

std::string CohortMix::to_string() const {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g-efficiency/%g-parity", efficiency, 1.0 - efficiency);
    return buf;
}

json CohortSummary::to_json() const {
    return {{"respondents", respondents},
            {"planted_efficiency", planted_efficiency},
            {"planted_by_party", planted_by_party},
            {"planted_by_arm", planted_by_arm},
            {"sessions_by_arm", sessions_by_arm}};
}

int planted_choice(RespondentType type, const frontier::Frontier& f, double parity_share, int a, int b) {
    const auto& pa = f[static_cast<std::size_t>(a)];
    const auto& pb = f[static_cast<std::size_t>(b)];
    if (type == RespondentType::parity) {
        const double da = std::abs(pa.spanish_share - parity_share);
        const double db = std::abs(pb.spanish_share - parity_share);
        if (da != db) return da < db ? a : b;
    }
    if (pa.total_conversions != pb.total_conversions) return pa.total_conversions > pb.total_conversions ? a : b;
    return std::min(a, b);
}

CohortSummary synthesize_cohort(SurveyService& service, const analysis::CellTable& population,
                                const CohortOptions& options) {
    if (options.n == 0) throw ValidationError("cohort size must be positive");
    if (options.arms.empty()) throw ValidationError("cohort needs at least one arm");
    const StudyConfig& config = service.config();
    for (ArmId a : options.arms) config.arm(a);

    Rng rng = make_rng(derive_seed(options.seed.value_or(config.seed), kCohortStream));
    const analysis::CellSampler sample(population);
    std::vector<Planned> plan(options.n);
    for (auto& p : plan) p.demographics = draw_within_cell(sample(rng), rng);

    // Types are assigned per party so the planted mix holds within each party;
    // arms are dealt round-robin inside each (party, type) block.
    CohortSummary summary;
    summary.respondents = options.n;
    std::size_t efficiency_total = 0;
    std::size_t next_arm = 0;
    std::map<std::string, std::pair<std::size_t, std::size_t>> by_arm;
    for (Party party : {Party::democrat, Party::republican}) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < plan.size(); ++i) {
            if (plan[i].demographics.cell.party == party) members.push_back(i);
        }
        if (members.empty()) continue;
        const auto k = static_cast<std::size_t>(std::llround(options.mix.efficiency * static_cast<double>(members.size())));
        std::shuffle(members.begin(), members.end(), rng);
        for (std::size_t j = 0; j < members.size(); ++j) {
            Planned& p = plan[members[j]];
            p.type = j < k ? RespondentType::efficiency : RespondentType::parity;
            p.arm = options.arms[next_arm++ % options.arms.size()];
            auto& [eff, tot] = by_arm[std::string(frontier::to_string(p.arm))];
            eff += p.type == RespondentType::efficiency;
            ++tot;
        }
        efficiency_total += k;
        summary.planted_by_party[std::string(name_of(party))] =
            static_cast<double>(k) / static_cast<double>(members.size());
    }
    summary.planted_efficiency = static_cast<double>(efficiency_total) / static_cast<double>(options.n);
    for (const auto& [arm, counts] : by_arm) {
        summary.planted_by_arm[arm] = static_cast<double>(counts.first) / static_cast<double>(counts.second);
        summary.sessions_by_arm[arm] = counts.second;
    }

    for (const Planned& p : plan) {
        const auto& arm = config.arm(p.arm);
        const auto f = frontier::build_frontier(arm);
        const auto checks = elicitation::check_items(f);
        const auto created = service.create_session(p.arm);
        for (;;) {
            const json ack = [&] {
                const json item = service.next_item(created.session_id);
                return service.submit(created.session_id, item.at("item_id").get<std::string>(),
                                      answer_for(item, p, arm, f, checks));
            }();
            if (ack.at("stage") == "done") break;
        }
    }
    return summary;
}

}  // namespace fairalloc::platform

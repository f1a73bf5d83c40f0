#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fairalloc/analysis/poststratification.hpp"
#include "fairalloc/platform/service.hpp"

namespace fairalloc::platform {

/// Planted respondent types. An efficiency type prefers the option with more
/// total conversions in every pair, answers the ideology question with the
/// efficiency rule and the trolley question with the English applicants. A
/// parity type prefers the option whose Spanish share is nearer the arm's
/// parity share and gives the opposite auxiliary answers.
enum class RespondentType { efficiency, parity };

struct CohortMix {
    double efficiency = 0.4;

    /// "0.4-efficiency/0.6-parity" (either order; shares must sum to 1).
    static CohortMix parse(std::string_view text);
    std::string to_string() const;
};

struct CohortOptions {
    std::size_t n = 300;
    CohortMix mix;
    std::vector<frontier::ArmId> arms{frontier::ArmId::high, frontier::ArmId::low};
    /// Service config seed when empty.
    std::optional<std::uint64_t> seed;
};

struct CohortSummary {
    std::size_t respondents = 0;
    /// Planted efficiency-type share overall and per party / arm.
    double planted_efficiency = 0.0;
    std::map<std::string, double> planted_by_party;
    std::map<std::string, double> planted_by_arm;
    std::map<std::string, std::size_t> sessions_by_arm;

    nlohmann::json to_json() const;
};

/// Preferred option of a pair for a planted type on the given arm.
int planted_choice(RespondentType type, const frontier::Frontier& frontier, double parity_share, int a, int b);

/// Draws demographics from `population`, assigns types so that each party
/// carries the mix exactly (up to rounding), spreads parties and types evenly
/// over the arms, and answers every item through the service, so the cohort
/// lands in the event log like real respondents.
CohortSummary synthesize_cohort(SurveyService& service, const analysis::CellTable& population,
                                const CohortOptions& options = {});

}  // namespace fairalloc::platform

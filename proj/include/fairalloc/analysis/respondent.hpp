#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairalloc/demographics.hpp"
#include "fairalloc/elicitation.hpp"
#include "fairalloc/frontier.hpp"

namespace fairalloc::analysis {

using elicitation::IdeologyChoice;
using elicitation::PairwiseBallot;
using elicitation::TrolleyChoice;
using frontier::ArmId;

/// One respondent as seen by the analysis: exported answers joined with ballots.
struct Respondent {
    std::string id;
    ArmId arm = ArmId::high;
    Demographics demographics;
    bool eligible = true;
    std::vector<PairwiseBallot> ballots;
    std::optional<IdeologyChoice> ideology;
    std::optional<TrolleyChoice> trolley;

    // Derived by annotate().
    std::optional<int> modal_option;
    bool prefers_efficient = false;
    bool prefers_max_english = false;

    const Cell& cell() const { return demographics.cell; }
};

/// Fills modal_option and both preference flags from the ballots, using the
/// frontier of each respondent's arm. Respondents without a complete ballot
/// set keep modal_option empty and both flags false.
void annotate(std::vector<Respondent>& respondents, const std::vector<frontier::TradeoffArm>& arms);

enum class Selector { pairwise, ideology, trolley };

/// Unweighted share with the selected flag set: pairwise uses the arm's
/// automatic efficiency flag, ideology counts "efficiency" (Bob) answers and
/// trolley counts "english" answers. Only eligible respondents in `arms`
/// (all arms when empty) matching `group` are counted; throws if none match.
double raw_preference_share(std::span<const Respondent> respondents, const Subgroup& group,
                            Selector selector, std::span<const ArmId> arms = {});

struct RawCount {
    std::size_t flagged = 0;
    std::size_t matched = 0;
};

/// Numerator and denominator of raw_preference_share; never throws.
RawCount raw_preference_count(std::span<const Respondent> respondents, const Subgroup& group,
                              Selector selector, std::span<const ArmId> arms = {});

}  // namespace fairalloc::analysis

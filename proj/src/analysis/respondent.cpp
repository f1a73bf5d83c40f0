#include "fairalloc/analysis/respondent.hpp"

#include <algorithm>
#include <map>

#include "fairalloc/errors.hpp"

namespace fairalloc::analysis {

void annotate(std::vector<Respondent>& respondents, const std::vector<frontier::TradeoffArm>& arms) {
    std::map<ArmId, frontier::Frontier> frontiers;
    for (const auto& arm : arms) frontiers.emplace(arm.id, frontier::build_frontier(arm));

    for (auto& r : respondents) {
        r.modal_option.reset();
        r.prefers_efficient = false;
        r.prefers_max_english = false;
        if (!r.eligible || r.ballots.empty()) continue;
        const auto it = frontiers.find(r.arm);
        if (it == frontiers.end()) {
            throw NotFoundError("respondent " + r.id + " belongs to an unconfigured arm");
        }
        const frontier::Frontier& f = it->second;
        const int modal = elicitation::modal_preference(r.ballots, f);
        r.modal_option = modal;
        r.prefers_efficient = elicitation::flag_for_modal(modal, f, elicitation::FlagVariant::efficiency);
        r.prefers_max_english = elicitation::flag_for_modal(modal, f, elicitation::FlagVariant::max_english);
    }
}

RawCount raw_preference_count(std::span<const Respondent> respondents, const Subgroup& group,
                              Selector selector, std::span<const ArmId> arms) {
    RawCount c;
    for (const auto& r : respondents) {
        if (!r.eligible || !group.matches(r.cell())) continue;
        if (!arms.empty() && std::find(arms.begin(), arms.end(), r.arm) == arms.end()) continue;
        bool flag = false;
        switch (selector) {
            case Selector::pairwise:
                if (!r.modal_option) continue;
                flag = (r.arm == ArmId::high || r.arm == ArmId::low) ? r.prefers_efficient
                                                                     : r.prefers_max_english;
                break;
            case Selector::ideology:
                if (!r.ideology) continue;
                flag = *r.ideology == IdeologyChoice::efficiency;
                break;
            case Selector::trolley:
                if (!r.trolley) continue;
                flag = *r.trolley == TrolleyChoice::english;
                break;
        }
        ++c.matched;
        c.flagged += flag ? 1 : 0;
    }
    return c;
}

double raw_preference_share(std::span<const Respondent> respondents, const Subgroup& group,
                            Selector selector, std::span<const ArmId> arms) {
    const RawCount c = raw_preference_count(respondents, group, selector, arms);
    if (c.matched == 0) throw ValidationError("no respondents match the requested group");
    return static_cast<double>(c.flagged) / static_cast<double>(c.matched);
}

}  // namespace fairalloc::analysis

#include "fairalloc/elicitation.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "fairalloc/errors.hpp"
#include "fairalloc/random.hpp"

namespace fairalloc::elicitation {

using nlohmann::json;

OptionPair OptionPair::of(int a, int b) {
    if (a == b) throw ValidationError("a pair needs two distinct options");
    if (a < 0 || b < 0) throw ValidationError("option indices must be non-negative");
    return a < b ? OptionPair{a, b} : OptionPair{b, a};
}

std::vector<OptionPair> enumerate_pairs(int n_options) {
    if (n_options < 2) throw DomainError("need at least two options to form pairs");
    std::vector<OptionPair> pairs;
    pairs.reserve(static_cast<std::size_t>(n_options * (n_options - 1) / 2));
    for (int a = 0; a < n_options; ++a) {
        for (int b = a + 1; b < n_options; ++b) pairs.push_back({a, b});
    }
    return pairs;
}

PresentationPlan shuffle_presentation(std::span<const OptionPair> pairs, std::uint64_t seed) {
    Rng rng = make_rng(seed);
    PresentationPlan plan;
    plan.reserve(pairs.size());
    for (const auto& p : pairs) plan.push_back({p, false});
    // Fisher-Yates with explicit index draws.
    for (std::size_t i = plan.size(); i > 1; --i) {
        std::uniform_int_distribution<std::size_t> pick(0, i - 1);
        std::swap(plan[i - 1], plan[pick(rng)]);
    }
    std::bernoulli_distribution coin(0.5);
    for (auto& p : plan) p.swap_sides = coin(rng);
    return plan;
}

void PairwiseBallot::validate() const {
    if (pair.first == pair.second || pair.first < 0) {
        throw ValidationError("ballot pair must hold two distinct non-negative options");
    }
    if (!pair.contains(choice)) throw ValidationError("ballot choice is not one of the pair");
}

std::string_view to_string(Stage s) {
    switch (s) {
        case Stage::intro: return "intro";
        case Stage::comprehension: return "comprehension";
        case Stage::comparisons: return "comparisons";
        case Stage::ideology: return "ideology";
        case Stage::trolley: return "trolley";
        case Stage::demographics: return "demographics";
        case Stage::done: return "done";
    }
    return "unknown";
}

std::string_view to_string(Eligibility e) {
    switch (e) {
        case Eligibility::pending: return "pending";
        case Eligibility::eligible: return "eligible";
        case Eligibility::ineligible: return "ineligible";
    }
    return "unknown";
}

std::string_view to_string(IdeologyChoice c) {
    return c == IdeologyChoice::efficiency ? "efficiency" : "parity";
}

std::string_view to_string(TrolleyChoice c) { return c == TrolleyChoice::spanish ? "spanish" : "english"; }

Eligibility eligibility_from_string(std::string_view s) {
    if (s == "pending") return Eligibility::pending;
    if (s == "eligible") return Eligibility::eligible;
    if (s == "ineligible") return Eligibility::ineligible;
    throw ValidationError("unknown eligibility: " + std::string(s));
}

IdeologyChoice ideology_from_string(std::string_view s) {
    if (s == "efficiency" || s == "bob") return IdeologyChoice::efficiency;
    if (s == "parity" || s == "steve") return IdeologyChoice::parity;
    throw ValidationError("ideology answer must be 'efficiency' (Bob) or 'parity' (Steve)");
}

TrolleyChoice trolley_from_string(std::string_view s) {
    if (s == "spanish") return TrolleyChoice::spanish;
    if (s == "english") return TrolleyChoice::english;
    throw ValidationError("trolley answer must be 'spanish' or 'english'");
}

std::vector<CheckItem> check_items(const frontier::Frontier& frontier) {
    if (frontier.size() < 2) throw DomainError("frontier needs at least two options");
    const int first = 0;
    const int last = static_cast<int>(frontier.size()) - 1;
    const auto& a = frontier[0];
    const auto& b = frontier[frontier.size() - 1];
    std::vector<CheckItem> items;
    items.push_back({CheckKind::comprehension,
                     "Which of these two options results in more total conversions?", first, last,
                     a.total_conversions >= b.total_conversions ? first : last});
    items.push_back({CheckKind::comprehension,
                     "Which of these two options results in more Spanish-speaker conversions?",
                     first, last, a.expected.spanish >= b.expected.spanish ? first : last});
    items.push_back({CheckKind::attention,
                     "To show that you are reading carefully, please select the option on the right.",
                     first, last, last});
    return items;
}

TrolleyQuestion trolley_for(ArmId arm) {
    switch (arm) {
        case ArmId::high: return {1, 6};
        case ArmId::low: return {1, 3};
        case ArmId::equal: return {1, 1};
        case ArmId::flip_low: return {3, 1};
        case ArmId::flip_high: return {6, 1};
    }
    return {1, 1};
}

std::string ideology_text(ArmId arm, double parity_share) {
    char pct[16];
    std::snprintf(pct, sizeof pct, "%ld%%", frontier::display_round(100.0 * parity_share));
    const bool flipped = frontier::is_flipped(arm);
    std::string text =
        "Two people, Bob and Steve, reviewed the same options you compared.\n"
        "Bob's rule: pick the option with the largest total number of applicants";
    text += flipped ? " (on these options that is also the one with the most Spanish-speaking applicants).\n"
                    : ".\n";
    text += "Steve's rule: pick the option whose share of Spanish-speaking applicants is nearest ";
    text += pct;
    text += ".\nWhich rule do you agree with more?";
    return text;
}

std::string trolley_text(const TrolleyQuestion& q) {
    auto noun = [](int n, const char* lang) {
        return std::to_string(n) + " " + lang + "-speaking SNAP applicant" + (n == 1 ? "" : "s");
    };
    return "You can recruit either " + noun(q.n_spanish, "Spanish") + " or " +
           noun(q.n_english, "English") + ", but not both. Which do you choose?";
}

Session::Session(std::string respondent_id, ArmId arm, PresentationPlan plan, int n_checks)
    : respondent_id_(std::move(respondent_id)), arm_(arm), plan_(std::move(plan)), n_checks_(n_checks) {
    if (plan_.empty()) throw ValidationError("presentation plan is empty");
    if (n_checks_ < 0) throw ValidationError("number of checks must be non-negative");
}

void Session::require_stage(Stage s, std::string_view action) const {
    if (stage_ != s) {
        throw ConflictError(std::string(action) + " is not allowed in stage '" +
                            std::string(to_string(stage_)) + "'");
    }
}

const PresentedPair& Session::next_pair() const {
    require_stage(Stage::comparisons, "next pair");
    return plan_[ballots_.size()];
}

void Session::begin() {
    require_stage(Stage::intro, "begin");
    stage_ = Stage::comprehension;
}

void Session::record_check(CheckKind kind, bool passed) {
    require_stage(Stage::comprehension, "recording a check");
    if (checks_answered_ >= static_cast<std::size_t>(n_checks_)) {
        throw ConflictError("all checks already answered");
    }
    ++checks_answered_;
    if (!passed) {
        (kind == CheckKind::comprehension ? comprehension_failures_ : attention_failures_) += 1;
    }
}

Eligibility check_eligibility(const Session& session, const EligibilityPolicy& policy) {
    if (session.checks_answered() < static_cast<std::size_t>(session.n_checks())) {
        return Eligibility::pending;
    }
    if (session.comprehension_failures() > policy.max_comprehension_failures ||
        session.attention_failures() > policy.max_attention_failures) {
        return Eligibility::ineligible;
    }
    return Eligibility::eligible;
}

void Session::resolve_eligibility(const EligibilityPolicy& policy) {
    require_stage(Stage::comprehension, "resolving eligibility");
    const Eligibility e = check_eligibility(*this, policy);
    if (e == Eligibility::pending) throw ConflictError("checks are not all answered yet");
    eligibility_ = e;
    stage_ = e == Eligibility::eligible ? Stage::comparisons : Stage::done;
}

void Session::record_response(const OptionPair& pair, int choice) {
    require_stage(Stage::comparisons, "recording a comparison");
    const PresentedPair& expected = plan_[ballots_.size()];
    const bool seen = std::any_of(ballots_.begin(), ballots_.end(),
                                  [&](const PairwiseBallot& b) { return b.pair == pair; });
    if (seen) throw ConflictError("a ballot for this pair was already recorded");
    if (!(pair == expected.pair)) throw ConflictError("pair is not the next scheduled comparison");
    if (!pair.contains(choice)) throw ValidationError("choice is not one of the pair's options");

    ballots_.push_back({respondent_id_, arm_, pair, choice, static_cast<int>(ballots_.size())});
    if (ballots_complete()) stage_ = Stage::ideology;
}

void Session::record_ideology(IdeologyChoice c) {
    require_stage(Stage::ideology, "answering the ideology question");
    ideology_ = c;
    stage_ = Stage::trolley;
}

void Session::record_trolley(TrolleyChoice c) {
    require_stage(Stage::trolley, "answering the trolley question");
    trolley_ = c;
    stage_ = Stage::demographics;
}

void Session::record_demographics(const Demographics& d) {
    require_stage(Stage::demographics, "recording demographics");
    d.validate();
    demographics_ = d;
    stage_ = Stage::done;
}

Session record_response(Session session, const OptionPair& pair, int choice) {
    session.record_response(pair, choice);
    return session;
}

namespace {

void require_complete(std::span<const PairwiseBallot> ballots, int n) {
    std::set<OptionPair> seen;
    for (const auto& b : ballots) {
        b.validate();
        if (b.pair.second >= n) throw ValidationError("ballot references an option off the frontier");
        if (!seen.insert(b.pair).second) throw ValidationError("duplicate ballot for a pair");
    }
    if (seen.size() != static_cast<std::size_t>(n * (n - 1) / 2)) {
        throw ValidationError("incomplete ballot set: need one ballot for every pair");
    }
}

}  // namespace

int modal_preference(std::span<const PairwiseBallot> ballots, const frontier::Frontier& frontier) {
    const int n = static_cast<int>(frontier.size());
    if (n < 2) throw DomainError("frontier needs at least two options");
    require_complete(ballots, n);
    std::vector<int> wins(static_cast<std::size_t>(n), 0);
    for (const auto& b : ballots) ++wins[static_cast<std::size_t>(b.choice)];

    int best = 0;
    for (int i = 1; i < n; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        const auto ub = static_cast<std::size_t>(best);
        if (wins[ui] > wins[ub] ||
            (wins[ui] == wins[ub] && frontier[ui].spanish_share < frontier[ub].spanish_share)) {
            best = i;
        }
    }
    return best;
}

std::vector<std::optional<double>> win_rates(std::span<const PairwiseBallot> ballots, int option_count) {
    if (option_count < 1) throw DomainError("option_count must be positive");
    std::vector<std::int64_t> wins(static_cast<std::size_t>(option_count), 0);
    std::vector<std::int64_t> appearances(static_cast<std::size_t>(option_count), 0);
    for (const auto& b : ballots) {
        b.validate();
        if (b.pair.second >= option_count) throw ValidationError("ballot option out of range");
        ++appearances[static_cast<std::size_t>(b.pair.first)];
        ++appearances[static_cast<std::size_t>(b.pair.second)];
        ++wins[static_cast<std::size_t>(b.choice)];
    }
    std::vector<std::optional<double>> rates(static_cast<std::size_t>(option_count));
    for (std::size_t i = 0; i < rates.size(); ++i) {
        if (appearances[i] > 0) {
            rates[i] = static_cast<double>(wins[i]) / static_cast<double>(appearances[i]);
        }
    }
    return rates;
}

bool flag_for_modal(int modal_option, const frontier::Frontier& frontier, FlagVariant variant) {
    if (variant == FlagVariant::automatic) {
        variant = (frontier.arm == ArmId::high || frontier.arm == ArmId::low) ? FlagVariant::efficiency
                                                                              : FlagVariant::max_english;
    }
    const std::size_t target = variant == FlagVariant::efficiency ? frontier::efficiency_index(frontier)
                                                                  : frontier::max_english_index(frontier);
    return static_cast<std::size_t>(modal_option) == target;
}

bool efficiency_preference_flag(const Session& session, const frontier::Frontier& frontier,
                                FlagVariant variant) {
    if (session.eligibility() != Eligibility::eligible) {
        throw ValidationError("efficiency flag requires an eligible session");
    }
    if (!session.ballots_complete()) throw ValidationError("session ballots are incomplete");
    return flag_for_modal(modal_preference(session.ballots(), frontier), frontier, variant);
}

json to_json(const PairwiseBallot& b) {
    return {{"respondent_id", b.respondent_id}, {"arm", frontier::to_string(b.arm)},
            {"option_a", b.pair.first},         {"option_b", b.pair.second},
            {"choice", b.choice},               {"order", b.presentation_order}};
}

PairwiseBallot ballot_from_json(const json& j) {
    try {
        PairwiseBallot b;
        b.respondent_id = j.at("respondent_id").get<std::string>();
        b.arm = frontier::arm_from_string(j.at("arm").get<std::string>());
        b.pair = OptionPair::of(j.at("option_a").get<int>(), j.at("option_b").get<int>());
        b.choice = j.at("choice").get<int>();
        b.presentation_order = j.at("order").get<int>();
        b.validate();
        return b;
    } catch (const json::exception& ex) {
        throw ValidationError(std::string("malformed ballot record: ") + ex.what());
    }
}

}  // namespace fairalloc::elicitation

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fairalloc/demographics.hpp"
#include "fairalloc/frontier.hpp"

namespace fairalloc::elicitation {

using frontier::ArmId;

/// Unordered pair of option indices, stored canonically with first < second.
struct OptionPair {
    int first = 0;
    int second = 1;

    static OptionPair of(int a, int b);
    bool contains(int option) const { return option == first || option == second; }
    friend auto operator<=>(const OptionPair&, const OptionPair&) = default;
};

/// All C(n,2) pairs in ascending order. Throws DomainError for n < 2.
std::vector<OptionPair> enumerate_pairs(int n_options);

struct PresentedPair {
    OptionPair pair;
    bool swap_sides = false;

    int left() const { return swap_sides ? pair.second : pair.first; }
    int right() const { return swap_sides ? pair.first : pair.second; }
};

using PresentationPlan = std::vector<PresentedPair>;

/// Seeded permutation of pair order and of left/right placement.
PresentationPlan shuffle_presentation(std::span<const OptionPair> pairs, std::uint64_t seed);

struct PairwiseBallot {
    std::string respondent_id;
    ArmId arm = ArmId::high;
    OptionPair pair;
    int choice = 0;
    int presentation_order = 0;

    void validate() const;
};

enum class Stage { intro, comprehension, comparisons, ideology, trolley, demographics, done };
enum class Eligibility { pending, eligible, ineligible };
/// Efficiency = "Bob" (most applicants), parity = "Steve" (closest to parity share).
enum class IdeologyChoice { efficiency, parity };
enum class TrolleyChoice { spanish, english };
enum class CheckKind { comprehension, attention };

std::string_view to_string(Stage s);
std::string_view to_string(Eligibility e);
std::string_view to_string(IdeologyChoice c);
std::string_view to_string(TrolleyChoice c);
Eligibility eligibility_from_string(std::string_view s);
IdeologyChoice ideology_from_string(std::string_view s);
TrolleyChoice trolley_from_string(std::string_view s);

struct EligibilityPolicy {
    int max_comprehension_failures = 0;
    int max_attention_failures = 0;
};

/// A check shown before the comparisons: two frontier options and the index of
/// the correct answer.
struct CheckItem {
    CheckKind kind = CheckKind::comprehension;
    std::string prompt;
    int option_a = 0;
    int option_b = 0;
    int correct = 0;
};

/// Two comprehension items (more total conversions; more Spanish-speaker
/// conversions) and one attention item, all built on the frontier's extremes.
std::vector<CheckItem> check_items(const frontier::Frontier& frontier);

struct TrolleyQuestion {
    int n_spanish = 1;
    int n_english = 1;
};

TrolleyQuestion trolley_for(ArmId arm);
std::string ideology_text(ArmId arm, double parity_share);
std::string trolley_text(const TrolleyQuestion& q);

/// Survey state for one respondent. Mutators validate before touching state,
/// so a rejected call leaves the session unchanged.
class Session {
public:
    Session(std::string respondent_id, ArmId arm, PresentationPlan plan, int n_checks = 3);

    const std::string& respondent_id() const { return respondent_id_; }
    ArmId arm() const { return arm_; }
    Stage stage() const { return stage_; }
    Eligibility eligibility() const { return eligibility_; }
    const PresentationPlan& plan() const { return plan_; }
    const std::vector<PairwiseBallot>& ballots() const { return ballots_; }
    int comprehension_failures() const { return comprehension_failures_; }
    int attention_failures() const { return attention_failures_; }
    std::size_t checks_answered() const { return checks_answered_; }
    int n_checks() const { return n_checks_; }
    const std::optional<IdeologyChoice>& ideology() const { return ideology_; }
    const std::optional<TrolleyChoice>& trolley() const { return trolley_; }
    const std::optional<Demographics>& demographics() const { return demographics_; }

    /// Next pair to show during the comparisons stage.
    const PresentedPair& next_pair() const;
    bool ballots_complete() const { return ballots_.size() == plan_.size(); }

    void begin();
    void record_check(CheckKind kind, bool passed);
    /// Settles eligibility once all checks are answered; ineligible sessions end.
    void resolve_eligibility(const EligibilityPolicy& policy);
    void record_response(const OptionPair& pair, int choice);
    void record_ideology(IdeologyChoice c);
    void record_trolley(TrolleyChoice c);
    void record_demographics(const Demographics& d);

private:
    void require_stage(Stage s, std::string_view action) const;

    std::string respondent_id_;
    ArmId arm_;
    PresentationPlan plan_;
    int n_checks_;
    Stage stage_ = Stage::intro;
    Eligibility eligibility_ = Eligibility::pending;
    std::size_t checks_answered_ = 0;
    int comprehension_failures_ = 0;
    int attention_failures_ = 0;
    std::vector<PairwiseBallot> ballots_;
    std::optional<IdeologyChoice> ideology_;
    std::optional<TrolleyChoice> trolley_;
    std::optional<Demographics> demographics_;
};

Eligibility check_eligibility(const Session& session, const EligibilityPolicy& policy);

/// Value-style wrapper: returns the updated copy, throws without side effects.
Session record_response(Session session, const OptionPair& pair, int choice);

/// Option with the most wins; ties go to the lowest Spanish share (then lowest
/// index). Requires exactly one ballot per pair of the frontier's options.
int modal_preference(std::span<const PairwiseBallot> ballots, const frontier::Frontier& frontier);

/// Wins over appearances per option; nullopt where an option never appeared.
std::vector<std::optional<double>> win_rates(std::span<const PairwiseBallot> ballots, int option_count);

enum class FlagVariant {
    automatic,    // efficiency for high/low, max-English for equal and flipped arms
    efficiency,   // modal == efficiency point
    max_english,  // modal == point with most English conversions
};

bool efficiency_preference_flag(const Session& session, const frontier::Frontier& frontier,
                                FlagVariant variant = FlagVariant::automatic);
bool flag_for_modal(int modal_option, const frontier::Frontier& frontier, FlagVariant variant);

/// Ballot export record: {respondent_id, arm, option_a, option_b, choice, order}.
nlohmann::json to_json(const PairwiseBallot& b);
PairwiseBallot ballot_from_json(const nlohmann::json& j);

}  // namespace fairalloc::elicitation

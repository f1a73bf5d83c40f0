#include "fairalloc/platform/service.hpp"

#include <cstdio>
#include <mutex>

#include "fairalloc/errors.hpp"
#include "fairalloc/random.hpp"

namespace fairalloc::platform {

using elicitation::Stage;
using frontier::ArmId;
using nlohmann::json;

namespace {

constexpr std::uint64_t kArmStream = 1;
constexpr std::uint64_t kPlanStream = 2;

std::string session_token(std::uint64_t seed, std::size_t index) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "s-%016llx",
                  static_cast<unsigned long long>(derive_seed(seed, index)));
    return buf;
}

int option_answer(const json& answer) {
    if (!answer.is_number_integer()) throw ValidationError("answer must be an option index");
    return answer.get<int>();
}

std::string string_answer(const json& answer) {
    if (!answer.is_string()) throw ValidationError("answer must be a string");
    return answer.get<std::string>();
}

EventKind kind_for(const std::string& item_id) {
    if (item_id == "ideology" || item_id == "trolley") return EventKind::aux_recorded;
    if (item_id == "demographics") return EventKind::demographics_recorded;
    return EventKind::response_recorded;
}

// Applies one answer to the session. Throws without side effects on the
// session when the answer is rejected.
void advance(SessionState& s, const std::string& item_id, const json& answer) {
    const std::string expected = s.current_item();
    if (expected.empty()) throw ConflictError("session is finished");
    if (item_id != expected) {
        throw ConflictError("item '" + item_id + "' is not the pending item ('" + expected + "')");
    }
    elicitation::Session& session = s.session;
    switch (session.stage()) {
        case Stage::comprehension: {
            const auto& check = s.checks[session.checks_answered()];
            const int choice = option_answer(answer);
            if (choice != check.option_a && choice != check.option_b) {
                throw ValidationError("choice is not one of the options shown");
            }
            session.record_check(check.kind, choice == check.correct);
            if (session.checks_answered() == s.checks.size()) session.resolve_eligibility(s.policy);
            break;
        }
        case Stage::comparisons:
            session.record_response(session.next_pair().pair, option_answer(answer));
            break;
        case Stage::ideology:
            session.record_ideology(elicitation::ideology_from_string(string_answer(answer)));
            break;
        case Stage::trolley:
            session.record_trolley(elicitation::trolley_from_string(string_answer(answer)));
            break;
        case Stage::demographics:
            if (!answer.is_object()) throw ValidationError("demographics answer must be an object");
            session.record_demographics(demographics_from_json(answer));
            break;
        default:
            throw ConflictError("session has no pending item");
    }
}

SessionState open_session(const std::string& id, ArmId arm, std::uint64_t plan_seed,
                          const elicitation::EligibilityPolicy& policy, const StudyConfig& config) {
    const auto& cfg = config.arm(arm);
    const auto frontier = frontier::build_frontier(cfg);
    const auto pairs = elicitation::enumerate_pairs(static_cast<int>(frontier.size()));
    auto checks = elicitation::check_items(frontier);
    elicitation::Session session(id, arm, elicitation::shuffle_presentation(pairs, plan_seed),
                                 static_cast<int>(checks.size()));
    session.begin();
    return SessionState{std::move(session), plan_seed, std::move(checks), policy, {}};
}

json option_card(const frontier::Frontier& f, int option) {
    json card = frontier::to_json(f[static_cast<std::size_t>(option)], true);
    card["option"] = option;
    return card;
}

json demographics_form() {
    auto names = [](auto vocab) {
        json a = json::array();
        for (auto n : vocab) a.push_back(std::string(n));
        return a;
    };
    return {{"age_group", names(Vocabulary<AgeGroup>::names)},
            {"education", names(Vocabulary<Education>::names)},
            {"gender", names(Vocabulary<Gender>::names)},
            {"income", names(Vocabulary<Income>::names)},
            {"party", names(Vocabulary<Party>::names)},
            {"race", names(Vocabulary<Race>::names)},
            {"religion", names(Vocabulary<Religion>::names)}};
}

}  // namespace

std::string SessionState::current_item() const {
    switch (session.stage()) {
        case Stage::comprehension: return "check-" + std::to_string(session.checks_answered() + 1);
        case Stage::comparisons: return "pair-" + std::to_string(session.ballots().size() + 1);
        case Stage::ideology: return "ideology";
        case Stage::trolley: return "trolley";
        case Stage::demographics: return "demographics";
        default: return "";
    }
}

void apply_event(SurveyState& state, const EventRecord& record, const StudyConfig& config) {
    const json& p = record.payload;
    try {
        const std::string id = p.at("session_id").get<std::string>();
        if (record.kind == EventKind::session_created) {
            if (state.sessions.count(id)) throw ValidationError("session " + id + " created twice");
            elicitation::EligibilityPolicy policy;
            policy.max_comprehension_failures = p.at("policy").at("max_comprehension_failures").get<int>();
            policy.max_attention_failures = p.at("policy").at("max_attention_failures").get<int>();
            state.sessions.emplace(id, open_session(id, frontier::arm_from_string(p.at("arm").get<std::string>()),
                                                    p.at("plan_seed").get<std::uint64_t>(), policy, config));
            state.order.push_back(id);
            return;
        }
        auto it = state.sessions.find(id);
        if (it == state.sessions.end()) throw ValidationError("event for unknown session " + id);
        SessionState& s = it->second;
        if (record.kind == EventKind::session_finalized) {
            if (s.session.stage() != Stage::done) throw ValidationError("session " + id + " finalized early");
            return;
        }
        const std::string item = p.at("item_id").get<std::string>();
        SessionState next = s;
        advance(next, item, p.at("answer"));
        next.answered[item] = {p.at("answer"), record.sequence_number};
        s = std::move(next);
    } catch (const json::exception& ex) {
        throw ValidationError("event " + std::to_string(record.sequence_number) + ": " + ex.what());
    } catch (const Error& ex) {
        throw ValidationError("event " + std::to_string(record.sequence_number) + ": " + ex.what());
    }
}

SurveyState replay(const std::vector<EventRecord>& records, const StudyConfig& config) {
    SurveyState state;
    for (const auto& r : records) apply_event(state, r, config);
    return state;
}

std::vector<analysis::Respondent> to_respondents(const SurveyState& state, bool include_incomplete) {
    std::vector<analysis::Respondent> out;
    for (const auto& id : state.order) {
        const auto& s = state.sessions.at(id).session;
        const bool complete = s.stage() == Stage::done && s.demographics().has_value();
        if (!complete && !include_incomplete) continue;
        analysis::Respondent r;
        r.id = id;
        r.arm = s.arm();
        if (s.demographics()) r.demographics = *s.demographics();
        r.eligible = s.eligibility() == elicitation::Eligibility::eligible;
        r.ballots = s.ballots();
        r.ideology = s.ideology();
        r.trolley = s.trolley();
        out.push_back(std::move(r));
    }
    return out;
}

SurveyService::SurveyService(StudyConfig config, std::shared_ptr<EventStore> store)
    : config_(std::move(config)), store_(std::move(store)) {
    if (!store_) throw ValidationError("survey service needs an event store");
    if (config_.arms.empty()) throw ConfigError("no arms configured");
    state_ = replay(store_->records(), config_);
}

SurveyService::Created SurveyService::create_session(std::optional<ArmId> requested) {
    std::unique_lock lock(mutex_);
    const std::size_t index = state_.order.size();
    ArmId arm;
    if (requested) {
        arm = config_.arm(*requested).id;
    } else {
        Rng rng = make_rng(derive_seed(config_.seed, kArmStream, index));
        std::uniform_int_distribution<std::size_t> pick(0, config_.arms.size() - 1);
        arm = config_.arms[pick(rng)].id;
    }
    const std::string id = session_token(config_.seed, index);
    if (state_.sessions.count(id)) throw ConflictError("session id " + id + " already exists");
    const std::uint64_t plan_seed = derive_seed(config_.seed, kPlanStream, index);
    SessionState fresh = open_session(id, arm, plan_seed, config_.eligibility, config_);
    store_->append(EventKind::session_created,
                   {{"session_id", id},
                    {"arm", frontier::to_string(arm)},
                    {"plan_seed", plan_seed},
                    {"policy",
                     {{"max_comprehension_failures", config_.eligibility.max_comprehension_failures},
                      {"max_attention_failures", config_.eligibility.max_attention_failures}}}});
    state_.sessions.emplace(id, std::move(fresh));
    state_.order.push_back(id);
    return {id, arm};
}

const SessionState& SurveyService::find(const std::string& session_id) const {
    auto it = state_.sessions.find(session_id);
    if (it == state_.sessions.end()) throw NotFoundError("unknown session '" + session_id + "'");
    return it->second;
}

json SurveyService::next_item(const std::string& session_id) const {
    std::shared_lock lock(mutex_);
    const SessionState& s = find(session_id);
    const auto& session = s.session;
    const std::string item = s.current_item();
    if (item.empty()) throw ConflictError("session '" + session_id + "' is finished");
    const auto& arm = config_.arm(session.arm());
    json out{{"session_id", session_id},
             {"item_id", item},
             {"stage", elicitation::to_string(session.stage())},
             {"arm", frontier::to_string(session.arm())}};
    switch (session.stage()) {
        case Stage::comprehension: {
            const auto f = frontier::build_frontier(arm);
            const auto& check = s.checks[session.checks_answered()];
            out["kind"] = check.kind == elicitation::CheckKind::comprehension ? "comprehension" : "attention";
            out["prompt"] = check.prompt;
            out["left"] = option_card(f, check.option_a);
            out["right"] = option_card(f, check.option_b);
            break;
        }
        case Stage::comparisons: {
            const auto f = frontier::build_frontier(arm);
            const auto& pair = session.next_pair();
            out["kind"] = "pair";
            out["progress"] = session.ballots().size() + 1;
            out["total"] = session.plan().size();
            out["left"] = option_card(f, pair.left());
            out["right"] = option_card(f, pair.right());
            break;
        }
        case Stage::ideology:
            out["kind"] = "ideology";
            out["text"] = elicitation::ideology_text(arm.id, arm.parity_share);
            out["choices"] = {"efficiency", "parity"};
            break;
        case Stage::trolley: {
            const auto q = elicitation::trolley_for(arm.id);
            out["kind"] = "trolley";
            out["text"] = elicitation::trolley_text(q);
            out["n_spanish"] = q.n_spanish;
            out["n_english"] = q.n_english;
            out["choices"] = {"spanish", "english"};
            break;
        }
        case Stage::demographics:
            out["kind"] = "demographics";
            out["categories"] = demographics_form();
            out["values"] = {"age_value", "education_value", "income_value"};
            break;
        default:
            break;
    }
    return out;
}

json SurveyService::submit(const std::string& session_id, const std::string& item_id, const json& answer) {
    std::unique_lock lock(mutex_);
    const SessionState& s = find(session_id);
    auto ack = [&](std::uint64_t seq, bool duplicate, const SessionState& now) {
        return json{{"session_id", session_id},
                    {"item_id", item_id},
                    {"sequence_number", seq},
                    {"duplicate", duplicate},
                    {"stage", elicitation::to_string(now.session.stage())}};
    };
    if (auto prior = s.answered.find(item_id); prior != s.answered.end()) {
        if (prior->second.value == answer) return ack(prior->second.sequence_number, true, s);
        throw ConflictError("item '" + item_id + "' was already answered differently");
    }
    SessionState next = s;
    advance(next, item_id, answer);

    const json payload{{"session_id", session_id}, {"item_id", item_id}, {"answer", answer}};
    const EventRecord record = store_->append(kind_for(item_id), payload);
    next.answered[item_id] = {answer, record.sequence_number};
    if (next.session.stage() == Stage::done) {
        store_->append(EventKind::session_finalized,
                       {{"session_id", session_id},
                        {"eligibility", elicitation::to_string(next.session.eligibility())}});
    }
    SessionState& slot = state_.sessions.at(session_id);
    slot = std::move(next);
    return ack(record.sequence_number, false, slot);
}

SurveyState SurveyService::snapshot() const {
    std::shared_lock lock(mutex_);
    return state_;
}

std::vector<analysis::Respondent> SurveyService::respondents(bool include_incomplete) const {
    std::shared_lock lock(mutex_);
    return to_respondents(state_, include_incomplete);
}

}  // namespace fairalloc::platform

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "fairalloc/analysis/respondent.hpp"
#include "fairalloc/elicitation.hpp"
#include "fairalloc/platform/config.hpp"
#include "fairalloc/platform/event_store.hpp"

namespace fairalloc::platform {

/// Session state rebuilt from events, plus what it takes to judge resubmissions.
struct SessionState {
    elicitation::Session session;
    std::uint64_t plan_seed = 0;
    std::vector<elicitation::CheckItem> checks;
    elicitation::EligibilityPolicy policy;
    struct Answer {
        nlohmann::json value;
        std::uint64_t sequence_number = 0;
    };
    std::map<std::string, Answer> answered;

    /// Item awaiting an answer; empty once the session is done.
    std::string current_item() const;
};

/// Everything the log implies: sessions in creation order.
struct SurveyState {
    std::map<std::string, SessionState> sessions;
    std::vector<std::string> order;
};

/// Folds one record into the state. Throws ValidationError when the record
/// does not apply (unknown session, wrong item, bad answer).
void apply_event(SurveyState& state, const EventRecord& record, const StudyConfig& config);
SurveyState replay(const std::vector<EventRecord>& records, const StudyConfig& config);

/// Complete sessions (done, with demographics) as analysis respondents, in
/// creation order. With `include_incomplete`, every session is returned.
std::vector<analysis::Respondent> to_respondents(const SurveyState& state, bool include_incomplete = false);

/// Survey administration over an event store. Every mutation is an appended
/// event; reads are derived from the replayed state only.
class SurveyService {
public:
    struct Created {
        std::string session_id;
        frontier::ArmId arm;
    };

    SurveyService(StudyConfig config, std::shared_ptr<EventStore> store);

    /// Uniform seed-determined arm unless one is requested (NotFoundError if
    /// it is not configured).
    Created create_session(std::optional<frontier::ArmId> requested = std::nullopt);
    nlohmann::json next_item(const std::string& session_id) const;
    /// Acknowledgment {session_id, item_id, sequence_number, duplicate, stage}.
    nlohmann::json submit(const std::string& session_id, const std::string& item_id, const nlohmann::json& answer);

    SurveyState snapshot() const;
    std::vector<analysis::Respondent> respondents(bool include_incomplete = false) const;
    const StudyConfig& config() const { return config_; }
    EventStore& store() { return *store_; }

private:
    const SessionState& find(const std::string& session_id) const;

    StudyConfig config_;
    std::shared_ptr<EventStore> store_;
    mutable std::shared_mutex mutex_;
    SurveyState state_;
};

}  // namespace fairalloc::platform

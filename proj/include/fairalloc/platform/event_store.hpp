#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace fairalloc::platform {

enum class EventKind { session_created, response_recorded, aux_recorded, demographics_recorded, session_finalized };

std::string_view to_string(EventKind k);
EventKind event_kind_from_string(std::string_view s);

struct EventRecord {
    std::uint64_t sequence_number = 0;
    std::string timestamp;
    EventKind kind = EventKind::session_created;
    nlohmann::json payload;

    nlohmann::json to_json() const;
    static EventRecord from_json(const nlohmann::json& j);
};

/// Append-only event log, one JSON record per line. Appends are serialised;
/// readers get copies. A torn final line (crash mid-write) is dropped on open
/// and overwritten by the next append.
class EventStore {
public:
    using Clock = std::function<std::string()>;

    /// In-memory log.
    EventStore();
    /// File-backed log, created if absent. Throws IoError on unreadable files
    /// and ValidationError on a corrupt record before the last line.
    explicit EventStore(const std::filesystem::path& path);

    EventRecord append(EventKind kind, nlohmann::json payload);

    std::vector<EventRecord> records() const;
    std::size_t size() const;
    const std::optional<std::filesystem::path>& path() const { return path_; }
    /// Timestamp source, UTC ISO-8601 by default.
    void set_clock(Clock clock);

private:
    mutable std::mutex mutex_;
    std::optional<std::filesystem::path> path_;
    std::ofstream out_;
    std::vector<EventRecord> records_;
    Clock clock_;
};

/// Parses log text. Complete lines must be valid records with strictly
/// increasing sequence numbers; an unterminated last line is ignored.
/// `valid_bytes` receives the length of the accepted prefix.
std::vector<EventRecord> parse_event_log(std::string_view text, std::size_t* valid_bytes = nullptr);

std::string utc_timestamp();

}  // namespace fairalloc::platform

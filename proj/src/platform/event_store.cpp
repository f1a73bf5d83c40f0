#include "fairalloc/platform/event_store.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <sstream>

#include "fairalloc/errors.hpp"

namespace fairalloc::platform {

using nlohmann::json;

namespace {

constexpr std::string_view kKindNames[] = {"session_created", "response_recorded", "aux_recorded",
                                           "demographics_recorded", "session_finalized"};

}  // namespace

std::string_view to_string(EventKind k) { return kKindNames[static_cast<std::size_t>(k)]; }

EventKind event_kind_from_string(std::string_view s) {
    for (std::size_t i = 0; i < std::size(kKindNames); ++i) {
        if (kKindNames[i] == s) return static_cast<EventKind>(i);
    }
    throw ValidationError("unknown event kind '" + std::string(s) + "'");
}

json EventRecord::to_json() const {
    nlohmann::ordered_json j;
    j["seq"] = sequence_number;
    j["ts"] = timestamp;
    j["kind"] = to_string(kind);
    j["payload"] = payload;
    return j;
}

EventRecord EventRecord::from_json(const json& j) {
    try {
        EventRecord r;
        r.sequence_number = j.at("seq").get<std::uint64_t>();
        r.timestamp = j.at("ts").get<std::string>();
        r.kind = event_kind_from_string(j.at("kind").get<std::string>());
        r.payload = j.at("payload");
        return r;
    } catch (const json::exception& ex) {
        throw ValidationError(std::string("malformed event record: ") + ex.what());
    }
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    const std::size_t n = std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
    char out[48];
    std::snprintf(out, sizeof out, "%.*s.%03dZ", static_cast<int>(n), buf, static_cast<int>(ms));
    return out;
}

std::vector<EventRecord> parse_event_log(std::string_view text, std::size_t* valid_bytes) {
    std::vector<EventRecord> out;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < text.size()) {
        const std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) break;
        ++line_no;
        const std::string_view line = text.substr(pos, eol - pos);
        if (!line.empty()) {
            EventRecord r;
            try {
                r = EventRecord::from_json(json::parse(line));
            } catch (const json::exception& ex) {
                throw ValidationError("event log line " + std::to_string(line_no) + ": " + ex.what());
            } catch (const ValidationError& ex) {
                throw ValidationError("event log line " + std::to_string(line_no) + ": " + ex.what());
            }
            if (!out.empty() && r.sequence_number <= out.back().sequence_number) {
                throw ValidationError("event log line " + std::to_string(line_no) +
                                      ": sequence numbers must increase");
            }
            out.push_back(std::move(r));
        }
        pos = eol + 1;
    }
    if (valid_bytes) *valid_bytes = pos;
    return out;
}

EventStore::EventStore() : clock_(utc_timestamp) {}

EventStore::EventStore(const std::filesystem::path& path) : path_(path), clock_(utc_timestamp) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (fs::exists(path, ec)) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw IoError("cannot read event log " + path.string());
        std::ostringstream buf;
        buf << in.rdbuf();
        const std::string text = buf.str();
        std::size_t valid = 0;
        try {
            records_ = parse_event_log(text, &valid);
        } catch (const ValidationError& ex) {
            throw ValidationError(path.string() + ": " + ex.what());
        }
        if (valid < text.size()) {
            fs::resize_file(path, valid, ec);
            if (ec) throw IoError("cannot drop torn record from " + path.string() + ": " + ec.message());
        }
    } else if (path.has_parent_path()) {
        fs::create_directories(path.parent_path(), ec);
    }
    out_.open(path, std::ios::binary | std::ios::app);
    if (!out_) throw IoError("cannot open event log " + path.string() + " for writing");
}

EventRecord EventStore::append(EventKind kind, json payload) {
    std::lock_guard lock(mutex_);
    EventRecord r;
    r.sequence_number = records_.empty() ? 1 : records_.back().sequence_number + 1;
    r.timestamp = clock_();
    r.kind = kind;
    r.payload = std::move(payload);
    if (out_.is_open()) {
        out_ << r.to_json().dump() << '\n';
        out_.flush();
        if (!out_) throw IoError("cannot append to event log " + path_->string());
    }
    records_.push_back(r);
    return r;
}

std::vector<EventRecord> EventStore::records() const {
    std::lock_guard lock(mutex_);
    return records_;
}

std::size_t EventStore::size() const {
    std::lock_guard lock(mutex_);
    return records_.size();
}

void EventStore::set_clock(Clock clock) {
    std::lock_guard lock(mutex_);
    clock_ = std::move(clock);
}

}  // namespace fairalloc::platform

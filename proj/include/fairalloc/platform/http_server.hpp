#pragma once

#include <memory>
#include <optional>
#include <string>

#include "fairalloc/analysis/poststratification.hpp"
#include "fairalloc/platform/service.hpp"

namespace fairalloc::platform {

/// JSON-over-HTTP front end for a SurveyService:
///   POST /api/sessions                          -> {session_id, arm}
///   GET  /api/sessions/{id}/next                -> item descriptor
///   POST /api/sessions/{id}/items/{item_id}     -> acknowledgment
///   GET  /api/arms                              -> arms with display-rounded frontiers
///   GET  /api/results/winrates?arm=&party=&poststratified=&stratum=
///   GET  /api/results/preferences?outcome=&subgroup=
/// Errors map to 400 (validation/domain), 404 (not found), 409 (conflict),
/// 422 (separated fit) and 500 (everything else), with body {"error", "message"}.
class HttpServer {
public:
    /// Results endpoints that poststratify need `cells`.
    HttpServer(SurveyService& service, std::optional<analysis::CellTable> cells);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds to `port` (0 picks a free one) and returns the bound port.
    int bind(const std::string& host, int port);
    /// Serves until stop(); call after bind().
    void run();
    void stop();
    void wait_until_ready() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace fairalloc::platform

#include "fairalloc/platform/http_server.hpp"

#include <httplib.h>

#include "fairalloc/errors.hpp"
#include "fairalloc/platform/pipeline.hpp"

namespace fairalloc::platform {

using nlohmann::json;

namespace {

void send(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const char* kind, const std::string& message) {
    send(res, status, {{"error", kind}, {"message", message}});
}

template <class F>
void guarded(httplib::Response& res, F&& body) {
    try {
        body();
    } catch (const json::exception& ex) {
        send_error(res, 400, "validation", std::string("malformed JSON: ") + ex.what());
    } catch (const ValidationError& ex) {
        send_error(res, 400, "validation", ex.what());
    } catch (const DomainError& ex) {
        send_error(res, 400, "domain", ex.what());
    } catch (const NotFoundError& ex) {
        send_error(res, 404, "not_found", ex.what());
    } catch (const ConflictError& ex) {
        send_error(res, 409, "conflict", ex.what());
    } catch (const SeparationError& ex) {
        send_error(res, 422, "separation", ex.what());
    } catch (const Error& ex) {
        send_error(res, 500, "internal", ex.what());
    }
}

std::optional<std::string> param(const httplib::Request& req, const char* name) {
    if (!req.has_param(name)) return std::nullopt;
    std::string v = req.get_param_value(name);
    if (v.empty()) return std::nullopt;
    return v;
}

bool flag(const std::optional<std::string>& v, bool fallback) {
    if (!v) return fallback;
    if (*v == "true" || *v == "1") return true;
    if (*v == "false" || *v == "0") return false;
    throw ValidationError("boolean parameter must be true or false");
}

}  // namespace

struct HttpServer::Impl {
    Impl(SurveyService& s, std::optional<analysis::CellTable> c) : service(s), cells(std::move(c)) {}

    SurveyService& service;
    std::optional<analysis::CellTable> cells;
    httplib::Server server;
    analysis::LogisticOptions fit = [] {
        analysis::LogisticOptions o;
        o.separation_ridge = PipelineOptions{}.separation_ridge;
        return o;
    }();

    const analysis::CellTable& require_cells() const {
        if (!cells) throw ConfigError("no cell-weight file configured for poststratification");
        return *cells;
    }

    std::vector<analysis::Respondent> annotated() const {
        auto rs = service.respondents();
        analysis::annotate(rs, service.config().arms);
        return rs;
    }

    void routes() {
        server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
        server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
            res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
            res.set_header("Access-Control-Allow-Headers", "Content-Type");
            res.status = 204;
        });

        server.Post("/api/sessions", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                std::optional<frontier::ArmId> arm;
                if (auto a = param(req, "arm")) arm = frontier::arm_from_string(*a);
                if (!req.body.empty()) {
                    const json body = json::parse(req.body);
                    if (body.contains("arm") && !body["arm"].is_null()) {
                        arm = frontier::arm_from_string(body["arm"].get<std::string>());
                    }
                }
                const auto created = service.create_session(arm);
                send(res, 201, {{"session_id", created.session_id}, {"arm", frontier::to_string(created.arm)}});
            });
        });

        server.Get("/api/sessions/:id/next", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] { send(res, 200, service.next_item(req.path_params.at("id"))); });
        });

        server.Post("/api/sessions/:id/items/:item", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                const json body = json::parse(req.body);
                if (!body.is_object() || !body.contains("answer")) {
                    throw ValidationError("body must be an object with an 'answer' field");
                }
                send(res, 200, service.submit(req.path_params.at("id"), req.path_params.at("item"), body["answer"]));
            });
        });

        server.Get("/api/arms", [this](const httplib::Request&, httplib::Response& res) {
            guarded(res, [&] {
                json arms = json::array();
                for (const auto& arm : service.config().arms) {
                    json a = frontier::to_json(arm);
                    const auto q = elicitation::trolley_for(arm.id);
                    a["trolley"] = {{"n_spanish", q.n_spanish}, {"n_english", q.n_english}};
                    a["frontier"] = frontier::to_json(frontier::build_frontier(arm), true)["points"];
                    arms.push_back(std::move(a));
                }
                send(res, 200, {{"arms", arms}});
            });
        });

        server.Get("/api/results/winrates", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                WinRateQuery q;
                q.arm = frontier::arm_from_string(param(req, "arm").value_or("high"));
                if (auto p = param(req, "party"); p && *p != "all") q.party = parse_category<Party>(*p);
                if (auto s = param(req, "stratum")) q.stratum = stratum_from_string(*s);
                q.poststratified = flag(param(req, "poststratified"), true);
                q.fit = fit;
                const auto& arm = service.config().arm(q.arm);
                const analysis::CellTable none = analysis::CellTable::uniform();
                const auto rs = annotated();
                send(res, 200, win_rate_table(rs, arm, q.poststratified ? require_cells() : none, q).to_json());
            });
        });

        server.Get("/api/results/preferences", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                const auto outcome = analysis::outcome_from_string(param(req, "outcome").value_or("prefers_efficient"));
                const auto group = Subgroup::parse(param(req, "subgroup").value_or("all"));
                const auto rs = annotated();
                send(res, 200, preference_table(rs, outcome, group, require_cells(), std::nullopt, fit).to_json());
            });
        });
    }
};

HttpServer::HttpServer(SurveyService& service, std::optional<analysis::CellTable> cells)
    : impl_(std::make_unique<Impl>(service, std::move(cells))) {
    impl_->routes();
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
    if (port == 0) {
        const int bound = impl_->server.bind_to_any_port(host);
        if (bound < 0) throw IoError("cannot bind " + host);
        return bound;
    }
    if (!impl_->server.bind_to_port(host, port)) throw IoError("cannot bind " + host + ":" + std::to_string(port));
    return port;
}

void HttpServer::run() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
    if (impl_) impl_->server.stop();
}

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace fairalloc::platform

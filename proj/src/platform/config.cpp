#include "fairalloc/platform/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include "fairalloc/errors.hpp"

namespace fairalloc::platform {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

void require_file(const fs::path& p, const char* what) {
    std::error_code ec;
    if (!fs::is_regular_file(p, ec)) throw ConfigError(std::string(what) + " not found: " + p.string());
}

}  // namespace

StudyConfig StudyConfig::from_json(const json& doc, const fs::path& base_dir) {
    static const std::set<std::string> known{"arms",     "arms_file",  "eligibility", "seed",
                                             "cell_weights", "event_log", "output_dir"};
    if (!doc.is_object()) throw ConfigError("study configuration must be a JSON object");
    for (const auto& [key, value] : doc.items()) {
        if (!known.count(key)) throw ConfigError("unknown study configuration field '" + key + "'");
    }
    StudyConfig c;
    try {
        if (doc.contains("arms") && doc.contains("arms_file")) {
            throw ConfigError("give either 'arms' or 'arms_file', not both");
        }
        if (doc.contains("arms")) {
            c.arms = frontier::arms_from_json(json{{"arms", doc["arms"]}});
        } else if (doc.contains("arms_file")) {
            const fs::path p = resolve(base_dir, doc["arms_file"].get<std::string>());
            require_file(p, "arms file");
            c.arms = frontier::load_arms(p.string());
        }
        if (doc.contains("eligibility")) {
            const json& e = doc["eligibility"];
            c.eligibility.max_comprehension_failures = e.value("max_comprehension_failures", 0);
            c.eligibility.max_attention_failures = e.value("max_attention_failures", 0);
            if (c.eligibility.max_comprehension_failures < 0 || c.eligibility.max_attention_failures < 0) {
                throw ConfigError("eligibility failure allowances must be non-negative");
            }
        }
        if (doc.contains("seed")) c.seed = doc["seed"].get<std::uint64_t>();
        if (doc.contains("cell_weights")) {
            c.cell_weights = resolve(base_dir, doc["cell_weights"].get<std::string>());
            require_file(c.cell_weights, "cell-weight file");
        }
        if (doc.contains("event_log")) c.event_log = resolve(base_dir, doc["event_log"].get<std::string>());
        if (doc.contains("output_dir")) c.output_dir = resolve(base_dir, doc["output_dir"].get<std::string>());
    } catch (const json::exception& ex) {
        throw ConfigError(std::string("bad study configuration: ") + ex.what());
    } catch (const ValidationError& ex) {
        throw ConfigError(std::string("bad arm configuration: ") + ex.what());
    }
    return c;
}

StudyConfig StudyConfig::load(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open study configuration: " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& ex) {
        throw ConfigError("cannot parse study configuration " + path.string() + ": " + ex.what());
    }
    try {
        return from_json(doc, path.parent_path());
    } catch (const ConfigError& ex) {
        throw ConfigError(path.string() + ": " + ex.what());
    }
}

json StudyConfig::to_json() const {
    json j = frontier::arms_to_json(arms);
    j["eligibility"] = {{"max_comprehension_failures", eligibility.max_comprehension_failures},
                        {"max_attention_failures", eligibility.max_attention_failures}};
    j["seed"] = seed;
    if (!cell_weights.empty()) j["cell_weights"] = cell_weights.string();
    if (!event_log.empty()) j["event_log"] = event_log.string();
    j["output_dir"] = output_dir.string();
    return j;
}

void StudyConfig::require_cell_weights() const {
    if (cell_weights.empty()) throw ConfigError("no cell-weight file configured");
    require_file(cell_weights, "cell-weight file");
}

std::optional<fs::path> resolve_config_path(const std::optional<std::string>& explicit_path) {
    if (explicit_path && !explicit_path->empty()) return fs::path(*explicit_path);
    if (const char* env = std::getenv(kConfigEnvVar); env && *env) return fs::path(env);
    return std::nullopt;
}

StudyConfig load_config(const std::optional<std::string>& explicit_path) {
    const auto path = resolve_config_path(explicit_path);
    return path ? StudyConfig::load(*path) : StudyConfig{};
}

}  // namespace fairalloc::platform

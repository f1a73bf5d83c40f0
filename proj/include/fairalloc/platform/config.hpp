#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fairalloc/elicitation.hpp"
#include "fairalloc/frontier.hpp"

namespace fairalloc::platform {

inline constexpr const char* kConfigEnvVar = "FAIRALLOC_CONFIG";

/// Study configuration document:
///   {"arms": [...] | "arms_file": "arms.json",
///    "eligibility": {"max_comprehension_failures": 0, "max_attention_failures": 0},
///    "seed": 1, "cell_weights": "cells.csv", "event_log": "events.jsonl", "output_dir": "out"}
/// Relative paths resolve against the document's directory.
struct StudyConfig {
    std::vector<frontier::TradeoffArm> arms = frontier::default_arms();
    elicitation::EligibilityPolicy eligibility;
    std::uint64_t seed = 20240601;
    std::filesystem::path cell_weights;
    /// Empty means an in-memory log.
    std::filesystem::path event_log;
    std::filesystem::path output_dir = "fairalloc-out";

    /// Throws ConfigError on missing referenced files, duplicate arms or bad fields.
    static StudyConfig from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
    static StudyConfig load(const std::filesystem::path& path);
    nlohmann::json to_json() const;

    const frontier::TradeoffArm& arm(frontier::ArmId id) const { return frontier::find_arm(arms, id); }
    /// ConfigError unless cell_weights names an existing file.
    void require_cell_weights() const;
};

/// Config file to use: the explicit path if given, else $FAIRALLOC_CONFIG,
/// else none (built-in defaults).
std::optional<std::filesystem::path> resolve_config_path(const std::optional<std::string>& explicit_path);

/// Loads the resolved config, or returns defaults when there is none.
StudyConfig load_config(const std::optional<std::string>& explicit_path);

}  // namespace fairalloc::platform

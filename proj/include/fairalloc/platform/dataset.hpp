#pragma once

#include <cstddef>
#include <filesystem>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fairalloc/analysis/respondent.hpp"
#include "fairalloc/platform/config.hpp"
#include "fairalloc/platform/event_store.hpp"
#include "fairalloc/platform/service.hpp"

namespace fairalloc::platform {

enum class ExportFormat { jsonl, csv };

ExportFormat export_format_from_string(std::string_view s);
std::string_view extension(ExportFormat f);

struct ExportOptions {
    ExportFormat format = ExportFormat::jsonl;
    bool include_incomplete = false;
};

struct ExportSummary {
    std::filesystem::path ballots_path;
    std::filesystem::path respondents_path;
    std::size_t ballots = 0;
    std::size_t respondents = 0;

    nlohmann::json to_json() const;
};

/// Writes ballots.<ext> and respondents.<ext> into `out_dir`. Records follow
/// session creation order, so the bytes depend only on the event log.
ExportSummary export_dataset(const SurveyState& state, const StudyConfig& config,
                             const std::filesystem::path& out_dir, const ExportOptions& options = {});
ExportSummary export_dataset(const EventStore& store, const StudyConfig& config,
                             const std::filesystem::path& out_dir, const ExportOptions& options = {});

/// Reads an exported dataset (jsonl preferred when both formats are present)
/// and joins ballots onto respondents. Modal options are left for annotate().
std::vector<analysis::Respondent> load_dataset(const std::filesystem::path& dir);

}  // namespace fairalloc::platform

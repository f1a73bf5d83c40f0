#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fairalloc/analysis.hpp"
#include "fairalloc/platform/config.hpp"

namespace fairalloc::platform {

/// Plot-ready table: header plus rows of scalars (null for missing values).
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<nlohmann::json>> rows;

    std::string to_csv() const;
    /// {"columns": [...], "rows": [[...], ...]}
    nlohmann::json to_json() const;
};

enum class Stratum { all, efficiency_seeking };

std::string_view to_string(Stratum s);
Stratum stratum_from_string(std::string_view s);

struct WinRateQuery {
    frontier::ArmId arm = frontier::ArmId::high;
    std::optional<Party> party;
    Stratum stratum = Stratum::all;
    bool poststratified = true;
    /// Percentile intervals when set; point estimates only otherwise.
    std::optional<analysis::BootstrapOptions> bootstrap;
    analysis::LogisticOptions fit;
};

/// One row per option of the arm's frontier: arm, party, stratum, option,
/// spanish_share, total_conversions, poststratified, ci_low, ci_high, raw,
/// respondents. Poststratified columns are null when not requested. Respondents must be annotated. The efficiency-seeking stratum
/// is the respondents whose modal option is the arm's efficiency point.
Table win_rate_table(std::span<const analysis::Respondent> respondents, const frontier::TradeoffArm& arm,
                     const analysis::CellTable& cells, const WinRateQuery& query);

/// Poststratified preference share per arm of the outcome present in the
/// data, with the raw share next to it. Columns: outcome, subgroup, arm,
/// poststratified, ci_low, ci_high, raw_share, respondents.
Table preference_table(std::span<const analysis::Respondent> respondents, analysis::Outcome outcome,
                       const Subgroup& subgroup, const analysis::CellTable& cells,
                       const std::optional<analysis::BootstrapOptions>& bootstrap,
                       const analysis::LogisticOptions& fit = {});

/// Raw shares for the pairwise, ideology and trolley measures by arm and
/// party. Columns: arm, party, measure, share, respondents.
Table comparison_table(std::span<const analysis::Respondent> respondents);

struct PipelineOptions {
    /// Both outcomes when empty.
    std::optional<analysis::Outcome> outcome;
    int bootstrap = 1000;
    /// Config seed when empty.
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;
    std::vector<std::string> subgroups{"all", "party=democrat", "party=republican"};
    /// Ridge applied only to fits that separate (small strata often do);
    /// zero turns separation into an error.
    double separation_ridge = 1e-3;
    /// Output directory override.
    std::optional<std::filesystem::path> output_dir;
};

struct PipelineReport {
    std::filesystem::path output_dir;
    std::vector<std::filesystem::path> files;
    std::vector<std::string> notes;
    std::size_t respondents = 0;

    nlohmann::json to_json() const;
};

/// Reads an exported dataset and writes the model reports, preference
/// shares, win-rate tables and raw comparisons into the output directory.
/// The cell-weight file is checked before anything else. Errors keep their
/// type and gain a "[stage]" prefix.
PipelineReport run_pipeline(const StudyConfig& config, const std::filesystem::path& dataset_dir,
                            const PipelineOptions& options = {});

}  // namespace fairalloc::platform

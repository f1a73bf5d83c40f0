#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "fairalloc/analysis/poststratification.hpp"
#include "fairalloc/analysis/respondent.hpp"

namespace fairalloc::analysis {

struct PoststratEstimate {
    double point = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    int n_bootstrap = 0;
    std::uint64_t seed = 0;
    int failed_resamples = 0;
};

using Estimator = std::function<double(std::span<const Respondent>)>;
/// Estimator over resampled row indices into a caller-owned sample.
using IndexEstimator = std::function<double(std::span<const std::size_t>)>;

struct BootstrapOptions {
    int replicates = 1000;
    double level = 0.95;
    std::uint64_t seed = 1;
    /// 0 = hardware concurrency.
    unsigned threads = 0;
};

/// Percentile bootstrap over respondents. Resample i uses a seed derived from
/// (seed, i, attempt); a resample whose estimator throws is redrawn, with at
/// most 5 * replicates attempts in total. The point estimate uses the full
/// sample and its failure propagates.
PoststratEstimate bootstrap_ci(std::span<const Respondent> respondents, const Estimator& estimator,
                               const BootstrapOptions& options = {});

/// Same resampling scheme over indices 0..n-1, for callers that keep their
/// own rows and only need the drawn positions.
PoststratEstimate bootstrap_indices(std::size_t n, const IndexEstimator& estimator,
                                    const BootstrapOptions& options = {});

/// Order-statistic percentile interval used by bootstrap_ci.
std::pair<double, double> percentile_interval(std::vector<double> values, double level);

/// build_design_matrix -> fit_logistic -> poststratify at `arm`.
Estimator preference_estimator(Outcome outcome, const CellTable& cells, Subgroup subgroup, ArmId arm,
                               LogisticOptions fit = {}, CellRepresentatives reps = {});

/// Resamples rows of an already encoded design: fit (warm-started at the
/// full-sample estimate) then poststratify. A resample whose outcome is all
/// successes (failures) yields exactly 1 (0) when `degenerate_is_constant`,
/// and is rejected otherwise.
IndexEstimator design_estimator(DesignMatrix design, Poststratifier post, LogisticOptions fit = {},
                                bool degenerate_is_constant = false);

/// Per-option binomial model on wins out of appearances, poststratified over
/// `subgroup`. Respondents must belong to one arm and have complete ballots.
/// A single-class option (always or never winning) is reported as exactly 1 or 0.
double poststratified_win_rate(std::span<const Respondent> respondents, int option, int option_count,
                               const CellTable& cells, const Subgroup& subgroup,
                               const LogisticOptions& fit = {}, const CellRepresentatives& reps = {});

/// Six (option_count) estimates for one arm, each with a bootstrap interval.
std::vector<PoststratEstimate> poststratified_win_rates(std::span<const Respondent> respondents,
                                                        const CellTable& cells, ArmId arm,
                                                        const Subgroup& subgroup, int option_count,
                                                        const BootstrapOptions& boot,
                                                        const LogisticOptions& fit = {},
                                                        const CellRepresentatives& reps = {});

}  // namespace fairalloc::analysis

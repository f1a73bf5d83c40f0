#include "fairalloc/analysis/bootstrap.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <thread>

#include "fairalloc/errors.hpp"
#include "fairalloc/random.hpp"

namespace fairalloc::analysis {

std::pair<double, double> percentile_interval(std::vector<double> values, double level) {
    if (values.empty()) throw ValidationError("percentile interval needs at least one value");
    if (!(level > 0.0 && level < 1.0)) throw DomainError("confidence level must lie in (0,1)");
    std::sort(values.begin(), values.end());
    const auto b = static_cast<double>(values.size());
    const double alpha = 1.0 - level;
    auto lo = static_cast<std::size_t>(std::floor((b + 1.0) * alpha / 2.0));
    lo = std::clamp<std::size_t>(lo, 1, values.size());
    const std::size_t hi = values.size() + 1 - lo;
    return {values[lo - 1], values[hi - 1]};
}

PoststratEstimate bootstrap_indices(std::size_t n, const IndexEstimator& estimator,
                                    const BootstrapOptions& options) {
    if (n == 0) throw ValidationError("cannot bootstrap an empty sample");
    if (options.replicates < 1) throw ValidationError("bootstrap needs at least one replicate");

    std::vector<std::size_t> identity(n);
    std::iota(identity.begin(), identity.end(), std::size_t{0});

    PoststratEstimate out;
    out.point = estimator(identity);
    out.n_bootstrap = options.replicates;
    out.seed = options.seed;

    const auto replicates = static_cast<std::size_t>(options.replicates);
    const long max_attempts = 5L * options.replicates;
    std::vector<double> values(replicates);
    std::atomic<std::size_t> next{0};
    std::atomic<long> attempts{0};
    std::atomic<int> failures{0};
    std::atomic<bool> abort{false};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto worker = [&] {
        std::vector<std::size_t> draw(n);
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        for (std::size_t i; !abort && (i = next.fetch_add(1)) < replicates;) {
            for (std::uint64_t attempt = 0;; ++attempt) {
                if (attempts.fetch_add(1) >= max_attempts) {
                    std::lock_guard lock(error_mutex);
                    if (!error) {
                        error = std::make_exception_ptr(ValidationError(
                            "bootstrap gave up: too many resamples failed to produce an estimate"));
                    }
                    abort = true;
                    return;
                }
                Rng rng = make_rng(derive_seed(options.seed, i, attempt));
                for (auto& d : draw) d = pick(rng);
                try {
                    values[i] = estimator(draw);
                    break;
                } catch (const Error&) {
                    ++failures;
                }
            }
        }
    };

    unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, replicates));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    if (error) std::rethrow_exception(error);

    out.failed_resamples = failures;
    std::tie(out.ci_low, out.ci_high) = percentile_interval(std::move(values), options.level);
    return out;
}

PoststratEstimate bootstrap_ci(std::span<const Respondent> respondents, const Estimator& estimator,
                               const BootstrapOptions& options) {
    return bootstrap_indices(
        respondents.size(),
        [&](std::span<const std::size_t> idx) {
            std::vector<Respondent> sample;
            sample.reserve(idx.size());
            for (std::size_t i : idx) sample.push_back(respondents[i]);
            return estimator(sample);
        },
        options);
}

Estimator preference_estimator(Outcome outcome, const CellTable& cells, Subgroup subgroup, ArmId arm,
                               LogisticOptions fit, CellRepresentatives reps) {
    // Resamples usually share one column set; its cell encodings are built once.
    struct Cache {
        std::mutex mutex;
        std::map<std::vector<std::string>, std::shared_ptr<const Poststratifier>> by_columns;
    };
    auto cache = std::make_shared<Cache>();
    return [outcome, &cells, subgroup, arm, fit, reps, cache](std::span<const Respondent> sample) {
        const DesignMatrix design = build_design_matrix(sample, outcome);
        const FittedModel model = fit_logistic(design, fit);
        if (!model.converged) throw ValidationError("logistic fit did not converge");
        std::shared_ptr<const Poststratifier> post;
        {
            std::lock_guard lock(cache->mutex);
            auto& slot = cache->by_columns[model.columns];
            if (!slot) slot = std::make_shared<const Poststratifier>(model.columns, cells, subgroup, arm, reps);
            post = slot;
        }
        return (*post)(model);
    };
}

IndexEstimator design_estimator(DesignMatrix design, Poststratifier post, LogisticOptions fit,
                                bool degenerate_is_constant) {
    if (design.columns != post.columns()) throw ValidationError("design and poststratifier columns differ");
    const double succ = design.successes.sum();
    if (fit.initial.size() == 0 && succ > 0.0 && succ < design.trials.sum()) {
        try {
            fit.initial = fit_logistic(design, fit).coefficients;
        } catch (const Error&) {
            // The full-sample failure resurfaces when the estimator is evaluated.
        }
    }
    struct State {
        DesignMatrix design;
        Poststratifier post;
        LogisticOptions fit;
    };
    auto state = std::make_shared<const State>(State{std::move(design), std::move(post), std::move(fit)});
    return [state, degenerate_is_constant](std::span<const std::size_t> rows) {
        // A row drawn c times enters once with its successes and trials scaled by c.
        std::vector<std::size_t> counts(static_cast<std::size_t>(state->design.rows()), 0);
        for (std::size_t r : rows) {
            if (r >= counts.size()) throw DomainError("row index out of range");
            ++counts[r];
        }
        std::vector<std::size_t> distinct;
        for (std::size_t r = 0; r < counts.size(); ++r) {
            if (counts[r] > 0) distinct.push_back(r);
        }
        DesignMatrix sample = select_rows(state->design, distinct);
        for (std::size_t k = 0; k < distinct.size(); ++k) {
            const auto c = static_cast<double>(counts[distinct[k]]);
            sample.successes(static_cast<Eigen::Index>(k)) *= c;
            sample.trials(static_cast<Eigen::Index>(k)) *= c;
        }
        const double wins = sample.successes.sum();
        if (degenerate_is_constant && wins == 0.0) return 0.0;
        if (degenerate_is_constant && wins == sample.trials.sum()) return 1.0;
        const FittedModel model = fit_logistic(sample, state->fit);
        if (!model.converged) throw ValidationError("logistic fit did not converge");
        return state->post(model);
    };
}

namespace {

struct OptionCounts {
    std::vector<double> wins;
    std::vector<double> trials;
};

OptionCounts count_option(std::span<const Respondent> respondents, int option) {
    OptionCounts c;
    c.wins.reserve(respondents.size());
    c.trials.reserve(respondents.size());
    for (const auto& r : respondents) {
        double w = 0.0;
        double t = 0.0;
        for (const auto& b : r.ballots) {
            if (!b.pair.contains(option)) continue;
            t += 1.0;
            if (b.choice == option) w += 1.0;
        }
        c.wins.push_back(w);
        c.trials.push_back(t);
    }
    return c;
}

double win_rate(std::span<const Respondent> respondents, int option, int option_count,
                const Poststratifier& post, const LogisticOptions& fit) {
    if (option < 0 || option >= option_count) throw DomainError("option index out of range");
    if (respondents.empty()) throw ValidationError("no respondents for win-rate estimation");
    const ArmId arm = respondents.front().arm;
    const auto expected = static_cast<std::size_t>(option_count * (option_count - 1) / 2);
    for (const auto& r : respondents) {
        if (r.arm != arm) throw ValidationError("win-rate respondents must come from a single arm");
        if (r.ballots.size() != expected) {
            throw ValidationError("respondent " + r.id + " does not have a complete ballot set");
        }
    }
    const OptionCounts c = count_option(respondents, option);
    const double wins = std::accumulate(c.wins.begin(), c.wins.end(), 0.0);
    const double trials = std::accumulate(c.trials.begin(), c.trials.end(), 0.0);
    if (wins == 0.0) return 0.0;
    if (wins == trials) return 1.0;
    const DesignMatrix design = build_covariate_design(respondents, c.wins, c.trials);
    const FittedModel model = fit_logistic(design, fit);
    if (!model.converged) throw ValidationError("win-rate fit did not converge");
    return post(model);
}

std::vector<std::string> win_rate_columns() {
    std::vector<std::string> cols = covariate_columns();
    cols.emplace_back(kConstant);
    return cols;
}

}  // namespace

double poststratified_win_rate(std::span<const Respondent> respondents, int option, int option_count,
                               const CellTable& cells, const Subgroup& subgroup, const LogisticOptions& fit,
                               const CellRepresentatives& reps) {
    const Poststratifier post(win_rate_columns(), cells, subgroup, std::nullopt, reps);
    return win_rate(respondents, option, option_count, post, fit);
}

std::vector<PoststratEstimate> poststratified_win_rates(std::span<const Respondent> respondents,
                                                        const CellTable& cells, ArmId arm,
                                                        const Subgroup& subgroup, int option_count,
                                                        const BootstrapOptions& boot, const LogisticOptions& fit,
                                                        const CellRepresentatives& reps) {
    const auto expected = static_cast<std::size_t>(option_count * (option_count - 1) / 2);
    std::vector<Respondent> pool;
    for (const auto& r : respondents) {
        if (r.arm == arm && r.eligible && r.ballots.size() == expected) pool.push_back(r);
    }
    if (pool.empty()) {
        throw ValidationError("no complete respondents on arm " + std::string(frontier::to_string(arm)));
    }
    const Poststratifier post(win_rate_columns(), cells, subgroup, std::nullopt, reps);
    std::vector<PoststratEstimate> out;
    out.reserve(static_cast<std::size_t>(option_count));
    for (int o = 0; o < option_count; ++o) {
        const OptionCounts c = count_option(pool, o);
        BootstrapOptions opt = boot;
        opt.seed = derive_seed(boot.seed, static_cast<std::uint64_t>(o));
        out.push_back(bootstrap_indices(
            pool.size(), design_estimator(build_covariate_design(pool, c.wins, c.trials), post, fit, true), opt));
    }
    return out;
}

}  // namespace fairalloc::analysis

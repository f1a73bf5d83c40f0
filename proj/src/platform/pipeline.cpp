#include "fairalloc/platform/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "fairalloc/errors.hpp"
#include "fairalloc/platform/dataset.hpp"
#include "fairalloc/random.hpp"

namespace fairalloc::platform {

namespace fs = std::filesystem;
using analysis::Respondent;
using frontier::ArmId;
using nlohmann::json;

namespace {

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::size_t ballot_count(const frontier::Frontier& f) { return f.size() * (f.size() - 1) / 2; }

bool has_arm(std::span<const Respondent> rs, ArmId arm) {
    return std::any_of(rs.begin(), rs.end(), [&](const Respondent& r) { return r.arm == arm && r.eligible; });
}

std::string party_label(const std::optional<Party>& p) { return p ? std::string(name_of(*p)) : "all"; }

template <class E>
[[noreturn]] void relabel(const std::string& stage, const E& ex) {
    throw E("[" + stage + "] " + ex.what());
}

template <class F>
auto staged(const std::string& stage, F&& body) -> decltype(body()) {
    try {
        return body();
    } catch (const ConfigError& ex) {
        relabel(stage, ex);
    } catch (const SeparationError& ex) {
        relabel(stage, ex);
    } catch (const ValidationError& ex) {
        relabel(stage, ex);
    } catch (const DomainError& ex) {
        relabel(stage, ex);
    } catch (const NotFoundError& ex) {
        relabel(stage, ex);
    } catch (const ConflictError& ex) {
        relabel(stage, ex);
    } catch (const IoError& ex) {
        relabel(stage, ex);
    } catch (const Error& ex) {
        relabel(stage, ex);
    }
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    out.close();
    if (!out) throw IoError("cannot write " + path.string());
}

void append_rows(Table& into, const Table& from) {
    if (into.columns.empty()) into.columns = from.columns;
    into.rows.insert(into.rows.end(), from.rows.begin(), from.rows.end());
}

std::string outcome_title(analysis::Outcome o) {
    return o == analysis::Outcome::prefers_efficient ? "Prefers the efficiency point"
                                                     : "Prefers the most English conversions";
}

}  // namespace

std::string Table::to_csv() const {
    std::string out;
    for (std::size_t k = 0; k < columns.size(); ++k) out += (k ? "," : "") + columns[k];
    out += '\n';
    for (const auto& row : rows) {
        for (std::size_t k = 0; k < row.size(); ++k) {
            if (k) out += ',';
            if (row[k].is_string()) {
                out += row[k].get<std::string>();
            } else if (!row[k].is_null()) {
                out += row[k].dump();
            }
        }
        out += '\n';
    }
    return out;
}

json Table::to_json() const { return {{"columns", columns}, {"rows", rows}}; }

std::string_view to_string(Stratum s) { return s == Stratum::all ? "all" : "efficiency_seeking"; }

Stratum stratum_from_string(std::string_view s) {
    if (s == "all") return Stratum::all;
    if (s == "efficiency_seeking") return Stratum::efficiency_seeking;
    throw ValidationError("stratum must be 'all' or 'efficiency_seeking'");
}

Table win_rate_table(std::span<const Respondent> respondents, const frontier::TradeoffArm& arm,
                     const analysis::CellTable& cells, const WinRateQuery& query) {
    const auto f = frontier::build_frontier(arm);
    const auto n_options = static_cast<int>(f.size());
    const auto efficient = static_cast<int>(frontier::efficiency_index(f));

    std::vector<Respondent> pool;
    for (const auto& r : respondents) {
        if (r.arm != arm.id || !r.eligible || r.ballots.size() != ballot_count(f)) continue;
        if (query.stratum == Stratum::efficiency_seeking && r.modal_option != efficient) continue;
        pool.push_back(r);
    }
    std::vector<elicitation::PairwiseBallot> raw_ballots;
    std::size_t raw_n = 0;
    for (const auto& r : pool) {
        if (query.party && r.cell().party != *query.party) continue;
        raw_ballots.insert(raw_ballots.end(), r.ballots.begin(), r.ballots.end());
        ++raw_n;
    }
    const auto raw = elicitation::win_rates(raw_ballots, n_options);

    std::vector<analysis::PoststratEstimate> post(static_cast<std::size_t>(n_options));
    for (auto& e : post) e.point = e.ci_low = e.ci_high = std::nan("");
    if (query.poststratified && !pool.empty()) {
        Subgroup group;
        group.party = query.party;
        if (query.bootstrap) {
            post = analysis::poststratified_win_rates(pool, cells, arm.id, group, n_options, *query.bootstrap,
                                                      query.fit);
        } else {
            for (int o = 0; o < n_options; ++o) {
                post[static_cast<std::size_t>(o)].point =
                    analysis::poststratified_win_rate(pool, o, n_options, cells, group, query.fit);
            }
        }
    }

    Table t;
    t.columns = {"arm",           "party",   "stratum", "option", "spanish_share", "total_conversions",
                 "poststratified", "ci_low", "ci_high", "raw",    "respondents"};
    for (int o = 0; o < n_options; ++o) {
        const auto i = static_cast<std::size_t>(o);
        t.rows.push_back(std::vector<json>{std::string(frontier::to_string(arm.id)), party_label(query.party),
                          std::string(to_string(query.stratum)), o, number_or_null(f[i].spanish_share),
                          f[i].total_conversions, number_or_null(post[i].point), number_or_null(post[i].ci_low),
                          number_or_null(post[i].ci_high), raw[i] ? json(*raw[i]) : json(nullptr), raw_n});
    }
    return t;
}

Table preference_table(std::span<const Respondent> respondents, analysis::Outcome outcome, const Subgroup& subgroup,
                       const analysis::CellTable& cells, const std::optional<analysis::BootstrapOptions>& bootstrap,
                       const analysis::LogisticOptions& fit) {
    const auto arms = analysis::outcome_arms(outcome);
    std::vector<Respondent> pool;
    for (const auto& r : respondents) {
        if (r.eligible && r.modal_option && std::find(arms.begin(), arms.end(), r.arm) != arms.end()) {
            pool.push_back(r);
        }
    }
    Table t;
    t.columns = {"outcome", "subgroup", "arm", "poststratified", "ci_low", "ci_high", "raw_share", "respondents"};
    if (pool.empty()) return t;
    for (std::size_t k = 0; k < arms.size(); ++k) {
        const ArmId arm = arms[k];
        if (!has_arm(pool, arm)) continue;
        const auto estimator = analysis::preference_estimator(outcome, cells, subgroup, arm, fit);
        analysis::PoststratEstimate e;
        if (bootstrap) {
            auto opt = *bootstrap;
            opt.seed = derive_seed(bootstrap->seed, k);
            e = analysis::bootstrap_ci(pool, estimator, opt);
        } else {
            e.point = estimator(pool);
            e.ci_low = e.ci_high = std::nan("");
        }
        const ArmId only[] = {arm};
        const auto raw = analysis::raw_preference_count(pool, subgroup, analysis::Selector::pairwise, only);
        t.rows.push_back(std::vector<json>{std::string(analysis::to_string(outcome)), subgroup.empty() ? "all" : subgroup.to_string(),
                          std::string(frontier::to_string(arm)), e.point, number_or_null(e.ci_low),
                          number_or_null(e.ci_high),
                          raw.matched ? json(static_cast<double>(raw.flagged) / static_cast<double>(raw.matched))
                                      : json(nullptr),
                          raw.matched});
    }
    return t;
}

Table comparison_table(std::span<const Respondent> respondents) {
    Table t;
    t.columns = {"arm", "party", "measure", "share", "respondents"};
    const std::optional<Party> parties[] = {std::nullopt, Party::democrat, Party::republican};
    const std::pair<analysis::Selector, const char*> measures[] = {{analysis::Selector::pairwise, "pairwise"},
                                                                    {analysis::Selector::ideology, "ideology"},
                                                                    {analysis::Selector::trolley, "trolley"}};
    for (ArmId arm : frontier::kAllArms) {
        if (!has_arm(respondents, arm)) continue;
        const ArmId only[] = {arm};
        for (const auto& party : parties) {
            Subgroup g;
            g.party = party;
            for (const auto& [selector, name] : measures) {
                const auto c = analysis::raw_preference_count(respondents, g, selector, only);
                t.rows.push_back(std::vector<json>{std::string(frontier::to_string(arm)), party_label(party), name,
                                  c.matched ? json(static_cast<double>(c.flagged) / static_cast<double>(c.matched))
                                            : json(nullptr),
                                  c.matched});
            }
        }
    }
    return t;
}

json PipelineReport::to_json() const {
    json files_json = json::array();
    for (const auto& f : files) files_json.push_back(f.string());
    return {{"output_dir", output_dir.string()}, {"files", files_json}, {"notes", notes},
            {"respondents", respondents}};
}

PipelineReport run_pipeline(const StudyConfig& config, const fs::path& dataset_dir, const PipelineOptions& options) {
    PipelineReport report;
    const analysis::CellTable cells = staged("config", [&] {
        config.require_cell_weights();
        if (options.bootstrap < 0) throw ConfigError("bootstrap replicates must be non-negative");
        std::vector<std::string> warnings;
        auto table = analysis::CellTable::load(config.cell_weights.string(), &warnings);
        report.notes.insert(report.notes.end(), warnings.begin(), warnings.end());
        return table;
    });
    std::vector<Subgroup> subgroups = staged("config", [&] {
        std::vector<Subgroup> out;
        for (const auto& s : options.subgroups) out.push_back(Subgroup::parse(s));
        return out;
    });

    std::vector<Respondent> respondents = staged("load", [&] {
        auto rs = load_dataset(dataset_dir);
        analysis::annotate(rs, config.arms);
        return rs;
    });
    report.respondents = respondents.size();

    report.output_dir = options.output_dir.value_or(config.output_dir);
    staged("output", [&] {
        std::error_code ec;
        fs::create_directories(report.output_dir, ec);
        if (ec) throw IoError("cannot create " + report.output_dir.string() + ": " + ec.message());
    });
    auto emit = [&](const std::string& name, const std::string& text) {
        const fs::path p = report.output_dir / name;
        staged("output", [&] { write_text(p, text); });
        report.files.push_back(p);
    };

    const std::uint64_t seed = options.seed.value_or(config.seed);
    analysis::LogisticOptions fit;
    fit.separation_ridge = options.separation_ridge;
    auto boot_for = [&](std::uint64_t stream) -> std::optional<analysis::BootstrapOptions> {
        if (options.bootstrap == 0) return std::nullopt;
        analysis::BootstrapOptions b;
        b.replicates = options.bootstrap;
        b.seed = derive_seed(seed, stream);
        b.threads = options.threads;
        return b;
    };

    std::vector<analysis::Outcome> outcomes;
    if (options.outcome) {
        outcomes.push_back(*options.outcome);
    } else {
        outcomes = {analysis::Outcome::prefers_efficient, analysis::Outcome::prefers_max_english};
    }

    Table preferences;
    std::uint64_t stream = 0;
    for (const auto outcome : outcomes) {
        const std::string name(analysis::to_string(outcome));
        const auto arms = analysis::outcome_arms(outcome);
        if (std::none_of(arms.begin(), arms.end(), [&](ArmId a) { return has_arm(respondents, a); })) {
            report.notes.push_back(name + ": no respondents on its arms; skipped");
            continue;
        }
        staged("model", [&] {
            std::vector<std::string> warnings;
            const auto design = analysis::build_design_matrix(respondents, outcome, {}, &warnings);
            const auto model = analysis::fit_logistic(design, fit);
            emit("model_" + name + ".txt", analysis::model_report(model, outcome_title(outcome)));
        });
        for (const auto& group : subgroups) {
            const Table t = staged("preferences", [&] {
                return preference_table(respondents, outcome, group, cells, boot_for(++stream), fit);
            });
            append_rows(preferences, t);
        }
    }
    if (!preferences.columns.empty()) emit("preferences.csv", preferences.to_csv());

    Table winrates;
    const std::optional<Party> parties[] = {std::nullopt, Party::democrat, Party::republican};
    for (const auto& arm : config.arms) {
        if (!has_arm(respondents, arm.id)) continue;
        for (const auto& party : parties) {
            for (const Stratum stratum : {Stratum::all, Stratum::efficiency_seeking}) {
                WinRateQuery q;
                q.arm = arm.id;
                q.party = party;
                q.stratum = stratum;
                q.bootstrap = boot_for(1000 + ++stream);
                q.fit = fit;
                append_rows(winrates, staged("winrates", [&] { return win_rate_table(respondents, arm, cells, q); }));
            }
        }
    }
    if (!winrates.columns.empty()) emit("winrates.csv", winrates.to_csv());

    emit("comparisons.csv", staged("comparisons", [&] { return comparison_table(respondents); }).to_csv());

    const std::string summary = report.to_json().dump(2) + "\n";
    emit("summary.json", summary);
    return report;
}

}  // namespace fairalloc::platform

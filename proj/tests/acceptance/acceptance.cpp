// Runs every primary acceptance criterion and prints one PASS/FAIL line each.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fairalloc/analysis.hpp"
#include "fairalloc/elicitation.hpp"
#include "fairalloc/frontier.hpp"
#include "fairalloc/platform.hpp"
#include "fairalloc/simulator.hpp"
#include "survey.hpp"
#include "synthetic.hpp"

using namespace fairalloc;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

struct Criterion {
    std::string name;
    double limit_seconds;
    std::function<Outcome()> run;
};

std::string fmt(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

double relative_error(double got, double want) { return std::abs(got - want) / std::abs(want); }

Outcome frontier_arithmetic() {
    Outcome o;
    const auto p = frontier::interpolate(frontier::default_high_arm().endpoints, 0.2);
    o.require(p.expected.english == 0.8 * 36.0 + 0.2 * 7.0, "english " + fmt(p.expected.english, 17));
    o.require(p.expected.spanish == 0.8 * 3.0 + 0.2 * 13.0, "spanish " + fmt(p.expected.spanish, 17));
    o.require(std::abs(p.expected.english - 30.2) < 1e-12 && std::abs(p.expected.spanish - 5.0) < 1e-12,
              "not (30.2, 5.0)");
    o.require(frontier::display_round(p.expected.english) == 30 && frontier::display_round(p.expected.spanish) == 5,
              "display rounding is not (30, 5)");
    o.detail = o.pass ? "(30.2, 5.0) -> (30, 5)" : o.detail;
    return o;
}

Outcome efficiency_parity() {
    Outcome o;
    const auto f = frontier::build_frontier(frontier::default_high_arm());
    const double eff = frontier::efficiency_point(f).spanish_share;
    const auto par = frontier::parity_point(f, 0.23);
    o.require(frontier::efficiency_index(f) == 0, "efficiency index");
    o.require(std::abs(eff - 3.0 / 39.0) < 1e-12, "efficiency share " + fmt(eff));
    o.require(frontier::display_round(100.0 * eff) == 8, "efficiency share does not display as 8%");
    o.require(frontier::parity_index(f, 0.23) == 2 && std::abs(par.spanish_budget_share - 0.4) < 1e-12,
              "parity option is not the 0.4 point");
    o.require(std::abs(par.spanish_share - 7.0 / 31.4) < 1e-12, "parity share " + fmt(par.spanish_share));
    o.require(std::abs(par.spanish_share - 0.23) <= 0.01, "parity share too far from 0.23");
    if (o.pass) o.detail = "efficiency share " + fmt(eff) + ", parity share " + fmt(par.spanish_share);
    return o;
}

std::set<int> block_set(const std::array<simulator::TimeBlock, 3>& blocks) {
    std::set<int> s;
    for (const auto& b : blocks) s.insert(b.index());
    return s;
}

Outcome scheduler() {
    Outcome o;
    const auto plan = simulator::build_schedule(simulator::parse_date("2020-09-28"), 28, 20240601);
    o.require(plan.size() == 28, "plan length");
    const std::set<int> even{0, 2, 4}, odd{1, 3, 5};
    int overlaps = 0, bad_counts = 0, bad_alternation = 0;
    for (std::size_t d = 0; d < plan.size(); ++d) {
        const auto en = block_set(plan[d].english_blocks);
        const auto sp = block_set(plan[d].spanish_blocks);
        if (en.size() != 3 || sp.size() != 3) ++bad_counts;
        for (int b : en) overlaps += static_cast<int>(sp.count(b));
        if (!((en == even && sp == odd) || (en == odd && sp == even))) ++bad_alternation;
        if (d > 0 && en != block_set(plan[d - 1].spanish_blocks)) ++bad_alternation;
    }
    o.require(overlaps == 0, std::to_string(overlaps) + " overlaps");
    o.require(bad_counts == 0, std::to_string(bad_counts) + " days without 3 blocks each");
    o.require(bad_alternation == 0, std::to_string(bad_alternation) + " alternation breaks");
    if (o.pass) o.detail = "28 days, 0 overlaps, alternation holds";
    return o;
}

Outcome win_rate_identity() {
    Outcome o;
    Rng rng = make_rng(1001);
    std::bernoulli_distribution coin(0.5);
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
        std::vector<elicitation::PairwiseBallot> ballots;
        for (const auto& p : elicitation::enumerate_pairs(6)) {
            ballots.push_back({"r", frontier::ArmId::high, p, coin(rng) ? p.first : p.second, 0});
        }
        double sum = 0.0;
        for (const auto& r : elicitation::win_rates(ballots, 6)) sum += r.value();
        worst = std::max(worst, std::abs(sum / 6.0 - 0.5));
    }
    o.require(worst <= 1e-12, "max deviation " + fmt(worst));
    if (o.pass) o.detail = "1000 sets, max |mean - 0.5| = " + fmt(worst);
    return o;
}

Outcome modal_preference() {
    Outcome o;
    const auto f = frontier::build_frontier(frontier::default_high_arm());
    std::array<int, 6> order{0, 1, 2, 3, 4, 5};
    int checked = 0, wrong = 0;
    do {
        std::array<int, 6> rank{};
        for (int i = 0; i < 6; ++i) rank[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = i;
        std::vector<elicitation::PairwiseBallot> ballots;
        for (const auto& p : elicitation::enumerate_pairs(6)) {
            const int w = rank[static_cast<std::size_t>(p.first)] < rank[static_cast<std::size_t>(p.second)]
                              ? p.first
                              : p.second;
            ballots.push_back({"r", frontier::ArmId::high, p, w, 0});
        }
        if (elicitation::modal_preference(ballots, f) != order[0]) ++wrong;
        ++checked;
    } while (std::next_permutation(order.begin(), order.end()));
    o.require(checked == 720, std::to_string(checked) + " orderings");
    o.require(wrong == 0, std::to_string(wrong) + " orderings disagree");

    // 2 > 4 > 5 > 2, each beating 0, 1 and 3: all three win four comparisons.
    std::vector<elicitation::PairwiseBallot> cycle;
    const std::set<int> top{2, 4, 5};
    for (const auto& p : elicitation::enumerate_pairs(6)) {
        const bool a = top.count(p.first) > 0, b = top.count(p.second) > 0;
        int w = p.first;
        if (a != b) w = a ? p.first : p.second;
        else if (a) w = p == elicitation::OptionPair{2, 4} ? 2 : p == elicitation::OptionPair{4, 5} ? 4 : 5;
        cycle.push_back({"r", frontier::ArmId::high, p, w, 0});
    }
    const int tie = elicitation::modal_preference(cycle, f);
    o.require(tie == 2, "3-cycle resolved to " + std::to_string(tie));
    if (o.pass) o.detail = "720/720 orderings, 3-cycle {2,4,5} -> 2";
    return o;
}

Outcome logistic_recovery() {
    Outcome o;
    Rng draw = make_rng(2024);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> beta(testing::kGenericCovariates + 1);
    for (auto& b : beta) b = u(draw);
    const auto dm = testing::generic_design(20000, beta, 2025);
    const auto m = analysis::fit_logistic(dm);
    o.require(m.converged, "fit did not converge");
    double worst = 0.0;
    for (std::size_t j = 0; j < beta.size(); ++j) {
        worst = std::max(worst, std::abs(m.coefficients(static_cast<Eigen::Index>(j)) - beta[j]));
    }
    o.require(worst <= 0.1, "max coefficient error " + fmt(worst));

    double worst_grad = 0.0;
    const auto small = testing::generic_design(2000, beta, 2026);
    for (int t = 0; t < 20; ++t) {
        Eigen::VectorXd b(small.cols());
        for (Eigen::Index j = 0; j < b.size(); ++j) b(j) = u(draw);
        const Eigen::VectorXd g = analysis::log_likelihood_gradient(small, b);
        for (Eigen::Index j = 0; j < b.size(); ++j) {
            const double h = 1e-5;
            Eigen::VectorXd up = b, down = b;
            up(j) += h;
            down(j) -= h;
            const double fd =
                (analysis::log_likelihood(small, up) - analysis::log_likelihood(small, down)) / (2.0 * h);
            worst_grad = std::max(worst_grad, std::abs(fd - g(j)) / std::max(1.0, std::abs(g(j))));
        }
    }
    o.require(worst_grad <= 1e-6, "gradient relative error " + fmt(worst_grad));
    if (o.pass) o.detail = "max |b - b*| = " + fmt(worst) + ", max gradient rel. error = " + fmt(worst_grad);
    return o;
}

Outcome poststratification() {
    Outcome o;
    o.require(kCellCount == 3840 && all_cells().size() == 3840, "cell count");

    const auto truth = testing::demographic_truth();
    const auto table = analysis::product_table({});
    const CellRepresentatives reps;
    const analysis::ColumnEncoder enc(truth.columns);
    Rng rng = make_rng(3840);
    std::normal_distribution<double> noise(0.0, 0.3);
    std::vector<analysis::Respondent> pop;
    std::vector<double> succ, trials;
    double direct = 0.0;
    for (const auto& e : table.entries()) {
        analysis::Respondent r;
        r.demographics = reps.at(e.cell);
        const double p = analysis::logistic(enc.dot(truth.coefficients, r.demographics, std::nullopt) + noise(rng));
        pop.push_back(r);
        trials.push_back(1e6 * e.weight);
        succ.push_back(1e6 * e.weight * p);
        direct += e.weight * p;
    }
    const auto m = analysis::fit_logistic(analysis::build_covariate_design(pop, succ, trials));
    const double post = analysis::poststratify(m, table);
    o.require(std::abs(post - direct) <= 0.01, "brute force gap " + fmt(std::abs(post - direct)));

    const auto constant = analysis::FittedModel::from_coefficients({analysis::kConstant}, {0.37});
    analysis::Marginals skew;
    skew.party = {0.9, 0.1};
    const double p = analysis::logistic(0.37);
    o.require(analysis::poststratify(constant, table) == p &&
                  analysis::poststratify(constant, analysis::product_table(skew)) == p &&
                  analysis::poststratify(constant, analysis::CellTable::uniform()) == p,
              "constant model identity");
    if (o.pass) o.detail = "3840 cells, brute-force gap " + fmt(std::abs(post - direct)) + ", constant exact";
    return o;
}

Outcome bootstrap() {
    Outcome o;
    const auto truth = testing::demographic_truth();
    const auto cells = analysis::product_table({});
    const analysis::Poststratifier post(truth.columns, cells);
    const double target = post(truth);

    auto estimator_for = [&](std::uint64_t rep) {
        const auto rs = testing::sample_respondents(1500, cells, derive_seed(7000, rep));
        const auto y = testing::draw_outcomes(rs, truth, derive_seed(7001, rep));
        const std::vector<double> ones(y.size(), 1.0);
        return analysis::design_estimator(analysis::build_covariate_design(rs, y, ones), post, {});
    };

    analysis::BootstrapOptions opt;
    opt.replicates = 1000;
    opt.seed = 99;
    opt.threads = 1;
    const auto est = estimator_for(0);
    const auto a = analysis::bootstrap_indices(1500, est, opt);
    opt.threads = 0;
    const auto b = analysis::bootstrap_indices(1500, est, opt);
    o.require(a.ci_low == b.ci_low && a.ci_high == b.ci_high && a.point == b.point, "not deterministic");

    int covered = 0;
    const int reps = 200;
    for (int r = 0; r < reps; ++r) {
        analysis::BootstrapOptions ro;
        ro.replicates = 1000;
        ro.seed = derive_seed(7002, static_cast<std::uint64_t>(r));
        const auto e = analysis::bootstrap_indices(1500, estimator_for(static_cast<std::uint64_t>(r)), ro);
        if (e.ci_low <= target && target <= e.ci_high) ++covered;
    }
    const double coverage = covered / static_cast<double>(reps);
    o.require(coverage >= 0.93 && coverage <= 0.97, "coverage " + fmt(coverage));
    o.detail = (o.pass ? "" : o.detail + "; ") + "B=1000 deterministic across thread counts, coverage " +
               std::to_string(covered) + "/200 = " + fmt(coverage) + " of target " + fmt(target);
    return o;
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::vector<std::vector<std::string>> rows;
    for (std::string line; std::getline(in, line);) {
        std::vector<std::string> cells;
        std::stringstream s(line);
        for (std::string c; std::getline(s, c, ',');) cells.push_back(c);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        rows.push_back(std::move(cells));
    }
    return rows;
}

std::map<std::string, std::size_t> header_index(const std::vector<std::string>& header) {
    std::map<std::string, std::size_t> idx;
    for (std::size_t i = 0; i < header.size(); ++i) idx[header[i]] = i;
    return idx;
}

Outcome end_to_end() {
    Outcome o;
    testing::TempDir dir("acceptance");
    std::ofstream(dir.path / "cells.csv") << analysis::product_table({}).to_csv();
    platform::StudyConfig config;
    config.cell_weights = dir.path / "cells.csv";
    platform::SurveyService service(config, std::make_shared<platform::EventStore>(dir.path / "events.jsonl"));

    platform::CohortOptions cohort;
    cohort.n = 300;
    cohort.mix = platform::CohortMix::parse("0.4-efficiency/0.6-parity");
    const auto planted = platform::synthesize_cohort(service, analysis::CellTable::load(config.cell_weights), cohort);
    platform::export_dataset(service.store(), config, dir.path / "data");
    platform::PipelineOptions opt;
    opt.output_dir = dir.path / "out";
    const auto report = platform::run_pipeline(config, dir.path / "data", opt);
    o.require(report.respondents == 300, std::to_string(report.respondents) + " respondents analysed");

    const auto prefs = read_csv(dir.path / "out" / "preferences.csv");
    auto pi = header_index(prefs.at(0));
    double worst = 0.0;
    int checked = 0;
    for (std::size_t r = 1; r < prefs.size(); ++r) {
        const auto& row = prefs[r];
        if (row[pi["outcome"]] != "prefers_efficient" || row[pi["subgroup"]] != "all") continue;
        const double raw = std::stod(row[pi["raw_share"]]);
        worst = std::max(worst, std::abs(raw - planted.planted_by_arm.at(row[pi["arm"]])));
        ++checked;
    }
    o.require(checked == 2, std::to_string(checked) + " arm rows");
    o.require(worst <= 0.03, "raw share off by " + fmt(worst));

    const auto comps = read_csv(dir.path / "out" / "comparisons.csv");
    auto ci = header_index(comps.at(0));
    std::map<std::string, std::pair<double, double>> by_party;  // flagged, matched
    for (std::size_t r = 1; r < comps.size(); ++r) {
        const auto& row = comps[r];
        if (row[ci["measure"]] != "pairwise" || row[ci["party"]] == "all") continue;
        const double n = std::stod(row[ci["respondents"]]);
        by_party[row[ci["party"]]].first += std::stod(row[ci["share"]]) * n;
        by_party[row[ci["party"]]].second += n;
    }
    for (const auto& [party, share] : planted.planted_by_party) {
        const auto& c = by_party[party];
        const double raw = c.second > 0 ? c.first / c.second : -1.0;
        worst = std::max(worst, std::abs(raw - share));
        o.require(std::abs(raw - share) <= 0.03, party + " raw share off by " + fmt(std::abs(raw - share)));
    }

    const auto wins = read_csv(dir.path / "out" / "winrates.csv");
    auto wi = header_index(wins.at(0));
    std::map<std::string, std::vector<std::pair<double, double>>> curves;
    for (std::size_t r = 1; r < wins.size(); ++r) {
        const auto& row = wins[r];
        if (row[wi["party"]] != "all" || row[wi["stratum"]] != "efficiency_seeking") continue;
        curves[row[wi["arm"]]].emplace_back(std::stod(row[wi["spanish_share"]]),
                                            std::stod(row[wi["poststratified"]]));
    }
    o.require(curves.size() == 2, std::to_string(curves.size()) + " efficiency-seeking curves");
    std::string shape;
    for (auto& [arm, pts] : curves) {
        std::sort(pts.begin(), pts.end());
        bool decreasing = pts.size() == 6;
        for (std::size_t i = 1; i < pts.size(); ++i) decreasing = decreasing && pts[i].second < pts[i - 1].second;
        o.require(decreasing, arm + " curve is not decreasing");
        shape += " " + arm + " [";
        for (std::size_t i = 0; i < pts.size(); ++i) shape += (i ? " " : "") + fmt(pts[i].second, 3);
        shape += "]";
    }
    if (o.pass) o.detail = "max raw share error " + fmt(worst) + ";" + shape;
    return o;
}

Outcome simulator_calibration() {
    Outcome o;
    const auto cfg = simulator::default_high_config();
    const auto logs = simulator::simulate(simulator::build_schedule(cfg.start, 10000, cfg.seed), cfg.campaigns,
                                          cfg.seed);
    const auto ep = simulator::estimate_endpoints(logs, cfg.daily_budget);
    const double got[] = {ep.full_english.english, ep.full_english.spanish, ep.full_spanish.english,
                          ep.full_spanish.spanish};
    const double want[] = {36.0, 3.0, 7.0, 13.0};
    double worst = 0.0;
    for (int k = 0; k < 4; ++k) worst = std::max(worst, relative_error(got[k], want[k]));
    o.require(worst <= 0.01, "endpoint error " + fmt(worst));
    const double ratio = simulator::cost_per_conversion(logs, simulator::Language::spanish) /
                         simulator::cost_per_conversion(logs, simulator::Language::english);
    o.require(relative_error(ratio, 3.8) <= 0.05, "CPC ratio " + fmt(ratio) + " vs 3.8");
    o.detail = "endpoints (" + fmt(got[0]) + "," + fmt(got[1]) + ")/(" + fmt(got[2]) + "," + fmt(got[3]) +
               "), max rel. error " + fmt(worst) + ", CPC ratio " + fmt(ratio) + (o.pass ? "" : "; " + o.detail);
    return o;
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {"frontier-arithmetic", 1e-3, frontier_arithmetic},
        {"efficiency-parity", 1e-3, efficiency_parity},
        {"scheduler", 1e-2, scheduler},
        {"win-rate-identity", 1.0, win_rate_identity},
        {"modal-preference", 1.0, modal_preference},
        {"logistic-recovery", 10.0, logistic_recovery},
        {"poststratification", 5.0, poststratification},
        {"bootstrap", 300.0, bootstrap},
        {"end-to-end", 60.0, end_to_end},
        {"simulator-calibration", 30.0, simulator_calibration},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto start = Clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& ex) {
            o.pass = false;
            o.detail = std::string("exception: ") + ex.what();
        }
        const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
        if (seconds > c.limit_seconds) {
            o.pass = false;
            o.detail += "; exceeded " + fmt(c.limit_seconds) + " s";
        }
        failed += o.pass ? 0 : 1;
        std::printf("%s %s (%.4g s, limit %g s): %s\n", o.pass ? "PASS" : "FAIL", c.name.c_str(), seconds,
                    c.limit_seconds, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}

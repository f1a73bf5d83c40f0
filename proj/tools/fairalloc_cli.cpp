// fairalloc command-line tool: frontier inspection, campaign simulation,
// survey serving, export, analysis and synthetic cohorts.

#include <CLI11.hpp>

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "fairalloc/analysis.hpp"
#include "fairalloc/errors.hpp"
#include "fairalloc/frontier.hpp"
#include "fairalloc/platform.hpp"
#include "fairalloc/simulator.hpp"

using namespace fairalloc;
using nlohmann::json;

namespace {

platform::HttpServer* g_server = nullptr;

void on_signal(int) {
    if (g_server) g_server->stop();
}

std::shared_ptr<platform::EventStore> open_store(const platform::StudyConfig& config) {
    if (config.event_log.empty()) return std::make_shared<platform::EventStore>();
    return std::make_shared<platform::EventStore>(config.event_log);
}

void print_frontier(const frontier::TradeoffArm& arm, bool raw) {
    const auto f = frontier::build_frontier(arm);
    const auto eff = frontier::efficiency_index(f);
    const auto par = frontier::parity_index(f, arm.parity_share);
    std::printf("arm %s (%s), parity share %.0f%%\n", std::string(frontier::to_string(arm.id)).c_str(),
                arm.label.c_str(), 100.0 * arm.parity_share);
    std::printf("%-7s %8s %9s %9s %9s %8s\n", "option", "lambda", "english", "spanish", "total", "share");
    for (std::size_t i = 0; i < f.size(); ++i) {
        const auto& p = f[i];
        const char* mark = i == eff && i == par ? "  efficiency, parity" : i == eff ? "  efficiency"
                                                                        : i == par ? "  parity"
                                                                                   : "";
        if (raw) {
            std::printf("%-7zu %8.2f %9.3f %9.3f %9.3f %7.2f%%%s\n", i, p.spanish_budget_share, p.expected.english,
                        p.expected.spanish, p.total_conversions, 100.0 * p.spanish_share, mark);
        } else {
            std::printf("%-7zu %8.2f %9ld %9ld %9ld %7ld%%%s\n", i, p.spanish_budget_share,
                        frontier::display_round(p.expected.english), frontier::display_round(p.expected.spanish),
                        frontier::display_round(p.total_conversions), frontier::display_round(100.0 * p.spanish_share),
                        mark);
        }
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fair allocation survey toolkit"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path;
    app.add_option("--config", config_path,
                   std::string("Study configuration file (default: $") + platform::kConfigEnvVar + ")");

    auto* frontier_cmd = app.add_subcommand("frontier", "Inspect trade-off frontiers");
    frontier_cmd->require_subcommand(1);
    auto* show = frontier_cmd->add_subcommand("show", "Print an arm's frontier options");
    std::string arm_name = "high";
    bool raw = false;
    bool as_json = false;
    show->add_option("--arm", arm_name, "Arm id: high, low, equal, flip_low, flip_high");
    show->add_flag("--raw", raw, "Unrounded values");
    show->add_flag("--json", as_json, "JSON output");

    auto* simulate = app.add_subcommand("simulate", "Simulate the time-block campaign experiment");
    int days = 15;
    std::uint64_t sim_seed = 1;
    std::string preset = "high";
    std::string sim_config;
    std::string logs_out;
    simulate->add_option("--days", days, "Number of days");
    simulate->add_option("--seed", sim_seed, "Random seed");
    simulate->add_option("--preset", preset, "high, low or max_conversions")
        ->check(CLI::IsMember({"high", "low", "max_conversions"}));
    simulate->add_option("--sim-config", sim_config, "Simulation configuration JSON (overrides --preset)");
    simulate->add_option("--logs", logs_out, "Write daily logs (JSONL) here");

    auto* serve = app.add_subcommand("serve", "Run the survey HTTP service");
    int port = 8080;
    std::string host = "127.0.0.1";
    serve->add_option("--port", port, "TCP port (0 picks a free one)");
    serve->add_option("--host", host, "Bind address");

    auto* export_cmd = app.add_subcommand("export", "Export ballots and respondents from the event log");
    std::string export_out = "export";
    std::string format = "jsonl";
    bool include_incomplete = false;
    export_cmd->add_option("--out", export_out, "Output directory");
    export_cmd->add_option("--format", format, "jsonl or csv")->check(CLI::IsMember({"jsonl", "csv"}));
    export_cmd->add_flag("--include-incomplete", include_incomplete, "Also export unfinished sessions");

    auto* analyze = app.add_subcommand("analyze", "Run the analysis pipeline on an exported dataset");
    std::string outcome;
    int bootstrap = 1000;
    std::optional<std::uint64_t> analyze_seed;
    std::string data_dir = "export";
    std::string analyze_out;
    unsigned threads = 0;
    double separation_ridge = platform::PipelineOptions{}.separation_ridge;
    analyze->add_option("--outcome", outcome, "prefers_efficient or prefers_max_english (default: both)");
    analyze->add_option("--bootstrap", bootstrap, "Bootstrap replicates (0 disables intervals)");
    analyze->add_option("--seed", analyze_seed, "Bootstrap seed (default: config seed)");
    analyze->add_option("--data", data_dir, "Exported dataset directory");
    analyze->add_option("--out", analyze_out, "Output directory (default: config output_dir)");
    analyze->add_option("--threads", threads, "Bootstrap threads (0 = all cores)");
    analyze->add_option("--separation-ridge", separation_ridge, "Ridge for fits that separate (0 = error)");

    auto* synth = app.add_subcommand("synthesize-cohort", "Append planted-preference respondents to the event log");
    std::size_t cohort_n = 300;
    std::string mix = "0.4-efficiency/0.6-parity";
    std::vector<std::string> cohort_arms{"high", "low"};
    std::optional<std::uint64_t> cohort_seed;
    synth->add_option("--n", cohort_n, "Number of respondents");
    synth->add_option("--mix", mix, "Type mix, e.g. 0.4-efficiency/0.6-parity");
    synth->add_option("--arms", cohort_arms, "Arms to assign")->delimiter(',');
    synth->add_option("--seed", cohort_seed, "Seed (default: config seed)");

    auto* cells = app.add_subcommand("cells", "Write a cell-weight file");
    std::string cells_out = "cell_weights.csv";
    bool uniform = false;
    cells->add_option("--out", cells_out, "Output CSV");
    cells->add_flag("--uniform", uniform, "Equal weights instead of the built-in marginals");

    CLI11_PARSE(app, argc, argv);

    try {
        const std::optional<std::string> explicit_config =
            config_path.empty() ? std::nullopt : std::optional<std::string>(config_path);

        if (show->parsed()) {
            const auto config = platform::load_config(explicit_config);
            const auto& arm = config.arm(frontier::arm_from_string(arm_name));
            if (as_json) {
                std::cout << frontier::to_json(frontier::build_frontier(arm), !raw).dump(2) << '\n';
            } else {
                print_frontier(arm, raw);
            }
        } else if (simulate->parsed()) {
            simulator::SimulationConfig sc = preset == "low"               ? simulator::default_low_config()
                                             : preset == "max_conversions" ? simulator::max_conversions_cost_config()
                                                                           : simulator::default_high_config();
            if (!sim_config.empty()) {
                std::ifstream in(sim_config);
                if (!in) throw ConfigError("cannot open " + sim_config);
                sc = simulator::config_from_json(json::parse(in));
            }
            if (simulate->count("--days")) sc.n_days = days;
            if (simulate->count("--seed")) sc.seed = sim_seed;
            const auto plan = simulator::build_schedule(sc.start, sc.n_days, sc.seed);
            const auto logs = simulator::simulate(plan, sc.campaigns, sc.seed);
            const auto ep = simulator::estimate_endpoints(logs, sc.daily_budget);
            const double cpc_en = simulator::cost_per_conversion(logs, simulator::Language::english);
            const double cpc_sp = simulator::cost_per_conversion(logs, simulator::Language::spanish);
            if (!logs_out.empty()) {
                std::ofstream out(logs_out, std::ios::binary);
                if (!out) throw IoError("cannot write " + logs_out);
                out << simulator::export_logs_jsonl(logs);
            }
            const json result{{"config", sc.name},
                              {"days", sc.n_days},
                              {"seed", sc.seed},
                              {"full_english", {ep.full_english.english, ep.full_english.spanish}},
                              {"full_spanish", {ep.full_spanish.english, ep.full_spanish.spanish}},
                              {"cpc_english", cpc_en},
                              {"cpc_spanish", cpc_sp},
                              {"cpc_ratio", cpc_sp / cpc_en}};
            std::cout << result.dump(2) << '\n';
        } else if (serve->parsed()) {
            const auto config = platform::load_config(explicit_config);
            platform::SurveyService service(config, open_store(config));
            std::optional<analysis::CellTable> weights;
            if (!config.cell_weights.empty()) weights = analysis::CellTable::load(config.cell_weights.string());
            platform::HttpServer server(service, std::move(weights));
            const int bound = server.bind(host, port);
            g_server = &server;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            std::cerr << "serving on http://" << host << ":" << bound << '\n';
            server.run();
            g_server = nullptr;
        } else if (export_cmd->parsed()) {
            const auto config = platform::load_config(explicit_config);
            if (config.event_log.empty()) throw ConfigError("no event_log configured");
            const platform::EventStore store(config.event_log);
            platform::ExportOptions opts;
            opts.format = platform::export_format_from_string(format);
            opts.include_incomplete = include_incomplete;
            std::cout << platform::export_dataset(store, config, export_out, opts).to_json().dump(2) << '\n';
        } else if (analyze->parsed()) {
            const auto config = platform::load_config(explicit_config);
            platform::PipelineOptions opts;
            if (!outcome.empty()) opts.outcome = analysis::outcome_from_string(outcome);
            opts.bootstrap = bootstrap;
            opts.seed = analyze_seed;
            opts.threads = threads;
            opts.separation_ridge = separation_ridge;
            if (!analyze_out.empty()) opts.output_dir = analyze_out;
            std::cout << platform::run_pipeline(config, data_dir, opts).to_json().dump(2) << '\n';
        } else if (synth->parsed()) {
            const auto config = platform::load_config(explicit_config);
            if (config.event_log.empty()) throw ConfigError("no event_log configured");
            platform::SurveyService service(config, open_store(config));
            const auto population = config.cell_weights.empty()
                                        ? analysis::product_table({})
                                        : analysis::CellTable::load(config.cell_weights.string());
            platform::CohortOptions opts;
            opts.n = cohort_n;
            opts.mix = platform::CohortMix::parse(mix);
            opts.arms.clear();
            for (const auto& a : cohort_arms) opts.arms.push_back(frontier::arm_from_string(a));
            opts.seed = cohort_seed;
            std::cout << platform::synthesize_cohort(service, population, opts).to_json().dump(2) << '\n';
        } else if (cells->parsed()) {
            const auto table = uniform ? analysis::CellTable::uniform() : analysis::product_table({});
            std::ofstream out(cells_out, std::ios::binary);
            if (!out) throw IoError("cannot write " + cells_out);
            out << table.to_csv();
            std::cout << "wrote " << table.size() << " cells to " << cells_out << '\n';
        }
    } catch (const ConfigError& ex) {
        std::cerr << "configuration error: " << ex.what() << '\n';
        return 2;
    } catch (const Error& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return 1;
    } catch (const json::exception& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return 1;
    }
    return 0;
}

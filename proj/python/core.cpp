#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>

#include "fairalloc/analysis.hpp"
#include "fairalloc/elicitation.hpp"
#include "fairalloc/errors.hpp"
#include "fairalloc/frontier.hpp"
#include "fairalloc/platform.hpp"
#include "fairalloc/simulator.hpp"

namespace py = pybind11;
using namespace fairalloc;
using nlohmann::json;

namespace {

py::object to_python(const json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

platform::StudyConfig config_for(const std::optional<std::string>& path) { return platform::load_config(path); }

std::vector<elicitation::PairwiseBallot> ballots_from(const std::vector<std::tuple<int, int, int>>& rows,
                                                      frontier::ArmId arm) {
    std::vector<elicitation::PairwiseBallot> out;
    int order = 0;
    for (const auto& [a, b, choice] : rows) {
        out.push_back({"py", arm, elicitation::OptionPair::of(a, b), choice, order++});
    }
    return out;
}

simulator::SimulationConfig preset_config(const std::string& preset) {
    if (preset == "high") return simulator::default_high_config();
    if (preset == "low") return simulator::default_low_config();
    if (preset == "max_conversions") return simulator::max_conversions_cost_config();
    throw ValidationError("preset must be high, low or max_conversions");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Budget-allocation frontiers, preference elicitation and poststratified analysis";

    auto base = py::register_exception<Error>(m, "FairallocError", PyExc_RuntimeError);
    py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
    py::register_exception<DomainError>(m, "DomainError", base.ptr());
    py::register_exception<NotFoundError>(m, "NotFoundError", base.ptr());
    py::register_exception<ConflictError>(m, "ConflictError", base.ptr());
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<SeparationError>(m, "SeparationError", base.ptr());
    py::register_exception<IoError>(m, "IoError", base.ptr());

    m.def(
        "arms", [](std::optional<std::string> config) { return to_python(frontier::arms_to_json(config_for(config).arms)); },
        py::arg("config") = py::none(), "Configured trade-off arms.");

    m.def(
        "frontier",
        [](const std::string& arm, bool display_rounded, std::optional<std::string> config) {
            const auto cfg = config_for(config);
            const auto f = frontier::build_frontier(cfg.arm(frontier::arm_from_string(arm)));
            json j = frontier::to_json(f, display_rounded);
            j["efficiency_index"] = frontier::efficiency_index(f);
            j["parity_index"] = frontier::parity_index(f, cfg.arm(f.arm).parity_share);
            return to_python(j);
        },
        py::arg("arm") = "high", py::arg("display_rounded") = false, py::arg("config") = py::none(),
        "Frontier points of an arm with its efficiency and parity indices.");

    m.def(
        "interpolate",
        [](std::pair<double, double> full_english, std::pair<double, double> full_spanish, double lam) {
            frontier::CampaignEndpoints e;
            e.full_english = {full_english.first, full_english.second};
            e.full_spanish = {full_spanish.first, full_spanish.second};
            const auto p = frontier::interpolate(e, lam);
            return std::make_pair(p.expected.english, p.expected.spanish);
        },
        py::arg("full_english"), py::arg("full_spanish"), py::arg("spanish_budget_share"),
        "Expected (english, spanish) conversions at a Spanish budget share.");

    m.def("display_round", &frontier::display_round, py::arg("x"));

    m.def(
        "simulate",
        [](const std::string& preset, std::optional<int> days, std::optional<std::uint64_t> seed) {
            auto sc = preset_config(preset);
            if (days) sc.n_days = *days;
            if (seed) sc.seed = *seed;
            const auto logs = simulator::simulate(simulator::build_schedule(sc.start, sc.n_days, sc.seed),
                                                  sc.campaigns, sc.seed);
            const auto ep = simulator::estimate_endpoints(logs, sc.daily_budget);
            const double en = simulator::cost_per_conversion(logs, simulator::Language::english);
            const double sp = simulator::cost_per_conversion(logs, simulator::Language::spanish);
            return to_python({{"config", sc.name},
                              {"days", sc.n_days},
                              {"seed", sc.seed},
                              {"full_english", {ep.full_english.english, ep.full_english.spanish}},
                              {"full_spanish", {ep.full_spanish.english, ep.full_spanish.spanish}},
                              {"cpc_english", en},
                              {"cpc_spanish", sp},
                              {"cpc_ratio", sp / en}});
        },
        py::arg("preset") = "high", py::arg("days") = py::none(), py::arg("seed") = py::none(),
        "Simulates the ad campaigns and estimates the frontier endpoints.");

    m.def(
        "win_rates",
        [](const std::vector<std::tuple<int, int, int>>& ballots, int option_count) {
            return elicitation::win_rates(ballots_from(ballots, frontier::ArmId::high), option_count);
        },
        py::arg("ballots"), py::arg("option_count") = 6, "Per-option win rates from (a, b, choice) ballots.");

    m.def(
        "modal_preference",
        [](const std::vector<std::tuple<int, int, int>>& ballots, const std::string& arm,
           std::optional<std::string> config) {
            const auto id = frontier::arm_from_string(arm);
            const auto f = frontier::build_frontier(config_for(config).arm(id));
            return elicitation::modal_preference(ballots_from(ballots, id), f);
        },
        py::arg("ballots"), py::arg("arm") = "high", py::arg("config") = py::none(),
        "Modal option of a complete ballot set; ties go to the lower Spanish share.");

    m.def(
        "fit_logistic",
        [](const Eigen::MatrixXd& x, const Eigen::VectorXd& successes, std::optional<Eigen::VectorXd> trials,
           std::vector<std::string> columns, double ridge) {
            analysis::DesignMatrix d;
            d.x = x;
            d.successes = successes;
            d.trials = trials ? *trials : Eigen::VectorXd::Ones(x.rows());
            if (columns.empty()) {
                for (Eigen::Index j = 0; j < x.cols(); ++j) columns.push_back("x" + std::to_string(j + 1));
            }
            if (static_cast<Eigen::Index>(columns.size()) != x.cols() || successes.size() != x.rows() ||
                d.trials.size() != x.rows()) {
                throw ValidationError("design dimensions do not agree");
            }
            d.columns = std::move(columns);
            analysis::LogisticOptions opt;
            opt.ridge = ridge;
            const auto fit = analysis::fit_logistic(d, opt);
            py::dict out;
            out["columns"] = fit.columns;
            out["coefficients"] = fit.coefficients;
            out["standard_errors"] = fit.standard_errors;
            out["log_likelihood"] = fit.log_likelihood;
            out["converged"] = fit.converged;
            out["iterations"] = fit.iterations;
            out["aliased"] = fit.aliased;
            return out;
        },
        py::arg("x"), py::arg("successes"), py::arg("trials") = py::none(),
        py::arg("columns") = std::vector<std::string>{}, py::arg("ridge") = 0.0,
        "Binomial logistic regression by iteratively reweighted least squares.");

    m.def(
        "poststratify",
        [](std::vector<std::string> columns, std::vector<double> coefficients, std::optional<std::string> cell_weights,
           const std::string& subgroup) {
            const auto model = analysis::FittedModel::from_coefficients(std::move(columns), std::move(coefficients));
            const auto cells = cell_weights ? analysis::CellTable::load(*cell_weights) : analysis::product_table({});
            return analysis::poststratify(model, cells, Subgroup::parse(subgroup));
        },
        py::arg("columns"), py::arg("coefficients"), py::arg("cell_weights") = py::none(),
        py::arg("subgroup") = "all", "Cell-weighted mean of model predictions.");

    m.def(
        "synthesize_cohort",
        [](std::string event_log, int n, const std::string& mix, std::vector<std::string> arms,
           std::optional<std::uint64_t> seed, std::optional<std::string> config) {
            auto cfg = config_for(config);
            cfg.event_log = event_log;
            platform::SurveyService service(cfg, std::make_shared<platform::EventStore>(cfg.event_log));
            const auto population = cfg.cell_weights.empty() ? analysis::product_table({})
                                                             : analysis::CellTable::load(cfg.cell_weights.string());
            platform::CohortOptions opt;
            opt.n = n;
            opt.mix = platform::CohortMix::parse(mix);
            opt.arms.clear();
            for (const auto& a : arms) opt.arms.push_back(frontier::arm_from_string(a));
            opt.seed = seed;
            return to_python(platform::synthesize_cohort(service, population, opt).to_json());
        },
        py::arg("event_log"), py::arg("n") = 300, py::arg("mix") = "0.4-efficiency/0.6-parity",
        py::arg("arms") = std::vector<std::string>{"high", "low"}, py::arg("seed") = py::none(),
        py::arg("config") = py::none(), "Appends planted-preference sessions to an event log.");

    m.def(
        "export_dataset",
        [](std::string event_log, std::string out_dir, const std::string& format, bool include_incomplete,
           std::optional<std::string> config) {
            const auto cfg = config_for(config);
            const platform::EventStore store{std::filesystem::path(event_log)};
            platform::ExportOptions opt;
            opt.format = platform::export_format_from_string(format);
            opt.include_incomplete = include_incomplete;
            return to_python(platform::export_dataset(store, cfg, out_dir, opt).to_json());
        },
        py::arg("event_log"), py::arg("out_dir"), py::arg("format") = "jsonl", py::arg("include_incomplete") = false,
        py::arg("config") = py::none(), "Writes ballots and respondents tables from an event log.");

    m.def(
        "analyze",
        [](std::string data_dir, std::string out_dir, int bootstrap, std::optional<std::uint64_t> seed,
           std::optional<std::string> outcome, std::optional<std::string> config) {
            const auto cfg = config_for(config);
            platform::PipelineOptions opt;
            opt.bootstrap = bootstrap;
            opt.seed = seed;
            opt.output_dir = out_dir;
            if (outcome) opt.outcome = analysis::outcome_from_string(*outcome);
            py::gil_scoped_release release;
            const auto report = platform::run_pipeline(cfg, data_dir, opt).to_json();
            py::gil_scoped_acquire acquire;
            return to_python(report);
        },
        py::arg("data_dir"), py::arg("out_dir"), py::arg("bootstrap") = 1000, py::arg("seed") = py::none(),
        py::arg("outcome") = py::none(), py::arg("config") = py::none(),
        "Runs the model, preference, win-rate and comparison stages over an exported dataset.");
}

#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "fairalloc/errors.hpp"
#include "fairalloc/platform.hpp"
#include "survey.hpp"

using namespace fairalloc;
using namespace fairalloc::platform;
using fairalloc::testing::TempDir;
using frontier::ArmId;
using nlohmann::json;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::shared_ptr<EventStore> memory_store() { return std::make_shared<EventStore>(); }

// Walks a fresh session through its checks to the first comparison.
void pass_checks(SurveyService& svc, const std::string& id) {
    const auto f = frontier::build_frontier(svc.config().arm(svc.snapshot().sessions.at(id).session.arm()));
    const auto checks = elicitation::check_items(f);
    for (std::size_t k = 0; k < checks.size(); ++k) svc.submit(id, "check-" + std::to_string(k + 1), checks[k].correct);
}

}  // namespace

TEST_CASE("event store appends and replays from file", "[platform][events]") {
    TempDir dir("events");
    const auto path = dir.path / "log" / "events.jsonl";
    {
        EventStore store(path);
        store.set_clock([] { return std::string("2024-01-01T00:00:00.000Z"); });
        CHECK(store.append(EventKind::session_created, {{"session_id", "a"}}).sequence_number == 1);
        CHECK(store.append(EventKind::aux_recorded, {{"session_id", "a"}}).sequence_number == 2);
    }
    EventStore again(path);
    REQUIRE(again.size() == 2);
    CHECK(again.records()[1].kind == EventKind::aux_recorded);
    CHECK(again.records()[0].timestamp == "2024-01-01T00:00:00.000Z");
    CHECK(again.append(EventKind::session_finalized, {{"session_id", "a"}}).sequence_number == 3);
}

TEST_CASE("a torn last line is dropped and overwritten", "[platform][events]") {
    TempDir dir("torn");
    const auto path = dir.path / "events.jsonl";
    {
        EventStore store(path);
        store.append(EventKind::session_created, {{"session_id", "a"}});
    }
    {
        std::ofstream out(path, std::ios::app | std::ios::binary);
        out << R"({"seq":2,"ts":"x","kind":"aux_rec)";
    }
    EventStore store(path);
    CHECK(store.size() == 1);
    store.append(EventKind::aux_recorded, {{"session_id", "a"}});
    CHECK(EventStore(path).size() == 2);

    CHECK_THROWS_AS(parse_event_log("not json\n"), ValidationError);
    CHECK_THROWS_AS(parse_event_log(R"({"seq":2,"ts":"","kind":"aux_recorded","payload":{}})"
                                    "\n"
                                    R"({"seq":2,"ts":"","kind":"aux_recorded","payload":{}})"
                                    "\n"),
                    ValidationError);
    CHECK_THROWS_AS(parse_event_log(R"({"seq":1,"ts":"","kind":"nope","payload":{}})"
                                    "\n"),
                    ValidationError);
}

TEST_CASE("study configuration loading", "[platform][config]") {
    TempDir dir("config");
    std::ofstream(dir.path / "cells.csv") << analysis::product_table({}).to_csv();
    std::ofstream(dir.path / "arms.json") << frontier::arms_to_json(frontier::default_arms()).dump();
    std::ofstream(dir.path / "study.json")
        << R"({"arms_file": "arms.json", "seed": 7, "cell_weights": "cells.csv", "event_log": "ev.jsonl",
              "eligibility": {"max_attention_failures": 1}})";
    const auto c = StudyConfig::load(dir.path / "study.json");
    CHECK(c.seed == 7);
    CHECK(c.arms.size() == 5);
    CHECK(c.cell_weights == dir.path / "cells.csv");
    CHECK(c.event_log == dir.path / "ev.jsonl");
    CHECK(c.eligibility.max_attention_failures == 1);
    CHECK_NOTHROW(c.require_cell_weights());

    CHECK_THROWS_AS(StudyConfig::from_json({{"cell_weights", "missing.csv"}}, dir.path), ConfigError);
    CHECK_THROWS_AS(StudyConfig::from_json({{"arms_file", "missing.json"}}, dir.path), ConfigError);
    CHECK_THROWS_AS(StudyConfig::from_json({{"colour", "red"}}), ConfigError);
    auto dup = frontier::arms_to_json({frontier::default_high_arm(), frontier::default_high_arm()});
    CHECK_THROWS_AS(StudyConfig::from_json({{"arms", dup["arms"]}}), ConfigError);
    CHECK_THROWS_AS(StudyConfig::load(dir.path / "nope.json"), ConfigError);
    CHECK_THROWS_AS(StudyConfig{}.require_cell_weights(), ConfigError);

    CHECK(resolve_config_path(std::string("a.json")) == std::filesystem::path("a.json"));
    ::setenv(kConfigEnvVar, (dir.path / "study.json").c_str(), 1);
    CHECK(resolve_config_path(std::nullopt) == dir.path / "study.json");
    CHECK(load_config(std::nullopt).seed == 7);
    ::unsetenv(kConfigEnvVar);
    CHECK_FALSE(resolve_config_path(std::nullopt).has_value());
}

TEST_CASE("arm assignment is uniform and seed-determined", "[platform][service]") {
    SurveyService svc(StudyConfig{}, memory_store());
    std::map<ArmId, int> counts;
    std::set<std::string> ids;
    for (int i = 0; i < 5000; ++i) {
        const auto s = svc.create_session();
        ++counts[s.arm];
        ids.insert(s.session_id);
    }
    CHECK(ids.size() == 5000);
    for (ArmId a : frontier::kAllArms) CHECK(std::abs(counts[a] / 5000.0 - 0.2) <= 0.02);

    SurveyService same(StudyConfig{}, memory_store());
    SurveyService other(StudyConfig{}, memory_store());
    for (int i = 0; i < 50; ++i) {
        const auto a = same.create_session();
        const auto b = other.create_session();
        CHECK(a.session_id == b.session_id);
        CHECK(a.arm == b.arm);
    }
}

TEST_CASE("requested arms", "[platform][service]") {
    StudyConfig config;
    config.arms = {frontier::default_high_arm(), frontier::default_low_arm()};
    SurveyService svc(config, memory_store());
    CHECK(svc.create_session(ArmId::high).arm == ArmId::high);
    CHECK(svc.create_session(ArmId::low).arm == ArmId::low);
    CHECK_THROWS_AS(svc.create_session(ArmId::equal), NotFoundError);
    CHECK(svc.store().size() == 2);
    for (int i = 0; i < 100; ++i) {
        const auto a = svc.create_session().arm;
        CHECK((a == ArmId::high || a == ArmId::low));
    }
}

TEST_CASE("item sequence of a session", "[platform][service]") {
    SurveyService svc(StudyConfig{}, memory_store());
    const auto id = svc.create_session(ArmId::high).session_id;
    auto item = svc.next_item(id);
    CHECK(item["item_id"] == "check-1");
    CHECK(item["kind"] == "comprehension");
    CHECK(item["left"].contains("english_conversions"));
    CHECK(svc.next_item(id) == item);

    pass_checks(svc, id);
    for (int k = 1; k <= 14; ++k) {
        item = svc.next_item(id);
        REQUIRE(item["item_id"] == "pair-" + std::to_string(k));
        svc.submit(id, item["item_id"], item["left"]["option"]);
    }
    item = svc.next_item(id);
    CHECK(item["item_id"] == "pair-15");
    CHECK(item["progress"] == 15);
    CHECK(item["total"] == 15);
    svc.submit(id, "pair-15", item["right"]["option"]);

    item = svc.next_item(id);
    CHECK(item["kind"] == "ideology");
    CHECK(item["text"].get<std::string>().find("23%") != std::string::npos);
    svc.submit(id, "ideology", "parity");
    item = svc.next_item(id);
    CHECK(item["kind"] == "trolley");
    CHECK(item["n_spanish"] == 1);
    CHECK(item["n_english"] == 6);
    svc.submit(id, "trolley", "spanish");
    item = svc.next_item(id);
    CHECK(item["kind"] == "demographics");
    CHECK(item["categories"]["race"].size() == 5);
    const auto ack = svc.submit(id, "demographics", testing::some_demographics());
    CHECK(ack["stage"] == "done");
    CHECK(svc.store().records().back().kind == EventKind::session_finalized);

    CHECK_THROWS_AS(svc.next_item(id), ConflictError);
    CHECK_THROWS_AS(svc.next_item("s-nobody"), NotFoundError);
    CHECK_THROWS_AS(svc.submit("s-nobody", "check-1", 0), NotFoundError);

    const auto s = svc.snapshot().sessions.at(id).session;
    CHECK(s.ballots().size() == 15);
    CHECK(s.ideology() == elicitation::IdeologyChoice::parity);
    CHECK(s.trolley() == elicitation::TrolleyChoice::spanish);
}

TEST_CASE("low arm trolley item", "[platform][service]") {
    SurveyService svc(StudyConfig{}, memory_store());
    const auto id = svc.create_session(ArmId::low).session_id;
    pass_checks(svc, id);
    for (int k = 1; k <= 15; ++k) {
        const auto item = svc.next_item(id);
        svc.submit(id, item["item_id"], item["left"]["option"]);
    }
    svc.submit(id, "ideology", "bob");
    const auto item = svc.next_item(id);
    CHECK(item["n_spanish"] == 1);
    CHECK(item["n_english"] == 3);
}

TEST_CASE("submit validation, conflicts and idempotency", "[platform][service]") {
    SurveyService svc(StudyConfig{}, memory_store());
    const auto id = svc.create_session(ArmId::high).session_id;
    pass_checks(svc, id);
    const auto item = svc.next_item(id);
    const int a = item["left"]["option"];
    const int b = item["right"]["option"];
    int outside = 0;
    while (outside == a || outside == b) ++outside;

    const auto before = svc.store().size();
    CHECK_THROWS_AS(svc.submit(id, "pair-1", outside), ValidationError);
    CHECK_THROWS_AS(svc.submit(id, "pair-1", "left"), ValidationError);
    CHECK_THROWS_AS(svc.submit(id, "pair-2", a), ConflictError);
    CHECK_THROWS_AS(svc.submit(id, "ideology", "efficiency"), ConflictError);
    CHECK(svc.store().size() == before);

    const auto ack = svc.submit(id, "pair-1", a);
    CHECK_FALSE(ack["duplicate"].get<bool>());
    const auto again = svc.submit(id, "pair-1", a);
    CHECK(again["duplicate"].get<bool>());
    CHECK(again["sequence_number"] == ack["sequence_number"]);
    CHECK(svc.store().size() == before + 1);
    CHECK_THROWS_AS(svc.submit(id, "pair-1", b), ConflictError);
    CHECK_THROWS_AS(svc.submit(id, "check-1", 5), ConflictError);
    CHECK(svc.next_item(id)["item_id"] == "pair-2");
}

TEST_CASE("no session records more than 15 ballots", "[platform][service][property]") {
    SurveyService svc(StudyConfig{}, memory_store());
    const auto id = svc.create_session(ArmId::high).session_id;
    testing::complete_session(svc, id);
    CHECK_THROWS_AS(svc.submit(id, "pair-16", 0), ConflictError);
    for (const auto& [sid, s] : svc.snapshot().sessions) CHECK(s.session.ballots().size() <= 15);
}

TEST_CASE("failed checks end the session as ineligible", "[platform][service]") {
    SurveyService svc(StudyConfig{}, memory_store());
    const auto id = svc.create_session(ArmId::high).session_id;
    const auto item = svc.next_item(id);
    const int wrong = item["left"]["option"] == 0 ? item["right"]["option"] : item["left"]["option"];
    svc.submit(id, "check-1", wrong == 0 ? 5 : 0);
    svc.submit(id, "check-2", 0);
    const auto ack = svc.submit(id, "check-3", 5);
    CHECK(ack["stage"] == "done");
    CHECK(svc.snapshot().sessions.at(id).session.eligibility() == elicitation::Eligibility::ineligible);
    CHECK_THROWS_AS(svc.next_item(id), ConflictError);

    StudyConfig lenient;
    lenient.eligibility.max_comprehension_failures = 1;
    SurveyService svc2(lenient, memory_store());
    const auto id2 = svc2.create_session(ArmId::high).session_id;
    svc2.submit(id2, "check-1", 5);  // option 0 has more total conversions
    svc2.submit(id2, "check-2", 5);
    CHECK(svc2.submit(id2, "check-3", 5)["stage"] == "comparisons");
}

TEST_CASE("demographics answers are validated", "[platform][service]") {
    SurveyService svc(StudyConfig{}, memory_store());
    const auto id = svc.create_session(ArmId::high).session_id;
    pass_checks(svc, id);
    for (int k = 1; k <= 15; ++k) {
        const auto item = svc.next_item(id);
        svc.submit(id, item["item_id"], item["left"]["option"]);
    }
    svc.submit(id, "ideology", "efficiency");
    CHECK_THROWS_AS(svc.submit(id, "trolley", "french"), ValidationError);
    CHECK_THROWS_AS(svc.submit(id, "trolley", 1), ValidationError);
    svc.submit(id, "trolley", "english");
    auto d = testing::some_demographics();
    d["race"] = "martian";
    CHECK_THROWS_AS(svc.submit(id, "demographics", d), ValidationError);
    CHECK_THROWS_AS(svc.submit(id, "demographics", "democrat"), ValidationError);
    d = testing::some_demographics();
    d["age_value"] = 7;
    CHECK_THROWS_AS(svc.submit(id, "demographics", d), ValidationError);
    CHECK(svc.next_item(id)["kind"] == "demographics");
}

TEST_CASE("export counts, headers and determinism", "[platform][export]") {
    TempDir dir("export");
    SurveyService svc(StudyConfig{}, memory_store());

    const auto empty = export_dataset(svc.snapshot(), svc.config(), dir.path / "empty");
    CHECK(empty.ballots == 0);
    CHECK(slurp(empty.ballots_path).empty());
    ExportOptions csv;
    csv.format = ExportFormat::csv;
    const auto empty_csv = export_dataset(svc.snapshot(), svc.config(), dir.path / "empty", csv);
    CHECK(slurp(empty_csv.ballots_path) == "respondent_id,arm,option_a,option_b,choice,order\n");
    CHECK(slurp(empty_csv.respondents_path).rfind("respondent_id,arm,gender", 0) == 0);

    for (int i = 0; i < 3; ++i) testing::complete_session(svc, svc.create_session().session_id);
    svc.create_session(ArmId::high);  // abandoned
    const auto first = export_dataset(svc.snapshot(), svc.config(), dir.path / "a");
    CHECK(first.ballots == 45);
    CHECK(first.respondents == 3);
    const auto line = json::parse(slurp(first.ballots_path).substr(0, slurp(first.ballots_path).find('\n')));
    CHECK(line.size() == 6);
    CHECK(line.contains("order"));
    const auto resp = json::parse(slurp(first.respondents_path).substr(0, slurp(first.respondents_path).find('\n')));
    const auto resp_arm = frontier::arm_from_string(resp["arm"].get<std::string>());
    CHECK(resp["modal_option"] == frontier::efficiency_index(frontier::build_frontier(svc.config().arm(resp_arm))));
    CHECK(resp["eligibility"] == "eligible");

    const auto second = export_dataset(svc.store(), svc.config(), dir.path / "b");
    CHECK(slurp(first.ballots_path) == slurp(second.ballots_path));
    CHECK(slurp(first.respondents_path) == slurp(second.respondents_path));

    ExportOptions all;
    all.include_incomplete = true;
    CHECK(export_dataset(svc.snapshot(), svc.config(), dir.path / "c", all).respondents == 4);

    std::ofstream(dir.path / "file") << "x";
    try {
        export_dataset(svc.snapshot(), svc.config(), dir.path / "file" / "sub");
        FAIL("expected an I/O error");
    } catch (const IoError& ex) {
        CHECK(std::string(ex.what()).find("file") != std::string::npos);
    }
}

TEST_CASE("exported datasets load back in both formats", "[platform][export]") {
    TempDir dir("load");
    SurveyService svc(StudyConfig{}, memory_store());
    for (int i = 0; i < 4; ++i) testing::complete_session(svc, svc.create_session().session_id);
    const auto expected = svc.respondents();
    for (const auto format : {ExportFormat::jsonl, ExportFormat::csv}) {
        ExportOptions o;
        o.format = format;
        const auto sub = dir.path / std::string(extension(format)).substr(1);
        export_dataset(svc.snapshot(), svc.config(), sub, o);
        const auto loaded = load_dataset(sub);
        REQUIRE(loaded.size() == expected.size());
        for (std::size_t i = 0; i < loaded.size(); ++i) {
            CHECK(loaded[i].id == expected[i].id);
            CHECK(loaded[i].arm == expected[i].arm);
            CHECK(loaded[i].demographics.cell == expected[i].demographics.cell);
            CHECK(loaded[i].demographics.income_value == expected[i].demographics.income_value);
            CHECK(loaded[i].ballots.size() == 15);
            CHECK(loaded[i].trolley == expected[i].trolley);
        }
    }
    CHECK_THROWS_AS(load_dataset(dir.path / "missing"), IoError);
}

TEST_CASE("crash-replay equivalence", "[platform][events][property]") {
    TempDir dir("replay");
    StudyConfig config;
    config.event_log = dir.path / "events.jsonl";
    {
        SurveyService svc(config, std::make_shared<EventStore>(config.event_log));
        for (int i = 0; i < 3; ++i) testing::complete_session(svc, svc.create_session().session_id);
        const auto id = svc.create_session(ArmId::low).session_id;
        pass_checks(svc, id);
        export_dataset(svc.snapshot(), config, dir.path / "live");
    }
    const std::string text = slurp(config.event_log);
    const auto records = parse_event_log(text);

    // Every prefix replays, and the per-session progress never goes backwards.
    std::map<std::string, std::size_t> progress;
    std::size_t offset = 0;
    for (std::size_t k = 0; k <= records.size(); ++k) {
        const auto cut = dir.path / "cut.jsonl";
        std::ofstream(cut, std::ios::binary | std::ios::trunc) << text.substr(0, offset);
        SurveyService svc(config, std::make_shared<EventStore>(cut));
        const auto state = svc.snapshot();
        for (const auto& [id, s] : state.sessions) {
            const std::size_t p = s.answered.size();
            CHECK(p >= progress[id]);
            progress[id] = p;
        }
        if (k < records.size()) offset = text.find('\n', offset) + 1;
    }

    SurveyService restored(config, std::make_shared<EventStore>(config.event_log));
    export_dataset(restored.snapshot(), config, dir.path / "replayed");
    CHECK(slurp(dir.path / "live" / "ballots.jsonl") == slurp(dir.path / "replayed" / "ballots.jsonl"));
    CHECK(slurp(dir.path / "live" / "respondents.jsonl") == slurp(dir.path / "replayed" / "respondents.jsonl"));
    CHECK(restored.next_item(restored.snapshot().order.back())["item_id"] == "pair-1");
    CHECK(restored.create_session().session_id != restored.snapshot().order.front());
}

TEST_CASE("cohort mix parsing", "[platform][cohort]") {
    CHECK(CohortMix::parse("0.4-efficiency/0.6-parity").efficiency == 0.4);
    CHECK(CohortMix::parse("0.7-parity/0.3-efficiency").efficiency == Catch::Approx(0.3));
    CHECK(CohortMix::parse("1-efficiency").efficiency == 1.0);
    CHECK(CohortMix::parse(CohortMix{0.25}.to_string()).efficiency == 0.25);
    CHECK_THROWS_AS(CohortMix::parse("0.4-efficiency/0.5-parity"), ValidationError);
    CHECK_THROWS_AS(CohortMix::parse("0.4-greed/0.6-parity"), ValidationError);
    CHECK_THROWS_AS(CohortMix::parse("x-efficiency"), ValidationError);
    CHECK_THROWS_AS(CohortMix::parse("0.4efficiency"), ValidationError);
}

TEST_CASE("planted choices follow their rule", "[platform][cohort]") {
    const auto f = frontier::build_frontier(frontier::default_high_arm());
    const auto pairs = elicitation::enumerate_pairs(6);
    std::vector<elicitation::PairwiseBallot> eff, par;
    for (const auto& p : pairs) {
        eff.push_back({"e", ArmId::high, p, planted_choice(RespondentType::efficiency, f, 0.23, p.first, p.second), 0});
        par.push_back({"p", ArmId::high, p, planted_choice(RespondentType::parity, f, 0.23, p.first, p.second), 0});
    }
    CHECK(elicitation::modal_preference(eff, f) == 0);
    CHECK(elicitation::modal_preference(par, f) == 2);
}

TEST_CASE("synthesized cohort carries the planted mix", "[platform][cohort]") {
    SurveyService svc(StudyConfig{}, memory_store());
    CohortOptions opt;
    opt.n = 80;
    const auto summary = synthesize_cohort(svc, analysis::product_table({}), opt);
    CHECK(summary.sessions_by_arm.at("high") == 40);
    CHECK(summary.sessions_by_arm.at("low") == 40);
    auto rs = svc.respondents();
    REQUIRE(rs.size() == 80);
    analysis::annotate(rs, svc.config().arms);
    for (const auto& [party, share] : summary.planted_by_party) {
        Subgroup g;
        g.party = parse_category<Party>(party);
        CHECK(analysis::raw_preference_share(rs, g, analysis::Selector::pairwise) == Catch::Approx(share));
        CHECK(analysis::raw_preference_share(rs, g, analysis::Selector::ideology) == Catch::Approx(share));
        CHECK(analysis::raw_preference_share(rs, g, analysis::Selector::trolley) == Catch::Approx(share));
    }
    CHECK_THROWS_AS(synthesize_cohort(svc, analysis::product_table({}), CohortOptions{0}), ValidationError);
}

TEST_CASE("pipeline checks cell weights before reading data", "[platform][pipeline]") {
    StudyConfig config;
    try {
        run_pipeline(config, "/nonexistent/dataset");
        FAIL("expected a configuration error");
    } catch (const ConfigError& ex) {
        CHECK(std::string(ex.what()).rfind("[config]", 0) == 0);
    }
}

TEST_CASE("pipeline end to end on a one-arm cohort", "[platform][pipeline]") {
    TempDir dir("pipeline");
    std::ofstream(dir.path / "cells.csv") << analysis::product_table({}).to_csv();
    StudyConfig config;
    config.cell_weights = dir.path / "cells.csv";
    SurveyService svc(config, memory_store());
    CohortOptions opt;
    opt.n = 120;
    opt.arms = {ArmId::high};
    synthesize_cohort(svc, analysis::product_table({}), opt);
    export_dataset(svc.snapshot(), config, dir.path / "data");

    PipelineOptions p;
    p.bootstrap = 20;
    p.output_dir = dir.path / "out";
    const auto report = run_pipeline(config, dir.path / "data", p);
    CHECK(report.respondents == 120);
    CHECK(std::filesystem::exists(dir.path / "out" / "summary.json"));
    CHECK(std::filesystem::exists(dir.path / "out" / "model_prefers_efficient.txt"));
    CHECK_FALSE(report.notes.empty());

    const std::string winrates = slurp(dir.path / "out" / "winrates.csv");
    std::istringstream lines(winrates);
    std::string line;
    std::getline(lines, line);
    CHECK(line.rfind("arm,party,stratum,option", 0) == 0);
    int rows = 0;
    while (std::getline(lines, line)) {
        CHECK(line.rfind("high,", 0) == 0);
        ++rows;
    }
    CHECK(rows > 0);
    CHECK(rows % 6 == 0);

    const auto summary = json::parse(slurp(dir.path / "out" / "summary.json"));
    CHECK(summary["respondents"] == 120);
}

TEST_CASE("pipeline labels load failures", "[platform][pipeline]") {
    TempDir dir("corrupt");
    std::ofstream(dir.path / "cells.csv") << analysis::product_table({}).to_csv();
    std::filesystem::create_directories(dir.path / "data");
    std::ofstream(dir.path / "data" / "ballots.jsonl") << "{broken\n";
    std::ofstream(dir.path / "data" / "respondents.jsonl") << "";
    StudyConfig config;
    config.cell_weights = dir.path / "cells.csv";
    PipelineOptions p;
    p.output_dir = dir.path / "out";
    try {
        run_pipeline(config, dir.path / "data", p);
        FAIL("expected a load error");
    } catch (const Error& ex) {
        CHECK(std::string(ex.what()).rfind("[load]", 0) == 0);
    }
}

TEST_CASE("incomplete respondents load as ineligible", "[platform][export]") {
    TempDir dir("incomplete");
    SurveyService svc(StudyConfig{}, memory_store());
    testing::complete_session(svc, svc.create_session(ArmId::high).session_id);
    const auto open_id = svc.create_session(ArmId::high).session_id;
    pass_checks(svc, open_id);
    ExportOptions all;
    all.include_incomplete = true;
    export_dataset(svc.snapshot(), svc.config(), dir.path, all);
    const auto rs = load_dataset(dir.path);
    REQUIRE(rs.size() == 2);
    CHECK(rs[0].eligible);
    CHECK_FALSE(rs[1].eligible);
}

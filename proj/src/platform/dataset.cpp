#include "fairalloc/platform/dataset.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "fairalloc/errors.hpp"

namespace fairalloc::platform {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

const std::vector<std::string> kBallotFields{"respondent_id", "arm", "option_a", "option_b", "choice", "order"};
const std::vector<std::string> kRespondentFields{
    "respondent_id", "arm",       "gender",          "age_group",    "party",       "race",
    "religion",      "education", "income",          "age_value",    "education_value", "income_value",
    "eligibility",   "modal_option", "ideology_choice", "trolley_choice"};
const std::set<std::string> kNumericFields{"option_a",        "option_b",     "choice",      "order", "age_value",
                                           "education_value", "income_value", "modal_option"};

ordered_json ballot_record(const elicitation::PairwiseBallot& b) {
    ordered_json j;
    j["respondent_id"] = b.respondent_id;
    j["arm"] = frontier::to_string(b.arm);
    j["option_a"] = b.pair.first;
    j["option_b"] = b.pair.second;
    j["choice"] = b.choice;
    j["order"] = b.presentation_order;
    return j;
}

ordered_json respondent_record(const elicitation::Session& s, const StudyConfig& config) {
    ordered_json j;
    j["respondent_id"] = s.respondent_id();
    j["arm"] = frontier::to_string(s.arm());
    if (const auto& d = s.demographics()) {
        j["gender"] = name_of(d->cell.gender);
        j["age_group"] = name_of(d->cell.age_group);
        j["party"] = name_of(d->cell.party);
        j["race"] = name_of(d->cell.race);
        j["religion"] = name_of(d->cell.religion);
        j["education"] = name_of(d->cell.education);
        j["income"] = name_of(d->cell.income);
        j["age_value"] = d->age_value;
        j["education_value"] = d->education_value;
        j["income_value"] = d->income_value;
    } else {
        for (std::size_t k = 2; k < 12; ++k) j[kRespondentFields[k]] = nullptr;
    }
    j["eligibility"] = elicitation::to_string(s.eligibility());
    if (s.ballots_complete()) {
        j["modal_option"] = elicitation::modal_preference(s.ballots(), frontier::build_frontier(config.arm(s.arm())));
    } else {
        j["modal_option"] = nullptr;
    }
    j["ideology_choice"] = s.ideology() ? json(elicitation::to_string(*s.ideology())) : json(nullptr);
    j["trolley_choice"] = s.trolley() ? json(elicitation::to_string(*s.trolley())) : json(nullptr);
    return j;
}

std::string csv_cell(const ordered_json& v) {
    if (v.is_null()) return "";
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
}

void write_records(const fs::path& path, ExportFormat format, const std::vector<std::string>& fields,
                   const std::vector<ordered_json>& records) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    if (format == ExportFormat::csv) {
        for (std::size_t k = 0; k < fields.size(); ++k) out << (k ? "," : "") << fields[k];
        out << '\n';
        for (const auto& r : records) {
            for (std::size_t k = 0; k < fields.size(); ++k) out << (k ? "," : "") << csv_cell(r.at(fields[k]));
            out << '\n';
        }
    } else {
        for (const auto& r : records) out << r.dump() << '\n';
    }
    out.close();
    if (!out) throw IoError("cannot write " + path.string());
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::vector<json> read_records(const fs::path& path, ExportFormat format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::vector<json> out;
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    try {
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            if (format == ExportFormat::jsonl) {
                out.push_back(json::parse(line));
                continue;
            }
            if (header.empty()) {
                header = split_csv_line(line);
                continue;
            }
            const auto cells = split_csv_line(line);
            if (cells.size() != header.size()) throw ValidationError("wrong number of fields");
            json r = json::object();
            for (std::size_t k = 0; k < header.size(); ++k) {
                if (cells[k].empty()) {
                    r[header[k]] = nullptr;
                } else if (kNumericFields.count(header[k])) {
                    r[header[k]] = json::parse(cells[k]);
                } else {
                    r[header[k]] = cells[k];
                }
            }
            out.push_back(std::move(r));
        }
    } catch (const std::exception& ex) {
        throw ValidationError(path.string() + " line " + std::to_string(line_no) + ": " + ex.what());
    }
    return out;
}

analysis::Respondent respondent_from_record(const json& j) {
    analysis::Respondent r;
    r.id = j.at("respondent_id").get<std::string>();
    r.arm = frontier::arm_from_string(j.at("arm").get<std::string>());
    r.eligible = elicitation::eligibility_from_string(j.at("eligibility").get<std::string>()) ==
                 elicitation::Eligibility::eligible;
    // Incomplete exports carry no demographics; they cannot enter a model.
    if (j.at("gender").is_null()) {
        r.eligible = false;
    } else {
        r.demographics = demographics_from_json(j);
    }
    if (!j.at("ideology_choice").is_null()) {
        r.ideology = elicitation::ideology_from_string(j.at("ideology_choice").get<std::string>());
    }
    if (!j.at("trolley_choice").is_null()) {
        r.trolley = elicitation::trolley_from_string(j.at("trolley_choice").get<std::string>());
    }
    return r;
}

}  // namespace

ExportFormat export_format_from_string(std::string_view s) {
    if (s == "jsonl") return ExportFormat::jsonl;
    if (s == "csv") return ExportFormat::csv;
    throw ValidationError("export format must be 'jsonl' or 'csv'");
}

std::string_view extension(ExportFormat f) { return f == ExportFormat::csv ? ".csv" : ".jsonl"; }

json ExportSummary::to_json() const {
    return {{"ballots_path", ballots_path.string()},
            {"respondents_path", respondents_path.string()},
            {"ballots", ballots},
            {"respondents", respondents}};
}

ExportSummary export_dataset(const SurveyState& state, const StudyConfig& config, const fs::path& out_dir,
                             const ExportOptions& options) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

    std::vector<ordered_json> ballots;
    std::vector<ordered_json> respondents;
    for (const auto& id : state.order) {
        const auto& s = state.sessions.at(id).session;
        const bool complete = s.stage() == elicitation::Stage::done && s.demographics().has_value();
        if (!complete && !options.include_incomplete) continue;
        respondents.push_back(respondent_record(s, config));
        for (const auto& b : s.ballots()) ballots.push_back(ballot_record(b));
    }

    ExportSummary summary;
    summary.ballots_path = out_dir / ("ballots" + std::string(extension(options.format)));
    summary.respondents_path = out_dir / ("respondents" + std::string(extension(options.format)));
    write_records(summary.ballots_path, options.format, kBallotFields, ballots);
    write_records(summary.respondents_path, options.format, kRespondentFields, respondents);
    summary.ballots = ballots.size();
    summary.respondents = respondents.size();
    return summary;
}

ExportSummary export_dataset(const EventStore& store, const StudyConfig& config, const fs::path& out_dir,
                             const ExportOptions& options) {
    return export_dataset(replay(store.records(), config), config, out_dir, options);
}

std::vector<analysis::Respondent> load_dataset(const fs::path& dir) {
    ExportFormat format = ExportFormat::jsonl;
    std::error_code ec;
    if (!fs::exists(dir / "respondents.jsonl", ec) && fs::exists(dir / "respondents.csv", ec)) {
        format = ExportFormat::csv;
    }
    const std::string ext(extension(format));
    const fs::path rpath = dir / ("respondents" + ext);
    const fs::path bpath = dir / ("ballots" + ext);

    std::vector<analysis::Respondent> out;
    std::map<std::string, std::size_t> index;
    for (const auto& rec : read_records(rpath, format)) {
        try {
            auto r = respondent_from_record(rec);
            if (!index.emplace(r.id, out.size()).second) throw ValidationError("duplicate respondent " + r.id);
            out.push_back(std::move(r));
        } catch (const json::exception& ex) {
            throw ValidationError(rpath.string() + ": " + ex.what());
        } catch (const ValidationError& ex) {
            throw ValidationError(rpath.string() + ": " + ex.what());
        }
    }
    for (const auto& rec : read_records(bpath, format)) {
        try {
            const auto b = elicitation::ballot_from_json(rec);
            auto it = index.find(b.respondent_id);
            if (it == index.end()) throw ValidationError("ballot for unknown respondent " + b.respondent_id);
            auto& r = out[it->second];
            if (b.arm != r.arm) throw ValidationError("ballot arm differs from respondent " + b.respondent_id);
            r.ballots.push_back(b);
        } catch (const ValidationError& ex) {
            throw ValidationError(bpath.string() + ": " + ex.what());
        }
    }
    return out;
}

}  // namespace fairalloc::platform

#include "fairalloc/analysis/poststratification.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "fairalloc/errors.hpp"

namespace fairalloc::analysis {

namespace {

constexpr const char* kHeader = "age_group,education,gender,income,party,race,religion,weight";

void check_weights(const std::vector<CellTable::Entry>& entries) {
    double sum = 0.0;
    for (const auto& e : entries) {
        if (!std::isfinite(e.weight) || e.weight < 0.0) {
            throw ValidationError("cell weights must be finite and non-negative");
        }
        sum += e.weight;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "cell weights sum to %.12f, expected 1 within 1e-9", sum);
        throw ValidationError(buf);
    }
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) {
        const auto b = field.find_first_not_of(" \t");
        const auto e = field.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? std::string{} : field.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

CellTable CellTable::from_entries(std::vector<Entry> entries) {
    check_weights(entries);
    return CellTable(std::move(entries));
}

CellTable CellTable::uniform() {
    std::vector<Entry> entries;
    entries.reserve(kCellCount);
    for (std::size_t i = 0; i < kCellCount; ++i) {
        entries.push_back({Cell::from_index(i), 1.0 / static_cast<double>(kCellCount)});
    }
    return from_entries(std::move(entries));
}

CellTable CellTable::parse(const std::string& text, std::vector<std::string>* warnings) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("cell-weight file is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kHeader) {
        throw ValidationError(std::string("cell-weight header must be '") + kHeader + "'");
    }
    std::vector<Entry> entries;
    std::set<std::size_t> seen;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto f = split_csv(line);
        if (f.size() != 8) {
            throw ValidationError("cell-weight line " + std::to_string(lineno) + ": expected 8 fields");
        }
        try {
            Entry e;
            e.cell.age_group = parse_category<AgeGroup>(f[0]);
            e.cell.education = parse_category<Education>(f[1]);
            e.cell.gender = parse_category<Gender>(f[2]);
            e.cell.income = parse_category<Income>(f[3]);
            e.cell.party = parse_category<Party>(f[4]);
            e.cell.race = parse_category<Race>(f[5]);
            e.cell.religion = parse_category<Religion>(f[6]);
            std::size_t used = 0;
            e.weight = std::stod(f[7], &used);
            if (used != f[7].size()) throw ValidationError("bad weight '" + f[7] + "'");
            if (!seen.insert(e.cell.index()).second) throw ValidationError("duplicate cell");
            entries.push_back(e);
        } catch (const ValidationError& ex) {
            throw ValidationError("cell-weight line " + std::to_string(lineno) + ": " + ex.what());
        } catch (const std::logic_error&) {
            throw ValidationError("cell-weight line " + std::to_string(lineno) + ": bad weight '" + f[7] + "'");
        }
    }
    if (warnings && seen.size() < kCellCount) {
        warnings->push_back(std::to_string(kCellCount - seen.size()) +
                            " cell(s) missing from the weight table; treated as weight 0");
    }
    return from_entries(std::move(entries));
}

CellTable CellTable::load(const std::string& path, std::vector<std::string>* warnings) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open cell-weight file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse(buf.str(), warnings);
    } catch (const ValidationError& ex) {
        throw ValidationError(path + ": " + ex.what());
    }
}

std::string CellTable::to_csv() const {
    std::ostringstream out;
    out << kHeader << '\n';
    char w[40];
    for (const auto& e : entries_) {
        const Cell& c = e.cell;
        std::snprintf(w, sizeof w, "%.17g", e.weight);
        out << name_of(c.age_group) << ',' << name_of(c.education) << ',' << name_of(c.gender) << ','
            << name_of(c.income) << ',' << name_of(c.party) << ',' << name_of(c.race) << ','
            << name_of(c.religion) << ',' << w << '\n';
    }
    return out.str();
}

double CellTable::total_weight() const {
    return std::accumulate(entries_.begin(), entries_.end(), 0.0,
                           [](double s, const Entry& e) { return s + e.weight; });
}

CellSampler::CellSampler(const CellTable& table) {
    std::vector<double> w;
    for (const auto& e : table.entries()) {
        cells_.push_back(e.cell);
        w.push_back(e.weight);
    }
    pick_ = std::discrete_distribution<std::size_t>(w.begin(), w.end());
}

Cell CellSampler::operator()(Rng& rng) const { return cells_[pick_(rng)]; }

CellTable product_table(const Marginals& m) {
    auto check = [](const std::vector<double>& v, std::size_t n, const char* name) {
        if (v.size() != n) throw ValidationError(std::string("marginal '") + name + "' has wrong length");
        double s = 0.0;
        for (double x : v) {
            if (x < 0.0) throw ValidationError(std::string("marginal '") + name + "' is negative");
            s += x;
        }
        if (std::abs(s - 1.0) > 1e-9) throw ValidationError(std::string("marginal '") + name + "' must sum to 1");
    };
    check(m.age_group, Vocabulary<AgeGroup>::size, "age_group");
    check(m.education, Vocabulary<Education>::size, "education");
    check(m.gender, Vocabulary<Gender>::size, "gender");
    check(m.income, Vocabulary<Income>::size, "income");
    check(m.party, Vocabulary<Party>::size, "party");
    check(m.race, Vocabulary<Race>::size, "race");
    check(m.religion, Vocabulary<Religion>::size, "religion");

    std::vector<CellTable::Entry> entries;
    entries.reserve(kCellCount);
    double total = 0.0;
    for (std::size_t i = 0; i < kCellCount; ++i) {
        const Cell c = Cell::from_index(i);
        auto at = [](const std::vector<double>& v, auto e) { return v[static_cast<std::size_t>(e)]; };
        const double w = at(m.age_group, c.age_group) * at(m.education, c.education) *
                         at(m.gender, c.gender) * at(m.income, c.income) * at(m.party, c.party) *
                         at(m.race, c.race) * at(m.religion, c.religion);
        entries.push_back({c, w});
        total += w;
    }
    for (auto& e : entries) e.weight /= total;
    return CellTable::from_entries(std::move(entries));
}

double predict_cell(const FittedModel& model, const Cell& cell, std::optional<ArmId> arm,
                    const CellRepresentatives& reps) {
    if (!model.converged) throw ValidationError("model did not converge; predictions are undefined");
    const ColumnEncoder enc(model.columns);
    return logistic(enc.dot(model.coefficients, reps.at(cell), arm));
}

Poststratifier::Poststratifier(const std::vector<std::string>& columns, const CellTable& cells,
                               const Subgroup& subgroup, std::optional<ArmId> arm, const CellRepresentatives& reps)
    : columns_(columns) {
    const ColumnEncoder enc(columns);
    std::vector<const CellTable::Entry*> kept;
    for (const auto& e : cells.entries()) {
        if (e.weight > 0.0 && subgroup.matches(e.cell)) kept.push_back(&e);
    }
    if (kept.empty()) throw ValidationError("subgroup '" + subgroup.to_string() + "' carries no population weight");
    const auto n = static_cast<Eigen::Index>(kept.size());
    const auto p = static_cast<Eigen::Index>(columns.size());
    x_.resize(n, p);
    w_.resize(n);
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& e = *kept[static_cast<std::size_t>(i)];
        const Demographics d = reps.at(e.cell);
        for (Eigen::Index j = 0; j < p; ++j) x_(i, j) = enc.value(static_cast<std::size_t>(j), d, arm);
        w_(i) = e.weight;
        total += e.weight;
    }
    w_ /= total;
}

double Poststratifier::operator()(const Eigen::VectorXd& beta) const {
    if (beta.size() != x_.cols()) throw ValidationError("coefficient count does not match the columns");
    const Eigen::VectorXd eta = x_ * beta;
    // Deviations from the first prediction are accumulated, so a model that
    // predicts the same value everywhere returns that value exactly.
    const double reference = logistic(eta(0));
    double weighted = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) weighted += w_(i) * (logistic(eta(i)) - reference);
    return reference + weighted;
}

double Poststratifier::operator()(const FittedModel& model) const {
    if (!model.converged) throw ValidationError("model did not converge; cannot poststratify");
    if (model.columns != columns_) throw ValidationError("model columns do not match the poststratifier");
    return (*this)(model.coefficients);
}

double poststratify(const FittedModel& model, const CellTable& cells, const Subgroup& subgroup,
                    std::optional<ArmId> arm, const CellRepresentatives& reps) {
    if (!model.converged) throw ValidationError("model did not converge; cannot poststratify");
    return Poststratifier(model.columns, cells, subgroup, arm, reps)(model);
}

}  // namespace fairalloc::analysis

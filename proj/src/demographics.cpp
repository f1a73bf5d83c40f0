#include "fairalloc/demographics.hpp"

#include <cmath>

namespace fairalloc {

using nlohmann::json;

namespace {

template <class E>
constexpr std::size_t radix() {
    return Vocabulary<E>::size;
}

}  // namespace

std::size_t Cell::index() const {
    std::size_t i = static_cast<std::size_t>(age_group);
    i = i * radix<Education>() + static_cast<std::size_t>(education);
    i = i * radix<Gender>() + static_cast<std::size_t>(gender);
    i = i * radix<Income>() + static_cast<std::size_t>(income);
    i = i * radix<Party>() + static_cast<std::size_t>(party);
    i = i * radix<Race>() + static_cast<std::size_t>(race);
    i = i * radix<Religion>() + static_cast<std::size_t>(religion);
    return i;
}

Cell Cell::from_index(std::size_t index) {
    if (index >= kCellCount) throw DomainError("cell index out of range");
    Cell c;
    c.religion = static_cast<Religion>(index % radix<Religion>());
    index /= radix<Religion>();
    c.race = static_cast<Race>(index % radix<Race>());
    index /= radix<Race>();
    c.party = static_cast<Party>(index % radix<Party>());
    index /= radix<Party>();
    c.income = static_cast<Income>(index % radix<Income>());
    index /= radix<Income>();
    c.gender = static_cast<Gender>(index % radix<Gender>());
    index /= radix<Gender>();
    c.education = static_cast<Education>(index % radix<Education>());
    index /= radix<Education>();
    c.age_group = static_cast<AgeGroup>(index);
    return c;
}

std::vector<Cell> all_cells() {
    std::vector<Cell> cells;
    cells.reserve(kCellCount);
    for (std::size_t i = 0; i < kCellCount; ++i) cells.push_back(Cell::from_index(i));
    return cells;
}

void Demographics::validate() const {
    if (!(age_value >= 18.0 && age_value < 120.0)) throw ValidationError("age_value out of range");
    if (!(education_value >= 1.0 && education_value <= 4.0)) {
        throw ValidationError("education_value must be an ordinal level in [1,4]");
    }
    if (!(income_value > 0.0)) throw ValidationError("income_value must be positive");
}

Demographics CellRepresentatives::at(const Cell& c) const {
    Demographics d;
    d.cell = c;
    d.age_value = age[static_cast<std::size_t>(c.age_group)];
    d.education_value = education[static_cast<std::size_t>(c.education)];
    d.income_value = income[static_cast<std::size_t>(c.income)];
    return d;
}

AgeGroup age_group_for(double age) {
    if (age < 30.0) return AgeGroup::age_18_29;
    if (age < 45.0) return AgeGroup::age_30_44;
    if (age < 65.0) return AgeGroup::age_45_64;
    return AgeGroup::age_65_plus;
}

Education education_for(double level) {
    const long l = std::lround(level);
    if (l <= 1) return Education::hs_or_less;
    if (l == 2) return Education::some_college;
    if (l == 3) return Education::bachelors;
    return Education::postgrad;
}

Income income_for(double dollars) {
    if (dollars < 50000.0) return Income::under_50k;
    if (dollars < 100000.0) return Income::from_50k_to_100k;
    return Income::over_100k;
}

Demographics draw_within_cell(const Cell& cell, Rng& rng) {
    static constexpr double kAgeBounds[] = {18.0, 30.0, 45.0, 65.0, 90.0};
    static constexpr double kIncomeBounds[] = {15000.0, 50000.0, 100000.0, 250000.0};
    const auto a = static_cast<std::size_t>(cell.age_group);
    const auto i = static_cast<std::size_t>(cell.income);
    Demographics d;
    d.cell = cell;
    d.age_value = std::floor(std::uniform_real_distribution<double>(kAgeBounds[a], kAgeBounds[a + 1])(rng));
    d.education_value = static_cast<double>(static_cast<int>(cell.education) + 1);
    d.income_value = std::exp(std::uniform_real_distribution<double>(std::log(kIncomeBounds[i]),
                                                                     std::log(kIncomeBounds[i + 1]))(rng));
    return d;
}

json to_json(const Demographics& d) {
    const Cell& c = d.cell;
    return {{"gender", name_of(c.gender)},       {"age_group", name_of(c.age_group)},
            {"party", name_of(c.party)},         {"race", name_of(c.race)},
            {"religion", name_of(c.religion)},   {"education", name_of(c.education)},
            {"income", name_of(c.income)},       {"age_value", d.age_value},
            {"education_value", d.education_value}, {"income_value", d.income_value}};
}

Demographics demographics_from_json(const json& j) {
    try {
        Demographics d;
        d.cell.gender = parse_category<Gender>(j.at("gender").get<std::string>());
        d.cell.age_group = parse_category<AgeGroup>(j.at("age_group").get<std::string>());
        d.cell.party = parse_category<Party>(j.at("party").get<std::string>());
        d.cell.race = parse_category<Race>(j.at("race").get<std::string>());
        d.cell.religion = parse_category<Religion>(j.at("religion").get<std::string>());
        d.cell.education = parse_category<Education>(j.at("education").get<std::string>());
        d.cell.income = parse_category<Income>(j.at("income").get<std::string>());
        d.age_value = j.at("age_value").get<double>();
        d.education_value = j.at("education_value").get<double>();
        d.income_value = j.at("income_value").get<double>();
        d.validate();
        return d;
    } catch (const json::exception& ex) {
        throw ValidationError(std::string("malformed demographics: ") + ex.what());
    }
}

bool Subgroup::matches(const Cell& c) const {
    return (!age_group || *age_group == c.age_group) && (!education || *education == c.education) &&
           (!gender || *gender == c.gender) && (!income || *income == c.income) &&
           (!party || *party == c.party) && (!race || *race == c.race) &&
           (!religion || *religion == c.religion);
}

bool Subgroup::empty() const {
    return !age_group && !education && !gender && !income && !party && !race && !religion;
}

Subgroup Subgroup::parse(std::string_view text) {
    Subgroup s;
    if (text.empty() || text == "all") return s;
    while (!text.empty()) {
        const auto comma = text.find(',');
        const std::string_view term = text.substr(0, comma);
        text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
        const auto eq = term.find('=');
        if (eq == std::string_view::npos) {
            throw ValidationError("subgroup term must be field=value: '" + std::string(term) + "'");
        }
        const std::string_view field = term.substr(0, eq);
        const std::string_view value = term.substr(eq + 1);
        if (field == "age_group") s.age_group = parse_category<AgeGroup>(value);
        else if (field == "education") s.education = parse_category<Education>(value);
        else if (field == "gender") s.gender = parse_category<Gender>(value);
        else if (field == "income") s.income = parse_category<Income>(value);
        else if (field == "party") s.party = parse_category<Party>(value);
        else if (field == "race") s.race = parse_category<Race>(value);
        else if (field == "religion") s.religion = parse_category<Religion>(value);
        else throw ValidationError("unknown subgroup field: '" + std::string(field) + "'");
    }
    return s;
}

std::string Subgroup::to_string() const {
    std::string out;
    auto add = [&out](std::string_view field, std::string_view value) {
        if (!out.empty()) out += ',';
        out += field;
        out += '=';
        out += value;
    };
    if (age_group) add("age_group", name_of(*age_group));
    if (education) add("education", name_of(*education));
    if (gender) add("gender", name_of(*gender));
    if (income) add("income", name_of(*income));
    if (party) add("party", name_of(*party));
    if (race) add("race", name_of(*race));
    if (religion) add("religion", name_of(*religion));
    return out.empty() ? "all" : out;
}

}  // namespace fairalloc

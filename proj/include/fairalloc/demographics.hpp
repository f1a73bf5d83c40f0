#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fairalloc/errors.hpp"
#include "fairalloc/random.hpp"

namespace fairalloc {

enum class AgeGroup { age_18_29, age_30_44, age_45_64, age_65_plus };
enum class Education { hs_or_less, some_college, bachelors, postgrad };
enum class Gender { male, not_male };
enum class Income { under_50k, from_50k_to_100k, over_100k };
enum class Party { democrat, republican };
enum class Race { white, hispanic, black, asian, other_poc };
enum class Religion { none, catholic, other_christian, other_religion };

template <class E>
struct Vocabulary;

#define FAIRALLOC_VOCAB(E, FIELD, ...)                                           \
    template <>                                                                  \
    struct Vocabulary<E> {                                                       \
        static constexpr std::string_view field = FIELD;                         \
        static constexpr std::array names{__VA_ARGS__};                          \
        static constexpr std::size_t size = names.size();                        \
    };

FAIRALLOC_VOCAB(AgeGroup, "age_group", std::string_view{"18-29"}, std::string_view{"30-44"},
                std::string_view{"45-64"}, std::string_view{"65+"})
FAIRALLOC_VOCAB(Education, "education", std::string_view{"hs_or_less"},
                std::string_view{"some_college"}, std::string_view{"bachelors"},
                std::string_view{"postgrad"})
FAIRALLOC_VOCAB(Gender, "gender", std::string_view{"male"}, std::string_view{"not_male"})
FAIRALLOC_VOCAB(Income, "income", std::string_view{"under_50k"}, std::string_view{"50k_100k"},
                std::string_view{"over_100k"})
FAIRALLOC_VOCAB(Party, "party", std::string_view{"democrat"}, std::string_view{"republican"})
FAIRALLOC_VOCAB(Race, "race", std::string_view{"white"}, std::string_view{"hispanic"},
                std::string_view{"black"}, std::string_view{"asian"}, std::string_view{"other_poc"})
FAIRALLOC_VOCAB(Religion, "religion", std::string_view{"none"}, std::string_view{"catholic"},
                std::string_view{"other_christian"}, std::string_view{"other_religion"})

#undef FAIRALLOC_VOCAB

template <class E>
constexpr std::string_view name_of(E value) {
    return Vocabulary<E>::names[static_cast<std::size_t>(value)];
}

template <class E>
E parse_category(std::string_view text) {
    const auto& names = Vocabulary<E>::names;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == text) return static_cast<E>(i);
    }
    throw ValidationError("unknown " + std::string(Vocabulary<E>::field) + " category: '" +
                          std::string(text) + "'");
}

/// One combination of the seven discrete variables used for poststratification.
struct Cell {
    AgeGroup age_group = AgeGroup::age_18_29;
    Education education = Education::hs_or_less;
    Gender gender = Gender::male;
    Income income = Income::under_50k;
    Party party = Party::democrat;
    Race race = Race::white;
    Religion religion = Religion::none;

    /// Mixed-radix index in [0, kCellCount), field order as in the cell-weight file.
    std::size_t index() const;
    static Cell from_index(std::size_t index);

    friend bool operator==(const Cell&, const Cell&) = default;
};

inline constexpr std::size_t kCellCount = 4 * 4 * 2 * 3 * 2 * 5 * 4;
static_assert(kCellCount == 3840);

std::vector<Cell> all_cells();

/// Respondent covariates: discrete buckets plus the continuous values the
/// regression uses.
struct Demographics {
    Cell cell;
    double age_value = 0.0;
    double education_value = 1.0;
    double income_value = 1.0;

    void validate() const;
};

/// Continuous covariate values assigned to a cell when predicting.
struct CellRepresentatives {
    std::array<double, 4> age{24.0, 37.0, 55.0, 72.0};
    std::array<double, 4> education{1.0, 2.0, 3.0, 4.0};
    /// Geometric midpoints of $15k-50k, $50k-100k, $100k-250k.
    std::array<double, 3> income{27386.127875258, 70710.678118655, 158113.883008419};

    Demographics at(const Cell& c) const;
};

/// Bucket for a continuous age/education/income value, using the same
/// boundaries the representatives describe.
AgeGroup age_group_for(double age);
Education education_for(double level);
Income income_for(double dollars);

/// Continuous values drawn inside the cell's buckets: age uniform over the
/// group (65+ capped at 90), education at its level, income log-uniform over
/// the bracket.
Demographics draw_within_cell(const Cell& cell, Rng& rng);

nlohmann::json to_json(const Demographics& d);
Demographics demographics_from_json(const nlohmann::json& j);

/// Optional restriction on any of the seven discrete variables.
struct Subgroup {
    std::optional<AgeGroup> age_group;
    std::optional<Education> education;
    std::optional<Gender> gender;
    std::optional<Income> income;
    std::optional<Party> party;
    std::optional<Race> race;
    std::optional<Religion> religion;

    bool matches(const Cell& c) const;
    bool empty() const;
    /// "all" or "" for no restriction, else "field=value[,field=value...]".
    static Subgroup parse(std::string_view text);
    std::string to_string() const;
};

}  // namespace fairalloc

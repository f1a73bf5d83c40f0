#pragma once

#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "fairalloc/analysis/logistic.hpp"
#include "fairalloc/demographics.hpp"

namespace fairalloc::analysis {

/// Population share per demographic cell. Entries may repeat a cell (a cell
/// split in two contributes the sum of its parts).
class CellTable {
public:
    struct Entry {
        Cell cell;
        double weight = 0.0;
    };

    /// Validates non-negative weights summing to 1 within 1e-9.
    static CellTable from_entries(std::vector<Entry> entries);
    static CellTable uniform();

    /// Cell-weight file: header age_group,education,gender,income,party,race,religion,weight.
    /// Cells absent from the file get weight 0; their count is reported in `warnings`.
    static CellTable load(const std::string& path, std::vector<std::string>* warnings = nullptr);
    static CellTable parse(const std::string& text, std::vector<std::string>* warnings = nullptr);
    std::string to_csv() const;

    const std::vector<Entry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    double total_weight() const;

private:
    explicit CellTable(std::vector<Entry> entries) : entries_(std::move(entries)) {}
    std::vector<Entry> entries_;
};

/// Draws cells in proportion to their table weight.
class CellSampler {
public:
    explicit CellSampler(const CellTable& table);
    Cell operator()(Rng& rng) const;

private:
    std::vector<Cell> cells_;
    mutable std::discrete_distribution<std::size_t> pick_;
};

/// Synthetic population: independent marginals for each variable. Each vector
/// must match the category count and sum to 1.
struct Marginals {
    std::vector<double> age_group{0.20, 0.26, 0.34, 0.20};
    std::vector<double> education{0.38, 0.28, 0.21, 0.13};
    std::vector<double> gender{0.48, 0.52};
    std::vector<double> income{0.45, 0.32, 0.23};
    std::vector<double> party{0.50, 0.50};
    std::vector<double> race{0.62, 0.17, 0.12, 0.06, 0.03};
    std::vector<double> religion{0.26, 0.21, 0.43, 0.10};
};
CellTable product_table(const Marginals& m);

/// Logistic inverse link at the cell's representative covariates.
/// `arm` sets the arm indicators (baseline when empty).
double predict_cell(const FittedModel& model, const Cell& cell, std::optional<ArmId> arm = std::nullopt,
                    const CellRepresentatives& reps = {});

/// Cell encodings for one column set, subgroup and arm, computed once so that
/// many coefficient vectors can be poststratified cheaply.
class Poststratifier {
public:
    Poststratifier(const std::vector<std::string>& columns, const CellTable& cells, const Subgroup& subgroup = {},
                   std::optional<ArmId> arm = std::nullopt, const CellRepresentatives& reps = {});

    const std::vector<std::string>& columns() const { return columns_; }
    double operator()(const Eigen::VectorXd& beta) const;
    /// Requires a converged model with the same columns.
    double operator()(const FittedModel& model) const;

private:
    std::vector<std::string> columns_;
    Eigen::MatrixXd x_;
    Eigen::VectorXd w_;
};

/// Weighted average of cell predictions over the (sub)population; weights are
/// renormalised within the subgroup. Throws if the subgroup carries no weight.
double poststratify(const FittedModel& model, const CellTable& cells, const Subgroup& subgroup = {},
                    std::optional<ArmId> arm = std::nullopt, const CellRepresentatives& reps = {});

}  // namespace fairalloc::analysis

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fairalloc/analysis/respondent.hpp"

namespace fairalloc::analysis {

enum class Outcome {
    prefers_efficient,    // pooled high/low arms, baseline low
    prefers_max_english,  // equal/flip_low/flip_high arms, baseline equal
};

std::string_view to_string(Outcome o);
Outcome outcome_from_string(std::string_view s);
/// Arms an outcome is defined on, baseline first.
std::vector<ArmId> outcome_arms(Outcome o);

/// Column names for the shared demographic covariates, in report order.
const std::vector<std::string>& covariate_columns();
inline constexpr const char* kConstant = "Constant";

/// Arm indicator name, e.g. "Slope_High", "Slope_FlipLow".
std::string arm_column(ArmId arm);

/// One row's value for a named column. Arm columns read `arm`; unknown names throw.
double encode(const std::string& column, const Demographics& d, std::optional<ArmId> arm);

/// Column names resolved once, for encoding many rows.
class ColumnEncoder {
public:
    explicit ColumnEncoder(const std::vector<std::string>& columns);

    std::size_t size() const { return kinds_.size(); }
    double value(std::size_t j, const Demographics& d, std::optional<ArmId> arm) const;
    /// Linear predictor x(d, arm) . beta
    double dot(const Eigen::VectorXd& beta, const Demographics& d, std::optional<ArmId> arm) const;

private:
    enum class Kind {
        constant, republican, not_male, hispanic, black, asian, other_poc, catholic,
        other_christian, other_religion, age, education, log_income, arm
    };
    std::vector<Kind> kinds_;
    std::vector<ArmId> arms_;
};

struct DesignMatrix {
    std::vector<std::string> columns;
    Eigen::MatrixXd x;
    /// Successes and trials per row; Bernoulli rows have trials == 1.
    Eigen::VectorXd successes;
    Eigen::VectorXd trials;
    std::vector<std::string> row_ids;

    Eigen::Index rows() const { return x.rows(); }
    Eigen::Index cols() const { return x.cols(); }
};

/// Builds the design for a preference outcome. Columns: arm indicators for the
/// non-baseline arms present, the shared covariates, then the constant. Only
/// eligible respondents with a modal option are used; respondents from arms
/// outside the outcome (or outside `arm_filter`) are skipped and reported in
/// `warnings`.
DesignMatrix build_design_matrix(std::span<const Respondent> respondents, Outcome outcome,
                                 std::span<const ArmId> arm_filter = {},
                                 std::vector<std::string>* warnings = nullptr);

/// Design with covariates + constant only, for an arbitrary per-row outcome.
DesignMatrix build_covariate_design(std::span<const Respondent> respondents,
                                    std::span<const double> successes,
                                    std::span<const double> trials);

/// Rows of `design` at `rows`, in that order (repeats allowed).
DesignMatrix select_rows(const DesignMatrix& design, std::span<const std::size_t> rows);

struct LogisticOptions {
    double tolerance = 1e-8;
    int max_iterations = 100;
    /// Coefficient magnitude beyond which a still-improving fit is declared separated.
    double separation_bound = 15.0;
    /// L2 penalty on all coefficients except the constant. Off by default.
    double ridge = 0.0;
    /// When positive and `ridge` is zero, a fit that separates is refit once
    /// with this ridge instead of throwing. Off by default.
    double separation_ridge = 0.0;
    /// Starting coefficients; empty means all zeros.
    Eigen::VectorXd initial;
};

struct FittedModel {
    std::vector<std::string> columns;
    Eigen::VectorXd coefficients;
    Eigen::VectorXd standard_errors;
    double log_likelihood = 0.0;
    double gradient_max_norm = 0.0;
    bool converged = false;
    bool is_aliased(const std::string& column) const;
    /// Ridge penalty the reported coefficients were fitted with.
    double ridge = 0.0;
    /// Columns linearly dependent on earlier ones; their coefficient is 0 and
    /// their standard error NaN.
    std::vector<std::string> aliased;
    int iterations = 0;
    Eigen::Index observations = 0;

    double coefficient(const std::string& column) const;
    double standard_error(const std::string& column) const;
    double aic() const { return 2.0 * static_cast<double>(coefficients.size()) - 2.0 * log_likelihood; }

    /// Hand-specified model, marked converged, with zero standard errors.
    static FittedModel from_coefficients(std::vector<std::string> columns, std::vector<double> values);
};

/// Binomial log-likelihood (including the log binomial coefficient).
double log_likelihood(const DesignMatrix& design, const Eigen::VectorXd& beta);
/// Analytic gradient of log_likelihood with respect to beta.
Eigen::VectorXd log_likelihood_gradient(const DesignMatrix& design, const Eigen::VectorXd& beta);

/// Newton / IRLS with step halving. Columns that are linear combinations of
/// earlier columns are dropped before fitting and reported as aliased. Throws ValidationError for an empty design
/// or a single-class outcome and SeparationError when a coefficient runs past
/// the separation bound while the likelihood is still improving.
FittedModel fit_logistic(const DesignMatrix& design, const LogisticOptions& options = {});

/// Every iterate's log-likelihood, for monotonicity checks.
FittedModel fit_logistic(const DesignMatrix& design, const LogisticOptions& options,
                         std::vector<double>* trace);

double logistic(double eta);

}  // namespace fairalloc::analysis

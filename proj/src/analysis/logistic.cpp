#include "fairalloc/analysis/logistic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fairalloc/errors.hpp"

namespace fairalloc::analysis {

std::string_view to_string(Outcome o) {
    return o == Outcome::prefers_efficient ? "prefers_efficient" : "prefers_max_english";
}

Outcome outcome_from_string(std::string_view s) {
    if (s == "prefers_efficient") return Outcome::prefers_efficient;
    if (s == "prefers_max_english") return Outcome::prefers_max_english;
    throw ValidationError("unknown outcome: " + std::string(s));
}

std::vector<ArmId> outcome_arms(Outcome o) {
    if (o == Outcome::prefers_efficient) return {ArmId::low, ArmId::high};
    return {ArmId::equal, ArmId::flip_low, ArmId::flip_high};
}

const std::vector<std::string>& covariate_columns() {
    static const std::vector<std::string> cols{
        "Political_Republican", "Gender_NotMale",           "Race_Hispanic",
        "Race_Black",           "Race_Asian",               "Race_Other_POC",
        "Religion_Catholic",    "Religion_Other_Christian", "Religion_Other_Religion",
        "Age_Value",            "Education_Value",          "log(Income_Value)"};
    return cols;
}

std::string arm_column(ArmId arm) {
    switch (arm) {
        case ArmId::high: return "Slope_High";
        case ArmId::low: return "Slope_Low";
        case ArmId::equal: return "Slope_Equal";
        case ArmId::flip_low: return "Slope_FlipLow";
        case ArmId::flip_high: return "Slope_FlipHigh";
    }
    return "Slope_Unknown";
}

ColumnEncoder::ColumnEncoder(const std::vector<std::string>& columns) {
    kinds_.reserve(columns.size());
    arms_.resize(columns.size(), ArmId::high);
    for (std::size_t j = 0; j < columns.size(); ++j) {
        const std::string& c = columns[j];
        Kind k{};
        if (c == kConstant) k = Kind::constant;
        else if (c == "Political_Republican") k = Kind::republican;
        else if (c == "Gender_NotMale") k = Kind::not_male;
        else if (c == "Race_Hispanic") k = Kind::hispanic;
        else if (c == "Race_Black") k = Kind::black;
        else if (c == "Race_Asian") k = Kind::asian;
        else if (c == "Race_Other_POC") k = Kind::other_poc;
        else if (c == "Religion_Catholic") k = Kind::catholic;
        else if (c == "Religion_Other_Christian") k = Kind::other_christian;
        else if (c == "Religion_Other_Religion") k = Kind::other_religion;
        else if (c == "Age_Value") k = Kind::age;
        else if (c == "Education_Value") k = Kind::education;
        else if (c == "log(Income_Value)") k = Kind::log_income;
        else {
            const auto* hit = std::find_if(std::begin(frontier::kAllArms), std::end(frontier::kAllArms),
                                           [&](ArmId a) { return c == arm_column(a); });
            if (hit == std::end(frontier::kAllArms)) throw ValidationError("unknown design column: " + c);
            k = Kind::arm;
            arms_[j] = *hit;
        }
        kinds_.push_back(k);
    }
}

double ColumnEncoder::value(std::size_t j, const Demographics& d, std::optional<ArmId> arm) const {
    const Cell& c = d.cell;
    auto ind = [](bool b) { return b ? 1.0 : 0.0; };
    switch (kinds_[j]) {
        case Kind::constant: return 1.0;
        case Kind::republican: return ind(c.party == Party::republican);
        case Kind::not_male: return ind(c.gender == Gender::not_male);
        case Kind::hispanic: return ind(c.race == Race::hispanic);
        case Kind::black: return ind(c.race == Race::black);
        case Kind::asian: return ind(c.race == Race::asian);
        case Kind::other_poc: return ind(c.race == Race::other_poc);
        case Kind::catholic: return ind(c.religion == Religion::catholic);
        case Kind::other_christian: return ind(c.religion == Religion::other_christian);
        case Kind::other_religion: return ind(c.religion == Religion::other_religion);
        case Kind::age: return d.age_value;
        case Kind::education: return d.education_value;
        case Kind::log_income: return std::log(d.income_value);
        case Kind::arm: return ind(arm && *arm == arms_[j]);
    }
    return 0.0;
}

double ColumnEncoder::dot(const Eigen::VectorXd& beta, const Demographics& d, std::optional<ArmId> arm) const {
    if (static_cast<std::size_t>(beta.size()) != kinds_.size()) {
        throw ValidationError("coefficient vector does not match the column set");
    }
    double eta = 0.0;
    for (std::size_t j = 0; j < kinds_.size(); ++j) {
        const double b = beta(static_cast<Eigen::Index>(j));
        if (b != 0.0) eta += b * value(j, d, arm);
    }
    return eta;
}

double encode(const std::string& column, const Demographics& d, std::optional<ArmId> arm) {
    return ColumnEncoder({column}).value(0, d, arm);
}

namespace {

DesignMatrix assemble(const std::vector<std::string>& columns, std::span<const Respondent* const> rows,
                      std::span<const double> successes, std::span<const double> trials) {
    DesignMatrix dm;
    dm.columns = columns;
    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto p = static_cast<Eigen::Index>(columns.size());
    dm.x.resize(n, p);
    dm.successes.resize(n);
    dm.trials.resize(n);
    dm.row_ids.reserve(rows.size());
    const ColumnEncoder enc(columns);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Respondent& r = *rows[static_cast<std::size_t>(i)];
        r.demographics.validate();
        for (Eigen::Index j = 0; j < p; ++j) {
            dm.x(i, j) = enc.value(static_cast<std::size_t>(j), r.demographics, r.arm);
        }
        dm.successes(i) = successes[static_cast<std::size_t>(i)];
        dm.trials(i) = trials[static_cast<std::size_t>(i)];
        dm.row_ids.push_back(r.id);
    }
    return dm;
}

}  // namespace

DesignMatrix build_design_matrix(std::span<const Respondent> respondents, Outcome outcome,
                                 std::span<const ArmId> arm_filter, std::vector<std::string>* warnings) {
    const std::vector<ArmId> allowed = outcome_arms(outcome);
    auto in_scope = [&](ArmId a) {
        const bool ok = std::find(allowed.begin(), allowed.end(), a) != allowed.end();
        const bool kept = arm_filter.empty() ||
                          std::find(arm_filter.begin(), arm_filter.end(), a) != arm_filter.end();
        return ok && kept;
    };

    std::vector<const Respondent*> rows;
    std::vector<double> y;
    std::size_t excluded_arm = 0;
    std::size_t excluded_incomplete = 0;
    for (const auto& r : respondents) {
        if (!r.eligible) continue;
        if (!in_scope(r.arm)) {
            ++excluded_arm;
            continue;
        }
        if (!r.modal_option) {
            ++excluded_incomplete;
            continue;
        }
        rows.push_back(&r);
        y.push_back((outcome == Outcome::prefers_efficient ? r.prefers_efficient : r.prefers_max_english)
                        ? 1.0
                        : 0.0);
    }
    if (warnings) {
        if (excluded_arm > 0) {
            warnings->push_back(std::to_string(excluded_arm) + " respondent(s) outside the arms of outcome '" +
                                std::string(to_string(outcome)) + "' were excluded");
        }
        if (excluded_incomplete > 0) {
            warnings->push_back(std::to_string(excluded_incomplete) +
                                " eligible respondent(s) without a complete ballot set were excluded");
        }
    }
    if (rows.empty()) throw ValidationError("no respondents available for the design matrix");

    std::vector<ArmId> present;
    for (ArmId a : allowed) {
        if (std::any_of(rows.begin(), rows.end(), [a](const Respondent* r) { return r->arm == a; })) {
            present.push_back(a);
        }
    }
    std::vector<std::string> columns;
    for (std::size_t i = 1; i < present.size(); ++i) columns.push_back(arm_column(present[i]));
    const auto& cov = covariate_columns();
    columns.insert(columns.end(), cov.begin(), cov.end());
    columns.emplace_back(kConstant);

    const std::vector<double> ones(rows.size(), 1.0);
    return assemble(columns, rows, y, ones);
}

DesignMatrix build_covariate_design(std::span<const Respondent> respondents,
                                    std::span<const double> successes, std::span<const double> trials) {
    if (respondents.size() != successes.size() || respondents.size() != trials.size()) {
        throw ValidationError("outcome vectors must match the respondent count");
    }
    if (respondents.empty()) throw ValidationError("no respondents available for the design matrix");
    std::vector<const Respondent*> rows;
    rows.reserve(respondents.size());
    for (const auto& r : respondents) rows.push_back(&r);
    std::vector<std::string> columns = covariate_columns();
    columns.emplace_back(kConstant);
    return assemble(columns, rows, successes, trials);
}

DesignMatrix select_rows(const DesignMatrix& d, std::span<const std::size_t> rows) {
    DesignMatrix out;
    out.columns = d.columns;
    const auto n = static_cast<Eigen::Index>(rows.size());
    out.x.resize(n, d.cols());
    out.successes.resize(n);
    out.trials.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto r = static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)]);
        if (r >= d.rows()) throw DomainError("row index out of range");
        out.x.row(i) = d.x.row(r);
        out.successes(i) = d.successes(r);
        out.trials(i) = d.trials(r);
    }
    return out;
}

double FittedModel::coefficient(const std::string& column) const {
    const auto it = std::find(columns.begin(), columns.end(), column);
    if (it == columns.end()) return 0.0;
    return coefficients(it - columns.begin());
}

double FittedModel::standard_error(const std::string& column) const {
    const auto it = std::find(columns.begin(), columns.end(), column);
    if (it == columns.end()) throw NotFoundError("model has no column " + column);
    return standard_errors(it - columns.begin());
}

bool FittedModel::is_aliased(const std::string& column) const {
    return std::find(aliased.begin(), aliased.end(), column) != aliased.end();
}

FittedModel FittedModel::from_coefficients(std::vector<std::string> columns, std::vector<double> values) {
    if (columns.size() != values.size()) throw ValidationError("column/value count mismatch");
    FittedModel m;
    m.columns = std::move(columns);
    m.coefficients = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
    m.standard_errors = Eigen::VectorXd::Zero(m.coefficients.size());
    m.converged = true;
    return m;
}

double logistic(double eta) {
    if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
    const double e = std::exp(eta);
    return e / (1.0 + e);
}

namespace {

double softplus(double eta) { return eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta)); }

Eigen::VectorXd penalty_mask(const DesignMatrix& d) {
    Eigen::VectorXd mask = Eigen::VectorXd::Ones(d.cols());
    for (Eigen::Index j = 0; j < d.cols(); ++j) {
        if (d.columns[static_cast<std::size_t>(j)] == kConstant) mask(j) = 0.0;
    }
    return mask;
}

double log_binomial_coefficients(const DesignMatrix& d) {
    double c = 0.0;
    for (Eigen::Index i = 0; i < d.rows(); ++i) {
        const double n = d.trials(i);
        const double y = d.successes(i);
        if (n == 1.0 && (y == 0.0 || y == 1.0)) continue;
        c += std::lgamma(n + 1.0) - std::lgamma(y + 1.0) - std::lgamma(n - y + 1.0);
    }
    return c;
}

double kernel(const DesignMatrix& d, const Eigen::VectorXd& beta) {
    const Eigen::VectorXd eta = d.x * beta;
    double ll = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) ll += d.successes(i) * eta(i) - d.trials(i) * softplus(eta(i));
    return ll;
}

double penalized(const DesignMatrix& d, const Eigen::VectorXd& beta, double ridge, const Eigen::VectorXd& mask,
                 double constant) {
    double ll = constant + kernel(d, beta);
    if (ridge > 0.0) ll -= 0.5 * ridge * (mask.array() * beta.array().square()).sum();
    return ll;
}

}  // namespace

double log_likelihood(const DesignMatrix& d, const Eigen::VectorXd& beta) {
    return log_binomial_coefficients(d) + kernel(d, beta);
}

Eigen::VectorXd log_likelihood_gradient(const DesignMatrix& d, const Eigen::VectorXd& beta) {
    const Eigen::VectorXd eta = d.x * beta;
    Eigen::VectorXd resid(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) resid(i) = d.successes(i) - d.trials(i) * logistic(eta(i));
    return d.x.transpose() * resid;
}

FittedModel fit_logistic(const DesignMatrix& design, const LogisticOptions& options) {
    return fit_logistic(design, options, nullptr);
}

namespace {

FittedModel fit_once(const DesignMatrix& d, const LogisticOptions& options, std::vector<double>* trace) {
    if (d.rows() < 1 || d.cols() < 1) throw ValidationError("design matrix is empty");
    const double succ = d.successes.sum();
    const double tot = d.trials.sum();
    if (!(succ > 0.0) || !(succ < tot)) {
        throw ValidationError("outcome has a single class; logistic fit is undefined");
    }
    if ((d.successes.array() < 0.0).any() || (d.successes.array() > d.trials.array()).any()) {
        throw ValidationError("successes must lie in [0, trials]");
    }

    const Eigen::Index p = d.cols();
    const Eigen::VectorXd mask = penalty_mask(d);
    const double constant = log_binomial_coefficients(d);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    if (options.initial.size() > 0) {
        if (options.initial.size() != p) throw ValidationError("initial coefficients do not match the design");
        beta = options.initial;
    }
    double ll = penalized(d, beta, options.ridge, mask, constant);
    if (trace) trace->push_back(ll);

    FittedModel m;
    m.columns = d.columns;
    m.observations = d.rows();
    m.ridge = options.ridge;

    Eigen::VectorXd eta(d.rows());
    Eigen::VectorXd resid(d.rows());
    Eigen::VectorXd sqrt_w(d.rows());
    Eigen::MatrixXd hessian(p, p);
    Eigen::VectorXd grad(p);

    auto evaluate = [&](const Eigen::VectorXd& b) {
        eta.noalias() = d.x * b;
        for (Eigen::Index i = 0; i < eta.size(); ++i) {
            const double pr = logistic(eta(i));
            resid(i) = d.successes(i) - d.trials(i) * pr;
            sqrt_w(i) = std::sqrt(d.trials(i) * pr * (1.0 - pr));
        }
        grad.noalias() = d.x.transpose() * resid;
        const Eigen::MatrixXd xw = d.x.array().colwise() * sqrt_w.array();
        hessian.setZero();
        hessian.selfadjointView<Eigen::Lower>().rankUpdate(xw.transpose());
        hessian = hessian.selfadjointView<Eigen::Lower>();
        if (options.ridge > 0.0) {
            grad.array() -= options.ridge * mask.array() * b.array();
            hessian.diagonal().array() += options.ridge * mask.array();
        }
    };

    int iter = 0;
    for (; iter < options.max_iterations; ++iter) {
        evaluate(beta);
        m.gradient_max_norm = grad.cwiseAbs().maxCoeff();
        if (m.gradient_max_norm < options.tolerance) {
            m.converged = true;
            break;
        }
        const Eigen::LDLT<Eigen::MatrixXd> ldlt(hessian);
        if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
            if (beta.cwiseAbs().maxCoeff() > 0.5 * options.separation_bound) {
                throw SeparationError("information matrix became singular as coefficients diverged");
            }
            throw Error("information matrix is singular (collinear design?)");
        }
        const Eigen::VectorXd step = ldlt.solve(grad);

        double scale = 1.0;
        bool accepted = false;
        Eigen::VectorXd candidate;
        double cand_ll = ll;
        // Close to the optimum the predicted gain g'H^-1 g / 2 falls below the
        // rounding noise of the summed likelihood; the full Newton step is then
        // taken without the ascent test.
        const double predicted_gain = 0.5 * grad.dot(step);
        const double noise = 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(ll)) *
                             std::sqrt(static_cast<double>(d.rows()));
        for (int half = 0; half < 40; ++half, scale *= 0.5) {
            candidate = beta + scale * step;
            cand_ll = penalized(d, candidate, options.ridge, mask, constant);
            if (std::isfinite(cand_ll) && (cand_ll >= ll || (half == 0 && predicted_gain < noise))) {
                accepted = true;
                break;
            }
        }
        if (!accepted) break;  // numerically stalled
        const bool improving = cand_ll > ll;
        beta = candidate;
        ll = cand_ll;
        if (trace) trace->push_back(ll);
        // A ridge-penalised likelihood has a finite maximiser, so only unpenalised fits can separate.
        if (improving && options.ridge == 0.0 && beta.cwiseAbs().maxCoeff() > options.separation_bound) {
            throw SeparationError("coefficient exceeded the separation bound while the likelihood kept "
                                  "improving; outcome is (quasi-)separated");
        }
    }
    if (!m.converged) {
        evaluate(beta);
        m.gradient_max_norm = grad.cwiseAbs().maxCoeff();
        m.converged = m.gradient_max_norm < options.tolerance;
    }
    m.iterations = iter;
    m.coefficients = beta;
    m.log_likelihood = constant + kernel(d, beta);

    const Eigen::LDLT<Eigen::MatrixXd> ldlt(hessian);
    const Eigen::MatrixXd cov = ldlt.solve(Eigen::MatrixXd::Identity(p, p));
    m.standard_errors = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
    return m;
}

FittedModel fit_full_rank(const DesignMatrix& d, const LogisticOptions& options, std::vector<double>* trace) {
    try {
        return fit_once(d, options, trace);
    } catch (const SeparationError&) {
        if (!(options.separation_ridge > 0.0) || options.ridge > 0.0) throw;
    }
    LogisticOptions penalised = options;
    penalised.ridge = options.separation_ridge;
    penalised.initial.resize(0);
    if (trace) trace->clear();
    return fit_once(d, penalised, trace);
}

// True when every column keeps more than 1e-4 of its norm after projecting out
// the earlier ones, judged from a Cholesky factor of the Gram matrix.
bool clearly_full_rank(const Eigen::MatrixXd& x) {
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(x.cols(), x.cols());
    gram.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose());
    const Eigen::VectorXd diag = gram.diagonal();
    const Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success) return false;
    const Eigen::MatrixXd l = llt.matrixL();
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        if (!(l(j, j) * l(j, j) > 1e-8 * diag(j))) return false;
    }
    return true;
}

// Columns kept in order; a column whose residual after projecting out the kept
// ones is below 1e-7 of its norm is aliased.
std::vector<Eigen::Index> independent_columns(const Eigen::MatrixXd& x) {
    std::vector<Eigen::Index> keep;
    if (clearly_full_rank(x)) {
        keep.resize(static_cast<std::size_t>(x.cols()));
        std::iota(keep.begin(), keep.end(), Eigen::Index{0});
        return keep;
    }
    Eigen::MatrixXd basis(x.rows(), 0);
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const double norm = x.col(j).norm();
        if (norm == 0.0) continue;
        Eigen::VectorXd r = x.col(j);
        for (int pass = 0; pass < 2; ++pass) {
            for (Eigen::Index k = 0; k < basis.cols(); ++k) r -= basis.col(k).dot(r) * basis.col(k);
        }
        const double rn = r.norm();
        if (rn <= 1e-7 * norm) continue;
        basis.conservativeResize(Eigen::NoChange, basis.cols() + 1);
        basis.col(basis.cols() - 1) = r / rn;
        keep.push_back(j);
    }
    return keep;
}

}  // namespace

FittedModel fit_logistic(const DesignMatrix& d, const LogisticOptions& options, std::vector<double>* trace) {
    if (d.rows() < 1 || d.cols() < 1) throw ValidationError("design matrix is empty");
    const std::vector<Eigen::Index> keep = independent_columns(d.x);
    if (keep.size() == static_cast<std::size_t>(d.cols())) return fit_full_rank(d, options, trace);
    if (keep.empty()) throw ValidationError("design matrix has no non-zero column");

    const auto q = static_cast<Eigen::Index>(keep.size());
    DesignMatrix reduced;
    reduced.x.resize(d.rows(), q);
    for (Eigen::Index k = 0; k < q; ++k) {
        reduced.columns.push_back(d.columns[static_cast<std::size_t>(keep[k])]);
        reduced.x.col(k) = d.x.col(keep[k]);
    }
    reduced.successes = d.successes;
    reduced.trials = d.trials;
    reduced.row_ids = d.row_ids;
    LogisticOptions opts = options;
    if (options.initial.size() > 0) {
        if (options.initial.size() != d.cols()) throw ValidationError("initial coefficients do not match the design");
        opts.initial.resize(q);
        for (Eigen::Index k = 0; k < q; ++k) opts.initial(k) = options.initial(keep[k]);
    }
    const FittedModel r = fit_full_rank(reduced, opts, trace);

    FittedModel m = r;
    m.columns = d.columns;
    m.coefficients = Eigen::VectorXd::Zero(d.cols());
    m.standard_errors = Eigen::VectorXd::Constant(d.cols(), std::numeric_limits<double>::quiet_NaN());
    std::size_t next = 0;
    for (Eigen::Index j = 0; j < d.cols(); ++j) {
        if (next < keep.size() && keep[next] == j) {
            m.coefficients(j) = r.coefficients(static_cast<Eigen::Index>(next));
            m.standard_errors(j) = r.standard_errors(static_cast<Eigen::Index>(next));
            ++next;
        } else {
            m.aliased.push_back(d.columns[static_cast<std::size_t>(j)]);
        }
    }
    return m;
}

}  // namespace fairalloc::analysis

#pragma once

#include <string>

#include "fairalloc/analysis/logistic.hpp"

namespace fairalloc::analysis {

/// Two-sided normal p-value for coefficient / standard error.
double wald_p_value(double coefficient, double standard_error);
std::string significance_stars(double p_value);

/// Regression table: one row per coefficient with stars and standard error,
/// constant last, then observations, log-likelihood and AIC.
std::string model_report(const FittedModel& model, const std::string& title);

}  // namespace fairalloc::analysis

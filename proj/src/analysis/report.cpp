#include "fairalloc/analysis/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace fairalloc::analysis {

double wald_p_value(double coefficient, double standard_error) {
    if (!(standard_error > 0.0)) return std::nan("");
    return std::erfc(std::abs(coefficient / standard_error) / std::sqrt(2.0));
}

std::string significance_stars(double p_value) {
    if (std::isnan(p_value)) return "";
    if (p_value < 0.01) return "***";
    if (p_value < 0.05) return "**";
    if (p_value < 0.1) return "*";
    return "";
}

std::string model_report(const FittedModel& model, const std::string& title) {
    constexpr int kLabel = 26;
    constexpr int kValue = 16;
    std::ostringstream out;
    const std::string rule(kLabel + kValue, '=');
    const std::string thin(kLabel + kValue, '-');
    char buf[128];

    out << title << '\n' << rule << '\n';
    std::snprintf(buf, sizeof buf, "%-*s%*s\n", kLabel, "", kValue, "Dependent variable");
    out << buf << thin << '\n';

    auto row = [&](std::size_t j) {
        const double b = model.coefficients(static_cast<Eigen::Index>(j));
        const double se = model.standard_errors.size() > 0 ? model.standard_errors(static_cast<Eigen::Index>(j))
                                                           : std::nan("");
        char value[48];
        if (model.is_aliased(model.columns[j])) {
            std::snprintf(buf, sizeof buf, "%-*s%*s\n\n", kLabel, model.columns[j].c_str(), kValue, "NA");
            out << buf;
            return;
        }
        std::snprintf(value, sizeof value, "%.3f%s", b, significance_stars(wald_p_value(b, se)).c_str());
        std::snprintf(buf, sizeof buf, "%-*s%*s\n", kLabel, model.columns[j].c_str(), kValue, value);
        out << buf;
        std::snprintf(value, sizeof value, "(%.3f)", se);
        std::snprintf(buf, sizeof buf, "%-*s%*s\n", kLabel, "", kValue, value);
        out << buf << '\n';
    };

    std::size_t constant = model.columns.size();
    for (std::size_t j = 0; j < model.columns.size(); ++j) {
        if (model.columns[j] == kConstant) {
            constant = j;
            continue;
        }
        row(j);
    }
    if (constant < model.columns.size()) row(constant);

    out << thin << '\n';
    std::snprintf(buf, sizeof buf, "%-*s%*lld\n", kLabel, "Observations", kValue,
                  static_cast<long long>(model.observations));
    out << buf;
    std::snprintf(buf, sizeof buf, "%-*s%*.3f\n", kLabel, "Log Likelihood", kValue, model.log_likelihood);
    out << buf;
    std::snprintf(buf, sizeof buf, "%-*s%*.3f\n", kLabel, "Akaike Inf. Crit.", kValue, model.aic());
    out << buf << rule << '\n';
    out << "Note: *p<0.1; **p<0.05; ***p<0.01\n";
    if (model.ridge > 0.0) {
        std::snprintf(buf, sizeof buf, "Note: coefficients carry a ridge penalty of %g.\n", model.ridge);
        out << buf;
    }
    if (!model.converged) out << "Warning: the fit did not converge.\n";
    return out.str();
}

}  // namespace fairalloc::analysis

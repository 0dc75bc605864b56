#ifndef BERGMAN_REGRESSION_HPP
#define BERGMAN_REGRESSION_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace bergman {

enum class Verdict { finite, divergent, inconclusive };

std::string to_string(Verdict v);

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;  ///< pairs-bootstrap standard error
    double r_squared = 0.0;
    std::size_t points = 0;
};

/// Weighted least squares of y on x with weights 1/se^2, plus a pairs
/// bootstrap (resampling points with replacement) for the slope error.
SlopeFit fit_slope(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& se,
                   std::uint64_t seed, int bootstrap = 200);

/// Classifies a fitted growth slope of dyadic shell contributions:
/// finite when slope < -margin and the one-sided 95% bound is below zero,
/// divergent when slope > +margin and the one-sided 95% bound is above zero,
/// or when |slope| <= margin and the slope is not significantly negative
/// (constant shell contributions sum to infinity), inconclusive otherwise.
Verdict classify_slope(double slope, double slope_se, double margin = 0.1);

}  // namespace bergman

#endif

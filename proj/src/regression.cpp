#include "bergman/regression.hpp"

#include <algorithm>
#include <cmath>

#include "bergman/linalg.hpp"
#include "bergman/rng.hpp"
#include "bergman/types.hpp"

namespace bergman {

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::finite: return "finite";
        case Verdict::divergent: return "divergent";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

namespace {

std::vector<double> weights_from_se(const std::vector<double>& se) {
    // A shell estimated without noise would get infinite weight; floor it.
    std::vector<double> w(se.size());
    for (std::size_t i = 0; i < se.size(); ++i) w[i] = 1.0 / std::max(se[i] * se[i], 1e-12);
    return w;
}

}  // namespace

SlopeFit fit_slope(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& se,
                   std::uint64_t seed, int bootstrap) {
    if (x.size() < 2) throw Error("insufficient-shells", "slope fit needs at least 2 points");
    const auto w = weights_from_se(se);
    const LineFit fit = fit_line(x, y, w);
    SlopeFit out;
    out.slope = fit.slope;
    out.intercept = fit.intercept;
    out.r_squared = fit.r_squared;
    out.points = x.size();
    out.slope_se = fit.slope_se;
    if (bootstrap > 1 && x.size() >= 3) {
        Stream rng(seed, 0);
        std::vector<double> slopes;
        std::vector<double> bx, by, bw;
        const std::size_t m = x.size();
        for (int b = 0; b < bootstrap; ++b) {
            bx.clear(), by.clear(), bw.clear();
            for (std::size_t i = 0; i < m; ++i) {
                const std::size_t k = static_cast<std::size_t>(rng.bits() % m);
                bx.push_back(x[k]);
                by.push_back(y[k]);
                bw.push_back(w[k]);
            }
            if (*std::max_element(bx.begin(), bx.end()) == *std::min_element(bx.begin(), bx.end())) continue;
            slopes.push_back(fit_line(bx, by, bw).slope);
        }
        if (slopes.size() >= 2) {
            double mean = 0.0;
            for (double s : slopes) mean += s;
            mean /= static_cast<double>(slopes.size());
            double var = 0.0;
            for (double s : slopes) var += (s - mean) * (s - mean);
            out.slope_se = std::sqrt(var / static_cast<double>(slopes.size() - 1));
        }
    }
    return out;
}

Verdict classify_slope(double slope, double slope_se, double margin) {
    constexpr double z95 = 1.6448536269514722;
    if (slope < -margin && slope + z95 * slope_se < 0.0) return Verdict::finite;
    if (slope > margin && slope - z95 * slope_se > 0.0) return Verdict::divergent;
    // Flat contributions: equal mass in infinitely many shells diverges
    // logarithmically, unless the slope is significantly negative.
    if (std::abs(slope) <= margin && slope + z95 * slope_se >= 0.0) return Verdict::divergent;
    return Verdict::inconclusive;
}

}  // namespace bergman

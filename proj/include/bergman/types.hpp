#ifndef BERGMAN_TYPES_HPP
#define BERGMAN_TYPES_HPP

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace bergman {

using cplx = std::complex<double>;

/// A point of C^n. Real coordinates are ordered (Re z_1..Re z_n, Im z_1..Im z_n).
using CVec = std::vector<cplx>;
using RVec = std::vector<double>;

/// Error carrying a machine-readable code such as "degenerate-domain".
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(code + ": " + what), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

inline double norm_sq(const CVec& z) {
    double s = 0.0;
    for (const auto& c : z) s += std::norm(c);
    return s;
}

inline double norm(const CVec& z) { return std::sqrt(norm_sq(z)); }

inline double dist(const CVec& a, const CVec& b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) s += std::norm(a[j] - b[j]);
    return std::sqrt(s);
}

/// Hermitian product <z, w> = sum z_j conj(w_j).
inline cplx inner(const CVec& z, const CVec& w) {
    cplx s = 0.0;
    for (std::size_t j = 0; j < z.size(); ++j) s += z[j] * std::conj(w[j]);
    return s;
}

inline CVec operator-(const CVec& a, const CVec& b) {
    CVec r(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) r[j] = a[j] - b[j];
    return r;
}

inline CVec operator+(const CVec& a, const CVec& b) {
    CVec r(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) r[j] = a[j] + b[j];
    return r;
}

inline CVec operator*(double t, const CVec& a) {
    CVec r(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) r[j] = t * a[j];
    return r;
}

inline RVec to_real(const CVec& z) {
    const std::size_t n = z.size();
    RVec x(2 * n);
    for (std::size_t j = 0; j < n; ++j) {
        x[j] = z[j].real();
        x[j + n] = z[j].imag();
    }
    return x;
}

inline CVec from_real(const RVec& x) {
    const std::size_t n = x.size() / 2;
    CVec z(n);
    for (std::size_t j = 0; j < n; ++j) z[j] = {x[j], x[j + n]};
    return z;
}

/// Lebesgue volume of the Euclidean ball of radius r in R^d.
inline double ball_volume(std::size_t d, double r) {
    const double h = 0.5 * static_cast<double>(d);
    return std::exp(h * std::log(std::numbers::pi) - std::lgamma(h + 1.0)) * std::pow(r, static_cast<double>(d));
}

/// Surface area of the unit sphere S^{d-1} in R^d.
inline double sphere_area(std::size_t d) {
    const double h = 0.5 * static_cast<double>(d);
    return 2.0 * std::exp(h * std::log(std::numbers::pi) - std::lgamma(h));
}

inline constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace bergman

#endif

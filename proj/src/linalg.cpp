#include "bergman/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace bergman {

CMatrix CMatrix::identity(std::size_t n) {
    CMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

cplx CMatrix::form(const CVec& xi) const {
    cplx s = 0.0;
    for (std::size_t j = 0; j < n_; ++j)
        for (std::size_t k = 0; k < n_; ++k) s += (*this)(j, k) * xi[j] * std::conj(xi[k]);
    return s;
}

bool CMatrix::is_hermitian(double tol) const {
    for (std::size_t j = 0; j < n_; ++j)
        for (std::size_t k = 0; k < n_; ++k)
            if (std::abs((*this)(j, k) - std::conj((*this)(k, j))) > tol) return false;
    return true;
}

std::vector<double> symmetric_eigenvalues(RMatrix m, double tol) {
    const std::size_t n = m.rows;
    auto off_norm = [&] {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j) s += m(i, j) * m(i, j);
        return std::sqrt(s);
    };
    for (int sweep = 0; sweep < 100 && off_norm() > tol; ++sweep) {
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = m(p, q);
                if (std::abs(apq) < 1e-300) continue;
                const double theta = (m(q, q) - m(p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double mkp = m(k, p), mkq = m(k, q);
                    m(k, p) = c * mkp - s * mkq;
                    m(k, q) = s * mkp + c * mkq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double mpk = m(p, k), mqk = m(q, k);
                    m(p, k) = c * mpk - s * mqk;
                    m(q, k) = s * mpk + c * mqk;
                }
            }
        }
    }
    std::vector<double> ev(n);
    for (std::size_t i = 0; i < n; ++i) ev[i] = m(i, i);
    std::sort(ev.begin(), ev.end());
    return ev;
}

std::vector<double> hermitian_eigenvalues(const CMatrix& h, double tol) {
    const std::size_t n = h.size();
    RMatrix r(2 * n, 2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            r(i, j) = h(i, j).real();
            r(i + n, j + n) = h(i, j).real();
            r(i, j + n) = -h(i, j).imag();
            r(i + n, j) = h(i, j).imag();
        }
    }
    const auto doubled = symmetric_eigenvalues(r, tol);
    std::vector<double> ev;
    ev.reserve(n);
    for (std::size_t i = 0; i < 2 * n; i += 2) ev.push_back(0.5 * (doubled[i] + doubled[i + 1]));
    return ev;
}

std::vector<double> singular_values(const RMatrix& m) {
    RMatrix g(m.cols, m.cols);
    for (std::size_t i = 0; i < m.cols; ++i)
        for (std::size_t j = 0; j < m.cols; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < m.rows; ++k) s += m(k, i) * m(k, j);
            g(i, j) = s;
        }
    auto ev = symmetric_eigenvalues(g, 1e-14);
    std::vector<double> sv;
    for (auto it = ev.rbegin(); it != ev.rend(); ++it) sv.push_back(std::sqrt(std::max(0.0, *it)));
    return sv;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& w) {
    LineFit fit;
    const std::size_t n = x.size();
    double sw = 0, sx = 0, sy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double wi = w.empty() ? 1.0 : w[i];
        sw += wi;
        sx += wi * x[i];
        sy += wi * y[i];
    }
    const double mx = sx / sw, my = sy / sw;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double wi = w.empty() ? 1.0 : w[i];
        sxx += wi * (x[i] - mx) * (x[i] - mx);
        sxy += wi * (x[i] - mx) * (y[i] - my);
        syy += wi * (y[i] - my) * (y[i] - my);
    }
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double rss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double wi = w.empty() ? 1.0 : w[i];
        const double r = y[i] - fit.intercept - fit.slope * x[i];
        rss += wi * r * r;
    }
    fit.r_squared = syy > 0 ? 1.0 - rss / syy : 1.0;
    if (w.empty()) {
        fit.slope_se = n > 2 ? std::sqrt(rss / static_cast<double>(n - 2) / sxx) : 0.0;
    } else {
        // Weights are inverse variances: the slope variance is 1/Sxx.
        fit.slope_se = std::sqrt(1.0 / sxx);
    }
    return fit;
}

}  // namespace bergman

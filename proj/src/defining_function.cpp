#include "bergman/defining_function.hpp"

namespace bergman {

RVec DefiningFunction::real_gradient(const CVec& z) const {
    const CVec g = grad(z);
    const std::size_t n = g.size();
    RVec r(2 * n);
    for (std::size_t j = 0; j < n; ++j) {
        r[j] = 2.0 * g[j].real();
        r[j + n] = -2.0 * g[j].imag();
    }
    return r;
}

DefiningFunction DefiningFunction::scaled(double factor) const {
    DefiningFunction out = *this;
    out.name = name + "*" + std::to_string(factor);
    auto base = std::make_shared<DefiningFunction>(*this);
    out.rho = [base, factor](const CVec& z) { return factor * base->rho(z); };
    out.grad = [base, factor](const CVec& z) {
        CVec g = base->grad(z);
        for (auto& c : g) c *= factor;
        return g;
    };
    auto scale_matrix = [factor](CMatrix m) {
        for (std::size_t i = 0; i < m.size(); ++i)
            for (std::size_t j = 0; j < m.size(); ++j) m(i, j) *= factor;
        return m;
    };
    out.hessian = [base, scale_matrix](const CVec& z) { return scale_matrix(base->hessian(z)); };
    out.hol_hessian = [base, scale_matrix](const CVec& z) { return scale_matrix(base->hol_hessian(z)); };
    return out;
}

DefiningFunctionPtr sphere_rho(const CVec& center, double radius) {
    auto df = std::make_shared<DefiningFunction>();
    const std::size_t n = center.size();
    df->name = "sphere";
    df->dim = n;
    df->rho = [center, radius](const CVec& z) { return norm_sq(z - center) - radius * radius; };
    df->grad = [center](const CVec& z) {
        CVec g(z.size());
        for (std::size_t j = 0; j < z.size(); ++j) g[j] = std::conj(z[j] - center[j]);
        return g;
    };
    df->hessian = [n](const CVec&) { return CMatrix::identity(n); };
    df->hol_hessian = [n](const CVec&) { return CMatrix(n); };
    return df;
}

DefiningFunctionPtr ellipsoid_rho(const RVec& a) {
    auto df = std::make_shared<DefiningFunction>();
    const std::size_t n = a.size();
    df->name = "ellipsoid";
    df->dim = n;
    df->rho = [a](const CVec& z) {
        double s = -1.0;
        for (std::size_t j = 0; j < z.size(); ++j) s += std::norm(z[j]) / (a[j] * a[j]);
        return s;
    };
    df->grad = [a](const CVec& z) {
        CVec g(z.size());
        for (std::size_t j = 0; j < z.size(); ++j) g[j] = std::conj(z[j]) / (a[j] * a[j]);
        return g;
    };
    df->hessian = [a, n](const CVec&) {
        CMatrix h(n);
        for (std::size_t j = 0; j < n; ++j) h(j, j) = 1.0 / (a[j] * a[j]);
        return h;
    };
    df->hol_hessian = [n](const CVec&) { return CMatrix(n); };
    return df;
}

DefiningFunctionPtr quartic_rho(std::size_t n, double mu, double kappa) {
    auto df = std::make_shared<DefiningFunction>();
    df->name = "quartic";
    df->dim = n;
    df->rho = [mu, kappa](const CVec& z) {
        const double r2 = norm_sq(z);
        cplx sq = 0.0;
        for (const auto& c : z) sq += c * c;
        return r2 + mu * sq.real() + kappa * r2 * r2 - 1.0;
    };
    df->grad = [mu, kappa](const CVec& z) {
        const double r2 = norm_sq(z);
        CVec g(z.size());
        for (std::size_t j = 0; j < z.size(); ++j)
            g[j] = std::conj(z[j]) * (1.0 + 2.0 * kappa * r2) + mu * z[j];
        return g;
    };
    df->hessian = [n, kappa](const CVec& z) {
        const double r2 = norm_sq(z);
        CMatrix h(n);
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k < n; ++k)
                h(j, k) = (j == k ? 1.0 + 2.0 * kappa * r2 : 0.0) + 2.0 * kappa * std::conj(z[j]) * z[k];
        return h;
    };
    df->hol_hessian = [n, mu, kappa](const CVec& z) {
        CMatrix h(n);
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k < n; ++k)
                h(j, k) = (j == k ? mu : 0.0) + 2.0 * kappa * std::conj(z[j]) * std::conj(z[k]);
        return h;
    };
    return df;
}

DefiningFunctionPtr pluriharmonic_rho(std::size_t n) {
    auto df = std::make_shared<DefiningFunction>();
    df->name = "re-z1-squared";
    df->dim = n;
    df->rho = [](const CVec& z) { return (z[0] * z[0]).real(); };
    df->grad = [](const CVec& z) {
        CVec g(z.size(), 0.0);
        g[0] = z[0];
        return g;
    };
    df->hessian = [n](const CVec&) { return CMatrix(n); };
    df->hol_hessian = [n](const CVec&) {
        CMatrix h(n);
        h(0, 0) = 1.0;
        return h;
    };
    return df;
}

DefiningFunctionPtr half_space_rho(std::size_t n) {
    auto df = std::make_shared<DefiningFunction>();
    df->name = "half-space";
    df->dim = n;
    df->rho = [](const CVec& z) { return -z[0].real(); };
    df->grad = [](const CVec& z) {
        CVec g(z.size(), 0.0);
        g[0] = -0.5;
        return g;
    };
    df->hessian = [n](const CVec&) { return CMatrix(n); };
    df->hol_hessian = [n](const CVec&) { return CMatrix(n); };
    return df;
}

}  // namespace bergman

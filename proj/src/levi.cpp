#include "bergman/levi.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bergman/rng.hpp"
#include "bergman/sampling.hpp"

namespace bergman {

LeviPolynomial::LeviPolynomial(const DefiningFunction& df, CVec zeta)
    : zeta_(std::move(zeta)), grad_(df.grad(zeta_)), hol_(df.hol_hessian(zeta_)) {}

cplx LeviPolynomial::operator()(const CVec& z) const {
    const std::size_t n = zeta_.size();
    cplx linear = 0.0, quadratic = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const cplx vj = z[j] - zeta_[j];
        linear += grad_[j] * vj;
        for (std::size_t k = 0; k < n; ++k) quadratic += hol_(j, k) * vj * (z[k] - zeta_[k]);
    }
    return -(2.0 * linear + quadratic);
}

CVec LeviPolynomial::linear_coefficients() const {
    CVec a(grad_.size());
    for (std::size_t j = 0; j < a.size(); ++j) a[j] = -2.0 * grad_[j];
    return a;
}

cplx levi_polynomial(const DefiningFunction& df, const CVec& zeta, const CVec& z) {
    return LeviPolynomial(df, zeta)(z);
}

namespace {


CVec boundary_sample(const Domain& d, Stream& rng) { return ray_boundary(d, rng.unit_sphere(d.n)); }

}  // namespace

LeviData compute_beta(const DefiningFunction& df, const Domain& d, std::size_t n_boundary, std::uint64_t seed) {
    if (!d.star_shaped) throw Error("unsupported-family", "boundary sampling needs a star-shaped domain");
    if (df.dim != d.n) throw Error("invalid-input", "defining function and domain dimensions differ");
    LeviData out;
    out.lambda_min = kInf;
    out.rayleigh_min = kInf;
    Stream rng(seed, 0);
    for (std::size_t i = 0; i < n_boundary; ++i) {
        const CVec zeta = boundary_sample(d, rng);
        const CMatrix h = df.hessian(zeta);
        const double lmin = hermitian_eigenvalues(h)[0];
        if (!(lmin > 0.0))
            throw Error("not-strictly-psh", "complex Hessian has eigenvalue " + std::to_string(lmin) + " at " + format_point(zeta));
        out.lambda_min = std::min(out.lambda_min, lmin);
        for (int r = 0; r < 50; ++r) out.rayleigh_min = std::min(out.rayleigh_min, h.form(rng.unit_sphere(d.n)).real());
        out.boundary_samples.push_back(zeta);
    }
    out.beta = std::min(out.lambda_min, out.rayleigh_min) / 3.0;
    out.epsilon = 0.1 * d.diameter();
    for (out.halvings = 0; out.halvings < 10; ++out.halvings) {
        const auto report = verify_coercivity(df, d, out.beta, out.epsilon, 10000, derive_seed(seed, 100 + out.halvings));
        if (report.violations == 0) break;
        out.epsilon *= 0.5;
    }
    return out;
}

CoercivityReport verify_coercivity(const DefiningFunction& df, const Domain& d, double beta, double epsilon,
                                   std::size_t n_pairs, std::uint64_t seed, double slack) {
    if (!d.star_shaped) throw Error("unsupported-family", "boundary sampling needs a star-shaped domain");
    const std::size_t chunks = (n_pairs + kChunkSize - 1) / kChunkSize;
    struct Partial {
        std::size_t violations = 0;
        double min_margin = kInf;
    };
    std::vector<Partial> parts(chunks);
    for_each_chunk(chunks, [&](std::size_t c) {
        Stream rng(seed, c);
        Partial& part = parts[c];
        const std::size_t todo = std::min<std::size_t>(kChunkSize, n_pairs - c * kChunkSize);
        for (std::size_t i = 0; i < todo; ++i) {
            const CVec zeta = boundary_sample(d, rng);
            const CVec z = zeta + epsilon * rng.unit_ball(d.n);
            const LeviPolynomial f(df, zeta);
            const double rhs = df.rho(zeta) - df.rho(z) + beta * norm_sq(zeta - z);
            const double m = f(z).real() - rhs;
            part.min_margin = std::min(part.min_margin, m);
            if (m < -slack) ++part.violations;
        }
    });
    CoercivityReport out;
    out.beta = beta;
    out.epsilon = epsilon;
    out.pairs = n_pairs;
    out.slack = slack;
    out.min_margin = kInf;
    for (const auto& p : parts) {
        out.violations += p.violations;
        out.min_margin = std::min(out.min_margin, p.min_margin);
    }
    return out;
}

RVec LeviChart::operator()(const CVec& z) const {
    const std::size_t n = zeta.size();
    RVec t(2 * n);
    t[0] = -df->rho(z);
    t[1] = poly(z).imag();
    const RVec x = to_real(z), x0 = to_real(zeta);
    for (std::size_t k = 0; k < completion.size(); ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < 2 * n; ++i) s += completion[k][i] * (x[i] - x0[i]);
        t[2 + k] = s;
    }
    return t;
}

LeviChart levi_coordinates(DefiningFunctionPtr df, const CVec& zeta, std::uint64_t seed, std::size_t samples,
                           double radius) {
    const std::size_t n = zeta.size();
    const std::size_t dim = 2 * n;
    LeviChart chart;
    chart.zeta = zeta;
    chart.df = df;
    if (norm(df->grad(zeta)) < 1e-14) throw Error("degenerate-gradient", "gradient of rho vanishes at " + format_point(zeta));
    chart.poly = LeviPolynomial(*df, zeta);

    RVec dt1 = df->real_gradient(zeta);
    for (auto& v : dt1) v = -v;
    const CVec a = chart.poly.linear_coefficients();
    RVec dt2(dim);
    for (std::size_t j = 0; j < n; ++j) {
        dt2[j] = a[j].imag();
        dt2[j + n] = a[j].real();
    }

    std::vector<RVec> basis;
    auto orthogonalize = [&](RVec v) {
        double len0 = 0.0;
        for (double x : v) len0 += x * x;
        len0 = std::sqrt(len0);
        for (const auto& b : basis) {
            double p = 0.0;
            for (std::size_t i = 0; i < dim; ++i) p += v[i] * b[i];
            for (std::size_t i = 0; i < dim; ++i) v[i] -= p * b[i];
        }
        double len = 0.0;
        for (double x : v) len += x * x;
        len = std::sqrt(len);
        if (len <= 1e-8 * len0) return false;
        for (auto& x : v) x /= len;
        basis.push_back(std::move(v));
        return true;
    };
    orthogonalize(dt1);
    orthogonalize(dt2);
    for (std::size_t e = 0; e < dim && chart.completion.size() + 2 < dim; ++e) {
        RVec v(dim, 0.0);
        v[e] = 1.0;
        if (orthogonalize(v)) chart.completion.push_back(basis.back());
    }

    chart.jacobian = RMatrix(dim, dim);
    for (std::size_t i = 0; i < dim; ++i) {
        chart.jacobian(0, i) = dt1[i];
        chart.jacobian(1, i) = dt2[i];
    }
    for (std::size_t k = 0; k < chart.completion.size(); ++k)
        for (std::size_t i = 0; i < dim; ++i) chart.jacobian(2 + k, i) = chart.completion[k][i];
    const auto sv = singular_values(chart.jacobian);
    chart.det_abs = 1.0;
    for (double s : sv) chart.det_abs *= s;
    chart.condition = sv.back() > 0.0 ? sv.front() / sv.back() : kInf;
    if (!(chart.condition <= 1e8)) throw Error("ill-conditioned-chart", "Jacobian condition number " + std::to_string(chart.condition));

    Stream rng(seed, 0);
    chart.c1 = kInf;
    chart.c2 = 0.0;
    const RVec x0 = to_real(zeta);
    for (std::size_t s = 0; s < samples; ++s) {
        const CVec z = zeta + radius * rng.unit_ball(n);
        const double v2 = norm_sq(z - zeta);
        if (v2 == 0.0) continue;
        const RVec t = chart(z);
        const RVec x = to_real(z);
        double t2 = 0.0, lin = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            t2 += t[i] * t[i];
            double jv = 0.0;
            for (std::size_t k = 0; k < dim; ++k) jv += chart.jacobian(i, k) * (x[k] - x0[k]);
            lin += (t[i] - jv) * (t[i] - jv);
        }
        chart.c1 = std::min(chart.c1, t2 / v2);
        chart.c2 = std::max(chart.c2, t2 / v2);
        chart.linearization = std::max(chart.linearization, std::sqrt(lin) / v2);
    }
    return chart;
}

namespace {

// integral_0^T (t + c)^-p dt for c > 0.
double t1_integral(double c, double T, double p) {
    if (T <= 0.0) return 0.0;
    const double l = std::log1p(T / c);
    if (std::abs(p - 1.0) < 1e-12) return l;
    return std::pow(c, 1.0 - p) * -std::expm1((1.0 - p) * l) / (p - 1.0);
}

struct ModelSample {
    double t2 = 0.0;
    double perp_sq = 0.0;  // sum of t_3^2 .. t_2n^2
    double abs_sq = 0.0;   // |t'|^2 with t' = (t_2, ..., t_2n)
};

}  // namespace

ModelIntegralResult model_integral(double p, std::size_t n, double R, std::uint64_t budget, std::uint64_t seed,
                                   int k_min, int k_max) {
    if (!(p > 0.0)) throw Error("domain-error", "model integral needs p > 0");
    if (n < 1) throw Error("domain-error", "model integral needs n >= 1");
    ModelIntegralResult out;
    out.p = p;
    out.n = n;
    out.expected_slope = p - static_cast<double>(n) - 1.0;
    const std::size_t perp_dim = 2 * n - 2;
    const int shells = k_max - k_min + 1;
    const std::uint64_t per_region = std::max<std::uint64_t>(kChunkSize, budget / static_cast<std::uint64_t>(shells + 1));

    auto in_box = [](const ModelSample& s, double lam) { return std::abs(s.t2) <= lam && s.perp_sq <= lam; };
    auto integrand = [&](const ModelSample& s) {
        const double c = std::abs(s.t2) + s.perp_sq;
        return t1_integral(c, std::sqrt(R * R - s.abs_sq), p);
    };
    auto draw_perp = [&](Stream& rng, double radius, double& sq) {
        sq = 0.0;
        if (perp_dim == 0) return;
        // perp_dim is even, so a complex ball of dimension perp_dim/2 is a real ball of perp_dim.
        const CVec v = rng.unit_ball(perp_dim / 2);
        sq = radius * radius * norm_sq(v);
    };

    auto run = [&](int k, std::uint64_t tag) {
        const bool bulk = k < 0;
        const double lam = bulk ? std::ldexp(1.0, -k_min) : std::ldexp(1.0, -k);
        double log_vol;
        if (bulk) {
            log_vol = std::log(ball_volume(2 * n - 1, R));
        } else {
            log_vol = std::log(2.0 * lam);
            if (perp_dim > 0) log_vol += std::log(ball_volume(perp_dim, std::sqrt(lam)));
        }
        const std::size_t chunks = (per_region + kChunkSize - 1) / kChunkSize;
        std::vector<Accumulator> acc(chunks);
        for_each_chunk(chunks, [&](std::size_t c) {
            Stream rng(derive_seed(seed, tag), c);
            for (std::uint64_t i = 0; i < kChunkSize; ++i) {
                ModelSample s;
                if (bulk) {
                    // Uniform in the real (2n-1)-ball of radius R: t_2 and the perp block together.
                    double x[64];
                    double r2 = 0.0;
                    for (std::size_t q = 0; q < 2 * n - 1; ++q) {
                        x[q] = rng.normal();
                        r2 += x[q] * x[q];
                    }
                    const double scale = R * std::pow(rng.uniform(), 1.0 / static_cast<double>(2 * n - 1)) / std::sqrt(r2);
                    s.t2 = x[0] * scale;
                    for (std::size_t q = 1; q < 2 * n - 1; ++q) s.perp_sq += x[q] * x[q] * scale * scale;
                } else {
                    s.t2 = rng.uniform(-lam, lam);
                    draw_perp(rng, std::sqrt(lam), s.perp_sq);
                }
                s.abs_sq = s.t2 * s.t2 + s.perp_sq;
                const bool keep = bulk ? !in_box(s, lam) : !in_box(s, 0.5 * lam);
                if (!keep || s.abs_sq >= R * R) {
                    acc[c].add_zeros(1);
                    continue;
                }
                acc[c].add(integrand(s));
            }
        });
        Accumulator total;
        for (const auto& a : acc) total.merge(a);
        const double vol = std::exp(log_vol);
        return std::pair{vol * total.mean(), vol * total.stderr_mean()};
    };

    const auto [bulk, bulk_se] = run(-1, 0);
    double sum = bulk, var = bulk_se * bulk_se;
    std::vector<double> xs, ys, ses;
    for (int k = k_min; k <= k_max; ++k) {
        const auto [v, se] = run(k, static_cast<std::uint64_t>(k + 1));
        out.shells.k.push_back(k);
        out.shells.value.push_back(v);
        out.shells.stderr_value.push_back(se);
        sum += v;
        var += se * se;
        if (v > 0.0) {
            xs.push_back(k);
            ys.push_back(std::log2(v));
            ses.push_back(se / v / std::log(2.0));
        }
    }
    if (xs.size() < 6) throw Error("insufficient-shells", "model integral produced fewer than 6 nonzero shells");
    out.fit = fit_slope(xs, ys, ses, derive_seed(seed, 999));
    out.verdict = classify_slope(out.fit.slope, out.fit.slope_se);
    if (out.verdict == Verdict::finite) {
        const double r = std::exp2(out.fit.slope);
        out.estimate = sum + out.shells.value.back() * r / (1.0 - r);
        out.stderr_estimate = std::sqrt(var);
    } else {
        out.estimate = kInf;
        out.stderr_estimate = kInf;
    }
    return out;
}

DivergenceIntegralResult divergence_integral_2n(std::size_t n, std::uint64_t budget, std::uint64_t seed, double exponent,
                                                int k_min, int shells) {
    if (n < 1) throw Error("domain-error", "divergence integral needs n >= 1");
    DivergenceIntegralResult out;
    out.n = n;
    out.exponent = exponent < 0.0 ? static_cast<double>(n) : exponent;
    const double e = out.exponent;
    const double dim = 2.0 * static_cast<double>(n);
    const double half_area = 0.5 * sphere_area(2 * n);
    out.shell_exact = std::abs(e - static_cast<double>(n)) < 1e-12 ? half_area * std::log(2.0) : kInf;
    const std::uint64_t per_shell = std::max<std::uint64_t>(kChunkSize, budget / static_cast<std::uint64_t>(shells));
    std::vector<double> xs, ys, ses;
    for (int s = 0; s < shells; ++s) {
        const int k = k_min + s;
        const double a = std::ldexp(1.0, -k - 1), b = std::ldexp(1.0, -k);
        const double a_d = std::pow(a, dim), b_d = std::pow(b, dim);
        const double vol = 0.5 * (ball_volume(2 * n, b) - ball_volume(2 * n, a));
        const std::size_t chunks = (per_shell + kChunkSize - 1) / kChunkSize;
        std::vector<Accumulator> acc(chunks);
        for_each_chunk(chunks, [&](std::size_t c) {
            Stream rng(derive_seed(seed, static_cast<std::uint64_t>(k)), c);
            for (std::uint64_t i = 0; i < kChunkSize; ++i) {
                // Radius with density proportional to r^(2n-1) on [a, b); the
                // direction only matters through the half-space, which the
                // radial integrand ignores.
                const double r = std::pow(a_d + rng.uniform() * (b_d - a_d), 1.0 / dim);
                acc[c].add(std::pow(r, -2.0 * e));
            }
        });
        Accumulator total;
        for (const auto& x : acc) total.merge(x);
        const double v = vol * total.mean(), se = vol * total.stderr_mean();
        out.shells.k.push_back(k);
        out.shells.value.push_back(v);
        out.shells.stderr_value.push_back(se);
        xs.push_back(k);
        ys.push_back(std::log2(v));
        ses.push_back(se / v / std::log(2.0));
    }
    double mean = 0.0;
    for (double v : out.shells.value) mean += v;
    mean /= static_cast<double>(shells);
    for (double v : out.shells.value) out.max_rel_deviation = std::max(out.max_rel_deviation, std::abs(v / mean - 1.0));
    out.fit = fit_slope(xs, ys, ses, derive_seed(seed, 999));
    out.verdict = classify_slope(out.fit.slope, out.fit.slope_se);
    return out;
}

}  // namespace bergman

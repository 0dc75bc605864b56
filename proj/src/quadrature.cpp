#include "bergman/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <numbers>
#include <sstream>

#include "bergman/linalg.hpp"
#include "bergman/rng.hpp"
#include "bergman/sampling.hpp"

namespace bergman {

namespace {

constexpr double kLn2 = std::numbers::ln2;

bool radial_family(KernelFamily f) {
    switch (f) {
        case KernelFamily::planar_pole:
        case KernelFamily::planar_log:
        case KernelFamily::planar_power:
        case KernelFamily::cusp_monomial:
        case KernelFamily::cusp_inverse_power: return true;
        default: return false;
    }
}

bool ball_family(KernelFamily f) {
    return f == KernelFamily::ball_pole || f == KernelFamily::ball_log || f == KernelFamily::ball_power;
}

// Graph domains {0 < y < h(x)} whose tip at the origin is the singular point.
bool graph_tip(const Domain& d, const CVec& zeta) {
    return static_cast<bool>(d.log_height) && d.n == 1 && std::abs(zeta[0]) == 0.0;
}

// Smallest x (up to bisection accuracy) with x^2 + h(x)^2 >= r^2.
double graph_x_lo(const Domain& d, double r) {
    double lo = 0.0, hi = r;
    for (int i = 0; i < 80; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double h = std::exp(d.log_height(mid));
        if (mid * mid + h * h >= r * r) hi = mid;
        else lo = mid;
    }
    return lo > 0.0 ? lo : std::ldexp(hi, -60);
}

RegionSamplerPtr graph_annulus_sampler(const Domain& d, double r_lo, double r_hi) {
    const double x_hi = std::min(r_hi, d.bounding_box[0].hi);
    const double x_lo = std::min(graph_x_lo(d, r_lo), 0.5 * x_hi);
    return std::make_unique<GraphSlabSampler>(d.log_height, x_lo, x_hi);
}

// Bulk sampler over the region: the smaller of the bounding box and the region ball.
RegionSamplerPtr bulk_sampler(const Domain& d, const Region& region) {
    if (region.center) {
        const double ball = std::log(ball_volume(2 * d.n, region.radius));
        double box = 0.0;
        for (const auto& iv : d.bounding_box) box += std::log(iv.width());
        if (ball < box) return std::make_unique<BallSampler>(*region.center, region.radius);
    }
    return std::make_unique<BoxSampler>(d.bounding_box);
}

double stderr_or_floor(double rel) { return std::max(rel, 1e-6) / kLn2; }

json number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    return x;
}

json numbers(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(number(x));
    return a;
}

json fit_json(const SlopeFit& f) {
    return {{"slope", number(f.slope)},
            {"intercept", number(f.intercept)},
            {"slope_se", number(f.slope_se)},
            {"r_squared", number(f.r_squared)},
            {"points", f.points}};
}

std::string term_key(const SingularKernel& k) { return to_json(k).dump(); }

HoloFunction::Term make_term(std::shared_ptr<const SingularKernel> k, cplx c) {
    HoloFunction::Term t;
    t.coeff = c;
    t.key = term_key(*k);
    t.kernel = std::move(k);
    return t;
}

}  // namespace

// ---------------------------------------------------------------- HoloFunction

HoloFunction HoloFunction::constant(cplx c) {
    HoloFunction f;
    f.constant_ = c;
    return f;
}

HoloFunction HoloFunction::of(const SingularKernel& k, cplx coeff) {
    HoloFunction f;
    if (coeff != cplx(0.0, 0.0)) f.terms_.push_back(make_term(std::make_shared<const SingularKernel>(k), coeff));
    return f;
}

cplx HoloFunction::operator()(const CVec& z) const {
    cplx v = constant_;
    for (const auto& t : terms_) {
        const SingularKernel& k = *t.kernel;
        if (is_levi_family(k.family) && dist(z, k.zeta) >= k.patch_radius)
            throw Error("outside-local-patch", format_point(z) + " is outside the Levi patch of a term");
        v += t.coeff * k.eval_unchecked(z);
    }
    return v;
}

cplx HoloFunction::eval_along(const CVec& b, const CVec& u, double log_t) const {
    if (log_t > std::log(1e-13)) return (*this)(b + std::exp(log_t) * u);
    cplx v = constant_;
    for (const auto& t : terms_)
        v += t.coeff * (t.kernel->zeta == b ? t.kernel->eval_along(u, log_t) : t.kernel->eval_unchecked(b));
    return v;
}

double HoloFunction::abs_pow(const CVec& z, double p) const {
    if (terms_.size() == 1 && constant_ == cplx(0.0, 0.0)) {
        const SingularKernel& k = *terms_[0].kernel;
        if (is_levi_family(k.family) && dist(z, k.zeta) >= k.patch_radius)
            throw Error("outside-local-patch", format_point(z) + " is outside the Levi patch of a term");
        return std::exp(p * (std::log(std::abs(terms_[0].coeff)) + k.log_modulus_unchecked(z)));
    }
    return std::pow(std::abs((*this)(z)), p);
}

std::vector<CVec> HoloFunction::singular_points() const {
    std::vector<CVec> out;
    for (const auto& t : terms_) {
        const CVec& z = t.kernel->zeta;
        if (std::none_of(out.begin(), out.end(), [&](const CVec& w) { return w == z; })) out.push_back(z);
    }
    return out;
}

HoloFunction HoloFunction::operator+(const HoloFunction& o) const {
    std::map<std::string, Term> merged;
    for (const auto* src : {&terms_, &o.terms_})
        for (const auto& t : *src) {
            auto [it, inserted] = merged.emplace(t.key, t);
            if (!inserted) it->second.coeff += t.coeff;
        }
    HoloFunction out;
    out.constant_ = constant_ + o.constant_;
    for (auto& [key, t] : merged)
        if (t.coeff != cplx(0.0, 0.0)) out.terms_.push_back(t);
    return out;
}

HoloFunction HoloFunction::operator*(cplx t) const {
    HoloFunction out;
    if (t == cplx(0.0, 0.0)) return out;
    out.constant_ = constant_ * t;
    out.terms_ = terms_;
    for (auto& term : out.terms_) term.coeff *= t;
    return out;
}

HoloFunction HoloFunction::operator-(const HoloFunction& o) const { return *this + o * cplx(-1.0, 0.0); }

json to_json(const HoloFunction& f) {
    json terms = json::array();
    for (const auto& t : f.terms()) terms.push_back({{"coeff", complex_to_json(t.coeff)}, {"kernel", to_json(*t.kernel)}});
    return {{"constant", complex_to_json(f.constant_term())}, {"terms", terms}};
}

HoloFunction holo_from_json(const json& j, const Domain& d) {
    HoloFunction f = HoloFunction::constant(complex_from_json(j.at("constant")));
    for (const auto& t : j.at("terms")) f = f + HoloFunction::of(kernel_from_json(t.at("kernel"), d), complex_from_json(t.at("coeff")));
    return f;
}

// ---------------------------------------------------------------- lp_mass

double MassEstimate::relative_stderr(std::size_t i) const {
    if (value[i] == 0.0) return stderr_value[i] == 0.0 ? 0.0 : kInf;
    return stderr_value[i] / value[i];
}

MassEstimate lp_masses(const HoloFunction& f, const Domain& d, const std::vector<double>& ps, std::uint64_t budget,
                       std::uint64_t seed, const MassOptions& o) {
    if (ps.empty()) throw Error("invalid-input", "no exponents requested");
    for (double p : ps)
        if (!(p > 0.0)) throw Error("invalid-input", "exponents must be positive");
    if (budget == 0) throw Error("invalid-input", "budget must be positive");
    if (o.region.center && !(o.region.radius > 0.0 && std::isfinite(o.region.radius)))
        throw Error("invalid-input", "region radius must be positive and finite");

    const std::size_t P = ps.size();
    MassEstimate out;
    out.p = ps;
    out.value.assign(P, 0.0);
    out.tail.assign(P, 0.0);
    out.tail_stderr.assign(P, 0.0);
    out.tail_fit.assign(P, {});
    out.tail_verdict.assign(P, Verdict::finite);
    std::vector<double> var(P, 0.0);

    const double r0 = o.r0 > 0.0 ? o.r0 : (o.region.center ? 2.0 * o.region.radius : d.diameter()) / 8.0;
    std::vector<CVec> pts;
    for (const auto& z : f.singular_points())
        if (!o.region.center || dist(z, *o.region.center) < o.region.radius + r0) pts.push_back(z);
    const int M = pts.empty() ? 0 : o.strata;

    auto nearest = [&](const CVec& z) {
        std::size_t best = 0;
        double bd = kInf;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const double r = dist(z, pts[i]);
            if (r < bd) bd = r, best = i;
        }
        return std::pair{best, bd};
    };
    const Integrand integrand = [&](const CVec& z, std::span<double> v) {
        for (std::size_t i = 0; i < P; ++i) v[i] = f.abs_pow(z, ps[i]);
    };
    auto record = [&](MassStratum s, const RegionIntegral& ri) {
        s.value.resize(P);
        s.stderr_value.resize(P);
        for (std::size_t i = 0; i < P; ++i) {
            s.value[i] = ri.value(i);
            s.stderr_value[i] = ri.stderr_value(i);
            out.value[i] += s.value[i];
            var[i] += s.stderr_value[i] * s.stderr_value[i];
        }
        s.proposals = ri.proposals;
        s.hits = ri.hits;
        out.samples += ri.proposals;
        out.strata.push_back(std::move(s));
    };

    const std::uint64_t bulk_budget =
        M == 0 ? budget : std::max<std::uint64_t>(kChunkSize, static_cast<std::uint64_t>(o.bulk_fraction * budget));
    const std::uint64_t stratum_budget =
        M == 0 ? 0
               : std::max<std::uint64_t>(kChunkSize, (budget - std::min(budget, bulk_budget)) / (pts.size() * M));

    {
        const auto sampler = bulk_sampler(d, o.region);
        const auto accept = [&](const CVec& z) {
            return d.contains(z) && o.region.contains(z) && (pts.empty() || nearest(z).second >= r0);
        };
        MassStratum s;
        s.kind = "bulk";
        s.r_lo = r0;
        s.r_hi = kInf;
        record(std::move(s), integrate_region(*sampler, accept, P, integrand, bulk_budget, derive_seed(seed, 1)));
    }

    for (std::size_t i = 0; i < pts.size(); ++i) {
        const bool tip = graph_tip(d, pts[i]);
        std::vector<std::size_t> index;
        for (int m = 0; m < M; ++m) {
            const double r_hi = std::ldexp(r0, -m), r_lo = 0.5 * r_hi;
            RegionSamplerPtr sampler = tip ? graph_annulus_sampler(d, r_lo, r_hi)
                                           : std::make_unique<BallSampler>(pts[i], r_hi);
            const bool exact = sampler->exact_for_domain();
            const auto accept = [&](const CVec& z) {
                if (!exact && !d.contains(z)) return false;
                if (!o.region.contains(z)) return false;
                const auto [j, r] = nearest(z);
                const double ri = dist(z, pts[i]);
                return ri >= r_lo && ri < r_hi && (j == i || r == ri);
            };
            MassStratum s;
            s.kind = "shell";
            s.point = i;
            s.r_lo = r_lo;
            s.r_hi = r_hi;
            index.push_back(out.strata.size());
            record(std::move(s), integrate_region(*sampler, accept, P, integrand, stratum_budget,
                                                  derive_seed(derive_seed(seed, 2 + i), static_cast<std::uint64_t>(m))));
        }

        // Geometric extrapolation of the innermost strata into B(zeta, r0 2^-M).
        for (std::size_t c = 0; c < P; ++c) {
            std::vector<double> x, y, se;
            const std::size_t first = index.size() > static_cast<std::size_t>(o.tail_fit_points)
                                          ? index.size() - static_cast<std::size_t>(o.tail_fit_points)
                                          : 0;
            for (std::size_t m = first; m < index.size(); ++m) {
                const MassStratum& s = out.strata[index[m]];
                if (s.value[c] <= 0.0) continue;
                x.push_back(static_cast<double>(m));
                y.push_back(std::log2(s.value[c]));
                se.push_back(stderr_or_floor(s.stderr_value[c] / s.value[c]));
            }
            if (x.size() < 3) continue;
            const SlopeFit fit = fit_slope(x, y, se, derive_seed(seed, 900 + i), 200);
            const Verdict v = classify_slope(fit.slope, fit.slope_se);
            const MassStratum& last = out.strata[index.back()];
            double tail = kInf, tail_se = kInf;
            if (fit.slope < 0.0 && last.value[c] > 0.0) {
                const double rho = std::exp2(fit.slope);
                tail = last.value[c] * rho / (1.0 - rho);
                const double d_slope = last.value[c] * kLn2 * rho / ((1.0 - rho) * (1.0 - rho));
                const double rel = last.stderr_value[c] / last.value[c];
                tail_se = std::hypot(tail * rel, d_slope * fit.slope_se);
            }
            out.tail[c] += tail;
            out.tail_stderr[c] = std::hypot(out.tail_stderr[c], tail_se);
            const auto rank = [](Verdict w) { return w == Verdict::divergent ? 2 : w == Verdict::inconclusive ? 1 : 0; };
            if (out.tail_fit[c].points == 0 || rank(v) > rank(out.tail_verdict[c])) {
                out.tail_fit[c] = fit;
                out.tail_verdict[c] = v;
            }
        }
    }

    out.stderr_value.resize(P);
    for (std::size_t c = 0; c < P; ++c) {
        out.value[c] += out.tail[c];
        out.stderr_value[c] = std::sqrt(var[c] + out.tail_stderr[c] * out.tail_stderr[c]);
    }
    return out;
}

MassEstimate lp_mass(const HoloFunction& f, const Domain& d, double p, std::uint64_t budget, std::uint64_t seed,
                     const MassOptions& options) {
    MassEstimate m = lp_masses(f, d, {p}, budget, seed, options);
    const double rel = m.relative_stderr(0);
    if (!(rel <= 0.2)) {
        std::ostringstream os;
        os << "relative standard error " << rel << " exceeds 0.2 at p = " << p;
        throw EstimateError("unstable-estimate", os.str(), to_json(m));
    }
    return m;
}

json to_json(const MassEstimate& m) {
    json strata = json::array();
    for (const auto& s : m.strata)
        strata.push_back({{"kind", s.kind},
                          {"point", s.point},
                          {"r_lo", number(s.r_lo)},
                          {"r_hi", number(s.r_hi)},
                          {"value", numbers(s.value)},
                          {"stderr", numbers(s.stderr_value)},
                          {"proposals", s.proposals},
                          {"hits", s.hits}});
    json fits = json::array(), verdicts = json::array();
    for (std::size_t i = 0; i < m.p.size(); ++i) {
        fits.push_back(fit_json(m.tail_fit[i]));
        verdicts.push_back(to_string(m.tail_verdict[i]));
    }
    return {{"p", numbers(m.p)},
            {"value", numbers(m.value)},
            {"stderr", numbers(m.stderr_value)},
            {"tail", numbers(m.tail)},
            {"tail_stderr", numbers(m.tail_stderr)},
            {"tail_fit", fits},
            {"tail_verdict", verdicts},
            {"samples", m.samples},
            {"strata", strata}};
}

// ---------------------------------------------------------------- level shells

namespace {

enum class ShellGeometry { radial, affine_exact, affine_perp, affine_free };

struct ShellSetup {
    ShellGeometry geometry = ShellGeometry::radial;
    CVec center;  ///< point where D vanishes
    CVec coeffs;  ///< linear part of D (affine geometries)
};

ShellSetup shell_setup(const SingularKernel& k) {
    ShellSetup s;
    if (radial_family(k.family)) {
        s.center = k.zeta;
        s.center[0] -= k.denominator_unchecked(k.zeta);
        return s;
    }
    s.center = k.zeta;
    if (ball_family(k.family)) {
        s.geometry = ShellGeometry::affine_exact;
        s.coeffs.resize(k.n);
        for (std::size_t j = 0; j < k.n; ++j) s.coeffs[j] = -std::conj(k.zeta[j]);
    } else if (is_levi_family(k.family)) {
        s.geometry = ShellGeometry::affine_free;
        s.coeffs = k.levi->linear_coefficients();
    } else {
        s.geometry = ShellGeometry::affine_perp;
        s.coeffs = k.coeffs;
    }
    return s;
}

std::string sampler_name(const ShellSetup& s, const Domain& d) {
    if (s.geometry != ShellGeometry::radial) return "affine-slab";
    return graph_tip(d, s.center) ? "graph-slab" : "ball";
}

ShellEstimate sample_shell(const SingularKernel& k, const Domain& d, const ShellSetup& setup, int kk, double r0,
                           const Region& region, const std::vector<double>& ps, std::uint64_t budget,
                           std::uint64_t seed) {
    ShellEstimate est;
    est.k = kk;
    const std::size_t P = ps.size();
    est.log2_mass.assign(P, -kInf);
    est.mass_rel_se.assign(P, kInf);
    const double lam = std::ldexp(1.0, -kk);
    const double s = k.exponent();

    const auto in_shell = [&](const CVec& z, bool exact) {
        if (!exact && !d.contains(z)) return false;
        if (!region.contains(z) || dist(z, setup.center) >= r0) return false;
        const double a = std::abs(k.denominator_unchecked(z));
        return a >= 0.5 * lam && a < lam;
    };

    RegionSamplerPtr sampler;
    if (setup.geometry == ShellGeometry::radial) {
        if (0.5 * lam >= r0) return est;
        const double r_hi = std::min(lam, r0);
        if (graph_tip(d, setup.center)) sampler = graph_annulus_sampler(d, 0.5 * lam, r_hi);
        else sampler = std::make_unique<BallSampler>(setup.center, r_hi);
    } else {
        const double cn = norm(setup.coeffs);
        double r_perp = std::min(r0, setup.geometry == ShellGeometry::affine_exact ? std::sqrt(2.0 * lam) : std::sqrt(lam));
        double lev_lo = 0.5 * lam, lev_hi = lam;
        if (setup.geometry == ShellGeometry::affine_free) lev_lo = 0.0, lev_hi = std::min(2.0 * lam, r0 * cn);
        if (setup.geometry != ShellGeometry::affine_exact) {
            // Grow the slab while accepted pilot points crowd its outer edges.
            for (int it = 0; it < 64; ++it) {
                const AffineSlabSampler pilot(setup.center, setup.coeffs, lev_lo, lev_hi, r_perp);
                Stream rng(derive_seed(seed, 0x5157 + static_cast<std::uint64_t>(it)), 0);
                bool wide = false, long_ = false;
                for (std::uint64_t i = 0; i < kChunkSize; ++i) {
                    double w = 1.0;
                    const CVec z = pilot.draw(rng, w);
                    if (!in_shell(z, false)) continue;
                    cplx lin = 0.0;
                    for (std::size_t j = 0; j < z.size(); ++j) lin += setup.coeffs[j] * (z[j] - setup.center[j]);
                    const double t = std::abs(lin) / cn;
                    const double v = std::sqrt(std::max(0.0, norm_sq(z - setup.center) - t * t));
                    if (v > 0.9 * r_perp) wide = true;
                    if (setup.geometry == ShellGeometry::affine_free && t > 0.9 * lev_hi / cn) long_ = true;
                }
                bool grew = false;
                if (wide && r_perp < r0) r_perp = std::min(2.0 * r_perp, r0), grew = true;
                if (long_ && lev_hi < r0 * cn) lev_hi = std::min(2.0 * lev_hi, r0 * cn), grew = true;
                if (!grew) break;
            }
        }
        est.r_perp = r_perp;
        est.level_cap = lev_hi / cn;
        sampler = std::make_unique<AffineSlabSampler>(setup.center, setup.coeffs, lev_lo, lev_hi, r_perp);
    }

    const bool exact = sampler->exact_for_domain();
    const double shift = s * kk * kLn2;
    const Integrand integrand = [&](const CVec& z, std::span<double> v) {
        v[0] = 1.0;
        const double lm = k.log_modulus_unchecked(z) - shift;
        for (std::size_t i = 0; i < P; ++i) v[i + 1] = std::exp(ps[i] * lm);
    };
    const RegionIntegral ri = integrate_region(
        *sampler, [&](const CVec& z) { return in_shell(z, exact); }, P + 1, integrand, budget, seed);
    est.proposals = ri.proposals;
    est.hits = ri.hits;
    est.missing = ri.hits == 0;
    if (est.missing) return est;
    est.log2_volume = ri.log_value(0) / kLn2;
    est.volume_rel_se = ri.relative_stderr(0);
    for (std::size_t i = 0; i < P; ++i) {
        est.log2_mass[i] = ri.log_value(i + 1) / kLn2 + ps[i] * s * kk;
        est.mass_rel_se[i] = ri.relative_stderr(i + 1);
    }
    return est;
}

}  // namespace

std::size_t LevelShellProfile::usable() const {
    return static_cast<std::size_t>(std::count_if(shells.begin(), shells.end(), [](const ShellEstimate& s) {
        return !s.missing && std::isfinite(s.log2_volume) && std::isfinite(s.volume_rel_se);
    }));
}

ShellOptions resolve_shell_options(const SingularKernel& k, ShellOptions o) {
    int k0 = 6;
    double r0 = 0.5;
    if (radial_family(k.family)) {
        k0 = 3;
    } else if (is_levi_family(k.family)) {
        k0 = 8;
        r0 = std::min(r0, k.patch_radius);
    }
    if (o.r0 <= 0.0) o.r0 = r0;
    if (o.k0 < 0) o.k0 = k0;
    if (o.k1 < 0) o.k1 = o.k0 + 11;
    return o;
}

LevelShellProfile shell_profile(const SingularKernel& k, const Domain& d, const ShellOptions& options,
                                std::uint64_t seed) {
    const ShellOptions o = resolve_shell_options(k, options);
    if (o.k1 < o.k0) throw Error("invalid-input", "empty shell range");
    if (o.per_shell_budget == 0) throw Error("invalid-input", "per-shell budget must be positive");
    for (double p : o.p_list)
        if (!(p > 0.0)) throw Error("invalid-input", "exponents must be positive");
    if (is_levi_family(k.family) && o.r0 > k.patch_radius)
        throw Error("outside-local-patch", "r0 exceeds the Levi patch radius");

    const ShellSetup setup = shell_setup(k);
    LevelShellProfile prof;
    prof.kernel_family = to_string(k.family);
    prof.zeta = k.zeta;
    prof.s = k.exponent();
    prof.r0 = o.r0;
    prof.k0 = o.k0;
    prof.k1 = o.k1;
    prof.p_list = o.p_list;
    prof.sampler = sampler_name(setup, d);
    prof.seed = seed;
    prof.shells.resize(static_cast<std::size_t>(o.k1 - o.k0 + 1));
    for_each_chunk(prof.shells.size(), [&](std::size_t i) {
        const int kk = o.k0 + static_cast<int>(i);
        prof.shells[i] = sample_shell(k, d, setup, kk, o.r0, o.region, o.p_list, o.per_shell_budget,
                                      derive_seed(seed, 0x100 + static_cast<std::uint64_t>(kk)));
    });
    int run = 0;
    for (const auto& s : prof.shells) {
        run = s.missing ? run + 1 : 0;
        if (run >= 3) {
            throw EstimateError("shell-starvation",
                                "3 consecutive shells ending at k = " + std::to_string(s.k) + " have no hits",
                                to_json(prof));
        }
    }
    return prof;
}

json to_json(const LevelShellProfile& p) {
    json shells = json::array();
    for (const auto& s : p.shells)
        shells.push_back({{"k", s.k},
                          {"log2_volume", number(s.log2_volume)},
                          {"volume_rel_se", number(s.volume_rel_se)},
                          {"log2_mass", numbers(s.log2_mass)},
                          {"mass_rel_se", numbers(s.mass_rel_se)},
                          {"proposals", s.proposals},
                          {"hits", s.hits},
                          {"r_perp", number(s.r_perp)},
                          {"level_cap", number(s.level_cap)},
                          {"missing", s.missing}});
    return {{"kernel", p.kernel_family}, {"zeta", cvec_to_json(p.zeta)}, {"s", number(p.s)},
            {"r0", number(p.r0)},        {"k0", p.k0},                   {"k1", p.k1},
            {"p", numbers(p.p_list)},    {"sampler", p.sampler},         {"seed", p.seed},
            {"shells", shells}};
}

std::string to_csv(const LevelShellProfile& p) {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "k,vol,stderr,log2_vol";
    for (double q : p.p_list) os << ",mass_p" << q;
    os << "\r\n";
    for (const auto& s : p.shells) {
        os << s.k << ',' << s.volume() << ',' << s.volume_stderr() << ',' << s.log2_volume;
        for (std::size_t i = 0; i < p.p_list.size(); ++i) os << ',' << s.mass(i);
        os << "\r\n";
    }
    return os.str();
}

// ---------------------------------------------------------------- thresholds

PVerdict ThresholdVerdict::at(double p) const {
    PVerdict v;
    v.p = p;
    if (superpolynomial) {
        v.sigma = -kInf;
        v.verdict = Verdict::finite;
        return v;
    }
    v.sigma = p * s - gamma_hat;
    v.sigma_se = gamma_se;
    v.verdict = classify_slope(v.sigma, v.sigma_se, margin);
    return v;
}

ThresholdVerdict estimate_threshold(const LevelShellProfile& profile, const std::vector<double>& p_grid,
                                    double margin) {
    std::vector<double> x, y, se;
    for (const auto& s : profile.shells) {
        if (s.missing || !std::isfinite(s.log2_volume) || !std::isfinite(s.volume_rel_se)) continue;
        x.push_back(s.k);
        y.push_back(s.log2_volume);
        se.push_back(stderr_or_floor(s.volume_rel_se));
    }
    if (x.size() < 6)
        throw Error("insufficient-shells", std::to_string(x.size()) + " usable shells; at least 6 are needed");
    ThresholdVerdict v;
    v.margin = margin;
    v.s = profile.s;
    v.shells_used = x.size();
    v.fit = fit_slope(x, y, se, derive_seed(profile.seed, 0xF17), 200);
    v.gamma_hat = -v.fit.slope;
    v.gamma_se = v.fit.slope_se;

    const std::size_t half = x.size() / 2;
    auto half_gamma = [&](std::size_t a, std::size_t b) {
        std::vector<double> hx(x.begin() + a, x.begin() + b), hy(y.begin() + a, y.begin() + b), hw;
        for (std::size_t i = a; i < b; ++i) hw.push_back(1.0 / (se[i] * se[i]));
        return -fit_line(hx, hy, hw).slope;
    };
    const double g1 = half_gamma(0, half), g2 = half_gamma(half, x.size());
    v.superpolynomial = g1 > 0.0 && g2 > 2.0 * g1 + 1.0;

    if (v.superpolynomial || v.s == 0.0) {
        v.p_star_hat = kInf;
        v.p_star_se = 0.0;
    } else {
        v.p_star_hat = v.gamma_hat / v.s;
        v.p_star_se = v.gamma_se / v.s;
    }
    for (double p : p_grid.empty() ? profile.p_list : p_grid) v.verdicts.push_back(v.at(p));
    return v;
}

json to_json(const ThresholdVerdict& v) {
    json verdicts = json::array();
    for (const auto& p : v.verdicts)
        verdicts.push_back({{"p", number(p.p)},
                            {"sigma", number(p.sigma)},
                            {"sigma_se", number(p.sigma_se)},
                            {"verdict", to_string(p.verdict)}});
    return {{"gamma_hat", number(v.gamma_hat)},
            {"gamma_se", number(v.gamma_se)},
            {"s", number(v.s)},
            {"p_star_hat", number(v.p_star_hat)},
            {"p_star_se", number(v.p_star_se)},
            {"superpolynomial", v.superpolynomial},
            {"margin", v.margin},
            {"shells_used", v.shells_used},
            {"fit", fit_json(v.fit)},
            {"verdicts", verdicts}};
}

// ---------------------------------------------------------------- metric

MetricSpec make_metric(double q, int J) {
    if (!(q > 0.0)) throw Error("invalid-input", "q must be positive");
    if (J < 1 || J > 60) throw Error("invalid-input", "J must lie in [1, 60]");
    MetricSpec m;
    m.q = q;
    m.J = J;
    for (int j = 1; j <= J; ++j) {
        double p;
        if (std::isinf(q)) p = j + 1.0;
        else if (q > 1.0) p = q - (q - 1.0) * std::ldexp(1.0, -j);
        else p = q * (1.0 - std::ldexp(1.0, -j - 1));
        m.p.push_back(p);
    }
    return m;
}

namespace {

// Throws "not-in-space" when some p_j reaches a term's critical exponent.
void require_in_space(const MetricSpec& spec, const HoloFunction& h, const Domain& d, const MassEstimate* masses) {
    for (const auto& t : h.terms()) {
        double lo = kInf;
        bool known = true;
        try {
            lo = theoretical_threshold(*t.kernel, d).lo;
        } catch (const Error& e) {
            if (e.code() != "no-theoretical-value") throw;
            known = false;
        }
        for (std::size_t j = 0; j < spec.p.size(); ++j) {
            const bool out = known ? spec.p[j] >= lo : masses && masses->tail_verdict[j] == Verdict::divergent;
            if (out) {
                std::ostringstream os;
                os << "p_" << j + 1 << " = " << spec.p[j] << " is not below the critical exponent of "
                   << to_string(t.kernel->family) << (known ? "" : " (estimated)");
                throw Error("not-in-space", os.str());
            }
        }
    }
}

}  // namespace

MetricResult metric_from_masses(const MetricSpec& spec, const MassEstimate& h, double mu) {
    MetricResult r;
    r.tail_bound = spec.tail_bound();
    r.p = spec.p;
    double se_sum = 0.0;
    for (std::size_t j = 0; j < spec.p.size(); ++j) {
        const double p = spec.p[j];
        const double w = std::ldexp(1.0, -static_cast<int>(j) - 1);
        double x = 0.0, xs = 0.0;
        if (mu != 0.0 && h.value[j] != 0.0) {
            const double rel = h.relative_stderr(j);
            if (spec.norm_based()) {
                x = std::abs(mu) * std::pow(h.value[j], 1.0 / p);
                xs = x * rel / p;
            } else {
                x = std::pow(std::abs(mu), p) * h.value[j];
                xs = x * rel;
            }
        }
        double term, term_se;
        if (std::isinf(x)) {
            term = w;
            term_se = 0.0;
        } else {
            term = w * x / (1.0 + x);
            term_se = std::isfinite(xs) ? w * xs / ((1.0 + x) * (1.0 + x)) : w;
        }
        r.x.push_back(x);
        r.x_stderr.push_back(xs);
        r.term.push_back(term);
        r.value += term;
        se_sum += term_se;
    }
    r.stderr_value = se_sum;
    return r;
}

MetricResult metric_distance(const MetricSpec& spec, const HoloFunction& f, const HoloFunction& g, const Domain& d,
                             std::uint64_t budget, std::uint64_t seed) {
    const HoloFunction h = f - g;
    require_in_space(spec, h, d, nullptr);
    if (h.is_zero()) {
        MassEstimate zero;
        zero.p = spec.p;
        zero.value.assign(spec.p.size(), 0.0);
        zero.stderr_value.assign(spec.p.size(), 0.0);
        return metric_from_masses(spec, zero, 1.0);
    }
    const MassEstimate m = lp_masses(h, d, spec.p, budget, seed);
    require_in_space(spec, h, d, &m);
    return metric_from_masses(spec, m, 1.0);
}

json to_json(const MetricResult& m) {
    return {{"value", number(m.value)},       {"stderr", number(m.stderr_value)}, {"tail_bound", number(m.tail_bound)},
            {"p", numbers(m.p)},              {"x", numbers(m.x)},                {"x_stderr", numbers(m.x_stderr)},
            {"term", numbers(m.term)}};
}

ContinuityResult scalar_continuity_check(const MetricSpec& spec, const std::vector<double>& lambdas, double lambda,
                                         const HoloFunction& f, const Domain& d, std::uint64_t budget,
                                         std::uint64_t seed) {
    ContinuityResult r;
    r.lambdas = lambdas;
    require_in_space(spec, f, d, nullptr);
    MassEstimate m;
    if (f.is_zero()) {
        m.p = spec.p;
        m.value.assign(spec.p.size(), 0.0);
        m.stderr_value.assign(spec.p.size(), 0.0);
    } else {
        m = lp_masses(f, d, spec.p, budget, seed);
        require_in_space(spec, f, d, &m);
    }
    r.decreasing = true;
    for (double lk : lambdas) {
        r.distances.push_back(metric_from_masses(spec, m, lk - lambda).value);
        if (r.distances.size() > 1 && r.distances.back() > r.distances[r.distances.size() - 2]) r.decreasing = false;
    }
    return r;
}

// ---------------------------------------------------------------- log law

LogLawResult log_law_fit(std::size_t n, double p, const std::vector<double>& r_grid, std::uint64_t budget_per_r,
                         std::uint64_t seed) {
    if (n < 1) throw Error("invalid-input", "n must be at least 1");
    if (!(p > 0.0)) throw Error("invalid-input", "p must be positive");
    if (r_grid.size() < 2) throw Error("invalid-input", "the log law needs at least 2 radii");
    for (double r : r_grid)
        if (!(r > 0.0 && r < 1.0)) throw Error("invalid-input", "radii must lie in (0, 1)");
    const Domain ball = make_domain("ball", {{"n", n}});
    CVec zeta(n, 0.0);
    zeta[0] = 1.0;
    KernelOptions ko;
    const SingularKernel k = make_kernel(ball, KernelFamily::ball_pole, zeta, ko, seed);
    const ShellSetup setup = shell_setup(k);

    LogLawResult out;
    out.n = n;
    out.p = p;
    for (std::size_t ri = 0; ri < r_grid.size(); ++ri) {
        const double r = r_grid[ri];
        const std::uint64_t rseed = derive_seed(seed, 0x1000 + ri);
        Region region{CVec(n, 0.0), r};
        // |D| > 1 - r on rB, so shells k with 2^-k <= 1 - r are empty.
        const int K = static_cast<int>(std::ceil(std::log2(1.0 / (1.0 - r))));
        const std::uint64_t share = std::max<std::uint64_t>(kChunkSize, budget_per_r / static_cast<std::uint64_t>(K + 1));

        const BallSampler bulk(CVec(n, 0.0), r);
        const auto bulk_int = integrate_region(
            bulk, [&](const CVec& z) { return std::abs(k.denominator_unchecked(z)) >= 0.5; }, 1,
            [&](const CVec& z, std::span<double> v) { v[0] = std::exp(p * k.log_modulus_unchecked(z)); }, share,
            derive_seed(rseed, 0));
        double J = bulk_int.value(0);
        double var = std::pow(bulk_int.stderr_value(0), 2);
        std::vector<ShellEstimate> shells(static_cast<std::size_t>(K));
        for_each_chunk(shells.size(), [&](std::size_t i) {
            const int kk = static_cast<int>(i) + 1;
            shells[i] = sample_shell(k, ball, setup, kk, 2.0, region, {p}, share, derive_seed(rseed, 1 + i));
        });
        for (const auto& s : shells) {
            if (s.missing) continue;
            const double m = s.mass(0);
            J += m;
            var += std::pow(m * s.mass_rel_se[0], 2);
        }
        LogLawPoint pt;
        pt.r = r;
        pt.J = J;
        pt.J_stderr = std::sqrt(var);
        pt.L = std::log(1.0 / (1.0 - r * r));
        if (!(pt.J_stderr <= 0.2 * pt.J)) {
            json partial = json::array();
            for (const auto& q : out.points) partial.push_back({{"r", q.r}, {"J", q.J}, {"stderr", q.J_stderr}});
            throw EstimateError("unstable-estimate", "J(" + std::to_string(r) + ") has relative error above 0.2",
                                partial);
        }
        out.points.push_back(pt);
    }
    std::vector<double> L, J;
    for (const auto& pt : out.points) L.push_back(pt.L), J.push_back(pt.J);
    const LineFit fit = fit_line(L, J);
    out.slope = fit.slope;
    out.intercept = fit.intercept;
    out.slope_se = fit.slope_se;
    out.r_squared = fit.r_squared;
    return out;
}

json to_json(const LogLawResult& r) {
    json pts = json::array();
    for (const auto& p : r.points)
        pts.push_back({{"r", p.r}, {"J", number(p.J)}, {"stderr", number(p.J_stderr)}, {"log_inv", p.L}});
    return {{"n", r.n},
            {"p", r.p},
            {"points", pts},
            {"slope", number(r.slope)},
            {"intercept", number(r.intercept)},
            {"slope_se", number(r.slope_se)},
            {"r_squared", number(r.r_squared)}};
}

// ---------------------------------------------------------------- submean

SubmeanReport submean_check(const HoloFunction& f, const Domain& d, std::size_t trials, std::uint64_t seed,
                            const std::vector<double>& ps, std::size_t groups) {
    if (ps.empty() || groups < 2) throw Error("invalid-input", "submean check needs exponents and >= 2 groups");
    struct Trial {
        bool violation = false;
        bool shrunk = false;
        double excess = -kInf;
    };
    std::vector<Trial> results(trials);
    const std::size_t n = d.n;
    const cplx rot[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    for_each_chunk(trials, [&](std::size_t t) {
        Stream rng(derive_seed(seed, 0x5B), t);
        const BoxSampler box(d.bounding_box);
        CVec a;
        for (std::uint64_t tries = 0;; ++tries) {
            if (tries > 10000000) throw Error("degenerate-domain", "no domain point found for a submean trial");
            double w;
            a = box.draw(rng, w);
            if (d.contains(a)) break;
        }
        const double bd = boundary_distance(d, a, derive_seed(seed, t), 32);
        double r = bd * rng.uniform(0.1, 0.9) / std::sqrt(static_cast<double>(n));
        const double p = ps[t % ps.size()];
        const double centre = f.abs_pow(a, p);
        Trial& out = results[t];
        for (int attempt = 0; attempt < 20; ++attempt) {
            Accumulator acc;
            bool inside = true;
            Stream draws(derive_seed(seed, 0x5C + static_cast<std::uint64_t>(attempt)), t);
            for (std::size_t g = 0; g < groups && inside; ++g) {
                CVec u(n);
                for (auto& c : u) c = draws.disk(r);
                double sum = 0.0;
                for (cplx w : rot) {
                    CVec z = a;
                    for (std::size_t j = 0; j < n; ++j) z[j] += w * u[j];
                    if (!d.contains(z)) {
                        inside = false;
                        break;
                    }
                    sum += f.abs_pow(z, p);
                }
                acc.add(0.25 * sum);
            }
            if (!inside) {
                r *= 0.5;
                out.shrunk = true;
                continue;
            }
            const double mean = acc.mean(), se = acc.stderr_mean();
            const double slack = 3.0 * se + 1e-12 * std::max(centre, mean);
            out.violation = centre > mean + slack;
            out.excess = se > 0.0 ? (centre - mean) / se : (centre > mean ? kInf : 0.0);
            return;
        }
        throw Error("invalid-input", "could not fit a polydisk inside the domain at " + format_point(a));
    });
    SubmeanReport rep;
    rep.trials = trials;
    for (const auto& r : results) {
        rep.violations += r.violation;
        rep.shrunk += r.shrunk;
        rep.worst_excess = std::max(rep.worst_excess, r.excess);
    }
    return rep;
}

// ---------------------------------------------------------------- Cauchy control

namespace {

// d^alpha f(a) by the trapezoid rule on the polycircle of radius rho.
cplx cauchy_derivative(const HoloFunction& f, const CVec& a, const std::vector<int>& alpha, double rho, int m) {
    const std::size_t n = a.size();
    std::vector<int> idx(n, 0);
    cplx sum = 0.0;
    std::size_t count = 0;
    while (true) {
        CVec z = a;
        cplx phase = 1.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double th = 2.0 * std::numbers::pi * idx[j] / m;
            z[j] += std::polar(rho, th);
            phase *= std::polar(1.0, -alpha[j] * th);
        }
        sum += f(z) * phase;
        ++count;
        std::size_t j = 0;
        while (j < n && ++idx[j] == m) idx[j++] = 0;
        if (j == n) break;
    }
    cplx v = sum / static_cast<double>(count);
    for (std::size_t j = 0; j < n; ++j) v *= std::tgamma(alpha[j] + 1.0) / std::pow(rho, alpha[j]);
    return v;
}

}  // namespace

CauchyControl cauchy_norm_control(const HoloFunction& f, const std::vector<CVec>& K, const std::vector<int>& alpha,
                                  const Domain& d, std::uint64_t budget, std::uint64_t seed) {
    if (K.empty()) throw Error("invalid-input", "the compact set has no points");
    if (alpha.size() != d.n) throw Error("invalid-input", "multi-index has the wrong length");
    for (int a : alpha)
        if (a < 0) throw Error("invalid-input", "multi-index entries must be non-negative");
    CauchyControl out;
    out.alpha = alpha;
    out.delta_K = kInf;
    for (std::size_t i = 0; i < K.size(); ++i) {
        if (!d.contains(K[i])) throw Error("outside-domain", format_point(K[i]) + " is not in the domain");
        out.delta_K = std::min(out.delta_K, boundary_distance(d, K[i], derive_seed(seed, i), 32));
    }
    if (out.delta_K < 1e-3) {
        std::ostringstream os;
        os << "compact set lies within " << out.delta_K << " of the boundary";
        throw Error("compact-too-close", os.str());
    }
    const double rho = 0.5 * out.delta_K / std::sqrt(static_cast<double>(d.n));
    const int m = d.n == 1 ? 64 : d.n == 2 ? 32 : 12;
    auto sup = [&](const HoloFunction& g) {
        double s = 0.0;
        for (const auto& a : K) s = std::max(s, std::abs(cauchy_derivative(g, a, alpha, rho, m)));
        return s;
    };
    const std::uint64_t mass_seed = derive_seed(seed, 0xCA);
    for (double t : {1.0, 2.0, 5.0}) {
        const HoloFunction g = f * cplx(t, 0.0);
        double s = 0.0, n1 = 0.0, n1_se = 0.0;
        if (!g.is_zero()) {
            s = sup(g);
            const MassEstimate mass = lp_masses(g, d, {1.0}, budget, mass_seed);
            n1 = mass.value[0];
            n1_se = mass.stderr_value[0];
        }
        if (t == 1.0) {
            out.sup_derivative = s;
            out.norm1 = n1;
            out.norm1_stderr = n1_se;
        }
        out.t.push_back(t);
        out.ratios.push_back(n1 > 0.0 ? s / n1 : 0.0);
    }
    out.constant = out.ratios[0];
    return out;
}

}  // namespace bergman

#include "bergman/kernels.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace bergman {

namespace {

constexpr std::array<std::pair<KernelFamily, const char*>, 14> kFamilyNames{{
    {KernelFamily::planar_pole, "planar-pole"},
    {KernelFamily::planar_log, "planar-log"},
    {KernelFamily::planar_power, "planar-power"},
    {KernelFamily::cusp_monomial, "cusp-monomial"},
    {KernelFamily::cusp_inverse_power, "cusp-inverse-power"},
    {KernelFamily::ball_pole, "ball-pole"},
    {KernelFamily::ball_log, "ball-log"},
    {KernelFamily::ball_power, "ball-power"},
    {KernelFamily::convex_pole, "convex-pole"},
    {KernelFamily::convex_log, "convex-log"},
    {KernelFamily::convex_power, "convex-power"},
    {KernelFamily::levi_pole, "levi-pole"},
    {KernelFamily::levi_log, "levi-log"},
    {KernelFamily::levi_power, "levi-power"},
}};

bool is_planar(KernelFamily f) {
    return f == KernelFamily::planar_pole || f == KernelFamily::planar_log || f == KernelFamily::planar_power;
}
bool is_cusp(KernelFamily f) { return f == KernelFamily::cusp_monomial || f == KernelFamily::cusp_inverse_power; }
bool is_ball(KernelFamily f) {
    return f == KernelFamily::ball_pole || f == KernelFamily::ball_log || f == KernelFamily::ball_power;
}
bool is_convex(KernelFamily f) {
    return f == KernelFamily::convex_pole || f == KernelFamily::convex_log || f == KernelFamily::convex_power;
}
bool is_pole(KernelFamily f) {
    return f == KernelFamily::planar_pole || f == KernelFamily::ball_pole || f == KernelFamily::convex_pole ||
           f == KernelFamily::levi_pole;
}
// Families whose value goes through a logarithm.
bool needs_branch(KernelFamily f) { return !is_pole(f) && f != KernelFamily::cusp_inverse_power; }

cplx planar_ratio(const SingularKernel& k, const CVec& z) { return (z[0] - *k.anchor) / (z[0] - k.zeta[0]); }

bool on_cut(cplx w) { return w.imag() == 0.0 && w.real() <= 0.0; }

double cusp_alpha(const Domain& d) { return d.parameters.value("alpha", 1.0); }

}  // namespace

std::string to_string(KernelFamily f) {
    for (const auto& [k, name] : kFamilyNames)
        if (k == f) return name;
    return "unknown";
}

KernelFamily kernel_family_from_string(const std::string& name) {
    for (const auto& [k, n] : kFamilyNames)
        if (name == n) return k;
    throw Error("invalid-input", "unknown kernel family '" + name + "'");
}

bool is_log_family(KernelFamily f) {
    return f == KernelFamily::planar_log || f == KernelFamily::ball_log || f == KernelFamily::convex_log ||
           f == KernelFamily::levi_log;
}

bool is_levi_family(KernelFamily f) {
    return f == KernelFamily::levi_pole || f == KernelFamily::levi_log || f == KernelFamily::levi_power;
}

std::string to_string(BranchKind k) {
    switch (k) {
        case BranchKind::principal: return "principal";
        case BranchKind::path_continued: return "path-continued";
        default: return "none";
    }
}

cplx SingularKernel::denominator_unchecked(const CVec& z) const {
    if (is_planar(family)) return z[0] - zeta[0];
    if (is_cusp(family)) return z[0];
    if (is_ball(family)) return 1.0 - inner(z, zeta);
    if (is_convex(family)) {
        cplx s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += coeffs[j] * (z[j] - zeta[j]);
        return s;
    }
    return (*levi)(z);
}

cplx SingularKernel::denominator(const CVec& z) const {
    if (!contains(z)) throw Error("outside-domain", format_point(z) + " is not in the domain");
    if (is_levi_family(family) && dist(z, zeta) >= patch_radius)
        throw Error("outside-local-patch", format_point(z) + " is outside B(zeta, " + std::to_string(patch_radius) + ")");
    return denominator_unchecked(z);
}

double SingularKernel::exponent() const {
    const double nn = static_cast<double>(n);
    switch (family) {
        case KernelFamily::planar_power:
        case KernelFamily::convex_power: return 2.0 / q;
        case KernelFamily::cusp_monomial: return (alpha + 1.0) / q;
        case KernelFamily::cusp_inverse_power: return N;
        case KernelFamily::ball_power:
        case KernelFamily::levi_power: return (nn + 1.0) / q;
        default: return is_log_family(family) ? 0.0 : 1.0;
    }
}

double SingularKernel::modulus_factor(const CVec& z) const {
    if (family == KernelFamily::planar_power) return std::pow(std::abs(z[0] - *anchor), exponent());
    return 1.0;
}

cplx SingularKernel::log_argument(const CVec& z) const {
    if (family == KernelFamily::planar_log || family == KernelFamily::planar_power) return planar_ratio(*this, z);
    return denominator_unchecked(z);
}

cplx SingularKernel::eval_unchecked(const CVec& z) const {
    if (is_pole(family)) return 1.0 / denominator_unchecked(z);
    const double s = exponent();
    switch (family) {
        case KernelFamily::planar_log: return std::log(planar_ratio(*this, z));
        case KernelFamily::planar_power: return std::exp(s * std::log(planar_ratio(*this, z)));
        case KernelFamily::ball_log:
        case KernelFamily::convex_log:
        case KernelFamily::levi_log: return -std::log(denominator_unchecked(z));
        default: return std::exp(-s * std::log(denominator_unchecked(z)));
    }
}

double SingularKernel::log_modulus_unchecked(const CVec& z) const {
    if (is_log_family(family)) return std::log(std::abs(eval_unchecked(z)));
    const double s = exponent();
    double v = -s * std::log(std::abs(denominator_unchecked(z)));
    if (family == KernelFamily::planar_power) v += s * std::log(std::abs(z[0] - *anchor));
    return v;
}

cplx SingularKernel::eval(const CVec& z) const {
    denominator(z);  // membership and patch checks
    if (needs_branch(family)) {
        const cplx w = log_argument(z);
        const bool ok = branch.kind == BranchKind::path_continued ? !on_cut(w) : w.real() > 0.0;
        if (!ok)
            throw Error("branch-violation", "log argument " + format_point({w}) + " at " + format_point(z) +
                                                " violates the " + to_string(branch.kind) + " certificate");
    }
    return eval_unchecked(z);
}

cplx SingularKernel::eval_along(const CVec& u, double log_t) const {
    // Linear part L(u) of D at zeta.
    cplx lin = 0.0;
    if (is_planar(family) || is_cusp(family)) {
        lin = u[0];
    } else if (is_ball(family)) {
        for (std::size_t j = 0; j < n; ++j) lin -= std::conj(zeta[j]) * u[j];
    } else {
        const CVec c = is_convex(family) ? coeffs : levi->linear_coefficients();
        for (std::size_t j = 0; j < n; ++j) lin += c[j] * u[j];
    }
    const cplx log_d = cplx(log_t, 0.0) + std::log(lin);
    const double s = exponent();
    switch (family) {
        case KernelFamily::planar_log: return std::log(zeta[0] - *anchor) - log_d;
        case KernelFamily::planar_power: return std::exp(s * (std::log(zeta[0] - *anchor) - log_d));
        case KernelFamily::ball_log:
        case KernelFamily::convex_log:
        case KernelFamily::levi_log: return -log_d;
        default: return std::exp(-(is_pole(family) ? 1.0 : s) * log_d);
    }
}

cplx select_anchor(const Domain& d, cplx zeta, std::size_t segment_points) {
    const CVec nu = outward_normal(d, {zeta});
    double t = 0.1 * d.diameter();
    for (int h = 0; h < 40; ++h, t *= 0.5) {
        const cplx a = zeta + t * nu[0];
        bool clear = true;
        for (std::size_t i = 1; i <= segment_points && clear; ++i)
            clear = !d.contains({zeta + (static_cast<double>(i) / segment_points) * (a - zeta)});
        if (clear) return a;
    }
    throw Error("anchor-not-found", "no outward segment from " + format_point({zeta}) + " avoids the domain");
}

namespace {

void check_segment(const Domain& d, cplx zeta, cplx a, std::size_t points) {
    for (std::size_t i = 1; i <= points; ++i) {
        const CVec p{zeta + (static_cast<double>(i) / points) * (a - zeta)};
        if (d.contains(p)) throw Error("invalid-anchor", "segment [zeta, a] meets the domain at " + format_point(p));
    }
}

void certify(SingularKernel& k, const Domain& d, const KernelOptions& opt, std::uint64_t seed) {
    if (!needs_branch(k.family)) return;
    std::vector<CVec> pts;
    if (is_levi_family(k.family)) {
        pts = sample_near(d, k.zeta, k.patch_radius, opt.certify_samples, seed).points;
    } else {
        pts = sample_uniform(d, opt.certify_samples, seed).points;
    }
    k.branch.samples = pts.size();
    k.branch.min_real_part = kInf;
    const CVec* witness = nullptr;
    for (const auto& z : pts) {
        const double re = k.log_argument(z).real();
        if (re < k.branch.min_real_part) k.branch.min_real_part = re, witness = &z;
    }
    if (k.branch.min_real_part > 0.0) {
        k.branch.kind = BranchKind::principal;
        return;
    }
    if (k.family != KernelFamily::planar_log && k.family != KernelFamily::planar_power)
        throw Error("branch-violation", "Re of the log argument is " + std::to_string(k.branch.min_real_part) + " at " +
                                            format_point(*witness));
    k.branch.kind = BranchKind::path_continued;
    k.branch.base = pts.front();
    k.branch.base_value = std::log(k.log_argument(k.branch.base));
}

}  // namespace

SingularKernel make_kernel(const Domain& d, KernelFamily family, const CVec& zeta, const KernelOptions& opt,
                           std::uint64_t seed) {
    if (zeta.size() != d.n) throw Error("invalid-input", "boundary point has dimension " + std::to_string(zeta.size()));
    if (!(opt.q > 0.0)) throw Error("invalid-input", "q must be positive");
    SingularKernel k;
    k.family = family;
    k.n = d.n;
    k.zeta = zeta;
    k.q = opt.q;
    k.N = opt.N;
    k.domain_family = d.family;
    k.contains = d.contains;
    k.alpha = opt.alpha.value_or(cusp_alpha(d));

    if (is_planar(family) && d.n != 1) throw Error("invalid-input", to_string(family) + " needs a planar domain");
    if (is_cusp(family) && d.family != "cusp" && d.family != "expcusp")
        throw Error("invalid-input", to_string(family) + " needs a cusp domain");
    if (is_ball(family)) {
        if (d.family != "ball") throw Error("invalid-input", to_string(family) + " needs the unit ball");
        if (std::abs(norm(zeta) - 1.0) > 1e-12) throw Error("not-boundary-point", format_point(zeta) + " is not on the unit sphere");
    } else {
        validate_boundary_point(d, zeta, derive_seed(seed, 1));
    }

    if (family == KernelFamily::planar_log || family == KernelFamily::planar_power) {
        if (opt.anchor) {
            check_segment(d, zeta[0], *opt.anchor, 1000);
            k.anchor = opt.anchor;
        } else {
            k.anchor = select_anchor(d, zeta[0]);
        }
        k.branch.segment_checks = 1000;
    }
    if (is_convex(family)) k.coeffs = opt.coeffs ? *opt.coeffs : supporting_functional(d, zeta, derive_seed(seed, 2)).c;
    if (is_levi_family(family)) {
        if (!d.rho) throw Error("invalid-input", to_string(family) + " needs a defining function");
        k.levi = std::make_shared<LeviPolynomial>(*d.rho, zeta);
        k.patch_radius = opt.levi_epsilon ? *opt.levi_epsilon : compute_beta(*d.rho, d, 200, derive_seed(seed, 3)).epsilon;
    }
    certify(k, d, opt, derive_seed(seed, 4));
    return k;
}

SingularKernel with_branch_base(SingularKernel k, const CVec& z0) {
    k.branch.base = z0;
    k.branch.base_value = std::log(k.log_argument(z0));
    return k;
}

TheoreticalThreshold theoretical_threshold(const SingularKernel& k, const Domain& d) {
    const double nn = static_cast<double>(d.n);
    const auto value = [](double v) { return TheoreticalThreshold{v, v}; };
    const auto missing = [&]() {
        return Error("no-theoretical-value", to_string(k.family) + " on " + d.family + " at " + format_point(k.zeta));
    };
    if (is_log_family(k.family)) return value(kInf);

    // Threshold of the pole 1/D for the convex and planar catalogs.
    const auto pole_threshold = [&]() -> double {
        const std::string& f = d.family;
        if (f == "ball" || f == "ellipsoid" || f == "strictly-psh") return nn + 1.0;
        if (f == "half-ball") {
            const bool flat = std::abs(k.zeta[0].real()) <= 1e-12 && norm(k.zeta) < 1 - 1e-12;
            return flat ? 2.0 : nn + 1.0;
        }
        if (f == "box" || f == "square" || f == "polydisk") {
            try {
                supporting_functional(d, k.zeta, 0, 0);
            } catch (const Error&) {
                throw missing();  // edge and corner points
            }
            return 2.0;
        }
        if (f == "convex-hull") {
            for (cplx v : d.vertices)
                if (std::abs(v - k.zeta[0]) < 1e-9) throw missing();
            return 2.0;
        }
        if (d.n == 1 && (f == "disk" || f == "annulus" || f == "cut-annulus" || f == "two-disks")) return 2.0;
        if (f == "cusp" && std::abs(k.zeta[0]) == 0.0) return cusp_alpha(d) + 1.0;
        throw missing();
    };

    switch (k.family) {
        case KernelFamily::planar_pole: return value(pole_threshold());
        case KernelFamily::planar_power: return value(pole_threshold() / k.exponent());
        case KernelFamily::cusp_monomial:
            if (d.family != "cusp" || std::abs(k.zeta[0]) != 0.0) throw missing();
            return value((cusp_alpha(d) + 1.0) / k.exponent());
        case KernelFamily::cusp_inverse_power:
            if (std::abs(k.zeta[0]) != 0.0) throw missing();
            if (d.family == "expcusp") return value(kInf);
            return value((cusp_alpha(d) + 1.0) / k.N);
        case KernelFamily::ball_pole:
        case KernelFamily::ball_power: return value((nn + 1.0) / k.exponent());
        case KernelFamily::convex_pole:
        case KernelFamily::convex_power: return value(pole_threshold() / k.exponent());
        case KernelFamily::levi_pole:
        case KernelFamily::levi_power: {
            if (!d.rho) throw missing();
            const double s = k.exponent();
            return {(nn + 1.0) / s, 2.0 * nn / s};
        }
        default: throw missing();
    }
}

namespace {

// Romberg integration of the log-derivative 1/(w-a) - 1/(w-zeta) over [A, B],
// checking every node against the domain.
cplx segment_integral(const SingularKernel& k, const Domain& d, cplx A, cplx B, std::size_t& evals) {
    const cplx a = *k.anchor, zeta = k.zeta[0], h = B - A;
    const auto f = [&](double t) {
        const cplx w = A + t * h;
        if (!d.contains({w})) throw Error("path-escape", "continuation path leaves the domain at " + format_point({w}));
        ++evals;
        return h * (1.0 / (w - a) - 1.0 / (w - zeta));
    };
    constexpr int kMaxLevels = 22;
    std::vector<cplx> prev{0.5 * (f(0.0) + f(1.0))}, cur;
    cplx trap = prev[0];
    for (int level = 1; level <= kMaxLevels; ++level) {
        const std::size_t m = std::size_t{1} << (level - 1);
        cplx mid = 0.0;
        for (std::size_t i = 0; i < m; ++i) mid += f((2.0 * i + 1.0) / (2.0 * m));
        trap = 0.5 * trap + mid / (2.0 * static_cast<double>(m));
        cur.assign(level + 1, 0.0);
        cur[0] = trap;
        double factor = 1.0;
        for (int j = 1; j <= level; ++j) {
            factor *= 4.0;
            cur[j] = cur[j - 1] + (cur[j - 1] - prev[j - 1]) / (factor - 1.0);
        }
        if (level >= 3 && std::abs(cur[level] - prev[level - 1]) < 1e-12) return cur[level];
        prev.swap(cur);
    }
    throw Error("no-convergence", "Romberg refinement did not settle on a path segment");
}

void require_continuable(const SingularKernel& k) {
    if (k.family != KernelFamily::planar_log && k.family != KernelFamily::planar_power)
        throw Error("invalid-input", "branch continuation applies to planar-log and planar-power kernels");
    if (k.branch.base.empty()) throw Error("invalid-input", "kernel has no branch base");
}

}  // namespace

BranchPath continue_along(const SingularKernel& k, const Domain& d, const std::vector<CVec>& waypoints) {
    require_continuable(k);
    if (waypoints.empty() || dist(waypoints.front(), k.branch.base) > 1e-12)
        throw Error("invalid-input", "path must start at the branch base " + format_point(k.branch.base));
    BranchPath out;
    out.waypoints = waypoints;
    out.value = k.branch.base_value;
    for (std::size_t i = 1; i < waypoints.size(); ++i)
        out.value += segment_integral(k, d, waypoints[i - 1][0], waypoints[i][0], out.evaluations);
    return out;
}

BranchPath continue_branch(const SingularKernel& k, const Domain& d, const CVec& z, const ComponentMap& map) {
    require_continuable(k);
    if (!d.contains(z)) throw Error("outside-domain", format_point(z) + " is not in the domain");
    const std::size_t from = map.nearest_node(k.branch.base);
    const std::size_t to = map.nearest_node(z);
    const double reach = 2.0 * map.spacing;
    if (dist(map.node(from), k.branch.base) > reach || dist(map.node(to), z) > reach)
        throw Error("unreachable", "branch base or target is off the component map");
    if (map.labels[from] != map.labels[to])
        throw Error("unreachable", format_point(z) + " is not in the component of the branch base");
    std::vector<CVec> waypoints{k.branch.base};
    for (std::size_t i : graph_path(map, from, to)) waypoints.push_back(map.node(i));
    waypoints.push_back(z);
    return continue_along(k, d, waypoints);
}

json to_json(const SingularKernel& k) {
    json j;
    j["family"] = to_string(k.family);
    j["domain_family"] = k.domain_family;
    j["zeta"] = cvec_to_json(k.zeta);
    j["anchor"] = k.anchor ? complex_to_json(*k.anchor) : json(nullptr);
    j["q"] = k.q;
    j["alpha"] = k.alpha;
    j["N"] = k.N;
    j["coeffs"] = cvec_to_json(k.coeffs);
    j["patch_radius"] = std::isfinite(k.patch_radius) ? json(k.patch_radius) : json(nullptr);
    j["branch"] = {
        {"kind", to_string(k.branch.kind)},
        {"samples", k.branch.samples},
        {"min_real_part", std::isfinite(k.branch.min_real_part) ? json(k.branch.min_real_part) : json(nullptr)},
        {"base", cvec_to_json(k.branch.base)},
        {"base_value", complex_to_json(k.branch.base_value)},
        {"segment_checks", k.branch.segment_checks},
    };
    return j;
}

SingularKernel kernel_from_json(const json& j, const Domain& d) {
    SingularKernel k;
    k.family = kernel_family_from_string(j.at("family").get<std::string>());
    k.n = d.n;
    k.domain_family = d.family;
    k.contains = d.contains;
    k.zeta = cvec_from_json(j.at("zeta"));
    if (k.zeta.size() != d.n) throw Error("invalid-input", "kernel zeta does not match the domain dimension");
    if (j.contains("anchor") && !j["anchor"].is_null()) k.anchor = complex_from_json(j["anchor"]);
    k.q = j.value("q", 2.0);
    k.alpha = j.value("alpha", cusp_alpha(d));
    k.N = j.value("N", 1);
    if (j.contains("coeffs")) k.coeffs = cvec_from_json(j["coeffs"]);
    if (j.contains("patch_radius") && !j["patch_radius"].is_null()) k.patch_radius = j["patch_radius"].get<double>();
    if (j.contains("branch")) {
        const auto& b = j["branch"];
        const std::string kind = b.value("kind", "none");
        k.branch.kind = kind == "principal" ? BranchKind::principal
                        : kind == "path-continued" ? BranchKind::path_continued
                                                   : BranchKind::none;
        k.branch.samples = b.value("samples", std::size_t{0});
        k.branch.min_real_part = b.contains("min_real_part") && !b["min_real_part"].is_null() ? b["min_real_part"].get<double>() : kInf;
        if (b.contains("base")) k.branch.base = cvec_from_json(b["base"]);
        if (b.contains("base_value")) k.branch.base_value = complex_from_json(b["base_value"]);
        k.branch.segment_checks = b.value("segment_checks", std::size_t{0});
    }
    if (is_levi_family(k.family)) {
        if (!d.rho) throw Error("invalid-input", "Levi kernel needs a domain with a defining function");
        k.levi = std::make_shared<LeviPolynomial>(*d.rho, k.zeta);
    }
    if ((k.family == KernelFamily::planar_log || k.family == KernelFamily::planar_power) && !k.anchor)
        throw Error("invalid-input", "planar log kernels need an anchor");
    if (is_convex(k.family) && k.coeffs.size() != d.n) throw Error("invalid-input", "convex kernel needs coefficients");
    return k;
}

}  // namespace bergman

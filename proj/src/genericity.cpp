#include "bergman/genericity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bergman/rng.hpp"

namespace bergman {

namespace {

json number(double x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (std::isnan(x)) return "nan";
    return x;
}

json numbers(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(number(x));
    return a;
}

double safe_abs(const HoloFunction& f, const CVec& z) {
    try {
        return std::abs(f(z));
    } catch (const Error&) {
        return 0.0;  // outside a Levi patch
    }
}

}  // namespace

DensifyResult densify(const HoloFunction& f, const HoloFunction& phi, double k, const ApproachSequence& probe,
                      std::optional<double> M) {
    if (!(k > 0.0)) throw Error("invalid-input", "k must be positive");
    if (probe.points.empty()) throw Error("invalid-input", "empty probe");
    DensifyResult r;
    r.k = k;
    r.distance = probe.distances;
    std::vector<double> phi_abs;
    for (const auto& z : probe.points) {
        const cplx fz = f(z), pz = phi(z);
        r.sup_f = std::max(r.sup_f, std::abs(fz));
        phi_abs.push_back(std::abs(pz));
        r.value.push_back(std::abs(fz + pz / k));
    }
    double running = 0.0, phi_max = 0.0;
    for (std::size_t i = 0; i < r.value.size(); ++i) {
        const double prev = running;
        running = std::max(running, r.value[i]);
        phi_max = std::max(phi_max, phi_abs[i]);
        r.running_max.push_back(running);
        r.bound.push_back(phi_max / k - r.sup_f);
        // Each side is a rounded sum of three moduli.
        const double slack = 1e-12 * std::max({1.0, running, phi_max / k, r.sup_f});
        if (running < r.bound.back() - slack) r.bound_holds = false;
        if (running < prev) r.monotone = false;
        if (M && r.crossing < 0 && running > *M) r.crossing = static_cast<long>(i);
    }
    r.achieved_max = running;
    if (M && r.crossing < 0)
        throw EstimateError("probe-exhausted",
                            "running max " + std::to_string(running) + " never exceeds " + std::to_string(*M),
                            to_json(r));
    return r;
}

json to_json(const DensifyResult& r) {
    return {{"k", r.k},
            {"distance", numbers(r.distance)},
            {"value", numbers(r.value)},
            {"running_max", numbers(r.running_max)},
            {"bound", numbers(r.bound)},
            {"sup_f", number(r.sup_f)},
            {"achieved_max", number(r.achieved_max)},
            {"bound_holds", r.bound_holds},
            {"monotone", r.monotone},
            {"crossing", r.crossing}};
}

bool ComponentVerdict::unbounded() const {
    return !exceeds.empty() && std::all_of(exceeds.begin(), exceeds.end(), [](bool b) { return b; });
}

std::vector<int> components_near(const ComponentMap& map, const CVec& z) {
    std::vector<int> out;
    for (std::size_t i = 0; i < map.size(); ++i)
        if (dist(map.node(i), z) <= 2.0 * map.spacing && std::find(out.begin(), out.end(), map.labels[i]) == out.end())
            out.push_back(map.labels[i]);
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

void record(ComponentVerdict& c, double v, const CVec* z, double log_distance) {
    if (!(v > c.max_abs)) return;
    c.max_abs = v;
    c.argmax = z ? *z : CVec{};
    c.argmax_log_distance = log_distance;
}

// Axis directions ±e_j, ±i e_j.
std::vector<CVec> axis_directions(std::size_t n) {
    std::vector<CVec> out;
    for (std::size_t j = 0; j < n; ++j)
        for (cplx u : {cplx(1, 0), cplx(-1, 0), cplx(0, 1), cplx(0, -1)}) {
            CVec e(n, 0.0);
            e[j] = u;
            out.push_back(e);
        }
    return out;
}

// Approach to an exact boundary point b from the nearest node of one component
// whose segment to b stays in the domain. Returns false when there is none.
bool exact_approach(const HoloFunction& f, const Domain& d, const ComponentMap& map, int label, const CVec& b,
                    const UnboundednessOptions& opt, ComponentVerdict& c) {
    std::vector<std::pair<double, std::size_t>> nodes;
    for (std::size_t i = 0; i < map.size(); ++i)
        if (map.labels[i] == label) {
            const double r = dist(map.node(i), b);
            if (r <= 2.0 * map.spacing) nodes.emplace_back(r, i);
        }
    std::sort(nodes.begin(), nodes.end());
    for (std::size_t tries = 0; tries < std::min<std::size_t>(8, nodes.size()); ++tries) {
        const CVec v = map.node(nodes[tries].second);
        const double r = nodes[tries].first;
        if (!(r > 0.0)) continue;
        const CVec u = (1.0 / r) * (v - b);
        bool inside = true;
        for (int m = 0; m <= 40 && inside; ++m) inside = d.contains(b + std::ldexp(r, -m) * u);
        if (!inside) continue;
        const double log_r = std::log(r);
        for (int m = 0; m <= opt.halvings; ++m) {
            const double lt = log_r - m * std::numbers::ln2;
            record(c, std::abs(f.eval_along(b, u, lt)), nullptr, lt);
        }
        for (double step = 1.0;; step *= 2.0) {
            const double lt = std::min(log_r - opt.halvings * std::numbers::ln2, std::log(1e-13)) - step;
            record(c, std::abs(f.eval_along(b, u, lt)), nullptr, lt);
            if (lt <= opt.min_log_distance) break;
        }
        return true;
    }
    return false;
}

}  // namespace

UnboundednessReport unboundedness_verdict(const HoloFunction& f, const Domain& d, const ComponentMap& map,
                                          const std::vector<double>& M_grid, const UnboundednessOptions& options) {
    UnboundednessReport rep;
    rep.w = map.w;
    rep.delta = map.delta;
    rep.M_grid = M_grid;
    rep.components.resize(static_cast<std::size_t>(map.component_count));
    for (int c = 0; c < map.component_count; ++c) {
        auto& v = rep.components[static_cast<std::size_t>(c)];
        v.label = c;
        v.size = map.component_sizes[static_cast<std::size_t>(c)];
        v.tiny = v.size < 10;
    }

    // Nodes, and the boundary crossings next to them, per component.
    const auto dirs = axis_directions(map.n);
    std::vector<std::vector<std::pair<std::size_t, CVec>>> crossings(rep.components.size());
    for (std::size_t i = 0; i < map.size(); ++i) {
        const CVec z = map.node(i);
        auto& c = rep.components[static_cast<std::size_t>(map.labels[i])];
        record(c, safe_abs(f, z), &z, 0.0);
        for (const auto& u : dirs) {
            const CVec q = z + map.spacing * u;
            if (dist(q, map.w) < map.delta && !d.contains(q))
                crossings[static_cast<std::size_t>(map.labels[i])].emplace_back(i, q);
        }
    }
    for (std::size_t c = 0; c < crossings.size(); ++c) {
        const auto& list = crossings[c];
        const std::size_t stride = std::max<std::size_t>(1, (list.size() + options.max_targets - 1) / options.max_targets);
        for (std::size_t t = 0; t < list.size(); t += stride) {
            const CVec z = map.node(list[t].first);
            const CVec b = bisect_boundary(d, z, list[t].second);
            ++rep.components[c].boundary_targets;
            for (int m = 1; m <= options.halvings; ++m) {
                const CVec p = b + std::ldexp(1.0, -m) * (z - b);
                if (!d.contains(p)) break;
                record(rep.components[c], safe_abs(f, p), &p, std::log(dist(p, b)));
            }
        }
    }

    std::vector<CVec> exact = f.singular_points();
    exact.insert(exact.end(), options.exact_targets.begin(), options.exact_targets.end());
    for (const auto& b : exact) {
        if (dist(b, map.w) > map.delta + 2.0 * map.spacing) continue;
        for (int label : components_near(map, b)) {
            auto& c = rep.components[static_cast<std::size_t>(label)];
            if (exact_approach(f, d, map, label, b, options, c)) ++c.boundary_targets;
        }
    }

    for (auto& c : rep.components)
        for (double M : M_grid) c.exceeds.push_back(c.max_abs > M);
    return rep;
}

json to_json(const UnboundednessReport& r) {
    json comps = json::array();
    for (const auto& c : r.components) {
        json ex = json::array();
        for (bool b : c.exceeds) ex.push_back(b);
        comps.push_back({{"label", c.label},
                         {"size", c.size},
                         {"tiny", c.tiny},
                         {"max_abs", number(c.max_abs)},
                         {"argmax", c.argmax.empty() ? json(nullptr) : cvec_to_json(c.argmax)},
                         {"argmax_log_distance", number(c.argmax_log_distance)},
                         {"boundary_targets", c.boundary_targets},
                         {"exceeds", ex},
                         {"verdict", c.unbounded() ? "exceeds-grid" : "bounded-so-far"}});
    }
    return {{"w", cvec_to_json(r.w)}, {"delta", r.delta}, {"M_grid", numbers(r.M_grid)}, {"components", comps}};
}

bool WitnessSeries::all_passed() const {
    return !diagnostics.empty() &&
           std::all_of(diagnostics.begin(), diagnostics.end(), [](const NetDiagnostic& g) { return g.passed; });
}

namespace {

KernelFamily witness_family(const Domain& d) {
    if (d.family == "ball") return KernelFamily::ball_log;
    if (d.n == 1 && d.c1_boundary) return KernelFamily::planar_log;
    if (d.convex) return KernelFamily::convex_log;
    throw Error("invalid-input", "no log-family kernel for the '" + d.family + "' domain");
}

std::vector<CVec> boundary_net(const Domain& d, int J, std::uint64_t seed) {
    if (!d.star_shaped) throw Error("invalid-input", "boundary nets need a star-shaped domain");
    std::vector<CVec> net;
    Stream rng(seed, 0);
    const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int j = 1; j <= J; ++j) {
        CVec u(d.n);
        if (d.n == 1) {
            const double theta = 2.0 * std::numbers::pi * std::fmod(0.5 + j * golden, 1.0);
            u[0] = std::polar(1.0, theta);
        } else {
            for (auto& c : u) c = {rng.normal(), rng.normal()};
            u = (1.0 / norm(u)) * u;
        }
        CVec w = ray_boundary(d, u);
        // Sphere points are normalized exactly so ball kernels accept them.
        if (d.family == "ball") w = (1.0 / norm(w)) * w;
        net.push_back(std::move(w));
    }
    return net;
}

// Verdict at w_j: every component whose closure holds w_j exceeds M.
NetDiagnostic diagnose(const HoloFunction& sum, const HoloFunction& without, const Domain& d, const CVec& w,
                       double delta, double M, std::uint64_t seed) {
    NetDiagnostic g;
    g.w = w;
    const ComponentMap map = connected_components(d, w, delta, {}, seed);
    const auto near = components_near(map, w);
    const auto max_near = [&](const HoloFunction& f) {
        UnboundednessOptions opt;
        opt.exact_targets = {w};
        const auto rep = unboundedness_verdict(f, d, map, {M}, opt);
        double lo = kInf;
        for (int label : near) lo = std::min(lo, rep.components[static_cast<std::size_t>(label)].max_abs);
        return near.empty() ? 0.0 : lo;
    };
    g.max_abs = max_near(sum);
    g.passed = g.max_abs > M;
    g.max_without = max_near(without);
    g.necessary = !(g.max_without > M);
    return g;
}

}  // namespace

WitnessSeries assemble_witness(const Domain& d, int J, double q, std::uint64_t seed, const WitnessOptions& options) {
    if (J < 1) throw Error("invalid-input", "J must be at least 1");
    const MetricSpec spec = make_metric(q, J);
    WitnessSeries w;
    w.domain_family = d.family;
    const KernelFamily family = options.family ? *options.family : witness_family(d);
    w.kernel_family = to_string(family);
    w.q = q;
    w.J = J;
    w.p_J = spec.p.back();
    w.M = options.M;
    w.delta = options.delta > 0.0 ? options.delta : 0.1 * d.diameter();
    w.seed = seed;
    w.net = boundary_net(d, J, derive_seed(seed, 1));

    std::vector<HoloFunction> terms;
    double partial = 0.0;
    for (int j = 1; j <= J; ++j) {
        const auto& wj = w.net[static_cast<std::size_t>(j - 1)];
        const SingularKernel k = make_kernel(d, family, wj, {}, derive_seed(seed, 100 + j));
        const HoloFunction f = HoloFunction::of(k);
        const MassEstimate m = lp_masses(f, d, {w.p_J}, options.norm_budget, derive_seed(seed, 200 + j));
        const double norm_j = std::pow(m.value[0], 1.0 / w.p_J);
        w.norms.push_back(norm_j);
        w.epsilon.push_back(std::ldexp(1.0, -j) / (1.0 + norm_j));
        partial += w.epsilon.back() * norm_j;
        w.partial_sums.push_back(partial);
        terms.push_back(f);
    }

    std::vector<std::string> failing;
    for (int attempt = 0; attempt < std::max(1, options.attempts); ++attempt) {
        w.attempts = attempt + 1;
        w.phases.assign(static_cast<std::size_t>(J), cplx(1.0, 0.0));
        if (attempt > 0) {
            Stream rng(derive_seed(seed, 2), static_cast<std::uint64_t>(attempt));
            for (auto& ph : w.phases) ph = std::polar(1.0, 2.0 * std::numbers::pi * rng.uniform());
        }
        std::vector<HoloFunction> scaled;
        w.sum = HoloFunction();
        for (std::size_t j = 0; j < terms.size(); ++j) {
            scaled.push_back(terms[j] * (w.epsilon[j] * w.phases[j]));
            w.sum = w.sum + scaled.back();
        }
        w.diagnostics.clear();
        failing.clear();
        for (std::size_t j = 0; j < terms.size(); ++j) {
            HoloFunction without;
            for (std::size_t i = 0; i < terms.size(); ++i)
                if (i != j) without = without + scaled[i];
            w.diagnostics.push_back(
                diagnose(w.sum, without, d, w.net[j], w.delta, w.M, derive_seed(seed, 300 + j)));
            if (!w.diagnostics.back().passed) failing.push_back(format_point(w.net[j]));
        }
        if (failing.empty()) return w;
    }
    std::string list;
    for (const auto& s : failing) list += (list.empty() ? "" : ", ") + s;
    throw EstimateError("witness-degraded", "verdict fails at " + list, to_json(w));
}

json to_json(const WitnessSeries& w) {
    json net = json::array(), phases = json::array(), diag = json::array();
    for (const auto& z : w.net) net.push_back(cvec_to_json(z));
    for (const auto& p : w.phases) phases.push_back(complex_to_json(p));
    for (const auto& g : w.diagnostics)
        diag.push_back({{"w", cvec_to_json(g.w)},
                        {"max_abs", number(g.max_abs)},
                        {"passed", g.passed},
                        {"max_without", number(g.max_without)},
                        {"necessary", g.necessary}});
    return {{"domain", w.domain_family},
            {"kernel_family", w.kernel_family},
            {"q", number(w.q)},
            {"J", w.J},
            {"p_J", w.p_J},
            {"M", w.M},
            {"delta", w.delta},
            {"seed", w.seed},
            {"attempts", w.attempts},
            {"net", net},
            {"norms", numbers(w.norms)},
            {"epsilon", numbers(w.epsilon)},
            {"phases", phases},
            {"partial_sums", numbers(w.partial_sums)},
            {"sum", to_json(w.sum)},
            {"diagnostics", diag},
            {"all_passed", w.all_passed()}};
}

SqVerdict sq_membership(const SingularKernel& k, const Domain& d, const CVec& w, double eps, double q,
                        std::uint64_t budget, std::uint64_t seed) {
    if (!(eps > 0.0) || !(q > 0.0)) throw Error("invalid-input", "eps and q must be positive");
    SqVerdict v;
    if (dist(k.zeta, w) > eps) {
        v.verdict = Verdict::finite;
        v.reason = "singularity-outside-ball";
        return v;
    }
    ShellOptions base;
    base.p_list = {q};
    ShellOptions opt = resolve_shell_options(k, base);
    opt.region = Region{w, eps};
    opt.per_shell_budget = std::max<std::uint64_t>(4096, budget / static_cast<std::uint64_t>(opt.k1 - opt.k0 + 1));
    const LevelShellProfile profile = shell_profile(k, d, opt, seed);
    v.threshold = estimate_threshold(profile, {q});
    v.verdict = v.threshold->at(q).verdict;
    v.reason = "estimated";
    return v;
}

json to_json(const SqVerdict& v) {
    return {{"verdict", to_string(v.verdict)},
            {"reason", v.reason},
            {"threshold", v.threshold ? to_json(*v.threshold) : json(nullptr)}};
}

}  // namespace bergman

#include "bergman/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "bergman/rng.hpp"

namespace bergman {

namespace {

constexpr std::uint64_t kSampleChunk = 4096;
constexpr std::size_t kChunksPerRound = 16;
constexpr std::uint64_t kDegenerateProposals = 10'000'000;

double factorial(std::size_t n) { return std::tgamma(static_cast<double>(n) + 1.0); }

std::vector<Interval> symmetric_box(const RVec& half_widths_re, const RVec& half_widths_im) {
    std::vector<Interval> box;
    for (double h : half_widths_re) box.push_back({-h, h});
    for (double h : half_widths_im) box.push_back({-h, h});
    return box;
}

double param(const json& p, const char* key, double fallback) {
    return p.contains(key) ? p.at(key).get<double>() : fallback;
}

std::size_t param_n(const json& p, std::size_t fallback) {
    return p.contains("n") ? p.at("n").get<std::size_t>() : fallback;
}

DefiningFunctionPtr annulus_rho(double inner, double outer) {
    auto df = std::make_shared<DefiningFunction>();
    const double a = outer * outer, b = inner * inner;
    df->name = "annulus";
    df->dim = 1;
    df->rho = [a, b](const CVec& z) {
        const double r2 = std::norm(z[0]);
        return (r2 - a) * (r2 - b);
    };
    df->grad = [a, b](const CVec& z) { return CVec{std::conj(z[0]) * (2.0 * std::norm(z[0]) - a - b)}; };
    df->hessian = [a, b](const CVec& z) {
        CMatrix h(1);
        h(0, 0) = 4.0 * std::norm(z[0]) - a - b;
        return h;
    };
    df->hol_hessian = [](const CVec& z) {
        CMatrix h(1);
        h(0, 0) = 2.0 * std::conj(z[0]) * std::conj(z[0]);
        return h;
    };
    return df;
}

DefiningFunctionPtr two_disks_rho(cplx second) {
    auto df = std::make_shared<DefiningFunction>();
    df->name = "two-disks";
    df->dim = 1;
    auto nearest = [second](const CVec& z) { return std::abs(z[0]) <= std::abs(z[0] - second) ? cplx(0.0) : second; };
    df->rho = [nearest](const CVec& z) { return std::norm(z[0] - nearest(z)) - 1.0; };
    df->grad = [nearest](const CVec& z) { return CVec{std::conj(z[0] - nearest(z))}; };
    df->hessian = [](const CVec&) { return CMatrix::identity(1); };
    df->hol_hessian = [](const CVec&) { return CMatrix(1); };
    return df;
}

std::vector<cplx> convex_hull(std::vector<cplx> pts) {
    std::sort(pts.begin(), pts.end(), [](cplx a, cplx b) {
        return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
    });
    auto cross = [](cplx o, cplx a, cplx b) {
        return (a - o).real() * (b - o).imag() - (a - o).imag() * (b - o).real();
    };
    std::vector<cplx> hull(2 * pts.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

double simpson(const std::function<double(double)>& f, double a, double b, int intervals) {
    const double h = (b - a) / intervals;
    double s = f(a) + f(b);
    for (int i = 1; i < intervals; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}


double margin(const CVec& c, const CVec& z, const CVec& zeta) {
    cplx s = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) s += c[j] * (z[j] - zeta[j]);
    return s.real();
}

}  // namespace

std::string format_point(const CVec& z) {
    std::ostringstream os;
    os.precision(17);
    os << '(';
    for (std::size_t j = 0; j < z.size(); ++j) os << (j ? ", " : "") << z[j].real() << (z[j].imag() < 0 ? "" : "+") << z[j].imag() << 'i';
    os << ')';
    return os.str();
}

double Domain::box_volume() const {
    double v = 1.0;
    for (const auto& iv : bounding_box) v *= iv.width();
    return v;
}

double Domain::diameter() const {
    double s = 0.0;
    for (const auto& iv : bounding_box) s += iv.width() * iv.width();
    return std::sqrt(s);
}

json complex_to_json(cplx z) { return json::array({z.real(), z.imag()}); }

cplx complex_from_json(const json& j) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (!j.is_array() || j.size() != 2) throw Error("invalid-input", "complex number must be [re, im]");
    return {j[0].get<double>(), j[1].get<double>()};
}

json cvec_to_json(const CVec& z) {
    json a = json::array();
    for (const auto& c : z) a.push_back(complex_to_json(c));
    return a;
}

CVec cvec_from_json(const json& j) {
    CVec z;
    for (const auto& e : j) z.push_back(complex_from_json(e));
    return z;
}

CVec parse_cvec(const std::string& text) {
    RVec parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            parts.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw Error("invalid-input", "cannot parse number '" + item + "' in '" + text + "'");
        }
    }
    if (parts.empty() || parts.size() % 2 != 0)
        throw Error("invalid-input", "complex vector needs re,im pairs: '" + text + "'");
    CVec z(parts.size() / 2);
    for (std::size_t j = 0; j < z.size(); ++j) z[j] = {parts[2 * j], parts[2 * j + 1]};
    return z;
}

Domain make_domain(const std::string& family, const json& parameters) {
    Domain d;
    d.family = family;
    json p = parameters.is_null() ? json::object() : parameters;
    const double pi = std::numbers::pi;

    if (family == "disk") {
        const cplx c = p.contains("center") ? complex_from_json(p["center"]) : cplx(0.0);
        const double r = param(p, "radius", 1.0);
        p["center"] = complex_to_json(c);
        p["radius"] = r;
        d.n = 1;
        d.bounding_box = {{c.real() - r, c.real() + r}, {c.imag() - r, c.imag() + r}};
        d.contains = [c, r](const CVec& z) { return std::norm(z[0] - c) < r * r; };
        d.rho = sphere_rho({c}, r);
        d.center = {c};
        d.star_shaped = d.convex = d.c1_boundary = true;
        d.exact_volume = pi * r * r;
    } else if (family == "annulus" || family == "cut-annulus") {
        const double inner = param(p, "inner", 0.5), outer = param(p, "outer", 1.0);
        if (!(0.0 < inner && inner < outer)) throw Error("invalid-input", "annulus needs 0 < inner < outer");
        p["inner"] = inner;
        p["outer"] = outer;
        d.n = 1;
        d.bounding_box = symmetric_box({outer}, {outer});
        d.center = {cplx(0.0, 0.5 * (inner + outer))};
        if (family == "annulus") {
            d.contains = [inner, outer](const CVec& z) {
                const double r2 = std::norm(z[0]);
                return r2 > inner * inner && r2 < outer * outer;
            };
            d.rho = annulus_rho(inner, outer);
            d.c1_boundary = true;
            d.exact_volume = pi * (outer * outer - inner * inner);
        } else {
            const double slit = param(p, "slit", 0.01);
            p["slit"] = slit;
            d.contains = [inner, outer, slit](const CVec& z) {
                const double r2 = std::norm(z[0]);
                if (!(r2 > inner * inner && r2 < outer * outer)) return false;
                return !(std::abs(z[0].imag()) <= slit && z[0].real() > 0.0);
            };
        }
    } else if (family == "two-disks") {
        const double gap = param(p, "gap", 1.0);
        if (gap <= 0.0) throw Error("invalid-input", "two-disks needs gap > 0");
        p["gap"] = gap;
        const cplx second(2.0 + gap, 0.0);
        d.n = 1;
        d.bounding_box = {{-1.0, 3.0 + gap}, {-1.0, 1.0}};
        d.contains = [second](const CVec& z) { return std::norm(z[0]) < 1.0 || std::norm(z[0] - second) < 1.0; };
        d.rho = two_disks_rho(second);
        d.center = {cplx(0.0)};
        d.c1_boundary = true;
        d.exact_volume = 2.0 * pi;
    } else if (family == "cusp") {
        const double alpha = param(p, "alpha", 1.0);
        if (alpha <= 0.0) throw Error("invalid-input", "cusp needs alpha > 0");
        p["alpha"] = alpha;
        d.n = 1;
        d.bounding_box = {{0.0, 1.0}, {0.0, 1.0}};
        d.contains = [alpha](const CVec& z) {
            const double x = z[0].real(), y = z[0].imag();
            return x > 0.0 && x < 1.0 && y > 0.0 && y < std::pow(x, alpha);
        };
        d.log_height = [alpha](double x) { return alpha * std::log(x); };
        d.center = {cplx(0.5, 0.5 * std::pow(0.5, alpha))};
        d.exact_volume = 1.0 / (alpha + 1.0);
    } else if (family == "expcusp") {
        d.n = 1;
        d.bounding_box = {{0.0, 1.0}, {0.0, std::exp(-1.0)}};
        d.contains = [](const CVec& z) {
            const double x = z[0].real(), y = z[0].imag();
            return x > 0.0 && x < 1.0 && y > 0.0 && y < std::exp(-1.0 / (x * x));
        };
        d.log_height = [](double x) { return -1.0 / (x * x); };
        d.center = {cplx(0.8, 0.5 * std::exp(-1.0 / 0.64))};
        d.exact_volume = simpson([](double x) { return x > 0 ? std::exp(-1.0 / (x * x)) : 0.0; }, 0.0, 1.0, 20000);
    } else if (family == "ball") {
        const std::size_t n = param_n(p, 2);
        p["n"] = n;
        d.n = n;
        d.bounding_box = symmetric_box(RVec(n, 1.0), RVec(n, 1.0));
        d.contains = [](const CVec& z) { return norm_sq(z) < 1.0; };
        d.center = CVec(n, 0.0);
        d.rho = sphere_rho(d.center, 1.0);
        d.star_shaped = d.convex = d.c1_boundary = true;
        d.exact_volume = std::pow(pi, static_cast<double>(n)) / factorial(n);
    } else if (family == "ellipsoid") {
        RVec a = p.contains("a") ? p["a"].get<RVec>() : RVec{1.0, 2.0};
        if (a.empty() || std::any_of(a.begin(), a.end(), [](double v) { return v <= 0.0; }))
            throw Error("invalid-input", "ellipsoid needs positive semi-axes");
        if (p.contains("n") && p["n"].get<std::size_t>() != a.size())
            throw Error("invalid-input", "ellipsoid n does not match the number of semi-axes");
        p["a"] = a;
        p["n"] = a.size();
        d.n = a.size();
        d.bounding_box = symmetric_box(a, a);
        d.contains = [a](const CVec& z) {
            double s = 0.0;
            for (std::size_t j = 0; j < z.size(); ++j) s += std::norm(z[j]) / (a[j] * a[j]);
            return s < 1.0;
        };
        d.rho = ellipsoid_rho(a);
        d.center = CVec(d.n, 0.0);
        d.star_shaped = d.convex = d.c1_boundary = true;
        double v = std::pow(pi, static_cast<double>(d.n)) / factorial(d.n);
        for (double aj : a) v *= aj * aj;
        d.exact_volume = v;
    } else if (family == "half-ball") {
        const std::size_t n = param_n(p, 2);
        p["n"] = n;
        d.n = n;
        d.bounding_box = symmetric_box(RVec(n, 1.0), RVec(n, 1.0));
        d.bounding_box[0].lo = 0.0;
        d.contains = [](const CVec& z) { return norm_sq(z) < 1.0 && z[0].real() > 0.0; };
        d.center = CVec(n, 0.0);
        d.center[0] = 0.5;
        d.star_shaped = d.convex = true;
        d.exact_volume = 0.5 * std::pow(pi, static_cast<double>(n)) / factorial(n);
    } else if (family == "box" || family == "square") {
        const std::size_t n = family == "square" ? 1 : param_n(p, 1);
        p["n"] = n;
        d.n = n;
        d.bounding_box.assign(2 * n, {0.0, 1.0});
        d.contains = [](const CVec& z) {
            for (const auto& c : z)
                if (!(c.real() > 0.0 && c.real() < 1.0 && c.imag() > 0.0 && c.imag() < 1.0)) return false;
            return true;
        };
        d.center = CVec(n, cplx(0.5, 0.5));
        d.star_shaped = d.convex = true;
        d.exact_volume = 1.0;
    } else if (family == "polydisk") {
        const std::size_t n = param_n(p, 2);
        p["n"] = n;
        d.n = n;
        d.bounding_box = symmetric_box(RVec(n, 1.0), RVec(n, 1.0));
        d.contains = [](const CVec& z) {
            for (const auto& c : z)
                if (std::norm(c) >= 1.0) return false;
            return true;
        };
        d.center = CVec(n, 0.0);
        d.star_shaped = d.convex = true;
        d.exact_volume = std::pow(pi, static_cast<double>(n));
    } else if (family == "convex-hull") {
        std::vector<cplx> pts;
        if (p.contains("points")) {
            for (const auto& e : p["points"]) pts.push_back(complex_from_json(e));
        } else {
            for (int k = 0; k < 6; ++k) pts.push_back(std::polar(1.0, pi * k / 3.0));
        }
        d.vertices = convex_hull(pts);
        if (d.vertices.size() < 3) throw Error("invalid-input", "convex-hull needs 3 non-collinear points");
        json arr = json::array();
        for (auto v : d.vertices) arr.push_back(complex_to_json(v));
        p["points"] = arr;
        d.n = 1;
        double xl = kInf, xh = -kInf, yl = kInf, yh = -kInf, area = 0.0;
        cplx centroid = 0.0;
        for (std::size_t i = 0; i < d.vertices.size(); ++i) {
            const cplx a = d.vertices[i], b = d.vertices[(i + 1) % d.vertices.size()];
            xl = std::min(xl, a.real());
            xh = std::max(xh, a.real());
            yl = std::min(yl, a.imag());
            yh = std::max(yh, a.imag());
            area += 0.5 * (a.real() * b.imag() - b.real() * a.imag());
            centroid += a;
        }
        d.bounding_box = {{xl, xh}, {yl, yh}};
        const auto verts = d.vertices;
        d.contains = [verts](const CVec& z) {
            for (std::size_t i = 0; i < verts.size(); ++i) {
                const cplx a = verts[i], b = verts[(i + 1) % verts.size()];
                const cplx e = b - a, w = z[0] - a;
                if (e.real() * w.imag() - e.imag() * w.real() <= 0.0) return false;
            }
            return true;
        };
        d.center = {centroid / static_cast<double>(verts.size())};
        d.star_shaped = d.convex = true;
        d.exact_volume = area;
    } else if (family == "strictly-psh") {
        const std::size_t n = param_n(p, 2);
        const double mu = param(p, "mu", 0.3), kappa = param(p, "kappa", 0.5);
        if (!(std::abs(mu) < 1.0) || kappa < 0.0) throw Error("invalid-input", "strictly-psh needs |mu| < 1, kappa >= 0");
        p["n"] = n;
        p["mu"] = mu;
        p["kappa"] = kappa;
        d.n = n;
        const double r = 1.0 / std::sqrt(1.0 - std::abs(mu));
        d.bounding_box = symmetric_box(RVec(n, r), RVec(n, r));
        d.rho = quartic_rho(n, mu, kappa);
        auto rho = d.rho;
        d.contains = [rho](const CVec& z) { return rho->rho(z) < 0.0; };
        d.center = CVec(n, 0.0);
        d.star_shaped = d.c1_boundary = true;
    } else {
        throw Error("invalid-input", "unknown domain family '" + family + "'");
    }
    d.parameters = p;
    return d;
}

json to_json(const Domain& d) {
    json box = json::array();
    for (const auto& iv : d.bounding_box) box.push_back({iv.lo, iv.hi});
    return {{"family", d.family}, {"n", d.n}, {"parameters", d.parameters}, {"bounding_box", box}};
}

Domain domain_from_json(const json& j) {
    if (!j.contains("family")) throw Error("invalid-input", "domain JSON needs a family");
    Domain d = make_domain(j.at("family").get<std::string>(), j.value("parameters", json::object()));
    if (j.contains("n") && j["n"].get<std::size_t>() != d.n)
        throw Error("invalid-input", "domain dimension does not match its parameters");
    return d;
}

Domain parse_domain_spec(const std::string& spec) {
    const auto colon = spec.find(':');
    const std::string family = spec.substr(0, colon);
    json p = json::object();
    if (colon != std::string::npos) {
        std::stringstream ss(spec.substr(colon + 1));
        std::string item;
        std::vector<std::pair<std::size_t, double>> axes;
        while (std::getline(ss, item, ',')) {
            const auto eq = item.find('=');
            if (eq == std::string::npos || eq == 0) throw Error("invalid-input", "expected key=value in '" + item + "'");
            const std::string key = item.substr(0, eq), value = item.substr(eq + 1);
            double v = 0.0;
            try {
                std::size_t used = 0;
                v = std::stod(value, &used);
                if (used != value.size()) throw std::invalid_argument(value);
            } catch (const std::exception&) {
                throw Error("invalid-input", "non-numeric value in '" + item + "'");
            }
            if (key.size() > 1 && key[0] == 'a' && std::all_of(key.begin() + 1, key.end(), ::isdigit)) {
                axes.emplace_back(std::stoul(key.substr(1)), v);
            } else if (key == "n") {
                p["n"] = static_cast<std::size_t>(v);
            } else {
                p[key] = v;
            }
        }
        if (!axes.empty()) {
            std::sort(axes.begin(), axes.end());
            RVec a;
            for (std::size_t i = 0; i < axes.size(); ++i) {
                if (axes[i].first != i + 1) throw Error("invalid-input", "semi-axes must be numbered a1, a2, ...");
                a.push_back(axes[i].second);
            }
            p["a"] = a;
        }
    }
    return make_domain(family, p);
}

SampleSet sample_uniform(const Domain& d, std::size_t count, std::uint64_t seed) {
    if (count == 0) throw Error("invalid-input", "sample count must be positive");
    BoxSampler box(d.bounding_box);
    SampleSet out;
    std::size_t next_chunk = 0;
    while (out.points.size() < count) {
        std::vector<std::vector<CVec>> found(kChunksPerRound);
        const std::size_t base = next_chunk;
        for_each_chunk(kChunksPerRound, [&](std::size_t i) {
            Stream rng(seed, base + i);
            double w;
            for (std::uint64_t k = 0; k < kSampleChunk; ++k) {
                CVec z = box.draw(rng, w);
                if (d.contains(z)) found[i].push_back(std::move(z));
            }
        });
        next_chunk += kChunksPerRound;
        for (auto& f : found) {
            out.proposals += kSampleChunk;
            out.accepted += f.size();
            for (auto& z : f)
                if (out.points.size() < count) out.points.push_back(std::move(z));
            if (out.points.size() >= count) break;
        }
        if (out.proposals >= kDegenerateProposals && out.acceptance_rate() < 1e-6)
            throw Error("degenerate-domain", "acceptance rate " + std::to_string(out.acceptance_rate()) + " after " +
                                                 std::to_string(out.proposals) + " proposals");
    }
    return out;
}

NearSample sample_near(const Domain& d, const CVec& center, double radius, std::size_t count, std::uint64_t seed) {
    if (radius <= 0.0 || count == 0) throw Error("invalid-input", "sample_near needs radius > 0 and count > 0");
    BallSampler ball(center, radius);
    NearSample out;
    std::uint64_t hits = 0;
    std::size_t next_chunk = 0;
    const std::uint64_t min_proposals = 16 * kSampleChunk;
    while (out.points.size() < count || out.proposals < min_proposals) {
        std::vector<std::vector<CVec>> found(kChunksPerRound);
        const std::size_t base = next_chunk;
        for_each_chunk(kChunksPerRound, [&](std::size_t i) {
            Stream rng(seed, base + i);
            double w;
            for (std::uint64_t k = 0; k < kSampleChunk; ++k) {
                CVec z = ball.draw(rng, w);
                if (d.contains(z)) found[i].push_back(std::move(z));
            }
        });
        next_chunk += kChunksPerRound;
        for (auto& f : found) {
            out.proposals += kSampleChunk;
            hits += f.size();
            for (auto& z : f)
                if (out.points.size() < count) out.points.push_back(std::move(z));
        }
        if (hits == 0 && out.proposals >= kDegenerateProposals)
            throw Error("empty-intersection", "no point of the domain in B" + format_point(center) + ", r=" +
                                                  std::to_string(radius));
        if (out.proposals >= 10 * kDegenerateProposals) break;
    }
    const double frac = static_cast<double>(hits) / static_cast<double>(out.proposals);
    const double vb = std::exp(ball.log_volume());
    out.volume = vb * frac;
    out.volume_se = vb * std::sqrt(frac * (1.0 - frac) / static_cast<double>(out.proposals));
    return out;
}

CVec bisect_boundary(const Domain& d, CVec inside, CVec outside, int iters) {
    for (int i = 0; i < iters; ++i) {
        CVec mid = 0.5 * (inside + outside);
        if (d.contains(mid))
            inside = std::move(mid);
        else
            outside = std::move(mid);
    }
    return outside;
}

CVec ray_boundary(const Domain& d, const CVec& direction) {
    const double len = norm(direction);
    if (len == 0.0) throw Error("invalid-input", "zero ray direction");
    const CVec far = d.center + (2.0 * d.diameter() / len) * direction;
    return bisect_boundary(d, d.center, far, 100);
}

CVec project_to_boundary(const Domain& d, const CVec& seed) {
    if (!d.rho) throw Error("unsupported-family", "projection needs a defining function");
    const CVec g = d.rho->grad(seed);
    CVec u(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) u[j] = std::conj(g[j]);
    const double un = norm(u);
    if (un == 0.0) throw Error("degenerate-gradient", "gradient vanishes at the seed point");
    u = (1.0 / un) * u;
    const double r0 = d.rho->rho(seed);
    const double sign = r0 < 0.0 ? 1.0 : -1.0;
    double step = 1e-3 * d.diameter();
    CVec a = seed, b = seed + (sign * step) * u;
    while ((d.rho->rho(b) < 0.0) == (r0 < 0.0)) {
        step *= 2.0;
        if (step > 4.0 * d.diameter()) throw Error("unsupported-boundary-point", "gradient line does not cross rho = 0");
        a = b;
        b = seed + (sign * step) * u;
    }
    CVec in = r0 < 0.0 ? a : b, out = r0 < 0.0 ? b : a;
    for (int i = 0; i < 100; ++i) {
        CVec mid = 0.5 * (in + out);
        if (d.rho->rho(mid) < 0.0)
            in = std::move(mid);
        else
            out = std::move(mid);
    }
    return out;
}

CVec outward_normal(const Domain& d, const CVec& zeta) {
    if (d.rho) {
        const CVec g = d.rho->grad(zeta);
        CVec nu(g.size());
        for (std::size_t j = 0; j < g.size(); ++j) nu[j] = std::conj(g[j]);
        const double len = norm(nu);
        if (len > 0.0) return (1.0 / len) * nu;
    }
    const NearSample near = sample_near(d, zeta, 1e-3 * d.diameter(), 4000, 0x6e6f726d616cULL);
    CVec mean(d.n, 0.0);
    for (const auto& z : near.points)
        for (std::size_t j = 0; j < d.n; ++j) mean[j] += z[j] - zeta[j];
    const double len = norm(mean);
    if (len == 0.0) throw Error("degenerate-gradient", "cannot estimate a normal at " + format_point(zeta));
    return (-1.0 / len) * mean;
}

double boundary_distance(const Domain& d, const CVec& z, std::uint64_t seed, int directions) {
    const std::size_t n = d.n;
    std::vector<CVec> dirs;
    for (std::size_t j = 0; j < n; ++j)
        for (cplx e : {cplx(1, 0), cplx(-1, 0), cplx(0, 1), cplx(0, -1)}) {
            CVec u(n, 0.0);
            u[j] = e;
            dirs.push_back(u);
        }
    Stream rng(seed, 0);
    for (int k = 0; k < directions; ++k) dirs.push_back(rng.unit_sphere(n));
    const double reach = d.diameter();
    constexpr int kSteps = 128;
    double best = reach;
    for (const auto& u : dirs) {
        CVec prev = z;
        for (int s = 1; s <= kSteps; ++s) {
            const double t = reach * s / kSteps;
            if (t >= best) break;
            CVec cur = z + t * u;
            if (!d.contains(cur)) {
                const CVec hit = bisect_boundary(d, prev, cur, 50);
                best = std::min(best, dist(hit, z));
                break;
            }
            prev = std::move(cur);
        }
    }
    return best;
}

void validate_boundary_point(const Domain& d, const CVec& zeta, std::uint64_t seed) {
    if (zeta.size() != d.n) throw Error("invalid-input", "boundary point has the wrong dimension");
    if (d.contains(zeta)) throw Error("not-boundary-point", format_point(zeta) + " lies inside the domain");
    constexpr double kReach = 1e-6;
    std::vector<CVec> candidates;
    for (double t : {5e-7, 1e-7, 1e-8}) {
        const CVec to_center = d.center - zeta;
        const double len = norm(to_center);
        if (len > 0.0) candidates.push_back(zeta + (t / len) * to_center);
        if (d.rho) {
            const CVec g = d.rho->grad(zeta);
            CVec inward(g.size());
            for (std::size_t j = 0; j < g.size(); ++j) inward[j] = -std::conj(g[j]);
            const double gl = norm(inward);
            if (gl > 0.0) candidates.push_back(zeta + (t / gl) * inward);
        }
        if (d.log_height) {
            for (double x : {zeta[0].real() + t, zeta[0].real() - t}) {
                if (x <= 0.0) continue;
                const double log_h = d.log_height(x);
                // A finite log height below the double range still means points
                // (x, y) with 0 < y < h(x) exist; they are not representable.
                if (std::isfinite(log_h) && std::exp(log_h) == 0.0 && std::abs(zeta[0].imag()) <= kReach &&
                    zeta[0].real() < 1.0)
                    return;
                const double y = 0.5 * std::exp(log_h);
                candidates.push_back(CVec{cplx(x, y)});
            }
        }
    }
    for (const auto& c : candidates)
        if (dist(c, zeta) <= kReach && d.contains(c)) return;
    Stream rng(seed, 0);
    for (int k = 0; k < 20000; ++k) {
        const CVec z = zeta + kReach * rng.unit_ball(d.n);
        if (d.contains(z)) return;
    }
    throw Error("not-boundary-point", "no domain point within 1e-6 of " + format_point(zeta));
}

namespace {

CVec face_functional_box(const CVec& zeta) {
    constexpr double tol = 1e-12;
    std::size_t active = 0;
    CVec c(zeta.size(), 0.0);
    for (std::size_t j = 0; j < zeta.size(); ++j) {
        const double x = zeta[j].real(), y = zeta[j].imag();
        if (x < -tol || x > 1 + tol || y < -tol || y > 1 + tol)
            throw Error("not-boundary-point", "point lies outside the closed box");
        if (std::abs(x) <= tol) c[j] = 1.0, ++active;
        if (std::abs(x - 1) <= tol) c[j] = -1.0, ++active;
        if (std::abs(y) <= tol) c[j] = cplx(0, -1), ++active;
        if (std::abs(y - 1) <= tol) c[j] = cplx(0, 1), ++active;
    }
    if (active == 0) throw Error("not-boundary-point", "point is not on a face of the box");
    if (active > 1) throw Error("unsupported-boundary-point", "edge or corner point of the box");
    return c;
}

CVec face_functional_polydisk(const CVec& zeta) {
    constexpr double tol = 1e-12;
    std::size_t active = 0;
    CVec c(zeta.size(), 0.0);
    for (std::size_t j = 0; j < zeta.size(); ++j) {
        const double r = std::abs(zeta[j]);
        if (r > 1 + tol) throw Error("not-boundary-point", "point lies outside the closed polydisk");
        if (std::abs(r - 1) <= tol) {
            c[j] = -std::conj(zeta[j]);
            ++active;
        }
    }
    if (active == 0) throw Error("not-boundary-point", "point is not on the polydisk boundary");
    if (active > 1) throw Error("unsupported-boundary-point", "point lies on more than one face of the polydisk");
    return c;
}

// Projected subgradient ascent of min_z Re sum c_j (z_j - zeta_j) over |c| = 1.
CVec margin_maximizer(const Domain& d, const CVec& zeta, std::uint64_t seed) {
    const auto pts = sample_uniform(d, 2000, seed).points;
    CVec c(d.n);
    for (std::size_t j = 0; j < d.n; ++j) c[j] = std::conj(d.center[j] - zeta[j]);
    c = (1.0 / norm(c)) * c;
    CVec best = c;
    double best_margin = -kInf;
    for (int it = 0; it < 500; ++it) {
        double m = kInf;
        const CVec* arg = nullptr;
        for (const auto& z : pts) {
            const double v = margin(c, z, zeta);
            if (v < m) m = v, arg = &z;
        }
        if (m > best_margin) best_margin = m, best = c;
        const CVec w = *arg - zeta;
        const double wl = norm(w);
        const double step = 0.5 / std::sqrt(it + 1.0);
        for (std::size_t j = 0; j < d.n; ++j) c[j] += step * std::conj(w[j]) / wl;
        c = (1.0 / norm(c)) * c;
    }
    return best;
}

}  // namespace

SupportingFunctional supporting_functional(const Domain& d, const CVec& zeta, std::uint64_t seed, std::size_t verify) {
    if (zeta.size() != d.n) throw Error("invalid-input", "boundary point has the wrong dimension");
    if (!d.convex) throw Error("unsupported-family", "domain family '" + d.family + "' is not convex");
    SupportingFunctional out;
    if (d.family == "box" || d.family == "square") {
        out.c = face_functional_box(zeta);
        out.recipe = "face";
    } else if (d.family == "polydisk") {
        out.c = face_functional_polydisk(zeta);
        out.recipe = "face";
    } else if (d.family == "half-ball") {
        constexpr double tol = 1e-12;
        const double r = norm(zeta);
        const bool flat = std::abs(zeta[0].real()) <= tol && r < 1 - tol;
        const bool sphere = std::abs(r - 1) <= tol && zeta[0].real() > tol;
        if (flat) {
            out.c = CVec(d.n, 0.0);
            out.c[0] = 1.0;
            out.recipe = "face";
        } else if (sphere) {
            out.c.resize(d.n);
            for (std::size_t j = 0; j < d.n; ++j) out.c[j] = -std::conj(zeta[j]);
            out.recipe = "gradient";
        } else {
            out.c = margin_maximizer(d, zeta, derive_seed(seed, 1));
            out.recipe = "margin-maximizer";
        }
    } else if (d.rho) {
        out.c = d.rho->grad(zeta);
        for (auto& cj : out.c) cj = -cj;
        if (norm(out.c) == 0.0) throw Error("degenerate-gradient", "gradient vanishes at " + format_point(zeta));
        out.recipe = "gradient";
    } else {
        out.c = margin_maximizer(d, zeta, derive_seed(seed, 1));
        out.recipe = "margin-maximizer";
    }
    if (verify > 0) {
        const auto pts = sample_uniform(d, verify, derive_seed(seed, 2)).points;
        out.min_margin = kInf;
        for (const auto& z : pts) {
            const double m = margin(out.c, z, zeta);
            if (!(m > 0.0)) throw Error("not-supporting", "Re sum c_j (z_j - zeta_j) = " + std::to_string(m) + " at " + format_point(z));
            out.min_margin = std::min(out.min_margin, m);
        }
        out.samples = pts.size();
    }
    return out;
}

}  // namespace bergman

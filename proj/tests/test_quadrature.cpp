#include "doctest.h"

#include <cmath>
#include <numbers>

#include "bergman/quadrature.hpp"
#include "bergman/rng.hpp"

using namespace bergman;

namespace {

constexpr double kPi = std::numbers::pi;

SingularKernel kernel(const Domain& d, const std::string& family, const CVec& zeta, KernelOptions opt = {}) {
    opt.certify_samples = 20000;
    return make_kernel(d, kernel_family_from_string(family), zeta, opt, 11);
}

double slope_of(const LevelShellProfile& p) { return estimate_threshold(p).fit.slope; }

// Integral of |z - 1|^-1 over the unit disk on a polar grid centred at 1.
double polar_grid_pole_oracle(int nr, int nt) {
    double sum = 0.0;
    const double rmax = 2.0, dr = rmax / nr, dt = kPi / nt;
    for (int j = 0; j < nt; ++j) {
        const double th = 0.5 * kPi + (j + 0.5) * dt;
        for (int i = 0; i < nr; ++i) {
            const double r = (i + 0.5) * dr;
            const cplx z = 1.0 + std::polar(r, th);
            if (std::abs(z) < 1.0) sum += (1.0 / r) * r * dr * dt;
        }
    }
    return sum;
}

// Iterated midpoint rule for the integral over {0 < y < x < 1} of (x^2 + y^2)^-1/2.
double cusp_oracle(int n) {
    double sum = 0.0;
    const double h = 1.0 / n;
    for (int i = 0; i < n; ++i) {
        const double x = (i + 0.5) * h;
        const int m = n;
        const double hy = x / m;
        for (int j = 0; j < m; ++j) {
            const double y = (j + 0.5) * hy;
            sum += h * hy / std::hypot(x, y);
        }
    }
    return sum;
}

}  // namespace

TEST_CASE("holomorphic combinations cancel and commute exactly") {
    const Domain disk = make_domain("disk");
    const auto f = HoloFunction::of(kernel(disk, "planar-log", {1.0})) + HoloFunction::constant(2.0);
    const auto g = HoloFunction::of(kernel(disk, "planar-pole", {cplx(0.0, 1.0)}), cplx(0.5, 0.25));
    CHECK((f - f).is_zero());
    CHECK((f - g).terms().size() == 2);
    for (const auto& z : sample_uniform(disk, 200, 1).points) {
        CHECK(std::abs((f - g)(z)) == std::abs((g - f)(z)));
        CHECK(std::abs((f * 3.0)(z) - 3.0 * f(z)) <= 1e-12 * std::abs(f(z)));
    }
    CHECK(f.singular_points().size() == 1);
    const auto back = holo_from_json(json::parse(to_json(f - g).dump()), disk);
    CHECK(to_json(back) == to_json(f - g));
}

TEST_CASE("lp_mass matches independent oracles") {
    const Domain disk = make_domain("disk");
    const auto one = lp_mass(HoloFunction::constant(1.0), disk, 2.5, 400000, 1);
    CHECK(std::abs(one.value[0] - kPi) <= 3 * one.stderr_value[0]);

    const double oracle = polar_grid_pole_oracle(2000, 2000);
    const auto pole = lp_mass(HoloFunction::of(kernel(disk, "planar-pole", {1.0})), disk, 1.0, 1000000, 2);
    CHECK(std::abs(pole.value[0] / oracle - 1.0) < 0.02);
    CHECK(pole.tail_verdict[0] == Verdict::finite);

    const Domain cusp = make_domain("cusp", {{"alpha", 1.0}});
    KernelOptions base;
    base.q = 2.0;  // 1/z on the alpha = 1 cusp
    const auto ck = kernel(cusp, "cusp-monomial", {0.0}, base);
    CHECK(ck.exponent() == 1.0);
    const auto cm = lp_mass(HoloFunction::of(ck), cusp, 1.0, 1000000, 3);
    CHECK(std::abs(cm.value[0] / cusp_oracle(3000) - 1.0) < 0.02);
}

TEST_CASE("lp_mass reports divergence and instability") {
    const Domain disk = make_domain("disk");
    const auto pole = HoloFunction::of(kernel(disk, "planar-pole", {1.0}));
    const auto over = lp_masses(pole, disk, {2.5}, 200000, 4);
    CHECK(over.tail_verdict[0] == Verdict::divergent);
    CHECK(std::isinf(over.value[0]));
    try {
        lp_mass(pole, disk, 2.5, 200000, 4);
        FAIL("expected unstable-estimate");
    } catch (const EstimateError& e) {
        CHECK(e.code() == "unstable-estimate");
        CHECK(e.partial().contains("strata"));
    }
}

TEST_CASE("lp_mass on a ball region") {
    const Domain disk = make_domain("disk");
    MassOptions o;
    o.region = {CVec{cplx(-0.5, 0.0)}, 0.2};
    const auto m = lp_mass(HoloFunction::constant(1.0), disk, 1.0, 200000, 5, o);
    CHECK(std::abs(m.value[0] - kPi * 0.04) <= 3 * m.stderr_value[0]);
}

TEST_CASE("shell volume slopes") {
    const Domain disk = make_domain("disk");
    ShellOptions o;
    o.per_shell_budget = 65536;
    CHECK(std::abs(slope_of(shell_profile(kernel(disk, "planar-pole", {1.0}), disk, o, 1)) + 2.0) < 0.1);

    const Domain ball = make_domain("ball", {{"n", 2}});
    CHECK(std::abs(slope_of(shell_profile(kernel(ball, "ball-pole", {1.0, 0.0}), ball, o, 2)) + 3.0) < 0.2);

    const Domain cusp = make_domain("cusp", {{"alpha", 2.0}});
    KernelOptions base;
    base.q = 3.0;
    const auto prof = shell_profile(kernel(cusp, "cusp-monomial", {0.0}, base), cusp, o, 3);
    CHECK(prof.sampler == "graph-slab");
    CHECK(std::abs(slope_of(prof) + 3.0) < 0.2);
}

TEST_CASE("shell masses bracket the volumes for pure powers") {
    const Domain ball = make_domain("ball", {{"n", 2}});
    KernelOptions opt;
    opt.q = 2.5;
    const auto k = kernel(ball, "ball-power", {1.0, 0.0}, opt);
    ShellOptions o;
    o.p_list = {1.0, 2.5};
    o.per_shell_budget = 32768;
    const auto prof = shell_profile(k, ball, o, 6);
    const double s = k.exponent();
    for (const auto& sh : prof.shells) {
        REQUIRE_FALSE(sh.missing);
        for (std::size_t i = 0; i < o.p_list.size(); ++i) {
            const double ps = o.p_list[i] * s;
            const double lo = std::exp2(sh.k * ps) * sh.volume(), hi = std::exp2((sh.k + 1) * ps) * sh.volume();
            const double tol = 3 * sh.mass(i) * sh.mass_rel_se[i];
            CHECK(sh.mass(i) >= lo - tol);
            CHECK(sh.mass(i) <= hi + tol);
        }
    }
}

TEST_CASE("shell starvation and tables") {
    const Domain disk = make_domain("disk");
    const auto k = kernel(disk, "planar-pole", {1.0});
    ShellOptions far;
    far.per_shell_budget = 8192;
    far.region = {CVec{cplx(-1.0, 0.0)}, 0.1};
    try {
        shell_profile(k, disk, far, 1);
        FAIL("expected shell-starvation");
    } catch (const EstimateError& e) {
        CHECK(e.code() == "shell-starvation");
        CHECK(e.partial().at("shells").size() == 12);
    }

    ShellOptions o;
    o.per_shell_budget = 8192;
    o.p_list = {1.0, 1.5};
    const auto prof = shell_profile(k, disk, o, 1);
    const std::string csv = to_csv(prof);
    CHECK(csv.rfind("k,vol,stderr,log2_vol,mass_p1,mass_p1.5\r\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 13);
    CHECK(to_json(prof).at("shells").size() == 12);
}

TEST_CASE("threshold estimates") {
    const Domain disk = make_domain("disk");
    ShellOptions o;
    o.per_shell_budget = 65536;
    const auto pole = estimate_threshold(shell_profile(kernel(disk, "planar-pole", {1.0}), disk, o, 1), {1.0, 2.0, 3.0});
    CHECK(pole.p_star_hat >= 1.9);
    CHECK(pole.p_star_hat <= 2.1);
    CHECK(pole.verdicts[0].verdict == Verdict::finite);
    CHECK(pole.verdicts[1].verdict != Verdict::finite);
    CHECK(pole.verdicts[2].verdict == Verdict::divergent);

    const auto log = estimate_threshold(shell_profile(kernel(disk, "planar-log", {1.0}), disk, o, 2), {1.0, 4.0, 16.0});
    CHECK(std::isinf(log.p_star_hat));
    for (const auto& v : log.verdicts) CHECK(v.verdict == Verdict::finite);

    const Domain ell = make_domain("ellipsoid", {{"a", {1.0, 2.0}}});
    const auto lk = kernel(ell, "levi-pole", {1.0, 0.0});
    const auto levi = estimate_threshold(shell_profile(lk, ell, o, 3), {2.8, 4.0});
    CHECK(levi.verdicts[0].verdict == Verdict::finite);
    CHECK(levi.verdicts[1].verdict == Verdict::divergent);
    MESSAGE("levi-pole on the ellipsoid: p_star_hat = " << levi.p_star_hat << " +/- " << levi.p_star_se);

    ShellOptions few = o;
    few.k1 = few.k0 + 4;
    CHECK_THROWS_WITH_AS(estimate_threshold(shell_profile(kernel(disk, "planar-pole", {1.0}), disk, few, 1)),
                         doctest::Contains("insufficient-shells"), Error);
}

TEST_CASE("threshold verdicts are monotone and reusable") {
    const Domain ball = make_domain("ball", {{"n", 2}});
    ShellOptions o;
    o.per_shell_budget = 32768;
    const auto prof = shell_profile(kernel(ball, "ball-pole", {1.0, 0.0}), ball, o, 4);
    const auto v = estimate_threshold(prof);
    bool nonfinite = false;
    for (double p = 0.5; p <= 6.0; p += 0.125) {
        const Verdict at = v.at(p).verdict;
        if (at != Verdict::finite) nonfinite = true;
        if (nonfinite) CHECK(at != Verdict::finite);
        if (p * v.s > v.gamma_hat + v.margin + 1.645 * v.gamma_se) CHECK(at == Verdict::divergent);
    }
    const auto again = estimate_threshold(prof, {3.5});
    CHECK(again.verdicts[0].sigma == v.at(3.5).sigma);
}

TEST_CASE("threshold estimates agree across seeds") {
    const Domain cusp = make_domain("cusp", {{"alpha", 3.0}});
    KernelOptions base;
    base.q = 4.0;
    const auto k = kernel(cusp, "cusp-monomial", {0.0}, base);
    ShellOptions o;
    o.per_shell_budget = 32768;
    const auto a = estimate_threshold(shell_profile(k, cusp, o, 10));
    const auto b = estimate_threshold(shell_profile(k, cusp, o, 20));
    CHECK(std::abs(a.p_star_hat - b.p_star_hat) <= 2 * std::hypot(a.p_star_se, b.p_star_se) + 1e-9);
    const auto c = estimate_threshold(shell_profile(k, cusp, o, 10));
    CHECK(c.p_star_hat == a.p_star_hat);
}

TEST_CASE("superpolynomial decay at the exponential cusp") {
    const Domain exp_cusp = make_domain("expcusp");
    KernelOptions opt;
    opt.N = 3;
    const auto k = kernel(exp_cusp, "cusp-inverse-power", {0.0}, opt);
    ShellOptions o;
    o.per_shell_budget = 16384;
    o.k0 = 1;
    const auto v = estimate_threshold(shell_profile(k, exp_cusp, o, 5), {1.0, 10.0, 100.0});
    CHECK(v.superpolynomial);
    CHECK(std::isinf(v.p_star_hat));
    for (const auto& pv : v.verdicts) CHECK(pv.verdict == Verdict::finite);
}

TEST_CASE("metric exponent sequences") {
    for (double q : {2.0, 1.2, kInf, 1.0, 0.5}) {
        const auto m = make_metric(q);
        REQUIRE(m.p.size() == 20);
        for (std::size_t j = 1; j < m.p.size(); ++j) CHECK(m.p[j] > m.p[j - 1]);
        for (double p : m.p) CHECK(p < q);
        if (q > 1) CHECK(m.p[0] >= 1.0);
        if (std::isfinite(q)) CHECK(q - m.p.back() < 1e-5);
        CHECK(m.tail_bound() == std::ldexp(1.0, -20));
    }
    CHECK(make_metric(2.0).p[0] == 1.5);
    CHECK(make_metric(kInf).p[3] == 5.0);
    CHECK_THROWS_WITH_AS(make_metric(0.0), doctest::Contains("invalid-input"), Error);
}

TEST_CASE("metric axioms") {
    const Domain disk = make_domain("disk");
    const auto spec = make_metric(2.0);
    const auto f = HoloFunction::of(kernel(disk, "planar-log", {1.0}));
    const auto g = HoloFunction::of(kernel(disk, "planar-log", {cplx(0.0, 1.0)}), 0.5) + HoloFunction::constant(1.0);
    const auto h = HoloFunction::of(kernel(disk, "planar-pole", {-1.0}), 0.2);
    const std::uint64_t budget = 100000;
    CHECK(metric_distance(spec, f, f, disk, budget, 1).value == 0.0);
    const auto fg = metric_distance(spec, f, g, disk, budget, 1);
    CHECK(fg.value == metric_distance(spec, g, f, disk, budget, 1).value);
    CHECK(fg.value > 0.0);
    CHECK(fg.value <= 1.0);
    const auto gh = metric_distance(spec, g, h, disk, budget, 1);
    const auto fh = metric_distance(spec, f, h, disk, budget, 1);
    CHECK(fh.value <= fg.value + gh.value + 3 * (fh.stderr_value + fg.stderr_value + gh.stderr_value));
    CHECK(to_json(fg).at("term").size() == 20);
}

TEST_CASE("metric against an independent re-evaluation") {
    const Domain disk = make_domain("disk");
    const auto spec = make_metric(2.0);
    const auto pole = HoloFunction::of(kernel(disk, "planar-pole", {1.0}));
    const auto a = metric_distance(spec, pole, HoloFunction{}, disk, 200000, 1);
    const auto b = metric_distance(spec, pole, HoloFunction{}, disk, 400000, 2);
    CHECK(std::abs(a.value - b.value) <= 3 * std::hypot(a.stderr_value, b.stderr_value) + 1e-6);
    double direct = 0.0;
    for (std::size_t j = 0; j < a.x.size(); ++j) direct += std::ldexp(1.0, -static_cast<int>(j) - 1) * a.x[j] / (1 + a.x[j]);
    CHECK(direct == doctest::Approx(a.value).epsilon(1e-14));

    CHECK_THROWS_WITH_AS(metric_distance(make_metric(kInf), pole, HoloFunction{}, disk, 10000, 1),
                         doctest::Contains("not-in-space"), Error);
}

TEST_CASE("scalar multiplication is continuous") {
    const Domain disk = make_domain("disk");
    const auto log = HoloFunction::of(kernel(disk, "planar-log", {1.0}));
    std::vector<double> lambdas;
    for (int k = 1; k <= 100; ++k) lambdas.push_back(1.0 + 1.0 / k);
    const auto spec = make_metric(2.0);
    const auto r = scalar_continuity_check(spec, lambdas, 1.0, log, disk, 200000, 1);
    CHECK(r.decreasing);
    const auto m = lp_masses(log, disk, spec.p, 200000, 1);
    double C = 0.0;
    for (std::size_t j = 0; j < spec.p.size(); ++j) C += std::ldexp(1.0, -static_cast<int>(j) - 1) * std::pow(m.value[j], 1 / spec.p[j]);
    for (std::size_t k = 0; k < lambdas.size(); ++k) CHECK(r.distances[k] <= (lambdas[k] - 1.0) * C * (1 + 1e-12));

    const auto zero = scalar_continuity_check(spec, std::vector<double>(5, 0.0), 0.0, log, disk, 10000, 1);
    for (double d : zero.distances) CHECK(d == 0.0);

    const auto pole = HoloFunction::of(kernel(disk, "planar-pole", {1.0}));
    const auto flavor = scalar_continuity_check(make_metric(1.0), lambdas, 1.0, pole, disk, 200000, 1);
    CHECK(flavor.decreasing);
    CHECK(flavor.distances.back() < flavor.distances.front());
}

TEST_CASE("ball log law") {
    const std::vector<double> radii{0.9, 0.95, 0.98, 0.99, 0.995, 0.999};
    const auto one = log_law_fit(1, 2.0, radii, 100000, 1);
    CHECK(one.slope > 0);
    CHECK(one.r_squared >= 0.95);
    const auto two = log_law_fit(2, 3.0, radii, 100000, 1);
    CHECK(two.slope > 0);
    CHECK(two.r_squared >= 0.95);

    // Below the critical exponent J(r) levels off: increments per unit of the
    // log scale shrink as r -> 1.
    const auto sub = log_law_fit(2, 2.5, radii, 100000, 1);
    const auto rate = [&](std::size_t i) {
        return (sub.points[i + 1].J - sub.points[i].J) / (sub.points[i + 1].L - sub.points[i].L);
    };
    CHECK(rate(4) < 0.5 * rate(0));
    CHECK(sub.slope < 0.5 * two.slope);
    CHECK(to_json(one).at("points").size() == radii.size());
    CHECK_THROWS_WITH_AS(log_law_fit(2, 3.0, {0.9, 1.0}, 1000, 1), doctest::Contains("invalid-input"), Error);
}

TEST_CASE("submean inequality") {
    const Domain disk = make_domain("disk");
    const auto c = submean_check(HoloFunction::constant(cplx(2.0, 1.0)), disk, 300, 1);
    CHECK(c.violations == 0);
    const auto pole = submean_check(HoloFunction::of(kernel(disk, "planar-pole", {1.0})), disk, 1000, 2);
    CHECK(pole.violations == 0);
    CHECK(pole.worst_excess <= 3.0);
    const auto half = submean_check(HoloFunction::of(kernel(disk, "planar-log", {1.0})), disk, 500, 3, {0.5});
    CHECK(half.violations == 0);
}

TEST_CASE("Cauchy estimate against the L1 norm") {
    const Domain disk = make_domain("disk");
    const std::vector<CVec> K{{0.0}, {cplx(0.3, 0.2)}, {cplx(-0.4, -0.1)}};
    const auto zero = cauchy_norm_control(HoloFunction{}, K, {1}, disk, 10000, 1);
    CHECK(zero.sup_derivative == 0.0);
    CHECK(zero.norm1 == 0.0);

    const auto log = HoloFunction::of(kernel(disk, "planar-log", {1.0}));
    const auto a = cauchy_norm_control(log, K, {1}, disk, 100000, 1);
    CHECK(a.constant > 0);
    CHECK(std::isfinite(a.constant));
    for (double r : a.ratios) CHECK(r == doctest::Approx(a.ratios[0]).epsilon(1e-12));
    const auto b = cauchy_norm_control(log, K, {1}, disk, 200000, 1);
    CHECK(std::abs(b.constant / a.constant - 1) < 0.05);

    // Derivative of 1/(z - 1) at 0 is -1.
    const auto pole = HoloFunction::of(kernel(disk, "planar-pole", {1.0}));
    CHECK(cauchy_norm_control(pole, {{0.0}}, {1}, disk, 10000, 1).sup_derivative == doctest::Approx(1.0).epsilon(1e-10));
    CHECK_THROWS_WITH_AS(cauchy_norm_control(log, {{cplx(0.9999, 0.0)}}, {1}, disk, 1000, 1),
                         doctest::Contains("compact-too-close"), Error);
}

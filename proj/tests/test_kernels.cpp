#include "doctest.h"

#include <cmath>
#include <numbers>

#include "bergman/kernels.hpp"
#include "bergman/rng.hpp"

using namespace bergman;

namespace {

constexpr double kPi = std::numbers::pi;

SingularKernel kernel(const Domain& d, const std::string& family, const CVec& zeta, KernelOptions opt = {}) {
    opt.certify_samples = 20000;
    return make_kernel(d, kernel_family_from_string(family), zeta, opt, 11);
}

// |f'(z) from the x-stencil - f'(z) from the y-stencil| in coordinate j.
double cr_residual(const SingularKernel& k, const CVec& z, std::size_t j, double h) {
    CVec a = z, b = z, c = z, e = z;
    a[j] += h, b[j] -= h, c[j] += cplx(0, h), e[j] -= cplx(0, h);
    const cplx dx = (k.eval_unchecked(a) - k.eval_unchecked(b)) / (2 * h);
    const cplx dy = (k.eval_unchecked(c) - k.eval_unchecked(e)) / (cplx(0, 2 * h));
    return std::abs(dx - dy);
}

std::vector<CVec> arc(double r, double from, double to, int steps) {
    std::vector<CVec> pts;
    for (int i = 0; i <= steps; ++i) pts.push_back({std::polar(r, from + (to - from) * i / steps)});
    return pts;
}

}  // namespace

TEST_CASE("family names round trip") {
    for (const char* name : {"planar-pole", "planar-log", "planar-power", "cusp-monomial", "cusp-inverse-power", "ball-pole",
                             "ball-log", "ball-power", "convex-pole", "convex-log", "convex-power", "levi-pole", "levi-log",
                             "levi-power"})
        CHECK(to_string(kernel_family_from_string(name)) == name);
    CHECK_THROWS_WITH_AS(kernel_family_from_string("nope"), doctest::Contains("invalid-input"), Error);
}

TEST_CASE("eval examples") {
    const Domain disk = make_domain("disk");
    CHECK(kernel(disk, "planar-pole", {1.0}).eval({0.0}) == cplx(-1.0));
    const Domain ball = make_domain("ball", {{"n", 2}});
    CHECK(kernel(ball, "ball-pole", {1.0, 0.0}).eval({0.0, 0.0}) == cplx(1.0));

    KernelOptions opt;
    opt.anchor = cplx(2.0);
    const auto g = kernel(disk, "planar-log", {1.0}, opt);
    CHECK(g.branch.kind == BranchKind::principal);
    const cplx v = g.eval({0.0});
    CHECK(v.real() == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(v.imag() == 0.0);

    CHECK_THROWS_WITH_AS(g.eval({1.5}), doctest::Contains("outside-domain"), Error);
}

TEST_CASE("denominators and exponents") {
    const Domain disk = make_domain("disk");
    const auto pole = kernel(disk, "planar-pole", {1.0});
    CHECK(pole.denominator({0.25}) == cplx(-0.75));
    CHECK(pole.exponent() == 1.0);

    const Domain ball = make_domain("ball", {{"n", 2}});
    KernelOptions opt;
    opt.q = 1.5;
    const auto bp = kernel(ball, "ball-power", {1.0, 0.0}, opt);
    CHECK(bp.exponent() == doctest::Approx(2.0));
    CHECK(bp.denominator({cplx(0.5, 0.1), 0.2}) == cplx(0.5, -0.1));

    const Domain cusp = make_domain("cusp", {{"alpha", 2.0}});
    opt.q = 4.0;
    const auto cm = kernel(cusp, "cusp-monomial", {0.0}, opt);
    CHECK(cm.exponent() == doctest::Approx(0.75));
    CHECK(cm.denominator({cplx(0.5, 0.1)}) == cplx(0.5, 0.1));

    CHECK(kernel(ball, "ball-log", {1.0, 0.0}).exponent() == 0.0);
}

TEST_CASE("anchor selection") {
    const Domain disk = make_domain("disk");
    const cplx a = select_anchor(disk, 1.0);
    CHECK(a.real() > 1.0);
    CHECK(std::abs(a.imag()) < 1e-12);
    for (int i = 1; i <= 1000; ++i) CHECK_FALSE(disk.contains({1.0 + (i / 1000.0) * (a - 1.0)}));

    KernelOptions opt;
    opt.anchor = cplx(-0.5);
    CHECK_THROWS_WITH_AS(kernel(disk, "planar-log", {1.0}, opt), doctest::Contains("invalid-anchor"), Error);
}

TEST_CASE("exp of log kernels recovers the argument") {
    const Domain disk = make_domain("disk");
    const Domain ball = make_domain("ball", {{"n", 2}});
    const Domain square = make_domain("square");
    const std::vector<std::pair<const Domain*, SingularKernel>> cases{
        {&disk, kernel(disk, "planar-log", {1.0})},
        {&ball, kernel(ball, "ball-log", {1.0, 0.0})},
        {&square, kernel(square, "convex-log", {cplx(0.5, 0.0)})},
        {&ball, kernel(ball, "levi-log", {1.0, 0.0})},
    };
    for (const auto& [d, k] : cases) {
        CHECK(k.branch.kind == BranchKind::principal);
        const auto pts = sample_uniform(*d, 10000, 5).points;
        double worst = 0.0, worst_im = 0.0;
        for (const auto& z : pts) {
            if (is_levi_family(k.family) && dist(z, k.zeta) >= k.patch_radius) continue;
            const cplx g = k.eval(z);
            const cplx expected = k.family == KernelFamily::planar_log ? k.log_argument(z) : 1.0 / k.denominator(z);
            worst = std::max(worst, std::abs(std::exp(g) - expected));
            worst_im = std::max(worst_im, std::abs(g.imag()));
        }
        CHECK_MESSAGE(worst <= 1e-10, to_string(k.family));
        CHECK(worst_im <= kPi + 1e-12);
    }
}

TEST_CASE("power families match |D|^-s") {
    const Domain disk = make_domain("disk");
    const Domain cusp = make_domain("cusp", {{"alpha", 2.0}});
    const Domain ball = make_domain("ball", {{"n", 2}});
    const Domain half = make_domain("half-ball", {{"n", 2}});
    KernelOptions opt;
    opt.q = 3.0;
    const std::vector<std::pair<const Domain*, SingularKernel>> cases{
        {&disk, kernel(disk, "planar-power", {1.0}, opt)},
        {&cusp, kernel(cusp, "cusp-monomial", {0.0}, opt)},
        {&ball, kernel(ball, "ball-power", {1.0, 0.0}, opt)},
        {&half, kernel(half, "convex-power", {0.0, 0.0}, opt)},
        {&ball, kernel(ball, "levi-power", {1.0, 0.0}, opt)},
    };
    for (const auto& [d, k] : cases) {
        const auto pts = sample_uniform(*d, 5000, 6).points;
        double worst = 0.0;
        for (const auto& z : pts) {
            if (is_levi_family(k.family) && dist(z, k.zeta) >= k.patch_radius) continue;
            const double expected = k.modulus_factor(z) * std::pow(std::abs(k.denominator(z)), -k.exponent());
            worst = std::max(worst, std::abs(std::abs(k.eval(z)) / expected - 1.0));
            CHECK(std::exp(k.log_modulus_unchecked(z)) == doctest::Approx(expected).epsilon(1e-12));
        }
        CHECK_MESSAGE(worst <= 1e-12, to_string(k.family));
    }
}

TEST_CASE("kernels are holomorphic: Cauchy-Riemann residual is O(h^2)") {
    const Domain disk = make_domain("disk");
    const Domain ball = make_domain("ball", {{"n", 2}});
    const Domain psh = make_domain("strictly-psh", {{"n", 2}});
    KernelOptions opt;
    opt.q = 3.0;
    const std::vector<std::pair<const Domain*, SingularKernel>> cases{
        {&disk, kernel(disk, "planar-pole", {1.0})},   {&disk, kernel(disk, "planar-log", {1.0})},
        {&disk, kernel(disk, "planar-power", {1.0}, opt)}, {&ball, kernel(ball, "ball-power", {1.0, 0.0}, opt)},
        {&ball, kernel(ball, "convex-log", {0.0, 1.0})}, {&psh, kernel(psh, "levi-pole", {ray_boundary(psh, {1.0, 0.0})})},
    };
    for (const auto& [d, k] : cases) {
        int tested = 0;
        for (const auto& z : sample_uniform(*d, 20000, 8).points) {
            if (tested == 100) break;
            if (dist(z, k.zeta) < 0.1 || dist(z, k.zeta) >= k.patch_radius) continue;
            for (std::size_t j = 0; j < k.n; ++j) {
                const double r1 = cr_residual(k, z, j, 1e-3), r2 = cr_residual(k, z, j, 5e-4);
                if (r1 > 1e-9) {
                    CHECK_MESSAGE(r1 / r2 > 3.0, to_string(k.family));
                    CHECK_MESSAGE(r1 / r2 < 5.0, to_string(k.family));
                }
            }
            ++tested;
        }
        CHECK(tested == 100);
    }
}

TEST_CASE("log x bound used for the log kernels") {
    Stream rng(9, 0);
    for (int i = 0; i < 2000; ++i) {
        const double x = std::exp(rng.uniform(0.0, 50.0));
        for (double p : {1.0, 2.0, 4.0}) {
            double kfact = 1.0;
            for (int k = 1; k <= 8; ++k) {
                kfact *= k;
                CHECK(std::pow(std::log(x), p) <= std::pow(kfact, p / k) * std::pow(x, p / k) * (1 + 1e-12));
            }
        }
    }
}

TEST_CASE("ellipsoid convex pole is the rescaled ball pole") {
    const Domain ell = make_domain("ellipsoid", {{"a", {1.0, 2.0}}});
    const Domain ball = make_domain("ball", {{"n", 2}});
    const CVec zeta{cplx(0.6, 0.0), cplx(0.0, 1.6)};
    const auto ek = kernel(ell, "convex-pole", zeta);
    const auto bk = kernel(ball, "ball-pole", {cplx(0.6, 0.0), cplx(0.0, 0.8)});
    double worst = 0.0;
    for (const auto& z : sample_uniform(ell, 10000, 3).points) {
        const CVec w{z[0], z[1] / 2.0};
        worst = std::max(worst, std::abs(ek.eval(z) - bk.eval(w)) / std::abs(bk.eval(w)));
    }
    CHECK(worst <= 1e-12);
}

TEST_CASE("theoretical thresholds") {
    const Domain ball = make_domain("ball", {{"n", 2}});
    CHECK(theoretical_threshold(kernel(ball, "ball-pole", {1.0, 0.0}), ball).lo == 3.0);
    KernelOptions opt;
    opt.q = 2.5;
    CHECK(theoretical_threshold(kernel(ball, "ball-power", {1.0, 0.0}, opt), ball).lo == doctest::Approx(2.5));
    CHECK(theoretical_threshold(kernel(ball, "ball-log", {1.0, 0.0}), ball).lo == kInf);

    const Domain cusp = make_domain("cusp", {{"alpha", 2.0}});
    opt.q = 3.0;
    const auto base = kernel(cusp, "cusp-monomial", {0.0}, opt);
    CHECK(base.exponent() == 1.0);
    CHECK(theoretical_threshold(base, cusp).lo == 3.0);

    const Domain psh = make_domain("strictly-psh", {{"n", 2}});
    const auto lp = kernel(psh, "levi-pole", ray_boundary(psh, {1.0, 0.0}));
    const auto t = theoretical_threshold(lp, psh);
    CHECK(t.lo == 3.0);
    CHECK(t.hi == 4.0);
    CHECK_FALSE(t.exact());

    const Domain half = make_domain("half-ball", {{"n", 2}});
    CHECK(theoretical_threshold(kernel(half, "convex-pole", {0.0, 0.0}), half).lo == 2.0);
    CHECK(theoretical_threshold(kernel(make_domain("disk"), "planar-pole", {1.0}), make_domain("disk")).lo == 2.0);
    CHECK(theoretical_threshold(kernel(make_domain("expcusp"), "cusp-inverse-power", {0.0}), make_domain("expcusp")).lo == kInf);

    const Domain square = make_domain("square");
    CHECK_THROWS_WITH_AS(theoretical_threshold(kernel(square, "planar-pole", {0.0}), square),
                         doctest::Contains("no-theoretical-value"), Error);
    CHECK_THROWS_WITH_AS(theoretical_threshold(kernel(cusp, "planar-pole", {1.0}), cusp),
                         doctest::Contains("no-theoretical-value"), Error);
}

TEST_CASE("Levi kernels are local") {
    const Domain ball = make_domain("ball", {{"n", 2}});
    KernelOptions opt;
    opt.levi_epsilon = 0.3;
    const auto k = kernel(ball, "levi-log", {1.0, 0.0}, opt);
    CHECK(k.patch_radius == 0.3);
    CHECK_NOTHROW(k.eval({0.8, 0.0}));
    CHECK_THROWS_WITH_AS(k.eval({0.0, 0.0}), doctest::Contains("outside-local-patch"), Error);
    // For the ball F = 2(1 - <z, zeta>).
    CHECK(std::abs(k.denominator({0.8, cplx(0.0, 0.1)}) - 2.0 * (1.0 - 0.8)) < 1e-15);
}

TEST_CASE("branch violation is reported with the witness") {
    const Domain disk = make_domain("disk");
    json j = to_json(kernel(disk, "planar-log", {1.0}));
    j["anchor"] = complex_to_json(-0.5);
    const auto bad = kernel_from_json(j, disk);
    CHECK_THROWS_WITH_AS(bad.eval({0.2}), doctest::Contains("branch-violation"), Error);
}

TEST_CASE("kernel JSON round trip") {
    const Domain ell = make_domain("ellipsoid", {{"a", {1.0, 2.0}}});
    const auto k = kernel(ell, "convex-log", {cplx(0.6, 0.0), cplx(0.0, 1.6)});
    const auto back = kernel_from_json(json::parse(to_json(k).dump()), ell);
    CHECK(to_json(back) == to_json(k));
    for (const auto& z : sample_uniform(ell, 100, 2).points) CHECK(back.eval(z) == k.eval(z));
}

TEST_CASE("branch continuation on a simply connected domain") {
    const Domain disk = make_domain("disk");
    const auto k = with_branch_base(kernel(disk, "planar-log", {1.0}), {0.3});
    const auto map = connected_components(disk, {1.0}, 2.2, {}, 1);
    for (const auto& z : sample_uniform(disk, 20, 4).points) {
        const auto path = continue_branch(k, disk, z, map);
        CHECK(std::abs(path.value - k.eval(z)) < 1e-8);
        CHECK(std::abs(std::exp(path.value) - k.log_argument(z)) <= 1e-10);
    }
}

TEST_CASE("branch continuation around the annulus hole is path independent") {
    const Domain ann = make_domain("annulus");
    KernelOptions opt;
    opt.anchor = cplx(1.5);
    const auto k = with_branch_base(kernel(ann, "planar-log", {1.0}, opt), {0.75});
    const CVec target{-0.75};
    const auto upper = continue_along(k, ann, arc(0.75, 0.0, kPi, 300));
    const auto lower = continue_along(k, ann, arc(0.75, 0.0, -kPi, 300));
    CHECK(std::abs(upper.value - lower.value) < 1e-8);
    const cplx ratio = k.log_argument(target);
    CHECK(std::abs(std::exp(upper.value) - ratio) <= 1e-10);
    // The q = 2 power collapses to the ratio itself.
    CHECK(std::abs(std::exp((2.0 / 2.0) * lower.value) - ratio) <= 1e-10);

    // A full loop around the hole integrates to zero.
    auto loop = arc(0.75, 0.0, 2 * kPi, 600);
    loop.back() = loop.front();
    CHECK(std::abs(continue_along(k, ann, loop).value - k.branch.base_value) < 1e-10);

    const auto map = connected_components(ann, {1.0}, 2.1, {}, 1);
    const auto viamap = continue_branch(k, ann, target, map);
    CHECK(std::abs(viamap.value - upper.value) < 1e-8);

    CHECK_THROWS_WITH_AS(continue_along(k, ann, {{0.75}, {-0.75}}), doctest::Contains("path-escape"), Error);
}

TEST_CASE("continuation to another component is unreachable") {
    const Domain cut = make_domain("cut-annulus");
    const cplx upper = std::polar(0.75, kPi / 3), lower = std::polar(0.75, -kPi / 3);
    const auto k = with_branch_base(kernel(cut, "planar-log", {std::polar(1.0, kPi / 3)}), {upper});
    const auto map = connected_components(cut, {1.0}, 1.3, {}, 1);
    CHECK_THROWS_WITH_AS(continue_branch(k, cut, {lower}, map), doctest::Contains("unreachable"), Error);
}

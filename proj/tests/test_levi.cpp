#include "doctest.h"

#include <cmath>
#include <numbers>

#include "bergman/levi.hpp"
#include "bergman/rng.hpp"

using namespace bergman;

namespace {

// Central-difference Wirtinger derivative d/dz_j (conj = false) or d/dzbar_j (conj = true).
template <class F>
cplx wirtinger(F f, const CVec& z, std::size_t j, bool conj, double h = 1e-5) {
    CVec a = z, b = z, c = z, d = z;
    a[j] += h, b[j] -= h, c[j] += cplx(0, h), d[j] -= cplx(0, h);
    const auto dx = (f(a) - f(b)) / (2 * h);
    const auto dy = (f(c) - f(d)) / (2 * h);
    return conj ? 0.5 * (dx + cplx(0, 1) * dy) : 0.5 * (dx - cplx(0, 1) * dy);
}

std::vector<DefiningFunctionPtr> catalog() {
    return {sphere_rho({0.0, 0.0}, 1.0), ellipsoid_rho({1.0, 2.0}), quartic_rho(2, 0.3, 0.5), quartic_rho(3, -0.2, 1.0),
            pluriharmonic_rho(2), half_space_rho(2)};
}

}  // namespace

TEST_CASE("defining function derivatives match finite differences") {
    Stream rng(3, 0);
    for (const auto& df : catalog()) {
        for (int i = 0; i < 100; ++i) {
            const CVec z = 0.8 * rng.unit_ball(df->dim);
            const CVec g = df->grad(z);
            const CMatrix h = df->hessian(z);
            const CMatrix hh = df->hol_hessian(z);
            CHECK(h.is_hermitian(0.0));
            for (std::size_t j = 0; j < df->dim; ++j) {
                const cplx fd = wirtinger([&](const CVec& w) { return cplx(df->rho(w)); }, z, j, false);
                REQUIRE_MESSAGE(std::abs(fd - g[j]) < 1e-8, df->name);
                for (std::size_t k = 0; k < df->dim; ++k) {
                    const auto gj = [&](const CVec& w) { return df->grad(w)[j]; };
                    REQUIRE_MESSAGE(std::abs(wirtinger(gj, z, k, true) - h(j, k)) < 1e-7, df->name);
                    REQUIRE_MESSAGE(std::abs(wirtinger(gj, z, k, false) - hh(j, k)) < 1e-7, df->name);
                }
            }
        }
    }
}

TEST_CASE("beta for ball, ellipsoid and a pluriharmonic function") {
    const Domain ball = make_domain("ball", {{"n", 2}});
    const LeviData b = compute_beta(*ball.rho, ball, 200, 1);
    CHECK(b.lambda_min == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(b.beta == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(b.halvings == 0);

    const Domain ell = make_domain("ellipsoid", {{"a", {1.0, 2.0}}});
    const LeviData e = compute_beta(*ell.rho, ell, 200, 1);
    CHECK(e.beta == doctest::Approx(1.0 / 12.0).epsilon(1e-12));

    CHECK_THROWS_WITH_AS(compute_beta(*pluriharmonic_rho(2), ball, 10, 1), doctest::Contains("not-strictly-psh"), Error);

    const Domain psh = make_domain("strictly-psh", {{"n", 2}});
    const LeviData q = compute_beta(*psh.rho, psh, 200, 1);
    CHECK(q.beta > 0);
    CHECK(verify_coercivity(*psh.rho, psh, q.beta, q.epsilon, 20000, 5).violations == 0);
}

TEST_CASE("Levi polynomial values") {
    const auto ball = sphere_rho({0.0, 0.0}, 1.0);
    CHECK(levi_polynomial(*ball, {1.0, 0.0}, {0.0, 0.0}) == cplx(2.0));
    Stream rng(4, 0);
    for (int i = 0; i < 100; ++i) {
        const CVec zeta = rng.unit_sphere(2);
        const CVec z = rng.unit_ball(2);
        CHECK(std::abs(levi_polynomial(*ball, zeta, z) - 2.0 * (1.0 - inner(z, zeta))) < 1e-14);
        for (const auto& df : catalog()) CHECK(std::abs(levi_polynomial(*df, zeta, zeta)) == 0.0);
    }
    const auto ell = ellipsoid_rho({1.0, 2.0});
    const CVec zeta{cplx(0.6, 0.0), cplx(0.0, 1.6)};
    for (double t : {0.0, 0.3, 0.9}) {
        const cplx f = levi_polynomial(*ell, zeta, t * zeta);
        CHECK(std::abs(f.imag()) < 1e-14);
        CHECK(f.real() == doctest::Approx(2 * (1 - t)));
    }
}

TEST_CASE("Levi polynomial is holomorphic") {
    Stream rng(5, 0);
    const auto df = quartic_rho(2, 0.3, 0.5);
    const CVec zeta{cplx(0.5, 0.2), cplx(-0.1, 0.3)};
    const LeviPolynomial f(*df, zeta);
    for (int i = 0; i < 100; ++i) {
        const CVec z = rng.unit_ball(2);
        for (std::size_t j = 0; j < 2; ++j) CHECK(std::abs(wirtinger([&](const CVec& w) { return f(w); }, z, j, true)) < 1e-9);
    }
}

TEST_CASE("coercivity on the ball") {
    const Domain ball = make_domain("ball", {{"n", 2}});
    const auto good = verify_coercivity(*ball.rho, ball, 1.0 / 3.0, 0.5, 100000, 1);
    CHECK(good.violations == 0);
    CHECK(good.min_margin > -1e-12);
    const auto bad = verify_coercivity(*ball.rho, ball, 10.0, 0.5, 20000, 1);
    CHECK(bad.violations > 0);
    const auto shrunk = verify_coercivity(*ball.rho, ball, 1.0 / 3.0, 0.05, 100000, 1);
    CHECK(shrunk.violations <= good.violations);
}

TEST_CASE("coercivity verdict is invariant under rho -> 2 rho") {
    const Domain ell = make_domain("ellipsoid", {{"a", {1.0, 2.0}}});
    const LeviData e = compute_beta(*ell.rho, ell, 100, 2);
    const DefiningFunction doubled = ell.rho->scaled(2.0);
    const auto a = verify_coercivity(*ell.rho, ell, e.beta, e.epsilon, 20000, 3);
    const auto b = verify_coercivity(doubled, ell, 2 * e.beta, e.epsilon, 20000, 3);
    CHECK(a.violations == 0);
    CHECK(b.violations == 0);
    CHECK(b.min_margin == doctest::Approx(2 * a.min_margin).epsilon(1e-9));
    const auto bad_a = verify_coercivity(*ell.rho, ell, 30 * e.beta, e.epsilon, 20000, 3);
    const auto bad_b = verify_coercivity(doubled, ell, 60 * e.beta, e.epsilon, 20000, 3);
    CHECK(bad_a.violations == bad_b.violations);
    CHECK(bad_a.violations > 0);
}

TEST_CASE("Levi coordinates") {
    const auto ball = sphere_rho({0.0, 0.0}, 1.0);
    const CVec zeta{1.0, 0.0};
    const LeviChart chart = levi_coordinates(ball, zeta, 1);
    CHECK(chart.det_abs > 0);
    CHECK(chart.condition < 10);
    for (double t : chart(zeta)) CHECK(std::abs(t) < 1e-15);
    CHECK(chart.c1 > 0);
    CHECK(chart.c2 >= chart.c1);
    CHECK(std::isfinite(chart.linearization));
    // Inside the ball near zeta, t_1 = -rho > 0.
    CHECK(chart({cplx(0.95, 0.0), 0.0})[0] > 0);

    const auto ell = ellipsoid_rho({1.0, 2.0});
    const LeviChart e = levi_coordinates(ell, {cplx(0.6, 0.0), cplx(0.0, 1.6)}, 1);
    CHECK(e.c1 > 0);

    CHECK_THROWS_WITH_AS(levi_coordinates(pluriharmonic_rho(2), {0.0, 0.0}), doctest::Contains("degenerate-gradient"), Error);
    auto flat = std::make_shared<DefiningFunction>(ball->scaled(1e-10));
    CHECK_THROWS_WITH_AS(levi_coordinates(flat, zeta), doctest::Contains("ill-conditioned-chart"), Error);
}

TEST_CASE("model integral verdicts") {
    CHECK(model_integral(1.0, 1, 1.0, 200000, 1).verdict == Verdict::finite);
    const auto crit = model_integral(2.0, 1, 1.0, 200000, 1).verdict;
    CHECK(crit != Verdict::finite);

    const double grid[] = {2.0, 2.5, 3.0, 3.5};
    std::vector<Verdict> v;
    for (double p : grid) {
        const auto r = model_integral(p, 2, 1.0, 200000, 1);
        CHECK(std::abs(r.fit.slope - r.expected_slope) < 0.1);
        v.push_back(r.verdict);
    }
    CHECK(v[0] == Verdict::finite);
    CHECK(v[1] == Verdict::finite);
    CHECK(v[2] != Verdict::finite);
    CHECK(v[3] == Verdict::divergent);
    CHECK_THROWS_WITH_AS(model_integral(0.0, 2, 1.0, 1000, 1), doctest::Contains("domain-error"), Error);
}

TEST_CASE("model integral verdict is monotone in p") {
    bool seen_nonfinite = false;
    for (double p = 0.5; p <= 3.01; p += 0.25) {
        const auto v = model_integral(p, 1, 1.0, 100000, 7).verdict;
        if (v != Verdict::finite) seen_nonfinite = true;
        if (seen_nonfinite) CHECK(v != Verdict::finite);
    }
}

TEST_CASE("flat shells of the 2n divergence integral") {
    const auto one = divergence_integral_2n(1, 400000, 1);
    CHECK(one.shell_exact == doctest::Approx(std::numbers::pi * std::log(2.0)));
    for (double v : one.shells.value) CHECK(std::abs(v / one.shell_exact - 1) < 0.05);
    CHECK(one.max_rel_deviation < 0.05);
    CHECK(one.verdict == Verdict::divergent);

    const auto two = divergence_integral_2n(2, 400000, 1);
    for (double v : two.shells.value) CHECK(std::abs(v / two.shell_exact - 1) < 0.05);
    CHECK(two.verdict == Verdict::divergent);

    CHECK(divergence_integral_2n(2, 400000, 1, 1.5).verdict == Verdict::finite);
}

#ifndef BERGMAN_QUADRATURE_HPP
#define BERGMAN_QUADRATURE_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bergman/geometry.hpp"
#include "bergman/kernels.hpp"
#include "bergman/regression.hpp"

namespace bergman {

/// An estimation failure that still carries the data gathered so far.
class EstimateError : public Error {
public:
    EstimateError(std::string code, const std::string& what, json partial)
        : Error(std::move(code), what), partial_(std::move(partial)) {}
    const json& partial() const noexcept { return partial_; }

private:
    json partial_;
};

/// Finite combination c_0 + sum_i c_i k_i of catalog kernels.
///
/// Terms are kept merged and sorted by their kernel's JSON form, so f - g and
/// g - f evaluate through the same sequence of operations and f - f is the
/// zero function exactly.
class HoloFunction {
public:
    struct Term {
        cplx coeff{1.0, 0.0};
        std::shared_ptr<const SingularKernel> kernel;
        std::string key;
    };

    HoloFunction() = default;
    static HoloFunction constant(cplx c);
    static HoloFunction of(const SingularKernel& k, cplx coeff = 1.0);

    /// Value at a point of the domain. Levi terms throw "outside-local-patch"
    /// outside their patch; no other membership checks are made.
    cplx operator()(const CVec& z) const;
    /// |f(z)|^p, through log|k| when f is a single kernel term.
    double abs_pow(const CVec& z, double p) const;

    /// Value at b + e^log_t u for a unit vector u. Below t = 1e-13 the terms
    /// singular at b use SingularKernel::eval_along and the others take their
    /// value at b, which is the limit of the exact value.
    cplx eval_along(const CVec& b, const CVec& u, double log_t) const;

    cplx constant_term() const { return constant_; }
    const std::vector<Term>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty() && constant_ == cplx(0.0, 0.0); }
    /// Distinct boundary points of the terms, in term order.
    std::vector<CVec> singular_points() const;

    HoloFunction operator+(const HoloFunction& o) const;
    HoloFunction operator-(const HoloFunction& o) const;
    HoloFunction operator*(cplx t) const;

private:
    cplx constant_{0.0, 0.0};
    std::vector<Term> terms_;
};

json to_json(const HoloFunction& f);
HoloFunction holo_from_json(const json& j, const Domain& d);

/// Integration region: a ball B(center, radius) intersected with the domain,
/// or the whole domain when no center is given.
struct Region {
    std::optional<CVec> center;
    double radius = kInf;
    bool contains(const CVec& z) const { return !center || dist(z, *center) < radius; }
};

struct MassStratum {
    std::string kind;  ///< bulk | shell
    std::size_t point = 0;  ///< index into the singular points (shells)
    double r_lo = 0.0, r_hi = 0.0;
    std::vector<double> value, stderr_value;
    std::uint64_t proposals = 0, hits = 0;
};

/// Estimates of integral |f|^p dv for several p from one set of samples.
struct MassEstimate {
    std::vector<double> p;
    std::vector<double> value, stderr_value;
    /// Extrapolated mass inside the innermost dyadic ball, summed over singular points.
    std::vector<double> tail, tail_stderr;
    /// Fitted log2 growth of the innermost dyadic strata (worst singular point).
    std::vector<SlopeFit> tail_fit;
    std::vector<Verdict> tail_verdict;
    std::vector<MassStratum> strata;
    std::uint64_t samples = 0;

    double relative_stderr(std::size_t i) const;
};

struct MassOptions {
    Region region;
    /// Dyadic strata B(zeta, r0 2^-m) \ B(zeta, r0 2^-m-1), m < strata, around each singular point.
    int strata = 40;
    /// Radius of the outermost stratum; 0 picks diameter/8 (or 2 radius/8 for a ball region).
    double r0 = 0.0;
    /// Fraction of the budget spent on the bulk stratum.
    double bulk_fraction = 0.25;
    int tail_fit_points = 8;
};

/// Stratified estimate of integral over region ∩ Ω of |f|^p, for every p in ps.
MassEstimate lp_masses(const HoloFunction& f, const Domain& d, const std::vector<double>& ps, std::uint64_t budget,
                       std::uint64_t seed, const MassOptions& options = {});

/// Single-exponent version. Throws EstimateError "unstable-estimate" when
/// stderr / estimate > 0.2.
MassEstimate lp_mass(const HoloFunction& f, const Domain& d, double p, std::uint64_t budget, std::uint64_t seed,
                     const MassOptions& options = {});

json to_json(const MassEstimate& m);

struct ShellEstimate {
    int k = 0;
    double log2_volume = -kInf;
    double volume_rel_se = kInf;
    std::vector<double> log2_mass;   ///< log2 of integral over T_k of |f|^p, per p
    std::vector<double> mass_rel_se;
    std::uint64_t proposals = 0, hits = 0;
    double r_perp = 0.0;             ///< transverse radius of the slab sampler (0 for radial shells)
    double level_cap = 0.0;          ///< outer |t| of the slab sampler (Levi shells)
    bool missing = true;

    double volume() const { return std::exp2(log2_volume); }
    double volume_stderr() const { return volume() * volume_rel_se; }
    double mass(std::size_t i) const { return std::exp2(log2_mass[i]); }
};

/// Per-shell volumes and p-masses on T_k = { z in Ω ∩ B(zeta, r0) ∩ region : 2^-k-1 <= |D(z)| < 2^-k }.
struct LevelShellProfile {
    std::string kernel_family;
    CVec zeta;
    double s = 0.0;  ///< the kernel's power
    double r0 = 0.0;
    int k0 = 0, k1 = 0;
    std::vector<double> p_list;
    std::string sampler;  ///< ball | graph-slab | affine-slab
    std::uint64_t seed = 0;
    std::vector<ShellEstimate> shells;

    std::size_t usable() const;
};

struct ShellOptions {
    double r0 = 0.0;  ///< 0 picks the family default
    int k0 = -1, k1 = -1;  ///< -1 picks the family default
    std::vector<double> p_list;
    std::uint64_t per_shell_budget = 131072;
    Region region;
};

/// Family defaults for r0 and the shell range, filled into the unset fields.
ShellOptions resolve_shell_options(const SingularKernel& k, ShellOptions options);

/// Errors: "shell-starvation" (EstimateError) when 3 consecutive shells have no hits.
LevelShellProfile shell_profile(const SingularKernel& k, const Domain& d, const ShellOptions& options,
                                std::uint64_t seed);

json to_json(const LevelShellProfile& p);
/// RFC 4180 table: k,vol,stderr,log2_vol followed by mass_p<value> per p.
std::string to_csv(const LevelShellProfile& p);

struct PVerdict {
    double p = 0.0;
    double sigma = 0.0;  ///< fitted shell-mass slope p s - gamma_hat
    double sigma_se = 0.0;
    Verdict verdict = Verdict::inconclusive;
};

struct ThresholdVerdict {
    double gamma_hat = 0.0;
    double gamma_se = 0.0;
    double s = 0.0;
    double p_star_hat = 0.0;
    double p_star_se = 0.0;
    bool superpolynomial = false;
    double margin = 0.1;
    SlopeFit fit;
    std::size_t shells_used = 0;
    std::vector<PVerdict> verdicts;

    /// Verdict at any p from the same fit, without new sampling.
    PVerdict at(double p) const;
};

/// gamma_hat = -(weighted slope of log2 vol_k on k) with a 200-resample
/// bootstrap error; p_star_hat = gamma_hat / s (infinite for s = 0 or when the
/// decay is superpolynomial). Verdicts for p_grid (default: the profile's p_list).
/// Errors: "insufficient-shells" with fewer than 6 usable shells.
ThresholdVerdict estimate_threshold(const LevelShellProfile& profile, const std::vector<double>& p_grid = {},
                                    double margin = 0.1);

json to_json(const ThresholdVerdict& v);

/// Metric on the intersection of OL^p, p < q:
///   d(f, g) = sum_{j=1..J} 2^-j x_j / (1 + x_j),
/// with x_j = ||f - g||_{p_j} when q > 1 and x_j = integral |f - g|^{p_j} when q <= 1.
struct MetricSpec {
    double q = 2.0;
    int J = 20;
    std::vector<double> p;

    bool norm_based() const { return q > 1.0; }
    double tail_bound() const { return std::ldexp(1.0, -J); }
};

/// Default exponents: p_j = q - (q - 1) 2^-j for finite q > 1, p_j = j + 1 for
/// q = inf, p_j = q (1 - 2^-j-1) for q <= 1. Errors: "invalid-input".
MetricSpec make_metric(double q, int J = 20);

struct MetricResult {
    double value = 0.0;
    double stderr_value = 0.0;
    double tail_bound = 0.0;
    std::vector<double> p, x, x_stderr, term;
};

/// Errors: "not-in-space" naming the first p_j at or above a term's critical exponent.
MetricResult metric_distance(const MetricSpec& spec, const HoloFunction& f, const HoloFunction& g, const Domain& d,
                             std::uint64_t budget, std::uint64_t seed);

/// The metric terms for a known difference f - g = mu h, from the masses of h.
MetricResult metric_from_masses(const MetricSpec& spec, const MassEstimate& h, double mu);

json to_json(const MetricResult& m);

struct ContinuityResult {
    std::vector<double> lambdas;
    std::vector<double> distances;
    bool decreasing = false;
};

/// d(lambda_k f, lambda f) for each lambda_k, from a single set of masses of f.
ContinuityResult scalar_continuity_check(const MetricSpec& spec, const std::vector<double>& lambdas, double lambda,
                                         const HoloFunction& f, const Domain& d, std::uint64_t budget,
                                         std::uint64_t seed);

struct LogLawPoint {
    double r = 0.0;
    double J = 0.0;
    double J_stderr = 0.0;
    double L = 0.0;  ///< log(1 / (1 - r^2))
};

struct LogLawResult {
    std::size_t n = 0;
    double p = 0.0;
    std::vector<LogLawPoint> points;
    double slope = 0.0, intercept = 0.0, slope_se = 0.0, r_squared = 0.0;
};

/// J(r) = integral over rB of |1 - <z, e_1>|^-p on the unit ball of C^n,
/// regressed on log(1/(1 - r^2)). Errors: "invalid-input", "unstable-estimate".
LogLawResult log_law_fit(std::size_t n, double p, const std::vector<double>& r_grid, std::uint64_t budget_per_r,
                         std::uint64_t seed);

json to_json(const LogLawResult& r);

struct SubmeanReport {
    std::size_t trials = 0;
    std::size_t violations = 0;
    double worst_excess = -kInf;  ///< max of (|f(a)|^p - mean) / stderr
    std::size_t shrunk = 0;       ///< trials whose polydisk had to be shrunk into the domain
};

/// Checks |f(a)|^p <= mean of |f|^p over the polydisk P(a, r) for random a in
/// Ω, random r below the boundary distance and p cycling through ps. The mean
/// is a Monte Carlo average over groups of four rotated points.
SubmeanReport submean_check(const HoloFunction& f, const Domain& d, std::size_t trials, std::uint64_t seed,
                            const std::vector<double>& ps = {0.5, 1.0, 2.0}, std::size_t groups = 256);

struct CauchyControl {
    std::vector<int> alpha;
    double delta_K = 0.0;
    double sup_derivative = 0.0;
    double norm1 = 0.0, norm1_stderr = 0.0;
    double constant = 0.0;  ///< sup |d^alpha f| / ||f||_1
    std::vector<double> t, ratios;
};

/// sup over K of |d^alpha f| (Cauchy integral on polycircles) against ||f||_1,
/// for t f with t in {1, 2, 5}. Errors: "compact-too-close" when K comes within 1e-3 of the boundary.
CauchyControl cauchy_norm_control(const HoloFunction& f, const std::vector<CVec>& K, const std::vector<int>& alpha,
                                  const Domain& d, std::uint64_t budget, std::uint64_t seed);

}  // namespace bergman

#endif

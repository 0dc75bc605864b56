#ifndef BERGMAN_KERNELS_HPP
#define BERGMAN_KERNELS_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bergman/components.hpp"
#include "bergman/geometry.hpp"
#include "bergman/levi.hpp"

namespace bergman {

enum class KernelFamily {
    planar_pole,
    planar_log,
    planar_power,
    cusp_monomial,
    cusp_inverse_power,
    ball_pole,
    ball_log,
    ball_power,
    convex_pole,
    convex_log,
    convex_power,
    levi_pole,
    levi_log,
    levi_power,
};

std::string to_string(KernelFamily f);
/// Accepts the hyphenated names ("planar-pole", ...). Throws "invalid-input".
KernelFamily kernel_family_from_string(const std::string& name);
bool is_log_family(KernelFamily f);
bool is_levi_family(KernelFamily f);

enum class BranchKind { none, principal, path_continued };
std::string to_string(BranchKind k);

/// How the logarithm of a kernel is made single-valued on the domain.
///
/// principal: Re(argument) > 0 held on every certification sample.
/// path_continued: the half-plane test failed somewhere, but the anchor
/// segment [zeta, a] misses the domain, so the argument (z-a)/(z-zeta) never
/// meets the cut (-inf, 0] there; values are defined by continuation from
/// `base`, and the principal logarithm agrees with it on the base's component.
struct BranchCertificate {
    BranchKind kind = BranchKind::none;
    std::size_t samples = 0;
    double min_real_part = 0.0;  ///< smallest Re(argument) over the samples
    CVec base;
    cplx base_value{0.0, 0.0};
    std::size_t segment_checks = 0;  ///< anchor segment points verified outside the domain
};

struct KernelOptions {
    std::optional<cplx> anchor;
    double q = 2.0;
    /// Cusp exponent; defaults to the domain's alpha.
    std::optional<double> alpha;
    int N = 1;
    /// Supporting functional for convex families; computed when absent.
    std::optional<CVec> coeffs;
    /// Local patch radius for Levi families; computed from the domain when absent.
    std::optional<double> levi_epsilon;
    std::size_t certify_samples = 100000;
};

class SingularKernel {
public:
    KernelFamily family = KernelFamily::planar_pole;
    std::size_t n = 1;
    CVec zeta;
    std::optional<cplx> anchor;
    CVec coeffs;
    double q = 2.0;
    double alpha = 1.0;
    int N = 1;
    BranchCertificate branch;
    std::string domain_family;
    /// Levi families: F(., zeta) and the radius of the patch B(zeta, eps) where they are defined.
    std::shared_ptr<const LeviPolynomial> levi;
    double patch_radius = kInf;
    std::function<bool(const CVec&)> contains;

    /// The family formula at z. Errors: "outside-domain", "outside-local-patch", "branch-violation".
    cplx eval(const CVec& z) const;
    /// eval without membership or patch checks, for points that are in the
    /// domain by construction.
    cplx eval_unchecked(const CVec& z) const;
    /// log |eval(z)|, stable when |D| underflows.
    double log_modulus_unchecked(const CVec& z) const;

    /// The level-set variable D(z) with D -> 0 exactly as z -> zeta.
    cplx denominator(const CVec& z) const;
    cplx denominator_unchecked(const CVec& z) const;
    /// Power s with |eval| = modulus_factor(z) * |D|^-s (s = 0 for log families).
    double exponent() const;
    /// Smooth nonvanishing factor of |eval|: |z - a|^s for planar powers, 1 otherwise.
    double modulus_factor(const CVec& z) const;

    /// For log families, the argument whose logarithm is taken.
    cplx log_argument(const CVec& z) const;

    /// Value at zeta + e^log_t u to leading order in e^log_t, for distances
    /// far below double resolution. D is replaced by its linear part
    /// e^log_t L(u); the neglected terms are O(e^log_t) relative. Powers whose
    /// modulus exceeds the double range return an infinite value.
    cplx eval_along(const CVec& u, double log_t) const;
};

SingularKernel make_kernel(const Domain& d, KernelFamily family, const CVec& zeta, const KernelOptions& options,
                           std::uint64_t seed);

/// Default anchor zeta + t nu (nu the outward normal, t = 0.1 diameter), with
/// t halved until 1e3 points of the segment [zeta, a] are all outside the
/// domain. Throws "anchor-not-found" after 40 halvings.
cplx select_anchor(const Domain& d, cplx zeta, std::size_t segment_points = 1000);

/// Expected critical exponent, as a bracket [lo, hi] (lo == hi when exact).
struct TheoreticalThreshold {
    double lo = 0.0;
    double hi = 0.0;
    bool exact() const { return lo == hi; }
};

/// Errors: "no-theoretical-value" for pairs outside the catalog.
TheoreticalThreshold theoretical_threshold(const SingularKernel& k, const Domain& d);

struct BranchPath {
    std::vector<CVec> waypoints;
    cplx value{0.0, 0.0};
    std::size_t evaluations = 0;
};

/// Value of the planar logarithm at the end of the polyline, continued from
/// the kernel's branch base (waypoints[0] must be that base). Each segment is
/// integrated by Romberg refinement of the trapezoid rule until successive
/// estimates differ by less than 1e-12. Errors: "path-escape".
BranchPath continue_along(const SingularKernel& k, const Domain& d, const std::vector<CVec>& waypoints);

/// Continuation to z along a path of the component graph. Errors:
/// "unreachable" (base and z in different components or off the map), "path-escape".
BranchPath continue_branch(const SingularKernel& k, const Domain& d, const CVec& z, const ComponentMap& map);

/// Same kernel with its branch base moved to z0 (value: principal log at z0).
SingularKernel with_branch_base(SingularKernel k, const CVec& z0);

/// {family, zeta, anchor, q, alpha, N, coeffs, patch_radius, branch}.
json to_json(const SingularKernel& k);
/// Rebuilds a kernel on the domain from its JSON form, keeping the stored
/// branch certificate (no recertification).
SingularKernel kernel_from_json(const json& j, const Domain& d);

}  // namespace bergman

#endif

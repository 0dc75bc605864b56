#ifndef BERGMAN_GEOMETRY_HPP
#define BERGMAN_GEOMETRY_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "bergman/defining_function.hpp"
#include "bergman/sampling.hpp"
#include "bergman/types.hpp"

namespace bergman {

using nlohmann::json;

/// Bounded open set in C^n given by a membership predicate.
///
/// Catalog families (parameters in brackets, defaults after '='):
///   disk [center=0, radius=1], annulus [inner=0.5, outer=1],
///   cut-annulus [inner=0.5, outer=1, slit=0.01]  annulus minus {|Im z| <= slit, Re z > 0},
///   two-disks [gap=1]  unit disks centred at 0 and 2+gap,
///   cusp [alpha=1]  {0 < x < 1, 0 < y < x^alpha},
///   expcusp  {0 < x < 1, 0 < y < exp(-1/x^2)},
///   ball [n=2], ellipsoid [a=(1,2)], half-ball [n=2]  {|z| < 1, Re z_1 > 0},
///   box [n=1]  (0,1)^{2n}, square (box with n = 1), polydisk [n=2],
///   convex-hull [points]  planar convex polygon,
///   strictly-psh [n=2, mu=0.3, kappa=0.5]  sublevel set of the quartic test function.
struct Domain {
    std::string family;
    std::size_t n = 1;
    json parameters = json::object();
    std::vector<Interval> bounding_box;
    std::function<bool(const CVec&)> contains;
    /// Present only when membership is exactly {rho < 0}.
    DefiningFunctionPtr rho;
    /// A point of the domain from which every boundary point is reached by a
    /// ray that exits exactly once (star-shaped families only).
    CVec center;
    bool star_shaped = false;
    bool convex = false;
    bool c1_boundary = false;
    std::optional<double> exact_volume;
    /// Vertices of a convex-hull domain in counter-clockwise order.
    std::vector<cplx> vertices;
    /// Height of planar graph domains { 0 < y < h(x) } as log h, for cusps.
    std::function<double(double)> log_height;

    double box_volume() const;
    /// Diameter of the bounding box.
    double diameter() const;
};

Domain make_domain(const std::string& family, const json& parameters = json::object());

/// {family, n, parameters, bounding_box}; complex numbers as [re, im].
json to_json(const Domain& d);
Domain domain_from_json(const json& j);

/// Parses the command-line grammar `family:key=val,...`; vector parameters
/// use numbered keys (`ellipsoid:a1=1,a2=2`).
Domain parse_domain_spec(const std::string& spec);

json complex_to_json(cplx z);
cplx complex_from_json(const json& j);
json cvec_to_json(const CVec& z);
CVec cvec_from_json(const json& j);
/// "(re+imi, ...)" with full precision, for error messages.
std::string format_point(const CVec& z);
/// Parses "re,im,re,im,..." into a point of C^n.
CVec parse_cvec(const std::string& text);

struct SampleSet {
    std::vector<CVec> points;
    std::uint64_t proposals = 0;
    std::uint64_t accepted = 0;  ///< accepted proposals, including any beyond `count`
    double acceptance_rate() const {
        return proposals ? static_cast<double>(accepted) / static_cast<double>(proposals) : 0.0;
    }
};

/// Rejection sampling from the bounding box.
/// Throws "degenerate-domain" when the acceptance rate is below 1e-6 after 1e7 proposals.
SampleSet sample_uniform(const Domain& d, std::size_t count, std::uint64_t seed);

struct NearSample {
    std::vector<CVec> points;
    std::uint64_t proposals = 0;
    double volume = 0.0;     ///< volume of B(center, radius) ∩ Ω
    double volume_se = 0.0;  ///< its standard error
};

/// Uniform points of B(center, radius) ∩ Ω and the volume of that set.
/// Throws "empty-intersection" when no proposal hits after 1e7 proposals.
NearSample sample_near(const Domain& d, const CVec& center, double radius, std::size_t count,
                       std::uint64_t seed);

/// Bisection on the segment [inside, outside]; returns a point outside Ω
/// within 2^-iters of the crossing.
CVec bisect_boundary(const Domain& d, CVec inside, CVec outside, int iters = 60);

/// Boundary point where the ray from d.center in the given direction leaves Ω.
CVec ray_boundary(const Domain& d, const CVec& direction);

/// Moves a seed point onto {rho = 0} by bisection along the gradient line.
/// Requires a defining function.
CVec project_to_boundary(const Domain& d, const CVec& seed);

/// Outward unit normal at a boundary point, as a complex vector whose real
/// coordinates are the real normal. From the gradient when rho exists, else
/// estimated from the centroid of nearby domain points.
CVec outward_normal(const Domain& d, const CVec& zeta);

/// Estimated Euclidean distance from z ∈ Ω to the boundary, from ray bisection
/// along coordinate axes and random directions. An upper bound up to angular
/// resolution; callers apply a safety factor.
double boundary_distance(const Domain& d, const CVec& z, std::uint64_t seed, int directions = 64);

/// Checks that zeta ∉ Ω and that Ω has points within 1e-6 of zeta.
/// Throws "not-boundary-point" otherwise.
void validate_boundary_point(const Domain& d, const CVec& zeta, std::uint64_t seed);

struct SupportingFunctional {
    CVec c;
    double min_margin = 0.0;  ///< min over verification samples of Re sum c_j (z_j - zeta_j)
    std::size_t samples = 0;
    std::string recipe;  ///< gradient | face | margin-maximizer
};

/// Complex covector c with Re sum c_j (z_j - zeta_j) > 0 on Ω, verified on
/// `verify` uniform samples. Errors: "unsupported-family", "unsupported-boundary-point",
/// "not-supporting".
SupportingFunctional supporting_functional(const Domain& d, const CVec& zeta, std::uint64_t seed,
                                           std::size_t verify = 100000);

}  // namespace bergman

#endif

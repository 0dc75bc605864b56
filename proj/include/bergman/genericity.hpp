#ifndef BERGMAN_GENERICITY_HPP
#define BERGMAN_GENERICITY_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bergman/components.hpp"
#include "bergman/geometry.hpp"
#include "bergman/kernels.hpp"
#include "bergman/quadrature.hpp"

namespace bergman {

/// Growth of |f + phi/k| along a probe.
///
/// bound[i] is the sublinearity lower bound max_{l<=i} |phi(z_l)|/k - sup|f|,
/// with sup|f| taken over the whole probe; running_max[i] >= bound[i] must hold
/// at every point.
struct DensifyResult {
    double k = 1.0;
    std::vector<double> distance;     ///< the probe's distances to its target
    std::vector<double> value;        ///< |f + phi/k| at z_i
    std::vector<double> running_max;
    std::vector<double> bound;
    double sup_f = 0.0;
    double achieved_max = 0.0;
    bool bound_holds = true;
    bool monotone = true;
    /// First probe index whose running max exceeds the requested M (-1 if none).
    long crossing = -1;
};

/// Errors: "invalid-input" for k <= 0 or an empty probe; "probe-exhausted"
/// (EstimateError, partial = the result) when M is given and never exceeded.
DensifyResult densify(const HoloFunction& f, const HoloFunction& phi, double k, const ApproachSequence& probe,
                      std::optional<double> M = std::nullopt);

json to_json(const DensifyResult& r);

struct ComponentVerdict {
    int label = 0;
    std::size_t size = 0;
    bool tiny = false;              ///< fewer than 10 nodes; verdicts are unreliable
    double max_abs = 0.0;
    CVec argmax;                    ///< empty when the max came from an asymptotic evaluation
    double argmax_log_distance = 0.0;  ///< log of the distance to the target of that evaluation
    std::size_t boundary_targets = 0;
    std::vector<bool> exceeds;      ///< per entry of the M grid
    bool unbounded() const;
};

struct UnboundednessReport {
    CVec w;
    double delta = 0.0;
    std::vector<double> M_grid;
    std::vector<ComponentVerdict> components;  ///< indexed by label
};

/// Labels of the components with a node within two grid steps of z.
std::vector<int> components_near(const ComponentMap& map, const CVec& z);

struct UnboundednessOptions {
    /// Boundary targets per component beyond which an evenly strided subset is used.
    std::size_t max_targets = 4096;
    /// Halvings towards bisected boundary points.
    int halvings = 50;
    /// Exact points (besides the singular points of f) approached with asymptotic evaluation.
    std::vector<CVec> exact_targets;
    /// Most negative log distance reached along exact approaches.
    double min_log_distance = -1e12;
};

/// Per-component maximum of |f| over the nodes of the map, over segments
/// halving towards the boundary points found next to near-boundary nodes, and
/// over asymptotic approaches to the singular points of f and the exact targets
/// that lie in the closure of the component.
UnboundednessReport unboundedness_verdict(const HoloFunction& f, const Domain& d, const ComponentMap& map,
                                          const std::vector<double>& M_grid, const UnboundednessOptions& options = {});

json to_json(const UnboundednessReport& r);

struct NetDiagnostic {
    CVec w;
    double max_abs = 0.0;
    bool passed = false;
    double max_without = 0.0;  ///< same verdict with term j removed
    bool necessary = false;    ///< the verdict fails without term j
};

struct WitnessSeries {
    std::string domain_family;
    std::string kernel_family;
    double q = kInf;
    int J = 0;
    double p_J = 0.0;
    double M = 1e4;
    double delta = 0.0;
    std::uint64_t seed = 0;
    int attempts = 0;
    std::vector<CVec> net;
    std::vector<double> norms;    ///< ||f_{w_j}||_{p_J} estimates
    std::vector<double> epsilon;  ///< 2^-j / (1 + norms[j])
    std::vector<cplx> phases;
    std::vector<double> partial_sums;  ///< sum_{i<=j} epsilon_i norms[i]
    HoloFunction sum;
    std::vector<NetDiagnostic> diagnostics;

    bool all_passed() const;
};

struct WitnessOptions {
    std::optional<KernelFamily> family;
    double M = 1e4;
    /// Radius of the balls B(w_j, delta); 0 picks diameter / 10.
    double delta = 0.0;
    std::uint64_t norm_budget = 200000;
    int attempts = 3;
};

/// Boundary net w_1..w_J (golden-angle rays from the domain's centre), a
/// log-family kernel at each, coefficients epsilon_j, and an unboundedness
/// verdict at every net point. Phases start at +1 and are redrawn when a
/// verdict fails. Errors: "witness-degraded" (EstimateError, partial = the
/// last attempt) when failures persist, "invalid-input".
WitnessSeries assemble_witness(const Domain& d, int J, double q, std::uint64_t seed, const WitnessOptions& options = {});

json to_json(const WitnessSeries& w);

struct SqVerdict {
    Verdict verdict = Verdict::inconclusive;
    std::string reason;  ///< "estimated" or "singularity-outside-ball"
    std::optional<ThresholdVerdict> threshold;
};

/// Whether the integral over B(w, eps) ∩ Ω of |k|^q diverges, from a shell
/// profile restricted to the ball. Errors: as estimate_threshold.
SqVerdict sq_membership(const SingularKernel& k, const Domain& d, const CVec& w, double eps, double q,
                        std::uint64_t budget, std::uint64_t seed);

json to_json(const SqVerdict& v);

}  // namespace bergman

#endif

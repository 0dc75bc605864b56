#ifndef BERGMAN_LEVI_HPP
#define BERGMAN_LEVI_HPP

#include <cstdint>
#include <vector>

#include "bergman/defining_function.hpp"
#include "bergman/geometry.hpp"
#include "bergman/linalg.hpp"
#include "bergman/regression.hpp"

namespace bergman {

/// F(z, zeta) = -[2 sum g_j (z_j - zeta_j) + sum h_jk (z_j - zeta_j)(z_k - zeta_k)]
/// with g = d rho / d zeta and h the holomorphic Hessian at zeta.
class LeviPolynomial {
public:
    LeviPolynomial() = default;
    LeviPolynomial(const DefiningFunction& df, CVec zeta);
    cplx operator()(const CVec& z) const;
    const CVec& zeta() const { return zeta_; }
    /// Coefficients a_j of the linear part, F = sum a_j v_j + O(|v|^2).
    CVec linear_coefficients() const;

private:
    CVec zeta_;
    CVec grad_;
    CMatrix hol_;
};

cplx levi_polynomial(const DefiningFunction& df, const CVec& zeta, const CVec& z);

struct LeviData {
    double beta = 0.0;
    double epsilon = 0.0;
    double lambda_min = 0.0;           ///< smallest Hessian eigenvalue over the boundary samples
    double rayleigh_min = 0.0;         ///< smallest Rayleigh quotient over random directions
    int halvings = 0;                  ///< epsilon halvings needed by the coercivity check
    std::vector<CVec> boundary_samples;
};

/// beta = (1/3) min over boundary samples of the Levi form on unit vectors,
/// taking the smaller of the exact eigenvalue and 50 random Rayleigh
/// quotients per sample. epsilon starts at 0.1 x diameter and is halved (at
/// most 10 times) until a 10^4-pair coercivity check has no violations.
/// Throws "not-strictly-psh" with the witness when lambda_min <= 0.
LeviData compute_beta(const DefiningFunction& df, const Domain& d, std::size_t n_boundary, std::uint64_t seed);

struct CoercivityReport {
    double beta = 0.0;
    double epsilon = 0.0;
    std::size_t pairs = 0;
    std::size_t violations = 0;
    double min_margin = 0.0;
    double slack = 1e-9;
};

/// Counts pairs (zeta, z), zeta on the boundary and |z - zeta| < epsilon, with
/// Re F(z, zeta) < rho(zeta) - rho(z) + beta |zeta - z|^2 - slack.
CoercivityReport verify_coercivity(const DefiningFunction& df, const Domain& d, double beta, double epsilon,
                                   std::size_t n_pairs, std::uint64_t seed, double slack = 1e-9);

/// Local chart t = (-rho, Im F, affine completion) around a boundary point.
struct LeviChart {
    CVec zeta;
    RMatrix jacobian;          ///< rows dt_i at zeta in real coordinates
    double condition = 0.0;    ///< singular value ratio of the Jacobian
    double det_abs = 0.0;
    double c1 = 0.0, c2 = 0.0; ///< sampled bounds of |t|^2 / |z - zeta|^2
    double linearization = 0.0;///< sampled max of |t(z) - J (z - zeta)| / |z - zeta|^2

    RVec operator()(const CVec& z) const;

    DefiningFunctionPtr df;
    LeviPolynomial poly;
    std::vector<RVec> completion;
};

/// Errors: "degenerate-gradient", "ill-conditioned-chart".
LeviChart levi_coordinates(DefiningFunctionPtr df, const CVec& zeta, std::uint64_t seed = 0,
                           std::size_t samples = 2000, double radius = 0.1);

struct ShellSeries {
    std::vector<int> k;
    std::vector<double> value, stderr_value;
};

struct ModelIntegralResult {
    double p = 0.0;
    std::size_t n = 0;
    double estimate = 0.0;   ///< bulk + sampled shells (+ geometric tail when finite)
    double stderr_estimate = 0.0;
    ShellSeries shells;
    SlopeFit fit;            ///< log2 shell contribution against k
    double expected_slope = 0.0;
    Verdict verdict = Verdict::inconclusive;
};

/// integral over {t_1 > 0, |t| < R} of (t_1 + |t_2| + t_3^2 + ... + t_{2n}^2)^-p dt,
/// with t_1 integrated in closed form and (t_2, ..., t_{2n}) sampled on
/// anisotropic dyadic shells |t_2| ~ 2^-k, |t''| ~ 2^-k/2.
ModelIntegralResult model_integral(double p, std::size_t n, double R, std::uint64_t budget, std::uint64_t seed,
                                   int k_min = 2, int k_max = 14);

struct DivergenceIntegralResult {
    std::size_t n = 0;
    double exponent = 0.0;
    ShellSeries shells;
    double shell_exact = 0.0;   ///< exact per-shell value when exponent = n
    double max_rel_deviation = 0.0;
    SlopeFit fit;
    Verdict verdict = Verdict::inconclusive;
};

/// Shell contributions of the half-space integral of |t|^(-2 exponent) over
/// half-shells 2^-k-1 <= |t| < 2^-k, k = k_min..k_min+shells-1. Constant
/// contributions (slope within the margin) are reported as divergent.
DivergenceIntegralResult divergence_integral_2n(std::size_t n, std::uint64_t budget, std::uint64_t seed,
                                                double exponent = -1.0, int k_min = 3, int shells = 8);

}  // namespace bergman

#endif

#ifndef BERGMAN_SAMPLING_HPP
#define BERGMAN_SAMPLING_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "bergman/rng.hpp"
#include "bergman/types.hpp"

namespace bergman {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    double width() const { return hi - lo; }
};

/// Proposal distribution over a region of C^n with importance weights.
///
/// For any integrable g supported in the proposal region,
///   integral g dv = exp(log_volume()) * E[ weight * g(z) ].
/// Uniform samplers return weight 1.
class RegionSampler {
public:
    virtual ~RegionSampler() = default;
    virtual double log_volume() const = 0;
    virtual CVec draw(Stream& rng, double& weight) const = 0;
    /// True when every draw lies in the target domain by construction, so no
    /// membership test is needed (points may sit at y = 0 after underflow).
    virtual bool exact_for_domain() const { return false; }
};

using RegionSamplerPtr = std::unique_ptr<RegionSampler>;

/// Uniform over an axis-aligned box given as 2n real intervals.
class BoxSampler final : public RegionSampler {
public:
    explicit BoxSampler(std::vector<Interval> box);
    double log_volume() const override { return log_volume_; }
    CVec draw(Stream& rng, double& weight) const override;

private:
    std::vector<Interval> box_;
    double log_volume_;
};

/// Uniform over the Euclidean ball B(center, radius) in C^n.
class BallSampler final : public RegionSampler {
public:
    BallSampler(CVec center, double radius);
    double log_volume() const override { return log_volume_; }
    CVec draw(Stream& rng, double& weight) const override;

private:
    CVec center_;
    double radius_;
    double log_volume_;
};

/// Uniform over the cylinder { zeta + t e + v : lo <= |t| < hi, v in e^perp, |v| < r_perp }
/// where e = conj(c)/|c|, so that |sum c_j (z_j - zeta_j)| = |c| |t|.
/// Used for level sets of affine denominators.
class AffineSlabSampler final : public RegionSampler {
public:
    AffineSlabSampler(CVec zeta, const CVec& coeffs, double level_lo, double level_hi, double r_perp);
    double log_volume() const override { return log_volume_; }
    CVec draw(Stream& rng, double& weight) const override;

private:
    CVec zeta_;
    CVec e_;
    std::vector<CVec> perp_;
    double t_lo_, t_hi_;
    double r_perp_;
    double log_volume_;
};

/// Region under a planar graph { x0 <= x < x1, 0 < y < h(x) } with log h given.
/// x is drawn from a piecewise-exponential fit to h on a fine mesh and y = u h(x),
/// so weights stay O(1) even when h spans hundreds of orders of magnitude.
class GraphSlabSampler final : public RegionSampler {
public:
    GraphSlabSampler(std::function<double(double)> log_height, double x0, double x1, std::size_t segments = 256);
    double log_volume() const override { return log_norm_; }
    CVec draw(Stream& rng, double& weight) const override;
    bool exact_for_domain() const override { return true; }

private:
    std::function<double(double)> log_height_;
    std::vector<double> nodes_, log_h_, slope_, log_mass_, cdf_;
    double log_norm_ = 0.0;
};

/// Estimates of integrals over (proposal region) ∩ {accept}.
struct RegionIntegral {
    double log_scale = 0.0;
    std::vector<Accumulator> acc;
    std::uint64_t proposals = 0;
    std::uint64_t hits = 0;

    double value(std::size_t i) const { return std::exp(log_scale) * acc[i].mean(); }
    double stderr_value(std::size_t i) const { return std::exp(log_scale) * acc[i].stderr_mean(); }
    /// Natural log of the value; -inf when no hits contributed.
    double log_value(std::size_t i) const;
    /// Standard error of the value relative to the value.
    double relative_stderr(std::size_t i) const;
};

using Integrand = std::function<void(const CVec&, std::span<double>)>;

/// Monte Carlo integration of `components` integrands over the sampler's region
/// restricted to `accept`. The budget is split into fixed chunks with one
/// random stream per chunk, so the result is independent of thread count.
RegionIntegral integrate_region(const RegionSampler& sampler, const std::function<bool(const CVec&)>& accept,
                                std::size_t components, const Integrand& integrand, std::uint64_t budget,
                                std::uint64_t seed);

inline constexpr std::uint64_t kChunkSize = 8192;

}  // namespace bergman

#endif

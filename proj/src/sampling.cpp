#include "bergman/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bergman {

namespace {

double log_sum_exp(const std::vector<double>& v) {
    const double m = *std::max_element(v.begin(), v.end());
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

// log of integral_0^len exp(b s) ds.
double log_segment_mass(double b, double len) {
    const double bl = b * len;
    if (std::abs(bl) < 1e-12) return std::log(len);
    if (b > 0) return bl + std::log(-std::expm1(-bl) / b);
    return std::log(std::expm1(bl) / b);
}

}  // namespace

BoxSampler::BoxSampler(std::vector<Interval> box) : box_(std::move(box)) {
    log_volume_ = 0.0;
    for (const auto& iv : box_) log_volume_ += std::log(iv.width());
}

CVec BoxSampler::draw(Stream& rng, double& weight) const {
    const std::size_t n = box_.size() / 2;
    CVec z(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double x = rng.uniform(box_[j].lo, box_[j].hi);
        const double y = rng.uniform(box_[j + n].lo, box_[j + n].hi);
        z[j] = {x, y};
    }
    weight = 1.0;
    return z;
}

BallSampler::BallSampler(CVec center, double radius)
    : center_(std::move(center)), radius_(radius),
      log_volume_(std::log(ball_volume(2 * center_.size(), radius))) {}

CVec BallSampler::draw(Stream& rng, double& weight) const {
    CVec u = rng.unit_ball(center_.size());
    for (std::size_t j = 0; j < u.size(); ++j) u[j] = center_[j] + radius_ * u[j];
    weight = 1.0;
    return u;
}

AffineSlabSampler::AffineSlabSampler(CVec zeta, const CVec& coeffs, double level_lo, double level_hi,
                                     double r_perp)
    : zeta_(std::move(zeta)), r_perp_(r_perp) {
    const std::size_t n = zeta_.size();
    const double cn = norm(coeffs);
    if (cn == 0.0) throw Error("degenerate-denominator", "affine denominator has zero coefficients");
    e_.resize(n);
    for (std::size_t j = 0; j < n; ++j) e_[j] = std::conj(coeffs[j]) / cn;
    t_lo_ = level_lo / cn;
    t_hi_ = level_hi / cn;
    std::vector<CVec> basis{e_};
    for (std::size_t k = 0; k < n && perp_.size() + 1 < n; ++k) {
        CVec u(n, 0.0);
        u[k] = 1.0;
        for (const auto& b : basis) {
            const cplx proj = inner(u, b);
            for (std::size_t j = 0; j < n; ++j) u[j] -= proj * b[j];
        }
        const double un = norm(u);
        if (un < 1e-8) continue;
        for (auto& c : u) c /= un;
        basis.push_back(u);
        perp_.push_back(u);
    }
    log_volume_ = std::log(std::numbers::pi * (t_hi_ * t_hi_ - t_lo_ * t_lo_));
    if (n > 1) log_volume_ += std::log(ball_volume(2 * (n - 1), r_perp_));
}

CVec AffineSlabSampler::draw(Stream& rng, double& weight) const {
    const std::size_t n = zeta_.size();
    const double r = std::sqrt(rng.uniform(t_lo_ * t_lo_, t_hi_ * t_hi_));
    const cplx t = std::polar(r, 2.0 * std::numbers::pi * rng.uniform());
    CVec z = zeta_;
    for (std::size_t j = 0; j < n; ++j) z[j] += t * e_[j];
    if (n > 1) {
        const CVec v = rng.unit_ball(n - 1);
        for (std::size_t i = 0; i < perp_.size(); ++i)
            for (std::size_t j = 0; j < n; ++j) z[j] += r_perp_ * v[i] * perp_[i][j];
    }
    weight = 1.0;
    return z;
}

GraphSlabSampler::GraphSlabSampler(std::function<double(double)> log_height, double x0, double x1,
                                   std::size_t segments)
    : log_height_(std::move(log_height)) {
    nodes_.resize(segments + 1);
    log_h_.resize(segments + 1);
    for (std::size_t i = 0; i <= segments; ++i) {
        nodes_[i] = x0 + (x1 - x0) * static_cast<double>(i) / static_cast<double>(segments);
        log_h_[i] = log_height_(nodes_[i]);
    }
    slope_.resize(segments);
    log_mass_.resize(segments);
    for (std::size_t i = 0; i < segments; ++i) {
        const double len = nodes_[i + 1] - nodes_[i];
        slope_[i] = (log_h_[i + 1] - log_h_[i]) / len;
        log_mass_[i] = log_h_[i] + log_segment_mass(slope_[i], len);
    }
    log_norm_ = log_sum_exp(log_mass_);
    cdf_.resize(segments);
    double acc = 0.0;
    for (std::size_t i = 0; i < segments; ++i) {
        acc += std::exp(log_mass_[i] - log_norm_);
        cdf_[i] = acc;
    }
    cdf_.back() = 1.0;
}

CVec GraphSlabSampler::draw(Stream& rng, double& weight) const {
    const double u = rng.uniform();
    const std::size_t i = static_cast<std::size_t>(std::lower_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin());
    const double len = nodes_[i + 1] - nodes_[i];
    const double b = slope_[i];
    const double v = rng.uniform();
    double s;
    if (std::abs(b * len) < 1e-12) {
        s = v * len;
    } else if (b > 0) {
        s = len + std::log(v + (1.0 - v) * std::exp(-b * len)) / b;
    } else {
        s = std::log1p(v * std::expm1(b * len)) / b;
    }
    s = std::clamp(s, 0.0, len);
    const double x = nodes_[i] + s;
    const double log_q = log_h_[i] + b * s;
    const double log_h = log_height_(x);
    weight = std::exp(log_h - log_q);
    const double y = std::exp(log_h) * rng.uniform();
    return CVec{cplx(x, y)};
}

double RegionIntegral::log_value(std::size_t i) const {
    const double m = acc[i].mean();
    if (m <= 0.0) return -std::numeric_limits<double>::infinity();
    return log_scale + std::log(m);
}

double RegionIntegral::relative_stderr(std::size_t i) const {
    const double m = acc[i].mean();
    if (m <= 0.0) return std::numeric_limits<double>::infinity();
    return acc[i].stderr_mean() / m;
}

RegionIntegral integrate_region(const RegionSampler& sampler, const std::function<bool(const CVec&)>& accept,
                                std::size_t components, const Integrand& integrand, std::uint64_t budget,
                                std::uint64_t seed) {
    const std::size_t chunks = static_cast<std::size_t>((budget + kChunkSize - 1) / kChunkSize);
    struct ChunkResult {
        std::vector<Accumulator> acc;
        std::uint64_t proposals = 0, hits = 0;
    };
    std::vector<ChunkResult> results(chunks);
    for_each_chunk(chunks, [&](std::size_t c) {
        Stream rng(seed, c);
        ChunkResult& res = results[c];
        res.acc.assign(components, {});
        std::vector<double> values(components);
        const std::uint64_t todo = std::min<std::uint64_t>(kChunkSize, budget - c * kChunkSize);
        for (std::uint64_t i = 0; i < todo; ++i) {
            double w = 1.0;
            const CVec z = sampler.draw(rng, w);
            ++res.proposals;
            if (w <= 0.0 || !accept(z)) {
                for (auto& a : res.acc) a.add_zeros(1);
                continue;
            }
            ++res.hits;
            std::fill(values.begin(), values.end(), 0.0);
            integrand(z, values);
            for (std::size_t k = 0; k < components; ++k) res.acc[k].add(w * values[k]);
        }
    });
    RegionIntegral out;
    out.log_scale = sampler.log_volume();
    out.acc.assign(components, {});
    for (const auto& r : results) {
        for (std::size_t k = 0; k < components; ++k) out.acc[k].merge(r.acc[k]);
        out.proposals += r.proposals;
        out.hits += r.hits;
    }
    return out;
}

}  // namespace bergman

#ifndef BERGMAN_RNG_HPP
#define BERGMAN_RNG_HPP

#include <cstdint>
#include <functional>
#include <random>

#include "bergman/types.hpp"

namespace bergman {

/// Independent random stream identified by (seed, stream id).
///
/// Work is always split into fixed-size chunks whose stream id is the chunk
/// index, so results do not depend on how many worker threads execute them.
class Stream {
public:
    Stream(std::uint64_t seed, std::uint64_t stream_id);

    double uniform() { return unit_(engine_); }
    double uniform(double lo, double hi) { return lo + (hi - lo) * unit_(engine_); }
    double normal() { return gauss_(engine_); }
    std::uint64_t bits() { return engine_(); }

    /// Uniform point in the complex unit ball of C^n (real dimension 2n).
    CVec unit_ball(std::size_t n);
    /// Uniform point on the unit sphere of C^n.
    CVec unit_sphere(std::size_t n);
    /// Uniform point in the complex disk of radius r.
    cplx disk(double r);

private:
    std::mt19937_64 engine_;
    std::uniform_real_distribution<double> unit_{0.0, 1.0};
    std::normal_distribution<double> gauss_{0.0, 1.0};
};

/// Mixes a parent seed with a tag so nested operations get disjoint streams.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);

/// Running (sum, sum of squares, count) triple. Merging is associative.
struct Accumulator {
    double sum = 0.0;
    double sum_sq = 0.0;
    std::uint64_t count = 0;

    void add(double x) {
        sum += x;
        sum_sq += x * x;
        ++count;
    }
    void add_zeros(std::uint64_t k) { count += k; }
    void merge(const Accumulator& o) {
        sum += o.sum;
        sum_sq += o.sum_sq;
        count += o.count;
    }
    double mean() const { return count ? sum / static_cast<double>(count) : 0.0; }
    /// Standard error of the mean.
    double stderr_mean() const;
};

/// Worker pool size used by chunked loops (default: hardware concurrency).
void set_thread_count(unsigned n);
unsigned thread_count();

/// Runs body(i) for i in [0, count). Bodies must only write to slot i of
/// caller-owned storage; the merge order is the caller's.
void for_each_chunk(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace bergman

#endif

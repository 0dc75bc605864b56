#include "bergman/rng.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace bergman {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

unsigned& configured_threads() {
    static unsigned n = std::max(1u, std::thread::hardware_concurrency());
    return n;
}

}  // namespace

Stream::Stream(std::uint64_t seed, std::uint64_t stream_id) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream_id), static_cast<std::uint32_t>(stream_id >> 32),
                      0x6265726dU};
    engine_.seed(seq);
}

CVec Stream::unit_sphere(std::size_t n) {
    CVec z(n);
    double s = 0.0;
    do {
        s = 0.0;
        for (auto& c : z) {
            c = {normal(), normal()};
            s += std::norm(c);
        }
    } while (s == 0.0);
    const double inv = 1.0 / std::sqrt(s);
    for (auto& c : z) c *= inv;
    return z;
}

CVec Stream::unit_ball(std::size_t n) {
    CVec z = unit_sphere(n);
    const double r = std::pow(uniform(), 1.0 / static_cast<double>(2 * n));
    for (auto& c : z) c *= r;
    return z;
}

cplx Stream::disk(double r) {
    const double rad = r * std::sqrt(uniform());
    const double th = 2.0 * std::numbers::pi * uniform();
    return std::polar(rad, th);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
    return splitmix(splitmix(seed) ^ (tag * 0xd1342543de82ef95ULL + 1));
}

double Accumulator::stderr_mean() const {
    if (count < 2) return 0.0;
    const double n = static_cast<double>(count);
    const double m = sum / n;
    const double var = std::max(0.0, (sum_sq / n - m * m) * n / (n - 1.0));
    return std::sqrt(var / n);
}

void set_thread_count(unsigned n) { configured_threads() = std::max(1u, n); }

unsigned thread_count() { return configured_threads(); }

void for_each_chunk(std::size_t count, const std::function<void(std::size_t)>& body) {
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(thread_count(), count));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace bergman

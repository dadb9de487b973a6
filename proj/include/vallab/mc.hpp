#pragma once

// Monte Carlo plumbing: budget configuration, estimates carrying their
// uncertainty, and a deterministic chunked mean reducer.
//
// Work is cut into fixed-size chunks; chunk i draws from base.split(i)
// and partial sums are combined in chunk order, so the result is
// bit-identical for any thread count.

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "vallab/random.hpp"

namespace vallab {

struct MCConfig {
    std::uint64_t samples = 100000;
    int threads = 0;                     // 0 = hardware concurrency
    double membership_tol = 1e-9;        // convex feasibility tolerance
    std::uint64_t inner_samples = 4000;  // budget for nested estimates
};

struct MCEstimate {
    double value = 0.0;
    double stderror = 0.0;
    std::uint64_t samples = 0;
    std::uint64_t seed = 0;

    MCEstimate operator*(double c) const { return {value * c, stderror * std::abs(c), samples, seed}; }
    MCEstimate operator+(const MCEstimate& o) const {
        return {value + o.value, std::hypot(stderror, o.stderror),
                samples + o.samples, seed};
    }
    MCEstimate operator+(double c) const { return {value + c, stderror, samples, seed}; }
    MCEstimate operator-(const MCEstimate& o) const {
        return {value - o.value, std::hypot(stderror, o.stderror),
                samples + o.samples, seed};
    }
};

namespace detail {
constexpr std::uint64_t kChunk = 65536;
}

// Mean and standard error of sample_fn over n draws. sample_fn is called
// once per draw with a stream owned by the draw's chunk.
template <class F>
MCEstimate mc_mean(std::uint64_t n, const RandomStream& base, int threads, F&& sample_fn) {
    if (n == 0) throw std::invalid_argument("mc_mean: sample count must be positive");
    const std::uint64_t n_chunks = (n + detail::kChunk - 1) / detail::kChunk;
    std::vector<double> sums(n_chunks, 0.0), sqs(n_chunks, 0.0);

    auto run_chunk = [&](std::uint64_t c) {
        RandomStream s = base.split(c);
        const std::uint64_t count =
            (c + 1 == n_chunks) ? n - c * detail::kChunk : detail::kChunk;
        double acc = 0.0, acc2 = 0.0;
        for (std::uint64_t i = 0; i < count; ++i) {
            const double v = sample_fn(s);
            acc += v;
            acc2 += v * v;
        }
        sums[c] = acc;
        sqs[c] = acc2;
    };

    int t = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
    if (t < 1) t = 1;
    if (t == 1 || n_chunks == 1) {
        for (std::uint64_t c = 0; c < n_chunks; ++c) run_chunk(c);
    } else {
        std::vector<std::thread> workers;
        workers.reserve(t);
        for (int w = 0; w < t; ++w)
            workers.emplace_back([&, w] {
                for (std::uint64_t c = w; c < n_chunks; c += t) run_chunk(c);
            });
        for (auto& th : workers) th.join();
    }

    double sum = 0.0, sq = 0.0;
    for (std::uint64_t c = 0; c < n_chunks; ++c) {
        sum += sums[c];
        sq += sqs[c];
    }
    const double mean = sum / static_cast<double>(n);
    double var = sq / static_cast<double>(n) - mean * mean;
    if (var < 0) var = 0;
    return {mean, std::sqrt(var / static_cast<double>(n)), n, base.seed()};
}

}  // namespace vallab

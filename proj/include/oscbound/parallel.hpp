#pragma once

#include <atomic>
#include <cstdint>
#include <thread>
#include <vector>

namespace oscbound {

/// Deterministic parallel map over index blocks. The block layout is fixed
/// (kBlock indices each, regardless of thread count), every block is reduced
/// sequentially, and block results are combined in block order afterwards —
/// so the result is bit-identical for any worker count.
///
/// body(block_index, begin, end) -> Partial; merge(acc, Partial) in order.
template <typename Partial, typename Body, typename Merge>
void blocked_reduce(std::uint64_t count, int threads, Body body, Merge merge,
                    std::uint64_t block_size = 1 << 14) {
    if (count == 0) return;
    const std::uint64_t nblocks = (count + block_size - 1) / block_size;
    std::vector<Partial> partials(nblocks);
    if (threads < 2 || nblocks == 1) {
        for (std::uint64_t b = 0; b < nblocks; ++b)
            partials[b] = body(b, b * block_size, std::min(count, (b + 1) * block_size));
    } else {
        std::atomic<std::uint64_t> next{0};
        auto worker = [&] {
            for (;;) {
                const std::uint64_t b = next.fetch_add(1);
                if (b >= nblocks) return;
                partials[b] = body(b, b * block_size, std::min(count, (b + 1) * block_size));
            }
        };
        std::vector<std::thread> pool;
        const int nthreads = std::min<std::uint64_t>(threads, nblocks);
        pool.reserve(nthreads);
        for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (std::uint64_t b = 0; b < nblocks; ++b) merge(partials[b]);
}

/// Order-independent compensated accumulator for per-block float sums.
struct KahanSum {
    double sum = 0.0;
    double c = 0.0;

    void add(double v) {
        const double y = v - c;
        const double t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
};

} // namespace oscbound

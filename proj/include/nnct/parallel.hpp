#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace nnct {

/// Splits [0, count) into contiguous blocks, one per worker, runs
/// `body(index, accumulator)` for every index and merges the per-worker
/// accumulators in worker order with `merge(into, from)`. Results are
/// independent of the worker count whenever merge is associative and
/// commutative over the accumulated values (integer counts are).
template <class Acc, class Body, class Merge>
Acc parallel_reduce(std::size_t count, std::size_t workers, const Acc& init, Body body, Merge merge)
{
    workers = std::max<std::size_t>(1, std::min(workers, count));
    if (workers == 1) {
        Acc acc = init;
        for (std::size_t i = 0; i < count; ++i) {
            body(i, acc);
        }
        return acc;
    }
    std::vector<Acc> partial(workers, init);
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        threads.emplace_back([&, w] {
            const std::size_t begin = count * w / workers;
            const std::size_t end = count * (w + 1) / workers;
            try {
                for (std::size_t i = begin; i < end; ++i) {
                    body(i, partial[w]);
                }
            }
            catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : threads) {
        t.join();
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    Acc acc = init;
    for (const Acc& p : partial) {
        merge(acc, p);
    }
    return acc;
}

inline std::size_t default_workers() noexcept
{
    return std::max(1u, std::thread::hardware_concurrency());
}

} // namespace nnct

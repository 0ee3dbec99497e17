#pragma once

#include <algorithm>
#include <chrono>
#include <exception>
#include <thread>
#include <vector>

namespace amc {

struct IndexRange {
    long long begin = 0;
    long long end = 0;
    long long size() const noexcept { return end - begin; }
};

/// Splits [0, count) into `workers` contiguous ranges of count/workers items,
/// the remainder going to the last range.
inline std::vector<IndexRange> split_range(long long count, int workers) {
    workers = std::max(1, workers);
    std::vector<IndexRange> out(static_cast<std::size_t>(workers));
    const long long base = count / workers;
    long long at = 0;
    for (int w = 0; w < workers; ++w) {
        const long long n = (w == workers - 1) ? count - at : base;
        out[static_cast<std::size_t>(w)] = {at, at + n};
        at += n;
    }
    return out;
}

/// Runs fn(worker, range) for each range on its own thread and rethrows the
/// first worker exception after all threads have joined.
template <class Fn>
void run_workers(const std::vector<IndexRange>& ranges, Fn&& fn) {
    if (ranges.size() == 1) {
        fn(0, ranges.front());
        return;
    }
    std::vector<std::exception_ptr> errors(ranges.size());
    {
        std::vector<std::jthread> threads;
        threads.reserve(ranges.size());
        for (std::size_t w = 0; w < ranges.size(); ++w) {
            threads.emplace_back([&, w] {
                try {
                    fn(static_cast<int>(w), ranges[w]);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
    }
    void restart() { start_ = std::chrono::steady_clock::now(); }

private:
    std::chrono::steady_clock::time_point start_;
};

}  // namespace amc

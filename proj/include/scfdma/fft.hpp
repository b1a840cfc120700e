// fft.hpp - thin FFTW wrapper
//
// Plans are created once per (size, direction) with FFTW_ESTIMATE |
// FFTW_UNALIGNED and cached for the process lifetime. Planning is
// serialized behind a mutex; execution uses the new-array interface, which
// FFTW documents as thread-safe.

#pragma once

#include <fftw3.h>

#include <complex>
#include <map>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

#include "scfdma/types.hpp"

namespace scfdma::fft {

namespace detail {

class PlanCache {
public:
    static PlanCache& instance() {
        static PlanCache cache;
        return cache;
    }

    fftw_plan get(int n, int sign) {
        std::lock_guard lock(mutex_);
        auto key = std::make_pair(n, sign);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;
        std::vector<cd> in(static_cast<std::size_t>(n)), out(static_cast<std::size_t>(n));
        fftw_plan p = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(in.data()),
                                       reinterpret_cast<fftw_complex*>(out.data()), sign,
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
        plans_.emplace(key, p);
        return p;
    }

    PlanCache(const PlanCache&) = delete;
    PlanCache& operator=(const PlanCache&) = delete;

private:
    PlanCache() = default;
    ~PlanCache() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    std::mutex mutex_;
    std::map<std::pair<int, int>, fftw_plan> plans_;
};

inline std::vector<cd> execute(std::span<const cd> in, int sign) {
    const int n = static_cast<int>(in.size());
    std::vector<cd> src(in.begin(), in.end());
    std::vector<cd> out(in.size());
    if (n == 0) return out;
    fftw_plan p = PlanCache::instance().get(n, sign);
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(src.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
    return out;
}

}  // namespace detail

/// Unnormalized forward DFT: X[k] = sum_n x[n] e^{-j 2 pi k n / N}.
inline std::vector<cd> forward(std::span<const cd> x) { return detail::execute(x, FFTW_FORWARD); }

/// Unnormalized inverse DFT: x[n] = sum_k X[k] e^{+j 2 pi k n / N}.
inline std::vector<cd> backward(std::span<const cd> x) {
    return detail::execute(x, FFTW_BACKWARD);
}

}  // namespace scfdma::fft

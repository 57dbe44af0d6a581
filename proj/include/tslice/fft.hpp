#pragma once

#include "core.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

namespace tslice::fft {

// Unnormalized transforms. sign = -1 is sum_j f_j e^{-2 pi i jk/n}.
// Plans are created once per shape (planner calls are serialized), then
// executed on caller memory through the new-array interface.
class PlanCache {
public:
    static PlanCache& instance()
    {
        static PlanCache c;
        return c;
    }

    fftw_plan get(int n, int howmany, int stride, int dist, int sign)
    {
        auto key = std::make_tuple(n, howmany, stride, dist, sign);
        std::lock_guard<std::mutex> lock(mu_);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;
        // scratch only used for planning
        std::size_t len = static_cast<std::size_t>(stride) * (n - 1) + static_cast<std::size_t>(dist) * (howmany - 1) + 1;
        auto* buf = fftw_alloc_complex(len);
        int nn[1] = {n};
        fftw_plan p = fftw_plan_many_dft(1, nn, howmany, buf, nullptr, stride, dist, buf, nullptr, stride, dist,
                                         sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(buf);
        plans_.emplace(key, p);
        return p;
    }

    ~PlanCache()
    {
        for (auto& kv : plans_) fftw_destroy_plan(kv.second);
    }

private:
    PlanCache() = default;
    std::mutex mu_;
    std::map<std::tuple<int, int, int, int, int>, fftw_plan> plans_;
};

inline void many(cplx* data, int n, int howmany, int stride, int dist, int sign)
{
    auto* p = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(PlanCache::instance().get(n, howmany, stride, dist, sign), p, p);
}

inline void inplace(cplx* data, int n, int sign) { many(data, n, 1, 1, n, sign); }

inline void inplace(Vec& v, int sign) { inplace(v.data(), static_cast<int>(v.size()), sign); }

// transform every column (contiguous in Eigen's default layout)
inline void columns(Mat& m, int sign)
{
    many(m.data(), static_cast<int>(m.rows()), static_cast<int>(m.cols()), 1, static_cast<int>(m.rows()), sign);
}

// transform every row
inline void rows(Mat& m, int sign)
{
    many(m.data(), static_cast<int>(m.cols()), static_cast<int>(m.rows()), static_cast<int>(m.rows()), 1, sign);
}

inline void both(Mat& m, int sign)
{
    columns(m, sign);
    rows(m, sign);
}

} // namespace tslice::fft

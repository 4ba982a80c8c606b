#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <thread>
#include <vector>

namespace entlab {

/** Compensated (Kahan) accumulator for long same-sign reductions. */
struct KahanSum {
    double sum = 0.0;
    double carry = 0.0;
    void add(double x) {
        double y = x - carry;
        double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    double value() const { return sum; }
};

/** A positive quantity stored as its natural log, so that paper-faithful
 * constant chains (which overflow double for realistic inputs) stay
 * representable. */
struct LogValue {
    double log = -std::numeric_limits<double>::infinity();

    static LogValue from_value(double v) {
        LogValue r;
        r.log = std::log(v);
        return r;
    }
    static LogValue from_log(double l) {
        LogValue r;
        r.log = l;
        return r;
    }
    double value() const { return std::exp(log); }
    bool finite_log() const { return std::isfinite(log); }
    bool positive() const { return log > -std::numeric_limits<double>::infinity(); }

    LogValue operator*(const LogValue& o) const { return from_log(log + o.log); }
    LogValue pow(double e) const { return from_log(e * log); }
    friend LogValue operator+(const LogValue& a, const LogValue& b) {
        double m = std::max(a.log, b.log);
        if (!std::isfinite(m)) return a.log > b.log ? a : b;
        return from_log(m + std::log(std::exp(a.log - m) + std::exp(b.log - m)));
    }
    bool operator<=(const LogValue& o) const { return log <= o.log; }
};

/** Root of a continuous monotone-bracketed function on [lo, hi]. */
inline double bisect(const std::function<double(double)>& f, double lo, double hi,
                     double tol = 1e-12, int max_iter = 200) {
    double flo = f(lo), fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (flo * fhi > 0.0) throw std::invalid_argument("bisect: root not bracketed");
    for (int i = 0; i < max_iter && hi - lo > tol * (1.0 + std::abs(lo) + std::abs(hi)); ++i) {
        double mid = 0.5 * (lo + hi);
        double fm = f(mid);
        if (fm == 0.0) return mid;
        if (flo * fm < 0.0) {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    return 0.5 * (lo + hi);
}

/** Shared worker count for data-parallel point loops (set from --jobs). */
inline int& worker_count() {
    static int jobs = std::max(1u, std::min(8u, std::thread::hardware_concurrency()));
    return jobs;
}

/** Runs fn(begin, end) over disjoint chunks of [0, count). The chunk
 * boundaries depend only on count, so per-chunk reductions combined in
 * chunk order are bitwise reproducible for any worker count. */
inline void parallel_for(std::size_t count, const std::function<void(std::size_t, std::size_t)>& fn) {
    int jobs = worker_count();
    if (jobs <= 1 || count < 4096) {
        fn(0, count);
        return;
    }
    std::size_t nchunk = static_cast<std::size_t>(jobs);
    std::vector<std::thread> pool;
    pool.reserve(nchunk);
    std::size_t per = (count + nchunk - 1) / nchunk;
    for (std::size_t c = 0; c < nchunk; ++c) {
        std::size_t b = c * per, e = std::min(count, b + per);
        if (b >= e) break;
        pool.emplace_back([&fn, b, e] { fn(b, e); });
    }
    for (auto& t : pool) t.join();
}

}  // namespace entlab

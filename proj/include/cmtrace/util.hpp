#ifndef CMTRACE_UTIL_HPP
#define CMTRACE_UTIL_HPP

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace cmtrace {

inline constexpr const char* kVersion = "0.1.0";

// Thrown when the adaptive precision loop runs out of doublings before the
// requested tolerance is met. Carries the bound that was actually achieved.
class precision_error : public std::runtime_error {
public:
    precision_error(const std::string& what, double achieved)
        : std::runtime_error(what), achieved_bound_(achieved) {}
    double achieved_bound() const { return achieved_bound_; }

private:
    double achieved_bound_;
};

class parse_error : public std::runtime_error {
public:
    parse_error(const std::string& what, std::size_t position)
        : std::runtime_error(what + " (at position " + std::to_string(position) + ")"),
          position_(position) {}
    std::size_t position() const { return position_; }

private:
    std::size_t position_;
};

inline long long floor_div(long long a, long long b) {
    long long q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

inline long long ceil_div(long long a, long long b) {
    return -floor_div(-a, b);
}

// Stable 64-bit FNV-1a, used for cache keys; must not depend on the platform.
inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

// Runs fn(i) for i in [0, n) on up to `jobs` threads. Exceptions from workers
// are rethrown on the calling thread (first one wins).
inline void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn) {
    if (jobs <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(jobs);
    std::size_t nthreads = std::min<std::size_t>(jobs, n);
    for (std::size_t t = 0; t < nthreads; ++t) {
        pool.emplace_back([&, t]() {
            try {
                for (std::size_t i = t; i < n; i += nthreads) fn(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace cmtrace

#endif

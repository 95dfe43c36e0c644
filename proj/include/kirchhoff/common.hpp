// Shared infrastructure: error types, checked assertions, compensated sums,
// a deterministic RNG, and a fixed-order parallel map.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace kirchhoff {

class GridMismatchError : public std::invalid_argument {
public:
    explicit GridMismatchError(const std::string& what) : std::invalid_argument(what) {}
};

// Thrown by certify_geometry when the requested mass exceeds the computed
// admissible threshold. Carries the threshold so callers can rescale.
class GeometryNotCertifiedError : public std::runtime_error {
public:
    GeometryNotCertifiedError(double cstar_, double c_)
        : std::runtime_error("geometry not certified: c=" + std::to_string(c_) +
                             " exceeds cstar=" + std::to_string(cstar_)),
          cstar(cstar_), c(c_) {}
    double cstar;
    double c;
};

class CertificateViolationError : public std::runtime_error {
public:
    explicit CertificateViolationError(const std::string& inequality)
        : std::runtime_error("certificate violation: " + inequality),
          name(inequality) {}
    std::string name;
};

class ConvergenceError : public std::runtime_error {
public:
    explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

class InvariantViolationError : public std::runtime_error {
public:
    explicit InvariantViolationError(const std::string& invariant)
        : std::runtime_error("invariant violated: " + invariant),
          name(invariant) {}
    std::string name;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

// Neumaier-compensated sum; keeps quadrature and norm identities at the
// 1e-12 relative level even on 10^5-node grids.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic, platform-independent generator (xoshiro256++). Bit-stable
// streams are required for reproducible certificates and reports.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t s = seed;
        for (auto& w : state_) w = splitmix64(s);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform in [0,1) with 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Box-Muller; avoids the implementation-defined std distributions.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform(), u2 = uniform();
        while (u1 <= 1e-300) u1 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    // Independent child stream; tag decorrelates siblings.
    Rng child(std::uint64_t tag) {
        std::uint64_t s = next_u64() ^ (0x632be59bd9b4e019ULL * (tag + 1));
        return Rng(s);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t state_[4] = {};
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Runs fn(i) for i in [0, count) over nthreads workers with a static block
// partition. Results must be written to per-index slots by the caller;
// reductions are then performed sequentially in index order, which keeps
// every run bit-identical regardless of the thread count.
inline void parallel_for(std::size_t count, int nthreads, const std::function<void(std::size_t)>& fn) {
    if (count == 0) return;
    if (nthreads <= 1 || count == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(nthreads), count);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w]() {
            const std::size_t chunk = (count + workers - 1) / workers;
            const std::size_t lo = w * chunk;
            const std::size_t hi = std::min(count, lo + chunk);
            try {
                for (std::size_t i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace kirchhoff

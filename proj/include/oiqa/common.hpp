#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace oiqa {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

inline constexpr double kPi = 3.14159265358979323846;

// splitmix64, the usual 64-bit mixer. Used both as a sequential generator
// and as a stateless hash so parallel kernels stay bit-deterministic
// regardless of iteration order.
inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline uint64_t hash_mix(uint64_t a, uint64_t b) {
    uint64_t s = a * 0x9e3779b97f4a7c15ULL + b;
    return splitmix64(s);
}

inline double u64_to_unit(uint64_t x) {
    // 53 mantissa bits, result in [0, 1)
    return static_cast<double>(x >> 11) * (1.0 / 9007199254740992.0);
}

// Sequential deterministic RNG. Not std::mt19937 so that streams are
// identical across standard library implementations.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() { return splitmix64(state_); }

    double uniform() { return u64_to_unit(next_u64()); }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Box-Muller; one value per call, the pair's second half is discarded
    // to keep the stream position independent of call parity.
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }

    // Uniform integer in [0, n)
    uint64_t below(uint64_t n) { return next_u64() % n; }

private:
    uint64_t state_;
};

// Stateless gaussian draw keyed by (seed, index): safe to evaluate from any
// thread in any order.
inline double hashed_normal(uint64_t seed, uint64_t index) {
    double u1 = u64_to_unit(hash_mix(seed, 2 * index));
    double u2 = u64_to_unit(hash_mix(seed, 2 * index + 1));
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

inline double deg_to_rad(double d) { return d * kPi / 180.0; }
inline double rad_to_deg(double r) { return r * 180.0 / kPi; }

template <typename T>
inline T clamp01(T v) {
    return v < T(0) ? T(0) : (v > T(1) ? T(1) : v);
}

// Wrap an angle to [-pi, pi)
inline double wrap_pi(double a) {
    a = std::fmod(a + kPi, 2.0 * kPi);
    if (a < 0) a += 2.0 * kPi;
    return a - kPi;
}

}  // namespace oiqa

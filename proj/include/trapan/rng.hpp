#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace trapan {

// Deterministic random source. std::mt19937_64 is bit-exact across
// implementations, but the standard distributions are not, so the
// distribution code lives here. Every stochastic component takes one of
// these instead of seeding its own engine.
class Rng {
public:
    explicit Rng(std::uint64_t seed)
        : engine_(splitmix64_(seed)), seed_bits_(seed) {}

    std::uint64_t bits() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double u01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

    /// Unbiased integer in [0, n) via bitmask rejection.
    std::uint64_t uniform_int(std::uint64_t n) {
        if (n <= 1) return 0;
        std::uint64_t mask = ~std::uint64_t{0} >> countl_zero_(n - 1);
        for (;;) {
            std::uint64_t v = engine_() & mask;
            if (v < n) return v;
        }
    }

    /// Standard normal via Box-Muller (deterministic draw order).
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = u01();
        double u2 = u01();
        while (u1 <= 0.0) u1 = u01();  // avoid log(0)
        double radius = std::sqrt(-2.0 * std::log(u1));
        double angle = 2.0 * 3.14159265358979323846 * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_int(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    std::vector<std::size_t> permutation(std::size_t n) {
        std::vector<std::size_t> p(n);
        for (std::size_t i = 0; i < n; ++i) p[i] = i;
        shuffle(p);
        return p;
    }

    /// Independent child stream. Labels keep unrelated consumers (weight
    /// init, epoch schedule, batch order) from sharing draws.
    Rng fork(std::string_view label) const {
        std::uint64_t h = 1469598103934665603ull;  // FNV-1a
        for (char ch : label) {
            h ^= static_cast<unsigned char>(ch);
            h *= 1099511628211ull;
        }
        return Rng(splitmix64_(seed_bits_) ^ h);
    }

private:
    static int countl_zero_(std::uint64_t x) {
        int n = 0;
        while (!(x & 0x8000000000000000ull) && n < 64) {
            x <<= 1;
            ++n;
        }
        return n;
    }

    static std::uint64_t splitmix64_(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ull;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return x ^ (x >> 31);
    }

    std::mt19937_64 engine_;
    std::uint64_t seed_bits_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace trapan

#include "trajclust/rng.hpp"

#include <cmath>
#include <numbers>

namespace trajclust {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

namespace {

std::uint64_t fnv1a64(std::string_view s) noexcept {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::string_view role, std::uint64_t index) noexcept {
    const std::uint64_t base = splitmix64(master ^ fnv1a64(role));
    return splitmix64(base + (index + 1) * 0x9E3779B97F4A7C15ULL);
}

double Rng::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::size_t Rng::index(std::size_t n) {
    // Rejection sampling keeps the draw unbiased.
    const std::uint64_t range = n;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % range;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return static_cast<std::size_t>(x % range);
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

std::vector<double> Rng::dirichlet_flat(std::size_t k) {
    std::vector<double> w(k);
    double total = 0.0;
    for (auto& x : w) {
        double u = uniform();
        while (u <= 0.0) u = uniform();
        x = -std::log(u);
        total += x;
    }
    for (auto& x : w) x /= total;
    return w;
}

}  // namespace trajclust

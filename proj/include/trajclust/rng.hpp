#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace trajclust {

/// Counter-based child seed derivation.
///
/// child = splitmix64(splitmix64(master ^ fnv1a64(role)) + (index + 1) * golden)
///
/// The mapping is a pure function of its arguments so that batch, repetition
/// and bootstrap drivers produce the same streams regardless of how the work
/// is scheduled. Roles in use: "batch", "rep", "boot-sample", "boot-fit",
/// "em-start", "kmeans-start", "tie-break".
std::uint64_t derive_seed(std::uint64_t master, std::string_view role, std::uint64_t index) noexcept;

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seeded random stream. All samplers are implemented here on top of the raw
/// 64-bit engine so that results do not depend on the standard library's
/// distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform on [0, 1).
    double uniform();

    /// Uniform integer on [0, n). n must be positive.
    std::size_t index(std::size_t n);

    double normal();
    double normal(double mean, double sd) { return mean + sd * normal(); }

    /// One draw from a symmetric Dirichlet(1, ..., 1) of dimension k.
    std::vector<double> dirichlet_flat(std::size_t k);

    template <class It>
    void shuffle(It first, It last) {
        const auto n = static_cast<std::size_t>(last - first);
        for (std::size_t i = n; i > 1; --i) {
            std::size_t j = index(i);
            using std::swap;
            swap(first[i - 1], first[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace trajclust

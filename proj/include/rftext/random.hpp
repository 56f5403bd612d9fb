#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace rftext {

/// Derives an independent stream seed from a master seed, a stage name and an index.
///
/// seed = splitmix64(master ^ splitmix64(fnv1a64(stage) + index)). Every random
/// decision in the pipeline draws from a seed produced this way, so one master
/// seed reproduces a whole run and per-item streams do not depend on schedule.
std::uint64_t derive_seed(std::uint64_t master, std::string_view stage, std::uint64_t index);

std::uint64_t splitmix64(std::uint64_t x);

/// Portable RNG wrapper. The standard distributions are implementation-defined,
/// so bounded draws are done here to keep artifacts byte-identical across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n);

    /// Uniform real in [0, 1).
    double uniform();

    template <typename It>
    void shuffle(It first, It last) {
        const auto n = static_cast<std::uint64_t>(last - first);
        for (std::uint64_t i = n; i > 1; --i) {
            const auto j = below(i);
            std::iter_swap(first + (i - 1), first + j);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace rftext

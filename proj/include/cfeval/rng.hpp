#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace cfeval {

// SplitMix64 finalizer, used to derive substream seeds.
std::uint64_t splitmix64(std::uint64_t x);

// Deterministic generator with fully specified transforms. std::mt19937_64's raw
// output is portable; the distribution adapters in <random> are not, so the
// uniform/Bernoulli/normal transforms are spelled out here.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    // Uniform on [0,1) with 53 random bits.
    double uniform01();

    // true with probability p (uniform01() < p).
    bool bernoulli(double p);

    // Standard normal via Box-Muller; consumes exactly two uniforms per call.
    double normal();

    // Unbiased integer in [0, bound) by rejection.
    std::uint64_t uniform_below(std::uint64_t bound);

    // Independent stream derived from this generator's seed and a tag; does not
    // advance or depend on this generator's state.
    Rng substream(std::uint64_t tag) const;

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

// Fisher-Yates; std::shuffle is implementation-defined, this is not.
template <typename T>
void shuffle(std::vector<T>& values, Rng& rng) {
    for (std::size_t i = values.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng.uniform_below(i));
        std::swap(values[i - 1], values[j]);
    }
}

std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng);

} // namespace cfeval

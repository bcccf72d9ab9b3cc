#ifndef RFSC_SEEDING_HPP
#define RFSC_SEEDING_HPP

#include <cstdint>
#include <initializer_list>
#include <random>

namespace rfsc {

std::uint64_t splitmix64(std::uint64_t x);

/// Combines a base seed with a path of indices (e.g. fold, repeat) into an
/// independent stream seed. Order matters: derive_seed(s, {1, 2}) differs
/// from derive_seed(s, {2, 1}).
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path);

/// 64-bit generator with a portable uniform draw in [0,1).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    bool bernoulli(double p) { return uniform() < p; }
    std::uint64_t next() { return engine_(); }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

}  // namespace rfsc

#endif  // RFSC_SEEDING_HPP

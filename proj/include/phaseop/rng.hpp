#pragma once

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <random>

namespace phaseop {

// Mixes a base seed with a path of stream indices (e.g. {snr_index, trial})
// through SplitMix64. Distinct paths give statistically independent streams
// and adding new paths never perturbs existing ones.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

// Platform-stable random stream: mt19937_64 engine with hand-rolled
// uniform/normal transforms, since std distributions are implementation-defined.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed);

    // Uniform in the open interval (0, 1).
    double uniform();
    double normal();
    // Circular complex Gaussian with E|z|^2 = 1.
    std::complex<double> complex_normal();

private:
    std::mt19937_64 engine_;
    std::optional<double> spare_;
};

} // namespace phaseop

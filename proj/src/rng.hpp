#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace fracspde {

// splitmix64 finalizer; replica streams are seeded with mix(seed, replica)
// so they are decorrelated and replayable from the manifest.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Gaussian stream with a fixed draw discipline (Box-Muller on mt19937_64);
// bit-reproducible on one platform for a given seed.
class NormalRng {
public:
    explicit NormalRng(std::uint64_t seed) : eng_(seed) {}

    double uniform() {  // in (0, 1)
        return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace fracspde

#include "cogen/rng.hpp"

namespace cogen {

void fill_normal(std::span<double> out, std::uint64_t seed) {
    const std::int64_t n = static_cast<std::int64_t>(out.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        const std::uint64_t k = static_cast<std::uint64_t>(i);
        double u1 = u64_to_unit(splitmix64(seed ^ (2 * k + 1) * 0xda942042e4dd58b5ULL));
        double u2 = u64_to_unit(splitmix64(seed ^ (2 * k + 2) * 0xda942042e4dd58b5ULL));
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        out[static_cast<std::size_t>(i)] =
            std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }
}

void fill_uniform(std::span<double> out, std::uint64_t seed) {
    const std::int64_t n = static_cast<std::int64_t>(out.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        const std::uint64_t k = static_cast<std::uint64_t>(i);
        out[static_cast<std::size_t>(i)] = u64_to_unit(splitmix64(seed ^ (k + 1) * 0xda942042e4dd58b5ULL));
    }
}

}  // namespace cogen

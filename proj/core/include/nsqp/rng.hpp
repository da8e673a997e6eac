#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace nsqp {

/// Counter-based Philox4x32-10 generator (Salmon et al., SC'11).
///
/// The 64-bit key is the master seed, the upper half of the 128-bit counter is the stream id
/// and the lower half counts blocks, so stream (seed, id) is reproducible on its own and
/// independent of how streams are distributed over workers.
class PhiloxStream {
public:
    PhiloxStream(std::uint64_t seed, std::uint64_t stream, std::uint64_t first_block = 0) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_(stream),
          block_(first_block) {}

    /// Next 128 random bits.
    std::array<std::uint32_t, 4> next_block() noexcept {
        std::array<std::uint32_t, 4> ctr{static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                                         static_cast<std::uint32_t>(stream_),
                                         static_cast<std::uint32_t>(stream_ >> 32)};
        ++block_;
        auto key = key_;
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * ctr[0];
            const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * ctr[2];
            ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
                   static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
            key[0] += 0x9E3779B9u;
            key[1] += 0xBB67AE85u;
        }
        return ctr;
    }

    /// Uniform double in (0, 1].
    double uniform() noexcept {
        if (!have_uniform_) {
            const auto b = next_block();
            spare_uniform_ = to_unit(b[2], b[3]);
            have_uniform_ = true;
            return to_unit(b[0], b[1]);
        }
        have_uniform_ = false;
        return spare_uniform_;
    }

    /// Standard normal via Box-Muller; consumes one block per pair of draws.
    double normal() noexcept {
        if (have_normal_) {
            have_normal_ = false;
            return spare_normal_;
        }
        const auto b = next_block();
        const double u1 = to_unit(b[0], b[1]);
        const double u2 = to_unit(b[2], b[3]);
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_normal_ = radius * std::sin(angle);
        have_normal_ = true;
        return radius * std::cos(angle);
    }

    /// Uniform integer in [0, n).
    std::uint64_t index(std::uint64_t n) noexcept {
        const auto v = static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
        return v >= n ? n - 1 : v;
    }

private:
    static double to_unit(std::uint32_t lo, std::uint32_t hi) noexcept {
        const std::uint64_t bits = ((std::uint64_t{hi} << 32) | lo) >> 11;
        return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
    }

    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_;
    std::uint64_t block_;
    bool have_normal_ = false;
    double spare_normal_ = 0.0;
    bool have_uniform_ = false;
    double spare_uniform_ = 0.0;
};

}  // namespace nsqp

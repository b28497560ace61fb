#pragma once

#include <cstdint>
#include <random>

namespace kesten {

/// Identifies one reproducible random stream. Two equal RngStream values always
/// produce the same draws; distinct stream ids are seeded through seed_seq so
/// their engines start from unrelated states.
struct RngStream {
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;

    [[nodiscard]] RngStream substream(std::uint64_t offset) const noexcept {
        return {seed, stream_id * 1'000'003ULL + offset + 1};
    }

    [[nodiscard]] std::mt19937_64 engine() const {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream_id),
                          static_cast<std::uint32_t>(stream_id >> 32), 0x6b657374u};
        return std::mt19937_64(seq);
    }

    friend bool operator==(const RngStream&, const RngStream&) = default;
};

}  // namespace kesten

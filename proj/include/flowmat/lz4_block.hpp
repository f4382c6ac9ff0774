#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

// Raw LZ4 block format (no frame header, no checksum). Output is readable by
// any conforming LZ4 block decoder and the compressor is deterministic.
namespace flowmat::lz4 {

/// Worst-case compressed size for `n` input bytes.
constexpr std::size_t compress_bound(std::size_t n) noexcept { return n + n / 255 + 16; }

/// Greedy single-pass compressor: one hash slot per 4-byte prefix, 64 KiB window.
std::vector<std::uint8_t> compress(std::span<const std::uint8_t> input);

/// Decodes a block whose decompressed size is known in advance. Throws
/// IntegrityError if the block is malformed, reads or writes out of bounds,
/// or produces anything other than exactly `raw_size` bytes.
std::vector<std::uint8_t> decompress(std::span<const std::uint8_t> block, std::size_t raw_size);

}  // namespace flowmat::lz4

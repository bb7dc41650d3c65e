#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dpq/codebook.hpp"

namespace dpq {

// log2(K); K must be a power of two. K = 1 yields zero-width indices.
int bits_per_index(uint32_t K);

// Bytes occupied by one packed code: ceil(M * log2(K) / 8).
size_t packed_code_bytes(int M, uint32_t K);

// Bit-packs M cluster indices, little-endian within the stream: the first
// index occupies the lowest log2(K) bits of byte 0, the next index the
// following bits, and so on. Trailing pad bits are zero.
std::vector<uint8_t> pack_code(std::span<const uint32_t> indices, uint32_t K);

// Inverse of pack_code. The packed buffer must be exactly
// packed_code_bytes(M, K) long.
std::vector<uint32_t> unpack_code(std::span<const uint8_t> packed, int M,
                                  uint32_t K);

// One compressed vector: the M cluster indices plus their packed form.
struct CompressedCode {
    std::vector<uint32_t> indices;
    std::vector<uint8_t> packed;

    static CompressedCode from_indices(std::vector<uint32_t> indices,
                                       uint32_t K);
    static CompressedCode from_packed(std::span<const uint8_t> packed, int M,
                                      uint32_t K);
};

// Concatenates the codebook rows selected by the code:
// [C_1(z_1), C_2(z_2), ..., C_M(z_M)], an M*D vector.
std::vector<double> reconstruct(const CompressedCode& code,
                                const Codebook& codebook);
std::vector<double> reconstruct(std::span<const uint32_t> indices,
                                const Codebook& codebook);

// Storage ratio of raw float-32 vectors over packed codes:
// 32 * L / (M * log2(K)).
double compression_ratio(int L, int M, uint32_t K);

// A database of packed codes sharing one (M, K) geometry. Records are stored
// back to back, each padded to a whole number of bytes independently.
struct CodeSet {
    int M = 0;
    uint32_t K = 0;
    int64_t count = 0;
    std::vector<uint8_t> packed;

    CodeSet() = default;
    CodeSet(int m, uint32_t k) : M(m), K(k) {}

    size_t record_size() const { return packed_code_bytes(M, K); }

    std::span<const uint8_t> record(int64_t i) const {
        return {packed.data() + i * record_size(), record_size()};
    }

    std::vector<uint32_t> indices(int64_t i) const {
        return unpack_code(record(i), M, K);
    }

    void append(const CompressedCode& code);

    // Unpacks every record into a count x M index matrix.
    std::vector<uint32_t> unpack_all() const;
};

}  // namespace dpq

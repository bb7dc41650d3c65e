#include "dpq/code.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

#include "dpq/types.hpp"

namespace dpq {

int bits_per_index(uint32_t K) {
    if (!is_power_of_two(K))
        throw std::invalid_argument("pack: K must be a power of two, got " +
                                    std::to_string(K));
    return std::countr_zero(K);
}

size_t packed_code_bytes(int M, uint32_t K) {
    return (static_cast<size_t>(M) * bits_per_index(K) + 7) / 8;
}

std::vector<uint8_t> pack_code(std::span<const uint32_t> indices, uint32_t K) {
    const int bits = bits_per_index(K);
    for (size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= K)
            throw std::invalid_argument("pack: index " + std::to_string(indices[i]) +
                                        " out of range [0," + std::to_string(K) +
                                        ") at position " + std::to_string(i));
    }
    std::vector<uint8_t> out((indices.size() * bits + 7) / 8, 0);
    size_t bit = 0;
    for (uint32_t v : indices) {
        for (int j = 0; j < bits; ++j, ++bit) {
            if ((v >> j) & 1u) out[bit >> 3] |= static_cast<uint8_t>(1u << (bit & 7));
        }
    }
    return out;
}

std::vector<uint32_t> unpack_code(std::span<const uint8_t> packed, int M,
                                  uint32_t K) {
    const int bits = bits_per_index(K);
    if (M < 0) throw std::invalid_argument("unpack: negative M");
    if (packed.size() != packed_code_bytes(M, K))
        throw std::invalid_argument("unpack: expected " +
                                    std::to_string(packed_code_bytes(M, K)) +
                                    " bytes, got " + std::to_string(packed.size()));
    std::vector<uint32_t> out(static_cast<size_t>(M), 0);
    size_t bit = 0;
    for (int m = 0; m < M; ++m) {
        uint32_t v = 0;
        for (int j = 0; j < bits; ++j, ++bit) {
            if ((packed[bit >> 3] >> (bit & 7)) & 1u) v |= 1u << j;
        }
        out[m] = v;
    }
    return out;
}

CompressedCode CompressedCode::from_indices(std::vector<uint32_t> indices,
                                            uint32_t K) {
    CompressedCode code;
    code.packed = pack_code(indices, K);
    code.indices = std::move(indices);
    return code;
}

CompressedCode CompressedCode::from_packed(std::span<const uint8_t> packed,
                                           int M, uint32_t K) {
    CompressedCode code;
    code.indices = unpack_code(packed, M, K);
    code.packed.assign(packed.begin(), packed.end());
    return code;
}

std::vector<double> reconstruct(std::span<const uint32_t> indices,
                                const Codebook& codebook) {
    if (indices.size() != static_cast<size_t>(codebook.M))
        throw std::invalid_argument("reconstruct: code has " +
                                    std::to_string(indices.size()) +
                                    " indices, codebook expects " +
                                    std::to_string(codebook.M));
    std::vector<double> out(static_cast<size_t>(codebook.M) * codebook.D);
    for (int m = 0; m < codebook.M; ++m) {
        if (indices[m] >= static_cast<uint32_t>(codebook.K))
            throw std::invalid_argument("reconstruct: index out of range in partition " +
                                        std::to_string(m));
        const auto row = codebook.row(m, static_cast<int>(indices[m]));
        std::copy(row.begin(), row.end(), out.begin() + static_cast<size_t>(m) * codebook.D);
    }
    return out;
}

std::vector<double> reconstruct(const CompressedCode& code,
                                const Codebook& codebook) {
    return reconstruct(std::span<const uint32_t>(code.indices), codebook);
}

double compression_ratio(int L, int M, uint32_t K) {
    if (L <= 0 || M <= 0) throw std::invalid_argument("compression_ratio: sizes must be positive");
    const int bits = bits_per_index(K);
    if (bits == 0)
        throw std::invalid_argument("compression_ratio: K must be at least 2");
    return 32.0 * L / (static_cast<double>(M) * bits);
}

void CodeSet::append(const CompressedCode& code) {
    if (code.indices.size() != static_cast<size_t>(M))
        throw std::invalid_argument("code set: record has wrong partition count");
    if (code.packed.size() != record_size())
        throw std::invalid_argument("code set: record has wrong byte size");
    packed.insert(packed.end(), code.packed.begin(), code.packed.end());
    ++count;
}

std::vector<uint32_t> CodeSet::unpack_all() const {
    std::vector<uint32_t> out;
    out.reserve(static_cast<size_t>(count) * M);
    for (int64_t i = 0; i < count; ++i) {
        const auto z = indices(i);
        out.insert(out.end(), z.begin(), z.end());
    }
    return out;
}

void Codebook::validate() const {
    if (M <= 0 || K <= 0 || D <= 0)
        throw std::invalid_argument("codebook: dimensions must be positive");
    if (data.size() != static_cast<size_t>(M) * K * D)
        throw std::invalid_argument("codebook: storage does not match M*K*D");
    for (double v : data) {
        if (!std::isfinite(v))
            throw std::invalid_argument("codebook: non-finite entry");
    }
}

}  // namespace dpq

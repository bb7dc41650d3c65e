#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "dpq/code.hpp"
#include "dpq/codebook.hpp"
#include "dpq/types.hpp"

namespace dpq {

// Binary file formats. All integers are little-endian, all reals 32-bit
// little-endian IEEE-754.
//
//   DPQV  vectors    magic "DPQV", u32 count, u32 dim, u8 has_labels,
//                    3 zero bytes, count*dim f32 row-major,
//                    then count u32 labels when flagged.
//   DPQC  codebook   magic "DPQC", u32 M, u32 K, u32 D,
//                    M*K*D f32, partition-major then row-major.
//   DPQZ  codes      magic "DPQZ", u32 N, u32 M, u32 K,
//                    N packed records back to back (each byte-padded).

void write_vector_set(std::ostream& out, const VectorSet& vs);
void write_vector_set(const std::string& path, const VectorSet& vs);
VectorSet read_vector_set(std::istream& in);
VectorSet read_vector_set(const std::string& path);

void write_codebook(std::ostream& out, const Codebook& cb);
void write_codebook(const std::string& path, const Codebook& cb);
Codebook read_codebook(std::istream& in);
Codebook read_codebook(const std::string& path);

void write_code_set(std::ostream& out, const CodeSet& cs);
void write_code_set(const std::string& path, const CodeSet& cs);
CodeSet read_code_set(std::istream& in);
CodeSet read_code_set(const std::string& path);

// low-level little-endian primitives shared by the writers
namespace detail {
void put_u32(std::ostream& out, uint32_t v);
uint32_t get_u32(std::istream& in);
void put_f32(std::ostream& out, double v);
double get_f32(std::istream& in);
void put_magic(std::ostream& out, const char magic[4]);
void expect_magic(std::istream& in, const char magic[4]);
}  // namespace detail

}  // namespace dpq

#include "dpq/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

namespace dpq {
namespace detail {

void put_u32(std::ostream& out, uint32_t v) {
    const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                       static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
    out.write(b, 4);
}

uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw std::runtime_error("file truncated while reading u32");
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

void put_f32(std::ostream& out, double v) {
    put_u32(out, std::bit_cast<uint32_t>(static_cast<float>(v)));
}

double get_f32(std::istream& in) {
    return static_cast<double>(std::bit_cast<float>(get_u32(in)));
}

void put_magic(std::ostream& out, const char magic[4]) { out.write(magic, 4); }

void expect_magic(std::istream& in, const char magic[4]) {
    char b[4] = {};
    in.read(b, 4);
    if (!in || std::memcmp(b, magic, 4) != 0)
        throw std::runtime_error(std::string("bad magic, expected ") +
                                 std::string(magic, 4));
}

}  // namespace detail

using namespace detail;

namespace {

template <class Fn>
auto with_out_file(const std::string& path, Fn&& fn) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    fn(out);
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + path);
}

template <class Fn>
auto with_in_file(const std::string& path, Fn&& fn) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    return fn(in);
}

}  // namespace

void write_vector_set(std::ostream& out, const VectorSet& vs) {
    vs.validate();
    put_magic(out, "DPQV");
    put_u32(out, static_cast<uint32_t>(vs.count));
    put_u32(out, static_cast<uint32_t>(vs.dim));
    const char flags[4] = {vs.has_labels() ? char(1) : char(0), 0, 0, 0};
    out.write(flags, 4);
    for (double v : vs.data) put_f32(out, v);
    if (vs.has_labels()) {
        for (int32_t l : vs.labels) put_u32(out, static_cast<uint32_t>(l));
    }
}

VectorSet read_vector_set(std::istream& in) {
    expect_magic(in, "DPQV");
    VectorSet vs;
    vs.count = get_u32(in);
    vs.dim = static_cast<int>(get_u32(in));
    char flags[4];
    in.read(flags, 4);
    if (!in) throw std::runtime_error("DPQV: truncated header");
    vs.data.resize(static_cast<size_t>(vs.count) * vs.dim);
    for (double& v : vs.data) v = get_f32(in);
    if (flags[0]) {
        vs.labels.resize(static_cast<size_t>(vs.count));
        for (int32_t& l : vs.labels) l = static_cast<int32_t>(get_u32(in));
    }
    vs.validate();
    return vs;
}

void write_codebook(std::ostream& out, const Codebook& cb) {
    cb.validate();
    put_magic(out, "DPQC");
    put_u32(out, static_cast<uint32_t>(cb.M));
    put_u32(out, static_cast<uint32_t>(cb.K));
    put_u32(out, static_cast<uint32_t>(cb.D));
    for (double v : cb.data) put_f32(out, v);
}

Codebook read_codebook(std::istream& in) {
    expect_magic(in, "DPQC");
    const int M = static_cast<int>(get_u32(in));
    const int K = static_cast<int>(get_u32(in));
    const int D = static_cast<int>(get_u32(in));
    Codebook cb(M, K, D);
    for (double& v : cb.data) v = get_f32(in);
    cb.validate();
    return cb;
}

void write_code_set(std::ostream& out, const CodeSet& cs) {
    put_magic(out, "DPQZ");
    put_u32(out, static_cast<uint32_t>(cs.count));
    put_u32(out, static_cast<uint32_t>(cs.M));
    put_u32(out, cs.K);
    out.write(reinterpret_cast<const char*>(cs.packed.data()),
              static_cast<std::streamsize>(cs.packed.size()));
}

CodeSet read_code_set(std::istream& in) {
    expect_magic(in, "DPQZ");
    const int64_t n = get_u32(in);
    const int M = static_cast<int>(get_u32(in));
    const uint32_t K = get_u32(in);
    CodeSet cs(M, K);
    cs.count = n;
    cs.packed.resize(static_cast<size_t>(n) * cs.record_size());
    in.read(reinterpret_cast<char*>(cs.packed.data()),
            static_cast<std::streamsize>(cs.packed.size()));
    if (!in) throw std::runtime_error("DPQZ: truncated records");
    return cs;
}

void write_vector_set(const std::string& path, const VectorSet& vs) {
    with_out_file(path, [&](std::ostream& o) { write_vector_set(o, vs); });
}
VectorSet read_vector_set(const std::string& path) {
    return with_in_file(path, [](std::istream& i) { return read_vector_set(i); });
}
void write_codebook(const std::string& path, const Codebook& cb) {
    with_out_file(path, [&](std::ostream& o) { write_codebook(o, cb); });
}
Codebook read_codebook(const std::string& path) {
    return with_in_file(path, [](std::istream& i) { return read_codebook(i); });
}
void write_code_set(const std::string& path, const CodeSet& cs) {
    with_out_file(path, [&](std::ostream& o) { write_code_set(o, cs); });
}
CodeSet read_code_set(const std::string& path) {
    return with_in_file(path, [](std::istream& i) { return read_code_set(i); });
}

}  // namespace dpq

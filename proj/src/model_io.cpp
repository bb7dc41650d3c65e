#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpq/io.hpp"
#include "dpq/model.hpp"

namespace dpq {

using detail::expect_magic;
using detail::get_f32;
using detail::get_u32;
using detail::put_f32;
using detail::put_magic;
using detail::put_u32;

namespace {

constexpr uint32_t kModelVersion = 1;

void put_tensor(std::ostream& out, std::span<const double> values,
                std::initializer_list<uint32_t> dims) {
    put_u32(out, static_cast<uint32_t>(dims.size()));
    size_t n = 1;
    for (uint32_t d : dims) {
        put_u32(out, d);
        n *= d;
    }
    if (n != values.size())
        throw std::logic_error("model io: tensor size does not match dims");
    for (double v : values) put_f32(out, v);
}

struct RawTensor {
    std::vector<uint32_t> dims;
    std::vector<double> values;
};

RawTensor get_tensor(std::istream& in) {
    RawTensor t;
    const uint32_t rank = get_u32(in);
    if (rank > 4) throw std::runtime_error("DPQM: implausible tensor rank");
    size_t n = 1;
    for (uint32_t r = 0; r < rank; ++r) {
        t.dims.push_back(get_u32(in));
        n *= t.dims.back();
    }
    t.values.resize(n);
    for (double& v : t.values) v = get_f32(in);
    return t;
}

}  // namespace

void write_model(std::ostream& out, const DpqModel& model) {
    const ParamLayout& L = model.layout;
    const QuantizerConfig& cfg = model.config;
    put_magic(out, "DPQM");
    put_u32(out, kModelVersion);
    put_u32(out, static_cast<uint32_t>(L.M));
    put_u32(out, static_cast<uint32_t>(L.K));
    put_u32(out, static_cast<uint32_t>(L.D));
    put_u32(out, static_cast<uint32_t>(L.L));
    put_u32(out, static_cast<uint32_t>(L.hidden));
    put_u32(out, static_cast<uint32_t>(L.C));
    put_f32(out, cfg.weights.softmax);
    put_f32(out, cfg.weights.central);
    put_f32(out, cfg.weights.gini_batch);
    put_f32(out, cfg.weights.gini_sample);
    put_f32(out, cfg.weights.weight_decay);

    const uint32_t H = static_cast<uint32_t>(L.hidden);
    const uint32_t F = static_cast<uint32_t>(L.slice);
    const uint32_t K = static_cast<uint32_t>(L.K);
    const uint32_t D = static_cast<uint32_t>(L.D);
    const uint32_t C = static_cast<uint32_t>(L.C);
    const uint32_t V = static_cast<uint32_t>(L.M * L.D);
    for (int m = 0; m < L.M; ++m) {
        put_tensor(out, model.fc1_w(m), {H, F});
        put_tensor(out, model.fc1_b(m), {H});
        put_tensor(out, model.fc2_w(m), {K, H});
        put_tensor(out, model.fc2_b(m), {K});
    }
    for (int m = 0; m < L.M; ++m) put_tensor(out, model.codebook_rows(m), {K, D});
    put_tensor(out, model.classifier_w(), {V, C});
    put_tensor(out, model.classifier_b(), {C});
    put_tensor(out, model.centers(), {C, V});
    if (model.has_front()) {
        put_tensor(out, model.front_w(),
                   {static_cast<uint32_t>(L.front_dim), static_cast<uint32_t>(L.L)});
        put_tensor(out, model.front_b(), {static_cast<uint32_t>(L.front_dim)});
    }
}

DpqModel read_model(std::istream& in) {
    expect_magic(in, "DPQM");
    const uint32_t version = get_u32(in);
    if (version != kModelVersion)
        throw std::runtime_error("DPQM: unsupported version " + std::to_string(version));
    QuantizerConfig cfg;
    cfg.M = static_cast<int>(get_u32(in));
    cfg.K = static_cast<int>(get_u32(in));
    cfg.D = static_cast<int>(get_u32(in));
    cfg.input_dim = static_cast<int>(get_u32(in));
    cfg.hidden_dim = static_cast<int>(get_u32(in));
    cfg.num_classes = static_cast<int>(get_u32(in));
    cfg.weights.softmax = get_f32(in);
    cfg.weights.central = get_f32(in);
    cfg.weights.gini_batch = get_f32(in);
    cfg.weights.gini_sample = get_f32(in);
    cfg.weights.weight_decay = get_f32(in);

    std::vector<RawTensor> tensors;
    while (in.peek() != std::char_traits<char>::eof()) tensors.push_back(get_tensor(in));

    const size_t base = static_cast<size_t>(cfg.M) * 5 + 3;
    if (tensors.size() == base) {
        cfg.front_dim = 0;
    } else if (tensors.size() == base + 2) {
        cfg.front_dim = static_cast<int>(tensors[base].dims.at(0));
    } else {
        throw std::runtime_error("DPQM: unexpected tensor count " +
                                 std::to_string(tensors.size()));
    }

    cfg.validate();
    DpqModel model;
    model.config = cfg;
    model.layout = ParamLayout(cfg);
    model.params.assign(model.layout.total, 0.0);

    size_t idx = 0;
    auto take = [&](std::span<double> dst) {
        const RawTensor& t = tensors.at(idx++);
        if (t.values.size() != dst.size())
            throw std::runtime_error("DPQM: tensor " + std::to_string(idx - 1) +
                                     " has unexpected size");
        std::copy(t.values.begin(), t.values.end(), dst.begin());
    };
    for (int m = 0; m < cfg.M; ++m) {
        take(model.fc1_w(m));
        take(model.fc1_b(m));
        take(model.fc2_w(m));
        take(model.fc2_b(m));
    }
    for (int m = 0; m < cfg.M; ++m) take(model.codebook_rows(m));
    take(model.classifier_w());
    take(model.classifier_b());
    take(model.centers());
    if (cfg.front_dim > 0) {
        take(model.front_w());
        take(model.front_b());
    }
    return model;
}

void write_model(const std::string& path, const DpqModel& model) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    write_model(out, model);
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + path);
}

DpqModel read_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    return read_model(in);
}

}  // namespace dpq

#include "dpq/types.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dpq {

bool is_power_of_two(uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

int QuantizerConfig::code_bits() const {
    return M * std::countr_zero(static_cast<uint32_t>(K));
}

void QuantizerConfig::validate() const {
    if (M <= 0) throw std::invalid_argument("config: M must be positive");
    if (K <= 0 || !is_power_of_two(static_cast<uint64_t>(K)))
        throw std::invalid_argument("config: K must be a positive power of two, got " +
                                    std::to_string(K));
    if (D <= 0) throw std::invalid_argument("config: D must be positive");
    if (input_dim <= 0)
        throw std::invalid_argument("config: input_dim must be positive");
    if (hidden_dim <= 0)
        throw std::invalid_argument("config: hidden_dim must be positive");
    if (num_classes <= 0)
        throw std::invalid_argument("config: num_classes must be positive");
    if (front_dim < 0)
        throw std::invalid_argument("config: front_dim must be nonnegative");
    const double w[] = {weights.softmax, weights.central, weights.gini_batch,
                        weights.gini_sample, weights.weight_decay};
    for (double v : w) {
        if (!(v >= 0.0))
            throw std::invalid_argument("config: loss weights must be nonnegative");
    }
    if (slice_width() <= 0)
        throw std::invalid_argument("config: M exceeds the sliced feature width");
    if (epochs <= 0 || batch_size <= 0)
        throw std::invalid_argument("config: schedule values must be positive");
    if (!(learning_rate > 0))
        throw std::invalid_argument("config: learning_rate must be positive");
}

void VectorSet::validate() const {
    if (count < 0 || dim <= 0)
        throw std::invalid_argument("vector set: bad shape");
    if (data.size() != static_cast<size_t>(count) * dim)
        throw std::invalid_argument("vector set: data size does not match count*dim");
    if (!labels.empty() && labels.size() != static_cast<size_t>(count))
        throw std::invalid_argument("vector set: label count does not match vector count");
    for (double v : data) {
        if (!std::isfinite(v))
            throw std::invalid_argument("vector set: non-finite entry");
    }
}

}  // namespace dpq

// SPDX-License-Identifier: Apache-2.0
#include "qmce/replay.hpp"

#include <cmath>
#include <unordered_set>

#include "qmce/errors.hpp"

namespace qmce {

StoredObs quantize_observation(std::span<const double> values) {
    auto stored = std::make_shared<std::vector<std::uint8_t>>();
    stored->reserve(values.size());
    for (double v : values) {
        if (!std::isfinite(v)) throw NumericError("non-finite observation value");
        const double clamped = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
        stored->push_back(static_cast<std::uint8_t>(std::lround(clamped * 255.0)));
    }
    return stored;
}

void dequantize_into(const StoredObs& obs, Eigen::Ref<Eigen::VectorXd> out) {
    if (obs == nullptr) throw ContractError("empty stored observation");
    if (out.size() != static_cast<Eigen::Index>(obs->size()))
        throw ContractError("dequantize output size mismatch");
    for (Eigen::Index i = 0; i < out.size(); ++i)
        out[i] = (*obs)[static_cast<std::size_t>(i)] / 255.0;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::uint64_t seed)
    : capacity_(capacity), rng_(seed) {
    if (capacity_ == 0) throw ContractError("replay capacity must be positive");
}

void ReplayBuffer::push(Transition transition) {
    if (transition.state == nullptr || transition.next_state == nullptr)
        throw ContractError("transition with empty observation");
    if (!std::isfinite(transition.reward))
        throw NumericError("non-finite reward");
    if (ring_.size() < capacity_) {
        ring_.push_back(std::move(transition));
    } else {
        ring_[write_pos_] = std::move(transition);
    }
    write_pos_ = (write_pos_ + 1) % capacity_;
}

std::vector<const Transition*> ReplayBuffer::sample(int batch_size) {
    if (batch_size <= 0) throw ContractError("batch size must be positive");
    if (static_cast<std::size_t>(batch_size) > ring_.size())
        throw ContractError("batch larger than buffer contents");

    // Floyd's algorithm: batch_size distinct indices, uniform without
    // replacement, deterministic under the buffer's seed.
    const std::size_t n = ring_.size();
    const std::size_t m = static_cast<std::size_t>(batch_size);
    std::unordered_set<std::size_t> chosen;
    std::vector<const Transition*> batch;
    batch.reserve(m);
    for (std::size_t j = n - m; j < n; ++j) {
        const std::size_t t = rng_.below(j + 1);
        const std::size_t pick = chosen.count(t) ? j : t;
        chosen.insert(pick);
        batch.push_back(&ring_[pick]);
    }
    return batch;
}

} // namespace qmce

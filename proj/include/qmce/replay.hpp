// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "qmce/rng.hpp"

namespace qmce {

/// Observations are stored quantized to the 1/255 grid. That is lossless
/// for everything this toolkit feeds the buffer (rendered frames use a
/// g/255 palette, tabular observations are one-hot) and keeps a
/// 28,224-dimensional observation at 28 KB instead of 226 KB.
using StoredObs = std::shared_ptr<const std::vector<std::uint8_t>>;

StoredObs quantize_observation(std::span<const double> values);
void dequantize_into(const StoredObs& obs, Eigen::Ref<Eigen::VectorXd> out);

/// One environment transition. Consecutive transitions share observation
/// storage (the next_state of step t is the state of step t+1).
struct Transition {
    StoredObs state;
    int action = 0;
    double reward = 0.0;
    StoredObs next_state;
    bool done = false;
};

/// Fixed-capacity ring of transitions with seeded uniform sampling; samples
/// within one batch are drawn without replacement.
class ReplayBuffer {
  public:
    ReplayBuffer(std::size_t capacity, std::uint64_t seed);

    void push(Transition transition);
    std::size_t size() const { return ring_.size(); }
    std::size_t capacity() const { return capacity_; }

    /// batch_size distinct indices, uniform over the current contents.
    /// Requires 0 < batch_size <= size().
    std::vector<const Transition*> sample(int batch_size);

    const Transition& at(std::size_t index) const { return ring_[index]; }

  private:
    std::size_t capacity_;
    std::size_t write_pos_ = 0;
    std::vector<Transition> ring_;
    Rng rng_;
};

} // namespace qmce

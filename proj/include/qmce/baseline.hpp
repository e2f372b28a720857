// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "qmce/dense.hpp"

namespace qmce {

/// Classical counterpart of the ensemble model. Each chip is replaced by a
/// dense stack that mirrors the pooling flow (l -> l/2 -> ... -> l/2^L -> 1,
/// tanh throughout, so pseudo-chip outputs stay in [-1, 1] like quantum
/// expectations); the pre-layer, the tanh*pi squash, the feature partition,
/// and the aggregation head are identical to the quantum pipeline, so the
/// baseline accepts exactly the same observations and emits the same action
/// space.
struct ClassicalBaseline {
    int input_dim = 0;
    int num_actions = 0;
    int k = 1;
    int l = 8;
    int num_layers = 2;
    std::uint64_t seed = 0;

    DenseLayer pre;                      // linear, input_dim -> k*l
    std::vector<DenseNet> pseudo_chips;  // k stacks, each l -> ... -> 1
    DenseNet head;                       // k -> hidden -> actions
};

ClassicalBaseline build_classical_baseline(int input_dim, int num_actions,
                                           int k, int l, int num_layers,
                                           std::uint64_t seed);

/// Total trainable scalars (regression-pinned in tests).
long baseline_parameter_count(const ClassicalBaseline& model);

Eigen::VectorXd baseline_forward(const ClassicalBaseline& model,
                                 const Eigen::Ref<const Eigen::VectorXd>& observation);
Eigen::MatrixXd baseline_forward_batch(const ClassicalBaseline& model,
                                       const Eigen::Ref<const Eigen::MatrixXd>& observations);

void baseline_zero_grad(ClassicalBaseline& model);
void baseline_backward_batch(ClassicalBaseline& model,
                             const Eigen::Ref<const Eigen::MatrixXd>& observations,
                             const Eigen::Ref<const Eigen::MatrixXd>& dloss_dq);

} // namespace qmce

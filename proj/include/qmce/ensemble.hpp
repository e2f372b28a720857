// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qmce/circuit.hpp"
#include "qmce/dense.hpp"

namespace qmce {

/// Multi-chip ensemble Q-model: a classical pre-layer squashes the
/// observation into k*l embedding angles (tanh, scaled by pi), the angles
/// are partitioned into k contiguous slices, each slice runs through an
/// independent chip with its own parameters (identical circuit structure),
/// and the k scalar expectations feed a classical aggregation head that
/// produces the Q-values. k = 1 is exactly the single-chip model.
///
/// Chips share no state, so perturbing one chip's parameters never moves
/// another chip's output, and their evaluations can run on any worker.
struct EnsembleModel {
    int input_dim = 0;
    int num_actions = 0;
    int k = 1;
    int l = 8;
    int num_layers = 2;
    std::uint64_t seed = 0;

    DenseLayer pre; // linear, input_dim -> k*l
    CircuitSpec chip_spec;
    std::vector<std::vector<double>> chip_params; // k x num_params
    DenseNet head;                                // k -> hidden -> actions

    std::vector<std::vector<double>> chip_grads; // accumulators, like above
};

/// Builds the default model: pre-layer and head seeded from `seed`, chip
/// parameters independently uniform in [-pi, pi], head = one hidden layer
/// of width max(k, 8) with ReLU, then linear to num_actions.
EnsembleModel make_ensemble_model(int input_dim, int num_actions, int k, int l,
                                  int num_layers, std::uint64_t seed);

/// Contiguous feature slices: chip i gets features[i*l .. (i+1)*l).
std::vector<std::span<const double>> partition(std::span<const double> features,
                                               int k, int l);

Eigen::VectorXd ensemble_forward(const EnsembleModel& model,
                                 const Eigen::Ref<const Eigen::VectorXd>& observation);
Eigen::MatrixXd ensemble_forward_batch(const EnsembleModel& model,
                                       const Eigen::Ref<const Eigen::MatrixXd>& observations);

/// The k chip expectations for one observation (diagnostic / test hook).
Eigen::VectorXd ensemble_chip_outputs(const EnsembleModel& model,
                                      const Eigen::Ref<const Eigen::VectorXd>& observation);

void ensemble_zero_grad(EnsembleModel& model);

/// Chain-rule gradients for a batch: the head by classical backprop, each
/// chip by the parameter-shift rule scaled by the head's sensitivity to its
/// output, the pre-layer through the chips' embedding-angle gradients and
/// the tanh*pi squash. Accumulates into the model's grad buffers. Chip
/// evaluations fan out over workers; reduction order is fixed, so results
/// are bit-reproducible.
void ensemble_backward_batch(EnsembleModel& model,
                             const Eigen::Ref<const Eigen::MatrixXd>& observations,
                             const Eigen::Ref<const Eigen::MatrixXd>& dloss_dq);

} // namespace qmce

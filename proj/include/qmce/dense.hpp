// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "qmce/rng.hpp"

namespace qmce {

enum class Activation { Linear, Relu, Tanh };

const char* activation_name(Activation a);
Activation activation_from_name(std::string_view name);

/// Fully connected layer with its gradient accumulators. Weights are
/// initialized uniformly in [-1/sqrt(in), 1/sqrt(in)] by make_dense_layer.
struct DenseLayer {
    int in_dim = 0;
    int out_dim = 0;
    Activation activation = Activation::Linear;
    Eigen::MatrixXd weights; // out x in
    Eigen::VectorXd bias;    // out
    Eigen::MatrixXd grad_weights;
    Eigen::VectorXd grad_bias;

    void zero_grad();
};

DenseLayer make_dense_layer(int in_dim, int out_dim, Activation activation,
                            Rng& rng);

/// activation(W x + b) for a single input column.
Eigen::VectorXd dense_forward(const DenseLayer& layer,
                              const Eigen::Ref<const Eigen::VectorXd>& input);

/// Batched variant; input is in_dim x batch.
Eigen::MatrixXd dense_forward_batch(const DenseLayer& layer,
                                    const Eigen::Ref<const Eigen::MatrixXd>& input);

/// Backward pass for a batch previously run through dense_forward_batch.
/// `pre` is the pre-activation W x + b of that pass, `input` its input.
/// Accumulates into grad_weights / grad_bias and returns dLoss/dInput.
Eigen::MatrixXd dense_backward(DenseLayer& layer,
                               const Eigen::Ref<const Eigen::MatrixXd>& input,
                               const Eigen::Ref<const Eigen::MatrixXd>& pre,
                               const Eigen::Ref<const Eigen::MatrixXd>& d_out);

Eigen::MatrixXd dense_preactivation(const DenseLayer& layer,
                                    const Eigen::Ref<const Eigen::MatrixXd>& input);
Eigen::MatrixXd apply_activation(Activation activation,
                                 const Eigen::Ref<const Eigen::MatrixXd>& pre);

/// Adam state for one flat parameter block. Step count drives the bias
/// correction; moments are lazily sized on first use.
struct AdamState {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    long step_count = 0;
    std::vector<double> first_moment;
    std::vector<double> second_moment;
};

/// Standard Adam update with bias correction. Throws NumericError on a
/// non-finite gradient so training halts with a diagnostic instead of
/// silently corrupting weights.
void adam_step(std::span<double> weights, std::span<const double> grads,
               AdamState& state, double alpha);

/// Plain layer stack.
struct DenseNet {
    std::vector<DenseLayer> layers;

    int input_dim() const { return layers.front().in_dim; }
    int output_dim() const { return layers.back().out_dim; }
    void zero_grad();
    Eigen::VectorXd forward(const Eigen::Ref<const Eigen::VectorXd>& input) const;
    Eigen::MatrixXd forward_batch(const Eigen::Ref<const Eigen::MatrixXd>& input) const;
};

/// Forward pass that keeps per-layer inputs/pre-activations for backprop.
struct DenseNetTrace {
    std::vector<Eigen::MatrixXd> inputs;
    std::vector<Eigen::MatrixXd> pres;
    Eigen::MatrixXd output;
};

DenseNetTrace dense_net_forward_traced(const DenseNet& net,
                                       const Eigen::Ref<const Eigen::MatrixXd>& input);
Eigen::MatrixXd dense_net_backward(DenseNet& net, const DenseNetTrace& trace,
                                   const Eigen::Ref<const Eigen::MatrixXd>& d_out);

} // namespace qmce

// SPDX-License-Identifier: Apache-2.0
#include "qmce/dense.hpp"

#include <cmath>
#include <string>

#include "qmce/errors.hpp"

namespace qmce {

const char* activation_name(Activation a) {
    switch (a) {
        case Activation::Linear: return "linear";
        case Activation::Relu: return "relu";
        case Activation::Tanh: return "tanh";
    }
    throw ContractError("unknown activation");
}

Activation activation_from_name(std::string_view name) {
    if (name == "linear") return Activation::Linear;
    if (name == "relu") return Activation::Relu;
    if (name == "tanh") return Activation::Tanh;
    throw ParseError("unknown activation '" + std::string(name) + "'");
}

void DenseLayer::zero_grad() {
    grad_weights.setZero();
    grad_bias.setZero();
}

DenseLayer make_dense_layer(int in_dim, int out_dim, Activation activation,
                            Rng& rng) {
    if (in_dim < 1 || out_dim < 1)
        throw ContractError("dense layer dimensions must be positive");
    DenseLayer layer;
    layer.in_dim = in_dim;
    layer.out_dim = out_dim;
    layer.activation = activation;
    layer.weights.resize(out_dim, in_dim);
    const double bound = 1.0 / std::sqrt(static_cast<double>(in_dim));
    for (int c = 0; c < in_dim; ++c)
        for (int r = 0; r < out_dim; ++r)
            layer.weights(r, c) = rng.uniform(-bound, bound);
    layer.bias = Eigen::VectorXd::Zero(out_dim);
    layer.grad_weights = Eigen::MatrixXd::Zero(out_dim, in_dim);
    layer.grad_bias = Eigen::VectorXd::Zero(out_dim);
    return layer;
}

Eigen::MatrixXd dense_preactivation(const DenseLayer& layer,
                                    const Eigen::Ref<const Eigen::MatrixXd>& input) {
    if (input.rows() != layer.in_dim)
        throw ContractError("dense layer input dimension mismatch: expected " +
                            std::to_string(layer.in_dim) + ", got " +
                            std::to_string(input.rows()));
    return (layer.weights * input).colwise() + layer.bias;
}

Eigen::MatrixXd apply_activation(Activation activation,
                                 const Eigen::Ref<const Eigen::MatrixXd>& pre) {
    switch (activation) {
        case Activation::Linear: return pre;
        case Activation::Relu: return pre.cwiseMax(0.0);
        case Activation::Tanh: return pre.array().tanh().matrix();
    }
    throw ContractError("unknown activation");
}

Eigen::VectorXd dense_forward(const DenseLayer& layer,
                              const Eigen::Ref<const Eigen::VectorXd>& input) {
    return dense_forward_batch(layer, input).col(0);
}

Eigen::MatrixXd dense_forward_batch(const DenseLayer& layer,
                                    const Eigen::Ref<const Eigen::MatrixXd>& input) {
    return apply_activation(layer.activation, dense_preactivation(layer, input));
}

Eigen::MatrixXd dense_backward(DenseLayer& layer,
                               const Eigen::Ref<const Eigen::MatrixXd>& input,
                               const Eigen::Ref<const Eigen::MatrixXd>& pre,
                               const Eigen::Ref<const Eigen::MatrixXd>& d_out) {
    Eigen::MatrixXd d_pre;
    switch (layer.activation) {
        case Activation::Linear: d_pre = d_out; break;
        case Activation::Relu:
            d_pre = (pre.array() > 0.0).cast<double>() * d_out.array();
            break;
        case Activation::Tanh: {
            const Eigen::ArrayXXd t = pre.array().tanh();
            d_pre = ((1.0 - t.square()) * d_out.array()).matrix();
            break;
        }
    }
    layer.grad_weights.noalias() += d_pre * input.transpose();
    layer.grad_bias.noalias() += d_pre.rowwise().sum();
    return layer.weights.transpose() * d_pre;
}

void adam_step(std::span<double> weights, std::span<const double> grads,
               AdamState& state, double alpha) {
    if (weights.size() != grads.size())
        throw ContractError("adam: weight/gradient size mismatch");
    if (!(alpha > 0.0)) throw ContractError("adam: learning rate must be > 0");
    if (state.first_moment.empty()) {
        state.first_moment.assign(weights.size(), 0.0);
        state.second_moment.assign(weights.size(), 0.0);
    }
    if (state.first_moment.size() != weights.size())
        throw ContractError("adam: state shaped for a different block");

    state.step_count += 1;
    const double c1 = 1.0 - std::pow(state.beta1, state.step_count);
    const double c2 = 1.0 - std::pow(state.beta2, state.step_count);
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const double g = grads[i];
        if (!std::isfinite(g))
            throw NumericError("adam: non-finite gradient at index " +
                               std::to_string(i));
        double& m = state.first_moment[i];
        double& v = state.second_moment[i];
        m = state.beta1 * m + (1.0 - state.beta1) * g;
        v = state.beta2 * v + (1.0 - state.beta2) * g * g;
        const double m_hat = m / c1;
        const double v_hat = v / c2;
        weights[i] -= alpha * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
}

void DenseNet::zero_grad() {
    for (auto& layer : layers) layer.zero_grad();
}

Eigen::VectorXd DenseNet::forward(
    const Eigen::Ref<const Eigen::VectorXd>& input) const {
    return forward_batch(input).col(0);
}

Eigen::MatrixXd DenseNet::forward_batch(
    const Eigen::Ref<const Eigen::MatrixXd>& input) const {
    Eigen::MatrixXd x = input;
    for (const auto& layer : layers) x = dense_forward_batch(layer, x);
    return x;
}

DenseNetTrace dense_net_forward_traced(
    const DenseNet& net, const Eigen::Ref<const Eigen::MatrixXd>& input) {
    DenseNetTrace trace;
    Eigen::MatrixXd x = input;
    for (const auto& layer : net.layers) {
        trace.inputs.push_back(x);
        Eigen::MatrixXd pre = dense_preactivation(layer, x);
        x = apply_activation(layer.activation, pre);
        trace.pres.push_back(std::move(pre));
    }
    trace.output = x;
    return trace;
}

Eigen::MatrixXd dense_net_backward(
    DenseNet& net, const DenseNetTrace& trace,
    const Eigen::Ref<const Eigen::MatrixXd>& d_out) {
    Eigen::MatrixXd d = d_out;
    for (int i = static_cast<int>(net.layers.size()) - 1; i >= 0; --i)
        d = dense_backward(net.layers[i], trace.inputs[i], trace.pres[i], d);
    return d;
}

} // namespace qmce

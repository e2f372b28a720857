// SPDX-License-Identifier: Apache-2.0
#include "qmce/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qmce/errors.hpp"
#include "qmce/gradients.hpp"
#include "qmce/parallel.hpp"
#include "qmce/rng.hpp"

namespace qmce {

namespace {

constexpr double kPi = std::numbers::pi;

// Stream tags for deriving independent sub-seeds from the model seed.
enum : std::uint64_t { kPreStream = 1, kHeadStream = 2, kChipStream0 = 16 };

void check_obs(const EnsembleModel& model, Eigen::Index rows) {
    if (rows != model.input_dim)
        throw ContractError("observation dimension mismatch: expected " +
                            std::to_string(model.input_dim) + ", got " +
                            std::to_string(rows));
}

// Embedding angles for a batch: pi * tanh(pre(x)).
Eigen::MatrixXd angles_batch(const EnsembleModel& model,
                             const Eigen::Ref<const Eigen::MatrixXd>& obs) {
    return kPi * dense_preactivation(model.pre, obs).array().tanh().matrix();
}

Eigen::MatrixXd chip_outputs_batch(const EnsembleModel& model,
                                   const Eigen::MatrixXd& angles) {
    const Eigen::Index batch = angles.cols();
    Eigen::MatrixXd outputs(model.k, batch);
    for (Eigen::Index b = 0; b < batch; ++b) {
        for (int i = 0; i < model.k; ++i) {
            const std::span<const double> slice(angles.col(b).data() +
                                                    static_cast<std::size_t>(i) * model.l,
                                                static_cast<std::size_t>(model.l));
            outputs(i, b) =
                qcnn_forward(model.chip_spec, model.chip_params[i], slice);
        }
    }
    return outputs;
}

} // namespace

EnsembleModel make_ensemble_model(int input_dim, int num_actions, int k, int l,
                                  int num_layers, std::uint64_t seed) {
    if (input_dim < 1) throw ContractError("input dimension must be positive");
    if (num_actions < 1) throw ContractError("need at least one action");
    if (k < 1) throw ContractError("chip count must be >= 1");

    EnsembleModel model;
    model.input_dim = input_dim;
    model.num_actions = num_actions;
    model.k = k;
    model.l = l;
    model.num_layers = num_layers;
    model.seed = seed;
    model.chip_spec = build_qcnn(l, num_layers);

    Rng pre_rng(Rng::derive(seed, kPreStream));
    model.pre = make_dense_layer(input_dim, k * l, Activation::Linear, pre_rng);

    model.chip_params.resize(k);
    model.chip_grads.resize(k);
    for (int i = 0; i < k; ++i) {
        Rng chip_rng(Rng::derive(seed, kChipStream0 + static_cast<std::uint64_t>(i)));
        auto& params = model.chip_params[i];
        params.resize(model.chip_spec.num_params);
        for (auto& p : params) p = chip_rng.uniform(-kPi, kPi);
        model.chip_grads[i].assign(params.size(), 0.0);
    }

    Rng head_rng(Rng::derive(seed, kHeadStream));
    const int hidden = std::max(k, 8);
    model.head.layers.push_back(
        make_dense_layer(k, hidden, Activation::Relu, head_rng));
    model.head.layers.push_back(
        make_dense_layer(hidden, num_actions, Activation::Linear, head_rng));
    return model;
}

std::vector<std::span<const double>> partition(std::span<const double> features,
                                               int k, int l) {
    if (k < 1 || l < 1) throw ContractError("partition needs k, l >= 1");
    if (features.size() != static_cast<std::size_t>(k) * static_cast<std::size_t>(l))
        throw ContractError("partition expects a k*l feature vector");
    std::vector<std::span<const double>> slices;
    slices.reserve(k);
    for (int i = 0; i < k; ++i)
        slices.push_back(features.subspan(static_cast<std::size_t>(i) * l,
                                          static_cast<std::size_t>(l)));
    return slices;
}

Eigen::VectorXd ensemble_forward(const EnsembleModel& model,
                                 const Eigen::Ref<const Eigen::VectorXd>& observation) {
    return ensemble_forward_batch(model, observation).col(0);
}

Eigen::MatrixXd ensemble_forward_batch(const EnsembleModel& model,
                                       const Eigen::Ref<const Eigen::MatrixXd>& observations) {
    check_obs(model, observations.rows());
    const Eigen::MatrixXd angles = angles_batch(model, observations);
    const Eigen::MatrixXd outputs = chip_outputs_batch(model, angles);
    return model.head.forward_batch(outputs);
}

Eigen::VectorXd ensemble_chip_outputs(const EnsembleModel& model,
                                      const Eigen::Ref<const Eigen::VectorXd>& observation) {
    check_obs(model, observation.rows());
    const Eigen::MatrixXd angles = angles_batch(model, observation);
    return chip_outputs_batch(model, angles).col(0);
}

void ensemble_zero_grad(EnsembleModel& model) {
    model.pre.zero_grad();
    model.head.zero_grad();
    for (auto& g : model.chip_grads) std::fill(g.begin(), g.end(), 0.0);
}

void ensemble_backward_batch(EnsembleModel& model,
                             const Eigen::Ref<const Eigen::MatrixXd>& observations,
                             const Eigen::Ref<const Eigen::MatrixXd>& dloss_dq) {
    check_obs(model, observations.rows());
    const Eigen::Index batch = observations.cols();
    if (dloss_dq.rows() != model.num_actions || dloss_dq.cols() != batch)
        throw ContractError("dloss_dq must be num_actions x batch");

    const Eigen::MatrixXd pre_z = dense_preactivation(model.pre, observations);
    const Eigen::MatrixXd angles = kPi * pre_z.array().tanh().matrix();
    const Eigen::MatrixXd outputs = chip_outputs_batch(model, angles);

    const DenseNetTrace head_trace = dense_net_forward_traced(model.head, outputs);
    const Eigen::MatrixXd d_outputs =
        dense_net_backward(model.head, head_trace, dloss_dq); // k x batch

    // Parameter-shift fan-out over (chip, sample) tasks; each task fills its
    // own slot, the reduction below runs in fixed order.
    const long tasks = static_cast<long>(model.k) * batch;
    std::vector<GradientRecord> records(static_cast<std::size_t>(tasks));
    parallel_for(tasks, worker_count(), [&](long t) {
        const int chip = static_cast<int>(t % model.k);
        const Eigen::Index b = static_cast<Eigen::Index>(t / model.k);
        if (d_outputs(chip, b) == 0.0) return; // head cut this chip out
        const std::span<const double> slice(
            angles.col(b).data() + static_cast<std::size_t>(chip) * model.l,
            static_cast<std::size_t>(model.l));
        records[static_cast<std::size_t>(t)] =
            grad_parameter_shift(model.chip_spec, model.chip_params[chip], slice);
    });

    Eigen::MatrixXd d_angles = Eigen::MatrixXd::Zero(angles.rows(), batch);
    for (long t = 0; t < tasks; ++t) {
        const int chip = static_cast<int>(t % model.k);
        const Eigen::Index b = static_cast<Eigen::Index>(t / model.k);
        const double sensitivity = d_outputs(chip, b);
        if (sensitivity == 0.0) continue;
        const GradientRecord& rec = records[static_cast<std::size_t>(t)];
        auto& grads = model.chip_grads[chip];
        for (std::size_t p = 0; p < grads.size(); ++p)
            grads[p] += sensitivity * rec.d_params[p];
        for (int j = 0; j < model.l; ++j)
            d_angles(static_cast<Eigen::Index>(chip) * model.l + j, b) +=
                sensitivity * rec.d_inputs[j];
    }

    // d angle / d pre_z = pi * (1 - tanh^2).
    const Eigen::MatrixXd d_pre_z =
        (d_angles.array() * kPi * (1.0 - pre_z.array().tanh().square())).matrix();
    model.pre.grad_weights.noalias() += d_pre_z * observations.transpose();
    model.pre.grad_bias.noalias() += d_pre_z.rowwise().sum();
}

} // namespace qmce

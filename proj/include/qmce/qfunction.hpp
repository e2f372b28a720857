// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <memory>
#include <string>

#include "qmce/baseline.hpp"
#include "qmce/ensemble.hpp"

namespace qmce {

/// Trainable action-value function. The DDQN loop is written against this
/// interface and never learns whether the model underneath is classical,
/// single-chip, or a multi-chip ensemble.
///
/// Weights are read-only during forward/accumulate passes; adam_update and
/// copy_weights_from are the single-writer operations between passes.
class QFunction {
  public:
    virtual ~QFunction() = default;

    virtual std::string model_kind() const = 0;
    virtual int input_dim() const = 0;
    virtual int num_actions() const = 0;

    virtual Eigen::VectorXd forward(
        const Eigen::Ref<const Eigen::VectorXd>& observation) const = 0;
    virtual Eigen::MatrixXd forward_batch(
        const Eigen::Ref<const Eigen::MatrixXd>& observations) const = 0;

    virtual void zero_grad() = 0;
    virtual void accumulate_grad(
        const Eigen::Ref<const Eigen::MatrixXd>& observations,
        const Eigen::Ref<const Eigen::MatrixXd>& dloss_dq) = 0;
    /// One Adam step over every trainable block, then gradients are stale;
    /// callers zero_grad before the next accumulation.
    virtual void adam_update(double alpha) = 0;

    virtual void copy_weights_from(const QFunction& other) = 0;
    virtual std::unique_ptr<QFunction> clone() const = 0;

    /// Every trainable scalar in a fixed documented order (pre-layer
    /// weights, pre-layer bias, chips in index order, head layers in order).
    virtual std::vector<double> flat_weights() const = 0;

    virtual void save(std::ostream& out) const = 0;
};

class EnsembleQFunction final : public QFunction {
  public:
    EnsembleQFunction(int input_dim, int num_actions, int k, int l,
                      int num_layers, std::uint64_t seed);
    explicit EnsembleQFunction(EnsembleModel model);

    std::string model_kind() const override { return "ensemble"; }
    int input_dim() const override { return model_.input_dim; }
    int num_actions() const override { return model_.num_actions; }
    Eigen::VectorXd forward(
        const Eigen::Ref<const Eigen::VectorXd>& observation) const override;
    Eigen::MatrixXd forward_batch(
        const Eigen::Ref<const Eigen::MatrixXd>& observations) const override;
    void zero_grad() override;
    void accumulate_grad(const Eigen::Ref<const Eigen::MatrixXd>& observations,
                         const Eigen::Ref<const Eigen::MatrixXd>& dloss_dq) override;
    void adam_update(double alpha) override;
    void copy_weights_from(const QFunction& other) override;
    std::unique_ptr<QFunction> clone() const override;
    std::vector<double> flat_weights() const override;
    void save(std::ostream& out) const override;

    const EnsembleModel& model() const { return model_; }
    EnsembleModel& model() { return model_; }

  private:
    EnsembleModel model_;
    AdamState pre_w_state_, pre_b_state_;
    std::vector<AdamState> chip_states_;
    std::vector<AdamState> head_w_states_, head_b_states_;
};

class ClassicalQFunction final : public QFunction {
  public:
    ClassicalQFunction(int input_dim, int num_actions, int k, int l,
                       int num_layers, std::uint64_t seed);
    explicit ClassicalQFunction(ClassicalBaseline model);

    std::string model_kind() const override { return "classical"; }
    int input_dim() const override { return model_.input_dim; }
    int num_actions() const override { return model_.num_actions; }
    Eigen::VectorXd forward(
        const Eigen::Ref<const Eigen::VectorXd>& observation) const override;
    Eigen::MatrixXd forward_batch(
        const Eigen::Ref<const Eigen::MatrixXd>& observations) const override;
    void zero_grad() override;
    void accumulate_grad(const Eigen::Ref<const Eigen::MatrixXd>& observations,
                         const Eigen::Ref<const Eigen::MatrixXd>& dloss_dq) override;
    void adam_update(double alpha) override;
    void copy_weights_from(const QFunction& other) override;
    std::unique_ptr<QFunction> clone() const override;
    std::vector<double> flat_weights() const override;
    void save(std::ostream& out) const override;

    const ClassicalBaseline& model() const { return model_; }
    ClassicalBaseline& model() { return model_; }

  private:
    ClassicalBaseline model_;
    AdamState pre_w_state_, pre_b_state_;
    std::vector<AdamState> chip_w_states_, chip_b_states_; // layer-major
    std::vector<AdamState> head_w_states_, head_b_states_;
};

/// Reads back a checkpoint written by QFunction::save (bit-exact weights).
std::unique_ptr<QFunction> load_qfunction(std::istream& in);

} // namespace qmce

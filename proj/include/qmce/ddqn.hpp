// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>

#include "qmce/qfunction.hpp"
#include "qmce/replay.hpp"

namespace qmce {

/// Double-DQN training knobs. Defaults mirror the reference setup:
/// discount 0.9, Adam step 0.00025, batch 32, per-step exploration decay
/// 0.99999999 with a 0.1 floor, hard target sync every 10,000 steps.
struct TrainConfig {
    double gamma = 0.9;
    double alpha = 0.00025;
    int batch_size = 32;
    double epsilon_start = 1.0;
    double epsilon_decay = 0.99999999;
    double epsilon_min = 0.1;
    long target_sync_every = 10000;
    long burn_in = 1000;
    int max_episodes = 500;
    std::uint64_t seed = 1;
};

/// Throws ConfigError when a field is outside its documented range.
void validate(const TrainConfig& config);

/// Epsilon-greedy selection: with probability epsilon a uniform action,
/// otherwise the argmax with ties broken toward the lowest index.
int select_action(std::span<const double> q_values, double epsilon, Rng& rng);

/// Eq. targets y = r + gamma * Q_target(s', argmax_a' Q_online(s', a')),
/// with y = r on terminal transitions. Action selection reads only the
/// online network, evaluation only the target network.
std::vector<double> ddqn_targets(const std::vector<const Transition*>& batch,
                                 const QFunction& online,
                                 const QFunction& target, double gamma);

/// One gradient step of the DDQN loop, called once per environment step.
/// Decays epsilon, samples a batch once the buffer holds
/// max(batch_size, burn_in) transitions, minimizes the mean squared TD
/// error with one Adam step, and hard-copies the target network every
/// target_sync_every calls. Returns the batch loss, or nothing while the
/// buffer is still warming up (a no-op, not an error).
class DdqnTrainer {
  public:
    DdqnTrainer(QFunction& online, QFunction& target, ReplayBuffer& buffer,
                TrainConfig config);

    std::optional<double> train_step();

    double epsilon() const { return epsilon_; }
    long step_count() const { return step_count_; }
    const TrainConfig& config() const { return config_; }

  private:
    QFunction& online_;
    QFunction& target_;
    ReplayBuffer& buffer_;
    TrainConfig config_;
    double epsilon_;
    long step_count_ = 0;
    Eigen::MatrixXd obs_batch_, next_batch_; // scratch, batch columns
};

} // namespace qmce

// SPDX-License-Identifier: Apache-2.0
#include "qmce/ddqn.hpp"

#include <algorithm>
#include <cmath>

#include "qmce/errors.hpp"

namespace qmce {

void validate(const TrainConfig& config) {
    if (!(config.gamma >= 0.0 && config.gamma < 1.0))
        throw ConfigError("gamma must lie in [0, 1)");
    if (!(config.alpha > 0.0)) throw ConfigError("alpha must be positive");
    if (config.batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (!(config.epsilon_start >= 0.0 && config.epsilon_start <= 1.0))
        throw ConfigError("epsilon_start must lie in [0, 1]");
    if (!(config.epsilon_min >= 0.0 && config.epsilon_min <= config.epsilon_start))
        throw ConfigError("epsilon_min must lie in [0, epsilon_start]");
    if (!(config.epsilon_decay > 0.0 && config.epsilon_decay <= 1.0))
        throw ConfigError("epsilon_decay must lie in (0, 1]");
    if (config.target_sync_every < 1)
        throw ConfigError("target_sync_every must be >= 1");
    if (config.burn_in < 0) throw ConfigError("burn_in must be >= 0");
    if (config.max_episodes < 1) throw ConfigError("max_episodes must be >= 1");
}

int select_action(std::span<const double> q_values, double epsilon, Rng& rng) {
    if (q_values.empty()) throw ContractError("empty Q-value vector");
    if (!(epsilon >= 0.0 && epsilon <= 1.0))
        throw ContractError("epsilon must lie in [0, 1]");
    if (epsilon > 0.0 && rng.uniform() < epsilon)
        return static_cast<int>(rng.below(q_values.size()));
    int best = 0;
    for (std::size_t a = 1; a < q_values.size(); ++a)
        if (q_values[a] > q_values[best]) best = static_cast<int>(a);
    return best;
}

std::vector<double> ddqn_targets(const std::vector<const Transition*>& batch,
                                 const QFunction& online,
                                 const QFunction& target, double gamma) {
    if (batch.empty()) throw ContractError("empty batch");
    if (online.num_actions() != target.num_actions())
        throw ContractError("online/target action spaces differ");

    const int dim = online.input_dim();
    Eigen::MatrixXd next(dim, static_cast<Eigen::Index>(batch.size()));
    for (std::size_t b = 0; b < batch.size(); ++b)
        dequantize_into(batch[b]->next_state,
                        next.col(static_cast<Eigen::Index>(b)));

    const Eigen::MatrixXd q_online = online.forward_batch(next);
    const Eigen::MatrixXd q_target = target.forward_batch(next);

    std::vector<double> targets(batch.size());
    for (std::size_t b = 0; b < batch.size(); ++b) {
        const Transition& t = *batch[b];
        if (t.done) {
            targets[b] = t.reward;
            continue;
        }
        Eigen::Index best = 0;
        q_online.col(static_cast<Eigen::Index>(b)).maxCoeff(&best);
        targets[b] =
            t.reward + gamma * q_target(best, static_cast<Eigen::Index>(b));
    }
    return targets;
}

DdqnTrainer::DdqnTrainer(QFunction& online, QFunction& target,
                         ReplayBuffer& buffer, TrainConfig config)
    : online_(online),
      target_(target),
      buffer_(buffer),
      config_(config),
      epsilon_(config.epsilon_start) {
    validate(config_);
    if (online_.num_actions() != target_.num_actions() ||
        online_.input_dim() != target_.input_dim())
        throw ContractError("online/target networks must share shapes");
}

std::optional<double> DdqnTrainer::train_step() {
    ++step_count_;
    epsilon_ = std::max(config_.epsilon_min, epsilon_ * config_.epsilon_decay);

    std::optional<double> loss;
    const std::size_t required = static_cast<std::size_t>(
        std::max<long>(config_.batch_size, config_.burn_in));
    if (buffer_.size() >= required) {
        const auto batch = buffer_.sample(config_.batch_size);
        const int dim = online_.input_dim();
        const Eigen::Index bsz = static_cast<Eigen::Index>(batch.size());
        if (obs_batch_.rows() != dim || obs_batch_.cols() != bsz) {
            obs_batch_.resize(dim, bsz);
            next_batch_.resize(dim, bsz);
        }
        for (Eigen::Index b = 0; b < bsz; ++b)
            dequantize_into(batch[static_cast<std::size_t>(b)]->state,
                            obs_batch_.col(b));
        const std::vector<double> targets =
            ddqn_targets(batch, online_, target_, config_.gamma);

        const Eigen::MatrixXd q = online_.forward_batch(obs_batch_);
        Eigen::MatrixXd dloss_dq =
            Eigen::MatrixXd::Zero(online_.num_actions(), bsz);
        double total = 0.0;
        for (Eigen::Index b = 0; b < bsz; ++b) {
            const Transition& t = *batch[static_cast<std::size_t>(b)];
            const double err =
                q(t.action, b) - targets[static_cast<std::size_t>(b)];
            total += err * err;
            dloss_dq(t.action, b) = 2.0 * err / static_cast<double>(bsz);
        }
        total /= static_cast<double>(bsz);
        if (!std::isfinite(total))
            throw NumericError("non-finite TD loss; aborting training");

        online_.zero_grad();
        online_.accumulate_grad(obs_batch_, dloss_dq);
        online_.adam_update(config_.alpha);
        loss = total;
    }

    if (step_count_ % config_.target_sync_every == 0)
        target_.copy_weights_from(online_);
    return loss;
}

} // namespace qmce

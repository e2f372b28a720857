// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <string>
#include <vector>

namespace qmce {

constexpr int kFrameSide = 84;
constexpr int kFramePixels = kFrameSide * kFrameSide;
constexpr int kStackDepth = 4;
constexpr int kObservationDim = kStackDepth * kFramePixels; // 28,224

/// 84x84 grayscale frame, row-major, values from the render palette.
using Frame = std::vector<std::uint8_t>;

/// Gray levels used by the renderer; observations are these over 255.
struct Palette {
    static constexpr std::uint8_t sky = 0;
    static constexpr std::uint8_t ground = 96;
    static constexpr std::uint8_t block = 160;
    static constexpr std::uint8_t flag = 224;
    static constexpr std::uint8_t agent = 255;
};

/// FIFO of the last four frames, oldest first. Reset repeats the first
/// frame so the stack is always full.
class FrameStack {
  public:
    void reset(const Frame& first);
    void push(const Frame& frame);
    /// Frame-major then row-major flattening, values in [0, 1].
    std::vector<double> flatten() const;
    const std::deque<Frame>& frames() const { return frames_; }

  private:
    std::deque<Frame> frames_;
};

/// Binary PGM (P5) round trip for golden frames.
void write_pgm(const std::string& path, const Frame& frame,
               int width = kFrameSide, int height = kFrameSide);
Frame read_pgm(const std::string& path, int expect_width = kFrameSide,
               int expect_height = kFrameSide);

struct StepResult {
    std::vector<double> observation;
    double reward = 0.0;
    bool done = false;
    struct Info {
        int x = 0;
        int y = 0;
        long ticks = 0;
        bool reached_flag = false;
        bool died = false;
    } info;
};

/// Episodic environment contract shared by the platformer and the tabular
/// MDP adapters; one instance per training thread.
class Env {
  public:
    virtual ~Env() = default;
    virtual int observation_dim() const = 0;
    virtual int num_actions() const = 0;
    virtual std::vector<double> reset() = 0;
    virtual StepResult step(int action) = 0;
};

/// Tile map of the side-scroller. Loaded from a plain-text file: equal-width
/// rows; the bottom row holds the ground profile ('#' ground, '.' gap, one
/// 'F' flag column); the row above may hold 'B' blocks and an optional 'S'
/// start marker; all higher rows are sky ('.').
struct WorldSpec {
    int width = 0;
    int height = 0;
    std::vector<std::string> rows;

    std::vector<bool> standable; // per column: ground or flag at the bottom
    std::vector<bool> block;     // per column: block directly above ground
    int flag_x = -1;
    int start_x = 0;

    // Jump kinematics: per arc tick, horizontal advance and height. The
    // fixed arc spans four ticks, peaks at two tiles and lands three
    // columns ahead, clearing gaps up to two tiles wide.
    std::array<int, 4> jump_dx{1, 1, 1, 0};
    std::array<int, 4> jump_dy{1, 2, 1, 0};
};

WorldSpec parse_world(const std::string& text);
WorldSpec load_world(const std::string& path);

/// Deterministic side-scroller with two actions (0 walk-right, 1 jump-right)
/// and the 4x84x84 stacked-frame observation contract.
///
/// Tick rules: walking advances one column unless a block is ahead; a jump
/// plays the fixed arc (actions during the arc are consumed, not acted on);
/// if the landing column holds a block the agent settles on the nearest
/// earlier non-block column of the arc. Standing on a gap column means
/// falling: the episode ends with the death penalty. Reward per tick is
/// (delta x) - 0.1, plus 50 on reaching the flag column (even mid-air) and
/// -25 on death. Episodes also end at the step limit.
class PlatformerEnv final : public Env {
  public:
    explicit PlatformerEnv(WorldSpec world, long step_limit = 1000);

    int observation_dim() const override { return kObservationDim; }
    int num_actions() const override { return 2; }
    std::vector<double> reset() override;
    StepResult step(int action) override;

    Frame render_frame() const;

    int x() const { return x_; }
    int y() const { return y_; }
    long ticks() const { return ticks_; }
    bool done() const { return done_; }
    const WorldSpec& world() const { return world_; }
    /// Leftmost visible column of the camera window.
    int camera() const;

  private:
    WorldSpec world_;
    long step_limit_;
    int x_ = 0;
    int y_ = 0;
    int jump_phase_ = -1; // -1 grounded, else completed arc ticks
    int jump_origin_ = 0;
    long ticks_ = 0;
    bool done_ = true;
    FrameStack stack_;
};

} // namespace qmce

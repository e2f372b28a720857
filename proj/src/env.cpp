// SPDX-License-Identifier: Apache-2.0
#include "qmce/env.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "qmce/errors.hpp"

namespace qmce {

namespace {

constexpr int kTilePx = 6;
constexpr int kViewTiles = kFrameSide / kTilePx; // 14
constexpr int kGroundRow = kViewTiles - 1;       // bottom tile row

void fill_tile(Frame& frame, int tile_col, int tile_row, std::uint8_t gray) {
    const int x0 = tile_col * kTilePx;
    const int y0 = tile_row * kTilePx;
    for (int dy = 0; dy < kTilePx; ++dy)
        for (int dx = 0; dx < kTilePx; ++dx)
            frame[static_cast<std::size_t>(y0 + dy) * kFrameSide + x0 + dx] = gray;
}

} // namespace

void FrameStack::reset(const Frame& first) {
    frames_.clear();
    for (int i = 0; i < kStackDepth; ++i) frames_.push_back(first);
}

void FrameStack::push(const Frame& frame) {
    if (frames_.size() >= kStackDepth) frames_.pop_front();
    frames_.push_back(frame);
}

std::vector<double> FrameStack::flatten() const {
    if (frames_.size() != kStackDepth)
        throw ContractError("frame stack not initialized");
    std::vector<double> out;
    out.reserve(kObservationDim);
    for (const Frame& f : frames_)
        for (std::uint8_t g : f) out.push_back(g / 255.0);
    return out;
}

void write_pgm(const std::string& path, const Frame& frame, int width,
               int height) {
    if (static_cast<int>(frame.size()) != width * height)
        throw ContractError("frame size does not match PGM dimensions");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write PGM file '" + path + "'");
    out << "P5\n" << width << ' ' << height << "\n255\n";
    out.write(reinterpret_cast<const char*>(frame.data()),
              static_cast<std::streamsize>(frame.size()));
}

Frame read_pgm(const std::string& path, int expect_width, int expect_height) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read PGM file '" + path + "'");
    std::string magic;
    int width = 0, height = 0, maxval = 0;
    in >> magic >> width >> height >> maxval;
    if (magic != "P5" || maxval != 255)
        throw ParseError("'" + path + "' is not a maxval-255 P5 PGM");
    if (width != expect_width || height != expect_height)
        throw ParseError("PGM dimensions mismatch in '" + path + "'");
    in.get(); // single whitespace after the header
    Frame frame(static_cast<std::size_t>(width) * height);
    in.read(reinterpret_cast<char*>(frame.data()),
            static_cast<std::streamsize>(frame.size()));
    if (in.gcount() != static_cast<std::streamsize>(frame.size()))
        throw ParseError("truncated PGM '" + path + "'");
    return frame;
}

WorldSpec parse_world(const std::string& text) {
    WorldSpec world;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == ';') continue; // comment lines
        if (!world.rows.empty() &&
            line.size() != world.rows.front().size())
            throw ConfigError("world line " + std::to_string(line_no) +
                              ": ragged row width");
        world.rows.push_back(line);
    }
    if (world.rows.size() < 2)
        throw ConfigError("world needs at least two rows");
    world.height = static_cast<int>(world.rows.size());
    world.width = static_cast<int>(world.rows.front().size());
    if (world.width < kViewTiles)
        throw ConfigError("world must be at least " +
                          std::to_string(kViewTiles) + " columns wide");

    const std::string& bottom = world.rows.back();
    const std::string& deck = world.rows[world.rows.size() - 2];
    world.standable.assign(world.width, false);
    world.block.assign(world.width, false);

    int start_marker = -1;
    for (int c = 0; c < world.width; ++c) {
        switch (bottom[static_cast<std::size_t>(c)]) {
            case '#': world.standable[c] = true; break;
            case '.': break;
            case 'F':
                if (world.flag_x >= 0)
                    throw ConfigError("world has more than one flag");
                world.flag_x = c;
                world.standable[c] = true;
                break;
            default:
                throw ConfigError("bad ground-row tile '" +
                                  std::string(1, bottom[c]) + "'");
        }
        switch (deck[static_cast<std::size_t>(c)]) {
            case 'B': world.block[c] = true; break;
            case 'S':
                if (start_marker >= 0)
                    throw ConfigError("world has more than one start marker");
                start_marker = c;
                break;
            case '.': break;
            default:
                throw ConfigError("bad deck-row tile '" +
                                  std::string(1, deck[c]) + "'");
        }
    }
    for (std::size_t r = 0; r + 2 < world.rows.size(); ++r)
        for (char ch : world.rows[r])
            if (ch != '.')
                throw ConfigError("sky rows may only contain '.'");

    if (world.flag_x < 0) throw ConfigError("world has no flag");
    if (start_marker >= 0) {
        world.start_x = start_marker;
    } else {
        const auto it =
            std::find(world.standable.begin(), world.standable.end(), true);
        world.start_x = static_cast<int>(it - world.standable.begin());
    }
    if (world.start_x >= world.width || !world.standable[world.start_x])
        throw ConfigError("start tile is not standable");
    if (world.block[world.start_x])
        throw ConfigError("start tile is blocked");
    return world;
}

WorldSpec load_world(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open world file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_world(buf.str());
}

PlatformerEnv::PlatformerEnv(WorldSpec world, long step_limit)
    : world_(std::move(world)), step_limit_(step_limit) {
    if (step_limit_ < 1) throw ConfigError("step limit must be positive");
}

int PlatformerEnv::camera() const {
    return std::clamp(x_ - 3, 0, world_.width - kViewTiles);
}

Frame PlatformerEnv::render_frame() const {
    Frame frame(kFramePixels, Palette::sky);
    const int cam = camera();
    for (int tc = 0; tc < kViewTiles; ++tc) {
        const int col = cam + tc;
        if (col >= world_.width) break;
        if (world_.standable[col]) fill_tile(frame, tc, kGroundRow, Palette::ground);
        if (world_.block[col]) fill_tile(frame, tc, kGroundRow - 1, Palette::block);
        if (col == world_.flag_x) {
            fill_tile(frame, tc, kGroundRow - 1, Palette::flag);
            fill_tile(frame, tc, kGroundRow - 2, Palette::flag);
        }
    }
    const int agent_col = x_ - cam;
    if (agent_col >= 0 && agent_col < kViewTiles)
        fill_tile(frame, agent_col, kGroundRow - 1 - y_, Palette::agent);
    return frame;
}

std::vector<double> PlatformerEnv::reset() {
    x_ = world_.start_x;
    y_ = 0;
    jump_phase_ = -1;
    jump_origin_ = x_;
    ticks_ = 0;
    done_ = false;
    stack_.reset(render_frame());
    return stack_.flatten();
}

StepResult PlatformerEnv::step(int action) {
    if (done_) throw ContractError("step after episode end");
    if (action != 0 && action != 1)
        throw ContractError("action must be 0 (walk) or 1 (jump)");

    ++ticks_;
    const int x_before = x_;
    bool reached_flag = false;
    bool died = false;

    if (jump_phase_ < 0 && action == 1) {
        jump_phase_ = 0;
        jump_origin_ = x_;
    }

    if (jump_phase_ >= 0) {
        const int t = jump_phase_;
        x_ = std::min(x_ + world_.jump_dx[t], world_.width - 1);
        y_ = world_.jump_dy[t];
        ++jump_phase_;
        if (x_ >= world_.flag_x) {
            reached_flag = true;
        } else if (jump_phase_ == static_cast<int>(world_.jump_dx.size())) {
            // Landing: back off over blocked columns toward the takeoff.
            while (x_ > jump_origin_ && world_.block[x_]) --x_;
            y_ = 0;
            jump_phase_ = -1;
            if (!world_.standable[x_]) died = true;
        }
    } else {
        const int next = std::min(x_ + 1, world_.width - 1);
        if (next != x_ && !world_.block[next]) x_ = next;
        if (x_ >= world_.flag_x) reached_flag = true;
        else if (!world_.standable[x_]) died = true;
    }

    StepResult result;
    result.reward = static_cast<double>(x_ - x_before) - 0.1;
    if (reached_flag) {
        result.reward += 50.0;
        done_ = true;
    } else if (died) {
        result.reward -= 25.0;
        done_ = true;
    } else if (ticks_ >= step_limit_) {
        done_ = true;
    }

    stack_.push(render_frame());
    result.observation = stack_.flatten();
    result.done = done_;
    result.info = {x_, y_, ticks_, reached_flag, died};
    return result;
}

} // namespace qmce

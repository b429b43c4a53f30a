#pragma once

#include <concepts>
#include <cstdint>
#include <string>
#include <vector>

#include "subsearch/rubik.hpp"
#include "subsearch/sokoban.hpp"

namespace subsearch {

// Static trait bundle describing a deterministic, fully observable puzzle.
// States are value types with equality and std::hash; actions carry a fixed
// encoding order used for deterministic tie-breaking.
template <typename E>
concept Environment = requires(const typename E::State& s, const typename E::Action& a,
                               const std::string& text, int i) {
    typename E::State;
    typename E::Action;
    { E::name() } -> std::convertible_to<std::string>;
    { E::next_state(s, a) } -> std::same_as<typename E::State>;
    { E::solved(s) } -> std::same_as<bool>;
    { E::valid_state(s) } -> std::same_as<bool>;
    { E::is_legal(s, a) } -> std::same_as<bool>;
    { E::legal_actions(s) } -> std::same_as<std::vector<typename E::Action>>;
    { E::action_count() } -> std::same_as<int>;
    { E::action_index(a) } -> std::same_as<int>;
    { E::action_from_index(i) } -> std::same_as<typename E::Action>;
    { E::encode(s) } -> std::same_as<std::string>;
    { E::macro_key(s) } -> std::same_as<std::string>;
    { E::encode_line(s) } -> std::same_as<std::string>;
    { E::decode_line(text) } -> std::same_as<typename E::State>;
    { E::encode_action(a) } -> std::same_as<std::string>;
    { E::decode_action(text) } -> std::same_as<typename E::Action>;
};

struct RubikEnv {
    using State = rubik::CubeState;
    using Action = rubik::Move;

    static std::string name() { return "rubik"; }
    static State next_state(const State& s, const Action& a) {
        return rubik::next_state(s, a);
    }
    static bool solved(const State& s) { return rubik::solved(s); }
    static bool valid_state(const State& s) {
        int counts[rubik::kFaces] = {};
        for (auto c : s.stickers) {
            if (c >= rubik::kFaces) return false;
            ++counts[c];
        }
        for (int f = 0; f < rubik::kFaces; ++f) {
            if (counts[f] != 9) return false;
            if (s.stickers[9 * f + 4] != f) return false;
        }
        return true;
    }
    static bool is_legal(const State&, const Action&) { return true; }
    static std::vector<Action> legal_actions(const State&) {
        std::vector<Action> out(rubik::kMoves);
        for (int i = 0; i < rubik::kMoves; ++i) out[i] = static_cast<Action>(i);
        return out;
    }
    static int action_count() { return rubik::kMoves; }
    static int action_index(const Action& a) { return static_cast<int>(a); }
    static Action action_from_index(int i) { return static_cast<Action>(i); }
    static std::string encode(const State& s) { return rubik::serialize(s); }
    static std::string encode_line(const State& s) { return rubik::serialize(s); }
    static State decode_line(const std::string& text) { return rubik::parse(text); }
    static std::string encode_action(const Action& a) { return rubik::move_name(a); }
    static Action decode_action(const std::string& text) {
        auto m = rubik::parse_move(text);
        if (!m) throw std::invalid_argument("rubik: bad move name '" + text + "'");
        return *m;
    }

    // (position, content) atoms for feature hashing.
    static void feature_atoms(const State& s,
                              std::vector<std::pair<std::uint16_t, std::uint8_t>>& out) {
        out.clear();
        out.reserve(rubik::kFacelets);
        for (int i = 0; i < rubik::kFacelets; ++i)
            out.emplace_back(static_cast<std::uint16_t>(i), s.stickers[i]);
    }

    // Context key for macro mining: the exact state. Near the goal this
    // makes the mined entry the exact finishing sequence.
    static std::string macro_key(const State& s) { return rubik::serialize(s); }
};

struct SokobanEnv {
    using State = sokoban::Board;
    using Action = sokoban::AgentAction;

    static std::string name() { return "sokoban"; }
    static State next_state(const State& s, const Action& a) {
        return sokoban::next_state(s, a);
    }
    static bool solved(const State& s) { return sokoban::solved(s); }
    static bool valid_state(const State& s) {
        if (s.width <= 0 || s.height <= 0 || s.agent < 0 ||
            s.agent >= s.width * s.height)
            return false;
        const auto n = static_cast<std::size_t>(s.width * s.height);
        if (s.walls.size() != n || s.targets.size() != n || s.boxes.size() != n)
            return false;
        if (s.walls[s.agent] || s.boxes[s.agent]) return false;
        std::size_t boxes = 0, targets = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (s.boxes[i] && s.walls[i]) return false;
            boxes += s.boxes[i];
            targets += s.targets[i];
        }
        return boxes == targets;
    }
    static bool is_legal(const State& s, const Action& a) {
        return sokoban::is_legal(s, a);
    }
    static std::vector<Action> legal_actions(const State& s) {
        return sokoban::legal_actions(s);
    }
    static int action_count() { return sokoban::kActions; }
    static int action_index(const Action& a) { return static_cast<int>(a); }
    static Action action_from_index(int i) { return static_cast<Action>(i); }
    static std::string encode(const State& s) { return sokoban::serialize_xsb(s); }
    // Single-line variant for record files: rows joined by '|'.
    static std::string encode_line(const State& s) {
        std::string text = sokoban::serialize_xsb(s);
        for (auto& c : text)
            if (c == '\n') c = '|';
        return text;
    }
    static State decode_line(const std::string& text) {
        std::string xsb = text;
        for (auto& c : xsb)
            if (c == '|') c = '\n';
        return sokoban::parse_xsb(xsb);
    }
    static std::string encode_action(const Action& a) {
        return std::string(1, sokoban::action_char(a));
    }
    static Action decode_action(const std::string& text) {
        if (text.size() == 1)
            if (auto a = sokoban::parse_action(text[0])) return *a;
        throw std::invalid_argument("sokoban: bad action '" + text + "'");
    }

    static void feature_atoms(const State& s,
                              std::vector<std::pair<std::uint16_t, std::uint8_t>>& out) {
        out.clear();
        const int n = s.width * s.height;
        out.reserve(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            std::uint8_t code = 0; // floor
            if (s.walls[i]) code = 1;
            else if (s.agent == i) code = s.targets[i] ? 6 : 5;
            else if (s.boxes[i]) code = s.targets[i] ? 4 : 3;
            else if (s.targets[i]) code = 2;
            out.emplace_back(static_cast<std::uint16_t>(i), code);
        }
    }

    // Context key for macro mining: the 3x3 window around the agent plus
    // coarse directions to the nearest off-target box and the nearest
    // unfilled target. Local patterns transfer across boards, unlike
    // whole-board context.
    static std::string macro_key(const State& s) {
        std::string key;
        key.reserve(13);
        const int ax = s.agent % s.width, ay = s.agent / s.width;
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                const int x = ax + dx, y = ay + dy;
                char c = '#';
                if (s.in_bounds(x, y)) {
                    const int i = s.cell(x, y);
                    if (s.walls[i]) c = '#';
                    else if (s.boxes[i]) c = s.targets[i] ? '*' : '$';
                    else if (s.targets[i]) c = '.';
                    else c = ' ';
                }
                key.push_back(c);
            }
        }
        auto nearest_dir = [&](auto&& want) {
            int best = std::numeric_limits<int>::max();
            int bx = 0, by = 0;
            for (int y = 0; y < s.height; ++y) {
                for (int x = 0; x < s.width; ++x) {
                    if (!want(s.cell(x, y))) continue;
                    const int d = std::abs(x - ax) + std::abs(y - ay);
                    if (d < best) {
                        best = d;
                        bx = x;
                        by = y;
                    }
                }
            }
            if (best == std::numeric_limits<int>::max()) return std::string("--");
            std::string dir;
            dir.push_back(bx < ax ? 'L' : bx > ax ? 'R' : '0');
            dir.push_back(by < ay ? 'U' : by > ay ? 'D' : '0');
            return dir;
        };
        key += nearest_dir([&](int i) { return s.boxes[i] && !s.targets[i]; });
        key += nearest_dir([&](int i) { return s.targets[i] && !s.boxes[i]; });
        return key;
    }
};

static_assert(Environment<RubikEnv>);
static_assert(Environment<SokobanEnv>);

} // namespace subsearch

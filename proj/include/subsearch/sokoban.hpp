#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "subsearch/common.hpp"

namespace subsearch::sokoban {

// XSB cell characters: '#' wall, ' ' floor, '.' target, '$' box,
// '*' box-on-target, '@' agent, '+' agent-on-target.
enum class AgentAction : std::uint8_t { Up, Down, Left, Right };
inline constexpr int kActions = 4;

inline char action_char(AgentAction a) {
    return "UDLR"[static_cast<int>(a)];
}

inline std::optional<AgentAction> parse_action(char c) {
    switch (c) {
        case 'U': return AgentAction::Up;
        case 'D': return AgentAction::Down;
        case 'L': return AgentAction::Left;
        case 'R': return AgentAction::Right;
        default: return std::nullopt;
    }
}

struct Board {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> walls;    // size width*height
    std::vector<std::uint8_t> targets;  // size width*height
    std::vector<std::uint8_t> boxes;    // size width*height
    int agent = -1;                     // cell index

    bool operator==(const Board&) const = default;

    int cell(int x, int y) const { return y * width + x; }
    bool in_bounds(int x, int y) const {
        return x >= 0 && x < width && y >= 0 && y < height;
    }
};

struct BoardHash {
    std::size_t operator()(const Board& b) const {
        std::uint64_t h = fnv1a(b.walls.data(), b.walls.size());
        h = fnv1a(b.targets.data(), b.targets.size(), h);
        h = fnv1a(b.boxes.data(), b.boxes.size(), h);
        h = hash_combine(h, static_cast<std::uint64_t>(b.agent));
        h = hash_combine(h, static_cast<std::uint64_t>(b.width));
        return static_cast<std::size_t>(h);
    }
};

struct ParseError : std::runtime_error {
    int line, column;
    ParseError(const std::string& msg, int line_, int col_)
        : std::runtime_error(msg + " (line " + std::to_string(line_) +
                             ", column " + std::to_string(col_) + ")"),
          line(line_), column(col_) {}
};

// Lines starting with ';' are comments. Short rows are padded with floor.
inline Board parse_xsb(std::string_view text) {
    std::vector<std::string> rows;
    std::string cur;
    for (char c : text) {
        if (c == '\n') {
            rows.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) rows.push_back(cur);
    std::erase_if(rows, [](const std::string& r) { return !r.empty() && r[0] == ';'; });
    while (!rows.empty() && rows.back().empty()) rows.pop_back();
    if (rows.empty()) throw ParseError("xsb parse: empty board", 1, 1);

    Board b;
    b.height = static_cast<int>(rows.size());
    for (const auto& r : rows)
        b.width = std::max(b.width, static_cast<int>(r.size()));
    const int n = b.width * b.height;
    b.walls.assign(n, 0);
    b.targets.assign(n, 0);
    b.boxes.assign(n, 0);

    int box_count = 0, target_count = 0;
    for (int y = 0; y < b.height; ++y) {
        const std::string& row = rows[y];
        for (int x = 0; x < b.width; ++x) {
            const char c = x < static_cast<int>(row.size()) ? row[x] : ' ';
            const int i = b.cell(x, y);
            switch (c) {
                case '#': b.walls[i] = 1; break;
                case ' ': break;
                case '.': b.targets[i] = 1; ++target_count; break;
                case '$': b.boxes[i] = 1; ++box_count; break;
                case '*':
                    b.boxes[i] = 1;
                    b.targets[i] = 1;
                    ++box_count;
                    ++target_count;
                    break;
                case '@':
                case '+':
                    if (b.agent >= 0)
                        throw ParseError("xsb parse: duplicate agent", y + 1, x + 1);
                    b.agent = i;
                    if (c == '+') {
                        b.targets[i] = 1;
                        ++target_count;
                    }
                    break;
                default:
                    throw ParseError(std::string("xsb parse: unknown character '") +
                                         c + "'",
                                     y + 1, x + 1);
            }
        }
    }
    if (b.agent < 0) throw ParseError("xsb parse: missing agent", b.height, 1);
    if (box_count != target_count)
        throw ParseError("xsb parse: " + std::to_string(box_count) + " boxes vs " +
                             std::to_string(target_count) + " targets",
                         b.height, 1);
    return b;
}

inline std::string serialize_xsb(const Board& b) {
    std::string out;
    out.reserve(static_cast<std::size_t>((b.width + 1) * b.height));
    for (int y = 0; y < b.height; ++y) {
        for (int x = 0; x < b.width; ++x) {
            const int i = b.cell(x, y);
            char c = ' ';
            if (b.walls[i]) c = '#';
            else if (b.agent == i) c = b.targets[i] ? '+' : '@';
            else if (b.boxes[i]) c = b.targets[i] ? '*' : '$';
            else if (b.targets[i]) c = '.';
            out.push_back(c);
        }
        if (y + 1 < b.height) out.push_back('\n');
    }
    return out;
}

inline std::pair<int, int> action_delta(AgentAction a) {
    switch (a) {
        case AgentAction::Up: return {0, -1};
        case AgentAction::Down: return {0, 1};
        case AgentAction::Left: return {-1, 0};
        default: return {1, 0};
    }
}

inline bool is_legal(const Board& b, AgentAction a) {
    const auto [dx, dy] = action_delta(a);
    const int ax = b.agent % b.width, ay = b.agent / b.width;
    const int nx = ax + dx, ny = ay + dy;
    if (!b.in_bounds(nx, ny)) return false;
    const int ni = b.cell(nx, ny);
    if (b.walls[ni]) return false;
    if (b.boxes[ni]) {
        const int bx = nx + dx, by = ny + dy;
        if (!b.in_bounds(bx, by)) return false;
        const int bi = b.cell(bx, by);
        if (b.walls[bi] || b.boxes[bi]) return false;
    }
    return true;
}

inline std::vector<AgentAction> legal_actions(const Board& b) {
    std::vector<AgentAction> out;
    for (int a = 0; a < kActions; ++a)
        if (is_legal(b, static_cast<AgentAction>(a)))
            out.push_back(static_cast<AgentAction>(a));
    return out;
}

inline Board next_state(const Board& b, AgentAction a) {
    if (!is_legal(b, a))
        throw std::invalid_argument("sokoban next_state: illegal action " +
                                    std::string(1, action_char(a)));
    const auto [dx, dy] = action_delta(a);
    Board out = b;
    const int ax = b.agent % b.width, ay = b.agent / b.width;
    const int ni = b.cell(ax + dx, ay + dy);
    if (out.boxes[ni]) {
        out.boxes[ni] = 0;
        out.boxes[b.cell(ax + 2 * dx, ay + 2 * dy)] = 1;
    }
    out.agent = ni;
    return out;
}

inline bool solved(const Board& b) {
    return b.boxes == b.targets;
}

// A box on a non-target cell with two perpendicular adjacent walls can never
// be moved again.
inline bool corner_deadlocked(const Board& b) {
    for (int y = 0; y < b.height; ++y) {
        for (int x = 0; x < b.width; ++x) {
            const int i = b.cell(x, y);
            if (!b.boxes[i] || b.targets[i]) continue;
            auto wall = [&](int wx, int wy) {
                return !b.in_bounds(wx, wy) || b.walls[b.cell(wx, wy)];
            };
            const bool up = wall(x, y - 1), down = wall(x, y + 1);
            const bool left = wall(x - 1, y), right = wall(x + 1, y);
            if ((up || down) && (left || right)) return true;
        }
    }
    return false;
}

enum class SolveStatus { Solved, Unsolvable, NodeLimit };

struct ExhaustiveResult {
    SolveStatus status;
    std::vector<AgentAction> path; // empty unless status == Solved
    std::size_t nodes_expanded = 0;
};

// Breadth-first search over (agent, boxes) configurations. Returns a
// shortest action path. With `prune` set, branches whose push just created a
// corner deadlock are cut.
inline ExhaustiveResult exhaustive_solve(const Board& start, std::size_t node_limit,
                                         bool prune = true) {
    ExhaustiveResult res{SolveStatus::Unsolvable, {}, 0};
    if (solved(start)) {
        res.status = SolveStatus::Solved;
        return res;
    }
    if (prune && corner_deadlocked(start)) return res;

    struct Rec {
        std::int32_t parent;
        std::uint8_t action;
    };
    std::unordered_map<Board, std::int32_t, BoardHash> id_of;
    std::vector<Board> states;
    std::vector<Rec> recs;
    states.push_back(start);
    recs.push_back({-1, 0});
    id_of.emplace(start, 0);

    for (std::size_t head = 0; head < states.size(); ++head) {
        if (res.nodes_expanded >= node_limit) {
            res.status = SolveStatus::NodeLimit;
            return res;
        }
        ++res.nodes_expanded;
        const Board cur = states[head];
        for (int a = 0; a < kActions; ++a) {
            const auto act = static_cast<AgentAction>(a);
            if (!is_legal(cur, act)) continue;
            Board nxt = next_state(cur, act);
            if (id_of.contains(nxt)) continue;
            if (prune && corner_deadlocked(nxt)) continue;
            const auto id = static_cast<std::int32_t>(states.size());
            id_of.emplace(nxt, id);
            states.push_back(nxt);
            recs.push_back({static_cast<std::int32_t>(head),
                            static_cast<std::uint8_t>(a)});
            if (solved(nxt)) {
                std::vector<AgentAction> path;
                for (std::int32_t i = id; recs[i].parent >= 0; i = recs[i].parent)
                    path.push_back(static_cast<AgentAction>(recs[i].action));
                std::reverse(path.begin(), path.end());
                res.status = SolveStatus::Solved;
                res.path = std::move(path);
                return res;
            }
        }
    }
    return res;
}

// Multi-board corpus files: boards separated by lines containing '---',
// ';'-prefixed comment lines ignored.
inline std::vector<Board> parse_corpus(std::string_view text) {
    std::vector<Board> boards;
    std::string chunk;
    auto flush = [&] {
        if (chunk.find_first_not_of(" \n") != std::string::npos)
            boards.push_back(parse_xsb(chunk));
        chunk.clear();
    };
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        const std::string_view line =
            text.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
        if (line.rfind("---", 0) == 0) {
            flush();
        } else if (!(line.size() && line[0] == ';')) {
            chunk.append(line);
            chunk.push_back('\n');
        }
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    flush();
    return boards;
}

inline std::string serialize_corpus(const std::vector<Board>& boards,
                                    const std::vector<std::string>& header_comments = {}) {
    std::string out;
    for (const auto& c : header_comments) out += "; " + c + "\n";
    for (std::size_t i = 0; i < boards.size(); ++i) {
        if (i) out += "---\n";
        out += serialize_xsb(boards[i]);
        out += "\n";
    }
    return out;
}

} // namespace subsearch::sokoban

template <>
struct std::hash<subsearch::sokoban::Board> {
    std::size_t operator()(const subsearch::sokoban::Board& b) const {
        return subsearch::sokoban::BoardHash{}(b);
    }
};

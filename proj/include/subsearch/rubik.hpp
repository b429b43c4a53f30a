#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "subsearch/common.hpp"

namespace subsearch::rubik {

// Facelet encoding: faces U,R,F,D,L,B in that order, 9 facelets each,
// row-major within a face. Face f, row r, col c -> index 9*f + 3*r + c.
// Rows/columns follow the standard net layout: U is read back-to-front as
// seen from above, D front-to-back as seen from below, the four side faces
// top-to-bottom as seen from outside the face.
inline constexpr int kFacelets = 54;
inline constexpr int kFaces = 6;
inline constexpr char kFaceChars[kFaces + 1] = "URFDLB";

struct CubeState {
    std::array<std::uint8_t, kFacelets> stickers{}; // values 0..5, face colors

    bool operator==(const CubeState&) const = default;
};

inline CubeState solved_cube() {
    CubeState s;
    for (int i = 0; i < kFacelets; ++i)
        s.stickers[i] = static_cast<std::uint8_t>(i / 9);
    return s;
}

// Quarter turns. Even value = clockwise, odd = counterclockwise; move / 2
// names the face in URFDLB order.
enum class Move : std::uint8_t {
    U, Up, R, Rp, F, Fp, D, Dp, L, Lp, B, Bp,
};
inline constexpr int kMoves = 12;

inline Move inverse(Move m) {
    auto v = static_cast<std::uint8_t>(m);
    return static_cast<Move>(v ^ 1u);
}

inline int move_face(Move m) { return static_cast<int>(m) / 2; }

inline std::string move_name(Move m) {
    static const char* names[kMoves] = {"U", "U'", "R", "R'", "F", "F'",
                                        "D", "D'", "L", "L'", "B", "B'"};
    return names[static_cast<int>(m)];
}

inline std::optional<Move> parse_move(std::string_view s) {
    for (int i = 0; i < kMoves; ++i)
        if (move_name(static_cast<Move>(i)) == s) return static_cast<Move>(i);
    return std::nullopt;
}

namespace detail {

// Facelet centers in integer coordinates. Tangent coordinates are in
// {-1,0,1}; the outward normal coordinate is +/-3 so face stickers and side
// strips never collide. Frames chosen so that the corner/edge adjacency
// matches the standard URFDLB net (U1 touches L and B, D1 touches L and F,
// B is read right-to-left in world x).
struct Vec {
    int x, y, z;
    bool operator==(const Vec&) const = default;
};

inline Vec facelet_coords(int idx) {
    const int f = idx / 9, r = (idx % 9) / 3, c = idx % 3;
    switch (f) {
        case 0: return {c - 1, 3, r - 1};      // U: row back->front
        case 1: return {3, 1 - r, 1 - c};      // R: col front->back
        case 2: return {c - 1, 1 - r, 3};      // F
        case 3: return {c - 1, -3, 1 - r};     // D: row front->back
        case 4: return {-3, 1 - r, c - 1};     // L: col back->front
        default: return {1 - c, 1 - r, -3};    // B: col right->left
    }
}

inline Vec rotate(const Vec& v, int axis, bool positive_quarter) {
    // Right-handed quarter turns about +x / +y / +z.
    auto rot = [&](int a, int b) {
        // +90 about the axis maps (a,b) -> (-b,a); -90 maps (a,b) -> (b,-a).
        return positive_quarter ? std::pair<int, int>{-b, a}
                                : std::pair<int, int>{b, -a};
    };
    Vec r = v;
    if (axis == 0) { auto [a, b] = rot(v.y, v.z); r.y = a; r.z = b; }
    if (axis == 1) { auto [a, b] = rot(v.z, v.x); r.z = a; r.x = b; }
    if (axis == 2) { auto [a, b] = rot(v.x, v.y); r.x = a; r.y = b; }
    return r;
}

inline std::array<std::array<std::uint8_t, kFacelets>, kMoves> perms_check(
    std::array<std::array<std::uint8_t, kFacelets>, kMoves> p) {
    for (const auto& perm : p) {
        std::array<bool, kFacelets> hit{};
        for (int i = 0; i < kFacelets; ++i) {
            if (hit[perm[i]]) throw std::logic_error("rubik: perm not a bijection");
            hit[perm[i]] = true;
        }
    }
    return p;
}

// perm[m][i] = destination index of the sticker at facelet i under move m.
inline const std::array<std::array<std::uint8_t, kFacelets>, kMoves>& move_perms() {
    static const auto perms = [] {
        std::array<std::array<std::uint8_t, kFacelets>, kMoves> out{};
        // face -> (axis, sign of outward normal)
        constexpr int axis_of[kFaces] = {1, 0, 2, 1, 0, 2};
        constexpr int sign_of[kFaces] = {+1, +1, +1, -1, -1, -1};
        std::array<Vec, kFacelets> coords{};
        for (int i = 0; i < kFacelets; ++i) coords[i] = facelet_coords(i);
        auto index_of = [&](const Vec& v) {
            for (int i = 0; i < kFacelets; ++i)
                if (coords[i] == v) return i;
            throw std::logic_error("rubik: rotated facelet has no home");
        };
        for (int m = 0; m < kMoves; ++m) {
            const int face = m / 2;
            const bool ccw_named = (m % 2) != 0;
            const int axis = axis_of[face];
            const int sign = sign_of[face];
            // A clockwise turn viewed from outside the face is a -90 degree
            // rotation about the outward normal; flip once for the normal's
            // sign and once more for primed moves.
            bool positive = (sign > 0) ? ccw_named : !ccw_named;
            for (int i = 0; i < kFacelets; ++i) {
                const Vec& p = coords[i];
                const int along = axis == 0 ? p.x : axis == 1 ? p.y : p.z;
                if (sign > 0 ? along < 1 : along > -1) {
                    out[m][i] = static_cast<std::uint8_t>(i);
                } else {
                    out[m][i] = static_cast<std::uint8_t>(
                        index_of(rotate(p, axis, positive)));
                }
            }
        }
        return perms_check(out);
    }();
    return perms;
}

} // namespace detail

inline CubeState next_state(const CubeState& s, Move m) {
    const auto& perm = detail::move_perms()[static_cast<int>(m)];
    CubeState out;
    for (int i = 0; i < kFacelets; ++i) out.stickers[perm[i]] = s.stickers[i];
    return out;
}

inline bool solved(const CubeState& s) {
    for (int f = 0; f < kFaces; ++f) {
        const std::uint8_t center = s.stickers[9 * f + 4];
        for (int i = 0; i < 9; ++i)
            if (s.stickers[9 * f + i] != center) return false;
    }
    return true;
}

inline std::string serialize(const CubeState& s) {
    std::string out(kFacelets, '?');
    for (int i = 0; i < kFacelets; ++i) out[i] = kFaceChars[s.stickers[i]];
    return out;
}

inline CubeState parse(std::string_view text) {
    if (text.size() != kFacelets)
        throw std::invalid_argument("cube parse: expected 54 characters, got " +
                                    std::to_string(text.size()));
    CubeState s;
    std::array<int, kFaces> counts{};
    for (int i = 0; i < kFacelets; ++i) {
        const char* p = std::char_traits<char>::find(kFaceChars, kFaces, text[i]);
        if (!p)
            throw std::invalid_argument(std::string("cube parse: bad color '") +
                                        text[i] + "' at position " + std::to_string(i));
        s.stickers[i] = static_cast<std::uint8_t>(p - kFaceChars);
        ++counts[s.stickers[i]];
    }
    for (int f = 0; f < kFaces; ++f) {
        if (counts[f] != 9)
            throw std::invalid_argument("cube parse: color multiset invalid");
        if (s.stickers[9 * f + 4] != f)
            throw std::invalid_argument("cube parse: center facelet mismatch");
    }
    return s;
}

// `length` uniformly random quarter turns, consecutive moves never on the
// same face. Returns the scrambled state and the move list applied to the
// solved cube.
inline std::pair<CubeState, std::vector<Move>> scramble(std::size_t length,
                                                        std::uint64_t seed) {
    Rng rng(seed);
    CubeState s = solved_cube();
    std::vector<Move> moves;
    moves.reserve(length);
    int last_face = -1;
    for (std::size_t i = 0; i < length; ++i) {
        Move m;
        do {
            m = static_cast<Move>(uniform_index(rng, kMoves));
        } while (move_face(m) == last_face);
        last_face = move_face(m);
        s = next_state(s, m);
        moves.push_back(m);
    }
    return {s, moves};
}

struct CubeHash {
    std::size_t operator()(const CubeState& s) const {
        return static_cast<std::size_t>(fnv1a(s.stickers.data(), kFacelets));
    }
};

// Breadth-first ball around the solved state. Grown lazily one layer at a
// time; lookups outside the explored radius report absence.
class DistanceMemo {
public:
    explicit DistanceMemo(int max_depth_feasible = 6)
        : feasible_(max_depth_feasible) {
        dist_.emplace(solved_cube(), 0);
        frontier_.push_back(solved_cube());
    }

    // Exact quarter-turn distance to solved if <= max_depth, else nullopt.
    std::optional<int> distance(const CubeState& s, int max_depth) {
        if (max_depth > feasible_)
            throw std::invalid_argument("rubik bfs: max_depth exceeds feasible bound");
        ensure_depth(max_depth);
        auto it = dist_.find(s);
        if (it == dist_.end() || it->second > max_depth) return std::nullopt;
        return it->second;
    }

    int explored_depth() const { return depth_; }
    std::size_t size() const { return dist_.size(); }

    void ensure_depth(int d) {
        while (depth_ < d) {
            std::vector<CubeState> next;
            for (const auto& s : frontier_) {
                for (int m = 0; m < kMoves; ++m) {
                    CubeState t = next_state(s, static_cast<Move>(m));
                    if (dist_.emplace(t, depth_ + 1).second) next.push_back(t);
                }
            }
            frontier_ = std::move(next);
            ++depth_;
        }
    }

private:
    int feasible_;
    int depth_ = 0;
    std::unordered_map<CubeState, int, CubeHash> dist_;
    std::vector<CubeState> frontier_;
};

inline std::optional<int> bfs_distance(DistanceMemo& memo, const CubeState& s,
                                       int max_depth) {
    return memo.distance(s, max_depth);
}

} // namespace subsearch::rubik

template <>
struct std::hash<subsearch::rubik::CubeState> {
    std::size_t operator()(const subsearch::rubik::CubeState& s) const {
        return subsearch::rubik::CubeHash{}(s);
    }
};

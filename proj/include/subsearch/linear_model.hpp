#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "subsearch/common.hpp"

namespace subsearch {

// Sparse linear models over a hashed feature space, the learned stand-in for
// every scorer in the pipeline. Three kinds share the representation:
// multiclass softmax (policy), scalar regression (value), binary logistic
// (verifier). Inputs are lists of active feature indices (implicit value 1).
enum class ModelKind : std::uint8_t { Multiclass, Regression, Logistic };

struct LinearModel {
    ModelKind kind = ModelKind::Regression;
    std::uint32_t dim = 0;       // feature space size D
    std::uint32_t classes = 1;   // >1 only for Multiclass
    std::uint64_t seed = 0;      // training seed, kept for provenance
    std::vector<float> weights;  // classes * dim, row per class
    std::vector<float> bias;     // size classes

    float score(std::uint32_t cls, const std::vector<std::uint32_t>& features) const {
        const float* row = weights.data() + static_cast<std::size_t>(cls) * dim;
        float s = bias[cls];
        for (auto f : features) s += row[f];
        return s;
    }

    void logits(const std::vector<std::uint32_t>& features, std::vector<float>& out) const {
        out.resize(classes);
        for (std::uint32_t c = 0; c < classes; ++c) out[c] = score(c, features);
    }

    // Logistic output, strictly inside (0,1); scores are clamped so the
    // sigmoid never saturates to an exact 0 or 1.
    double probability(const std::vector<std::uint32_t>& features) const {
        const double s =
            std::clamp(static_cast<double>(score(0, features)), -30.0, 30.0);
        return 1.0 / (1.0 + std::exp(-s));
    }
};

struct TrainParams {
    int epochs = 6;
    double learning_rate = 0.05;
    double lr_decay = 0.8;   // per-epoch multiplier
    std::uint64_t seed = 1;
};

struct TrainSample {
    std::vector<std::uint32_t> features;
    double target = 0.0; // class index, regression target, or {0,1} label
};

// Plain SGD, deterministic given (seed, sample order, params). Samples are
// reshuffled each epoch with the model RNG.
inline LinearModel train_linear_model(const std::vector<TrainSample>& samples,
                                      ModelKind kind, std::uint32_t dim,
                                      std::uint32_t classes, const TrainParams& params) {
    if (kind != ModelKind::Multiclass && classes != 1)
        throw std::invalid_argument("train_linear_model: classes only for multiclass");
    if (kind == ModelKind::Multiclass && classes < 2)
        throw std::invalid_argument("train_linear_model: multiclass needs >= 2 classes");
    for (const auto& s : samples) {
        if (!std::isfinite(s.target))
            throw std::invalid_argument("train_linear_model: non-finite target");
        for (auto f : s.features)
            if (f >= dim) throw std::invalid_argument("train_linear_model: feature >= D");
    }

    LinearModel m;
    m.kind = kind;
    m.dim = dim;
    m.classes = classes;
    m.seed = params.seed;
    m.weights.assign(static_cast<std::size_t>(dim) * classes, 0.0f);
    m.bias.assign(classes, 0.0f);

    Rng rng(params.seed);
    std::vector<std::size_t> order(samples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    std::vector<float> logits;
    double lr = params.learning_rate;
    for (int epoch = 0; epoch < params.epochs; ++epoch) {
        deterministic_shuffle(order, rng);
        for (std::size_t oi : order) {
            const auto& s = samples[oi];
            switch (kind) {
                case ModelKind::Regression: {
                    const double pred = m.score(0, s.features);
                    const auto g = static_cast<float>(lr * (pred - s.target));
                    m.bias[0] -= g;
                    for (auto f : s.features) m.weights[f] -= g;
                    break;
                }
                case ModelKind::Logistic: {
                    const double p = m.probability(s.features);
                    const auto g = static_cast<float>(lr * (p - s.target));
                    m.bias[0] -= g;
                    for (auto f : s.features) m.weights[f] -= g;
                    break;
                }
                case ModelKind::Multiclass: {
                    m.logits(s.features, logits);
                    double mx = logits[0];
                    for (auto v : logits) mx = std::max(mx, static_cast<double>(v));
                    double z = 0.0;
                    for (auto v : logits) z += std::exp(static_cast<double>(v) - mx);
                    const auto label = static_cast<std::uint32_t>(s.target);
                    if (label >= classes)
                        throw std::invalid_argument("train_linear_model: label >= classes");
                    for (std::uint32_t c = 0; c < classes; ++c) {
                        const double p = std::exp(static_cast<double>(logits[c]) - mx) / z;
                        const double grad = p - (c == label ? 1.0 : 0.0);
                        const auto g = static_cast<float>(lr * grad);
                        if (g == 0.0f) continue;
                        m.bias[c] -= g;
                        float* row = m.weights.data() + static_cast<std::size_t>(c) * m.dim;
                        for (auto f : s.features) row[f] -= g;
                    }
                    break;
                }
            }
        }
        lr *= params.lr_decay;
    }
    return m;
}

// --- persistence ------------------------------------------------------------
//
// Binary container, little-endian:
//   magic "SSLM" | u32 version=1 | u8 kind | u32 dim | u32 classes |
//   u64 seed | f32 bias[classes] | u64 nnz | nnz * (u32 index, f32 weight)
// Indices are into the flattened classes*dim weight array; only non-zero
// weights are stored. Round trips are bit-exact.

namespace detail {

template <typename T>
void put(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw std::runtime_error("model load: truncated file");
    return v;
}

} // namespace detail

inline void save_linear_model(const LinearModel& m, std::ostream& os) {
    os.write("SSLM", 4);
    detail::put<std::uint32_t>(os, 1);
    detail::put<std::uint8_t>(os, static_cast<std::uint8_t>(m.kind));
    detail::put<std::uint32_t>(os, m.dim);
    detail::put<std::uint32_t>(os, m.classes);
    detail::put<std::uint64_t>(os, m.seed);
    for (float b : m.bias) detail::put<float>(os, b);
    std::uint64_t nnz = 0;
    for (float w : m.weights) nnz += (w != 0.0f);
    detail::put<std::uint64_t>(os, nnz);
    for (std::size_t i = 0; i < m.weights.size(); ++i) {
        if (m.weights[i] != 0.0f) {
            detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(i));
            detail::put<float>(os, m.weights[i]);
        }
    }
}

inline LinearModel load_linear_model(std::istream& is) {
    char magic[4];
    is.read(magic, 4);
    if (!is || std::string_view(magic, 4) != "SSLM")
        throw std::runtime_error("model load: bad magic");
    const auto version = detail::get<std::uint32_t>(is);
    if (version != 1) throw std::runtime_error("model load: unsupported version");
    LinearModel m;
    m.kind = static_cast<ModelKind>(detail::get<std::uint8_t>(is));
    m.dim = detail::get<std::uint32_t>(is);
    m.classes = detail::get<std::uint32_t>(is);
    m.seed = detail::get<std::uint64_t>(is);
    m.bias.resize(m.classes);
    for (auto& b : m.bias) b = detail::get<float>(is);
    m.weights.assign(static_cast<std::size_t>(m.dim) * m.classes, 0.0f);
    const auto nnz = detail::get<std::uint64_t>(is);
    for (std::uint64_t i = 0; i < nnz; ++i) {
        const auto idx = detail::get<std::uint32_t>(is);
        const auto w = detail::get<float>(is);
        if (idx >= m.weights.size()) throw std::runtime_error("model load: index range");
        m.weights[idx] = w;
    }
    return m;
}

inline void save_linear_model_file(const LinearModel& m, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("model save: cannot open " + path);
    save_linear_model(m, os);
}

inline LinearModel load_linear_model_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("model load: cannot open " + path);
    return load_linear_model(is);
}

} // namespace subsearch

#include "idface/embedding.hpp"

#include <cmath>

namespace idface {

namespace {

double norm_of(std::span<const float> v) {
    double acc = 0.0;
    for (float x : v) acc += static_cast<double>(x) * static_cast<double>(x);
    return std::sqrt(acc);
}

}  // namespace

IdEmbedding IdEmbedding::normalize(std::span<const float> v) {
    if (v.size() != kIdDim)
        throw dimension_mismatch_error("expected 512 values, got " + std::to_string(v.size()));
    const double norm = norm_of(v);
    if (norm < 1e-12) throw zero_vector_error("norm below 1e-12, cannot normalize");
    IdEmbedding e;
    for (int i = 0; i < kIdDim; ++i)
        e.values_[static_cast<size_t>(i)] = static_cast<float>(v[static_cast<size_t>(i)] / norm);
    return e;
}

IdEmbedding IdEmbedding::from_unit(std::span<const float> v, float tol) {
    if (v.size() != kIdDim)
        throw dimension_mismatch_error("expected 512 values, got " + std::to_string(v.size()));
    const double norm = norm_of(v);
    if (std::abs(norm - 1.0) > tol)
        throw zero_vector_error("vector is not unit norm (|v| = " + std::to_string(norm) + ")");
    IdEmbedding e;
    for (int i = 0; i < kIdDim; ++i) e.values_[static_cast<size_t>(i)] = v[static_cast<size_t>(i)];
    return e;
}

double cosine_similarity(const IdEmbedding& a, const IdEmbedding& b) {
    double acc = 0.0;
    for (int i = 0; i < kIdDim; ++i) acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    return acc;
}

IdEmbedding average_embeddings(const std::vector<IdEmbedding>& list) {
    if (list.empty()) throw empty_input_error("average_embeddings on empty list");
    std::array<double, kIdDim> mean{};
    for (const auto& e : list)
        for (int i = 0; i < kIdDim; ++i) mean[static_cast<size_t>(i)] += e[i];
    std::array<float, kIdDim> m{};
    for (int i = 0; i < kIdDim; ++i)
        m[static_cast<size_t>(i)] =
            static_cast<float>(mean[static_cast<size_t>(i)] / static_cast<double>(list.size()));
    return IdEmbedding::normalize(m);
}

IdEmbedding interpolate(const IdEmbedding& a, const IdEmbedding& b, double alpha) {
    if (alpha < 0.0 || alpha > 1.0)
        throw config_error("interpolation alpha must be in [0,1], got " + std::to_string(alpha));
    std::array<float, kIdDim> mix{};
    for (int i = 0; i < kIdDim; ++i)
        mix[static_cast<size_t>(i)] = static_cast<float>((1.0 - alpha) * a[i] + alpha * b[i]);
    return IdEmbedding::normalize(mix);
}

PaddedEmbedding zero_pad(const IdEmbedding& w) {
    PaddedEmbedding p;
    p.values.fill(0.0f);
    for (int i = 0; i < kIdDim; ++i) p.values[static_cast<size_t>(i)] = w[i];
    return p;
}

IdEmbedding truncate(const PaddedEmbedding& p) {
    return IdEmbedding::from_unit({p.values.data(), kIdDim});
}

}  // namespace idface

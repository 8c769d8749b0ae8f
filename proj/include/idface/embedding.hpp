#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "idface/errors.hpp"

namespace idface {

inline constexpr int kIdDim = 512;    // face-recognition feature width
inline constexpr int kCondDim = 768;  // token-embedding width of the prompt encoder

// Unit-norm 512-d identity vector. Construct through normalize() (or the
// trusted raw constructor used by file loaders, which re-checks the norm).
class IdEmbedding {
public:
    IdEmbedding() { values_.fill(0.0f); }

    static IdEmbedding normalize(std::span<const float> v);

    // Accepts an already unit-norm vector; verifies the invariant.
    static IdEmbedding from_unit(std::span<const float> v, float tol = 1e-5f);

    const std::array<float, kIdDim>& values() const { return values_; }
    float operator[](int i) const { return values_[static_cast<size_t>(i)]; }
    std::span<const float> span() const { return {values_.data(), values_.size()}; }

private:
    std::array<float, kIdDim> values_;
};

// 768-d vector carrying an IdEmbedding in the first 512 entries, zeros after.
struct PaddedEmbedding {
    std::array<float, kCondDim> values;
};

struct EmbeddingSet {
    std::vector<IdEmbedding> embeddings;
    std::vector<std::string> ids;  // parallel subject labels

    size_t size() const { return embeddings.size(); }
    void push_back(const IdEmbedding& e, std::string id) {
        embeddings.push_back(e);
        ids.push_back(std::move(id));
    }
};

double cosine_similarity(const IdEmbedding& a, const IdEmbedding& b);

IdEmbedding average_embeddings(const std::vector<IdEmbedding>& list);

// normalize((1-alpha)*a + alpha*b), alpha in [0,1]
IdEmbedding interpolate(const IdEmbedding& a, const IdEmbedding& b, double alpha);

PaddedEmbedding zero_pad(const IdEmbedding& w);

// First 512 entries of a padded vector, re-checked as unit norm.
IdEmbedding truncate(const PaddedEmbedding& p);

}  // namespace idface

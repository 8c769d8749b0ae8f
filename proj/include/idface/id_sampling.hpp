#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "idface/embedding.hpp"
#include "idface/pca.hpp"

namespace idface {

struct SyntheticIdSpec {
    int n_ids = 1;
    int imgs_per_id = 1;
    double intra_class_sigma = 0.4;
    double uniqueness_threshold = 0.3;
    uint64_t seed = 0;
};

struct SyntheticIdClass {
    IdEmbedding center;
    std::vector<IdEmbedding> members;
};

// Draws class centers from the PCA Gaussian (mean + sum_k c_k*sqrt(var_k)*comp_k,
// c ~ N(0,I), normalized) with greedy rejection against all previously accepted
// centers at the uniqueness threshold. Members are normalize(center + sigma*g)
// with g standard normal in the ambient space. Class i draws from a stream
// seeded with seed + i, so results do not depend on scheduling. Throws
// SamplingExhausted after 1000 * n_ids total candidate draws.
std::vector<SyntheticIdClass> sample_novel_ids(const PcaModel& model, const SyntheticIdSpec& spec);

// Argmax of cosine similarity over the corpus, ties broken by lowest index.
std::pair<size_t, double> nearest_match(const IdEmbedding& query, const EmbeddingSet& corpus);

}  // namespace idface

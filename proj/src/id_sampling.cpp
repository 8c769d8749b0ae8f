#include "idface/id_sampling.hpp"

#include <cmath>

#include "idface/rng.hpp"

namespace idface {

namespace {

IdEmbedding draw_center(const PcaModel& model, Rng& rng) {
    const int d = static_cast<int>(model.dim);
    std::vector<double> v(model.mean);
    for (uint32_t i = 0; i < model.k(); ++i) {
        const double c = rng.normal() * std::sqrt(std::max(0.0, model.variances[i]));
        const double* comp = model.component(i);
        for (int j = 0; j < d; ++j) v[static_cast<size_t>(j)] += c * comp[j];
    }
    std::vector<float> f(v.begin(), v.end());
    return IdEmbedding::normalize(f);
}

IdEmbedding draw_member(const IdEmbedding& center, double sigma, Rng& rng) {
    std::vector<float> v(kIdDim);
    for (int j = 0; j < kIdDim; ++j)
        v[static_cast<size_t>(j)] = static_cast<float>(center[j] + sigma * rng.normal());
    return IdEmbedding::normalize(v);
}

}  // namespace

std::vector<SyntheticIdClass> sample_novel_ids(const PcaModel& model,
                                               const SyntheticIdSpec& spec) {
    if (spec.n_ids < 1 || spec.imgs_per_id < 1)
        throw config_error("n_ids and imgs_per_id must be positive");
    if (spec.intra_class_sigma < 0.0) throw config_error("intra_class_sigma must be non-negative");
    if (spec.uniqueness_threshold <= 0.0 || spec.uniqueness_threshold > 1.0)
        throw config_error("uniqueness_threshold must be in (0,1]");

    const long budget = 1000L * spec.n_ids;
    long draws = 0;
    std::vector<SyntheticIdClass> classes;
    classes.reserve(static_cast<size_t>(spec.n_ids));

    for (int i = 0; i < spec.n_ids; ++i) {
        Rng rng(spec.seed + static_cast<uint64_t>(i));
        IdEmbedding center;
        bool accepted = false;
        while (!accepted) {
            if (draws >= budget)
                throw sampling_exhausted_error("uniqueness filter rejected " +
                                               std::to_string(budget) + " candidate draws");
            ++draws;
            center = draw_center(model, rng);
            accepted = true;
            for (const auto& cls : classes) {
                if (cosine_similarity(center, cls.center) >= spec.uniqueness_threshold) {
                    accepted = false;
                    break;
                }
            }
        }
        SyntheticIdClass cls;
        cls.center = center;
        cls.members.reserve(static_cast<size_t>(spec.imgs_per_id));
        for (int m = 0; m < spec.imgs_per_id; ++m)
            cls.members.push_back(draw_member(center, spec.intra_class_sigma, rng));
        classes.push_back(std::move(cls));
    }
    return classes;
}

std::pair<size_t, double> nearest_match(const IdEmbedding& query, const EmbeddingSet& corpus) {
    if (corpus.size() == 0) throw empty_corpus_error("nearest_match on empty corpus");
    size_t best = 0;
    double best_sim = cosine_similarity(query, corpus.embeddings[0]);
    for (size_t i = 1; i < corpus.size(); ++i) {
        const double sim = cosine_similarity(query, corpus.embeddings[i]);
        if (sim > best_sim) {
            best_sim = sim;
            best = i;
        }
    }
    return {best, best_sim};
}

}  // namespace idface

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "idface/embedding.hpp"

namespace idface {

// Principal components of an embedding corpus. Rows of `components` are
// orthonormal directions sorted by decreasing variance. `total_variance` is
// the full corpus variance (trace of the covariance) recorded at fit time,
// which the explained-variance curve is measured against.
struct PcaModel {
    uint32_t dim = 0;
    std::vector<double> mean;        // dim
    std::vector<double> components;  // k x dim, row-major
    std::vector<double> variances;   // k, non-increasing
    double total_variance = 0.0;
    bool degenerate = false;  // fewer than k non-trivial directions in the corpus

    uint32_t k() const { return static_cast<uint32_t>(variances.size()); }
    const double* component(uint32_t i) const {
        return components.data() + static_cast<size_t>(i) * dim;
    }
};

// SVD of the centered data matrix. Requires 2 <= corpus size and
// k <= min(dim, size-1). Sets `degenerate` when the corpus has fewer than k
// directions with variance above 1e-12.
PcaModel fit_pca(const EmbeddingSet& corpus, int k);

// Prefix sums of variances divided by total variance; non-decreasing,
// final element <= 1 + 1e-9.
std::vector<double> explained_variance_curve(const PcaModel& model);

// Center, project onto the first k components, reconstruct, un-center,
// re-normalize. k must be in [1, model.k()].
IdEmbedding project_reconstruct(const PcaModel& model, const IdEmbedding& w, int k);

// "PCA1" binary container: magic, u32 k, u32 dim, f32 mean[dim],
// f32 components[k*dim], f32 variances[k], f64 total_variance, little-endian.
void write_pca(const std::string& path, const PcaModel& model);
PcaModel read_pca(const std::string& path);

}  // namespace idface

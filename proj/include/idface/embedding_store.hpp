#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "idface/embedding.hpp"

namespace idface {

// Generic contents of an "EMB1" store: `count` rows of `dim` float32 values
// plus parallel labels. Layout on disk:
//   bytes 0..3   ASCII magic "EMB1"
//   bytes 4..7   u32 little-endian count
//   bytes 8..11  u32 little-endian dimension
//   then count*dim little-endian f32, row-major
//   then count newline-terminated UTF-8 labels
struct EmbeddingStore {
    uint32_t dim = 0;
    std::vector<float> data;  // count * dim
    std::vector<std::string> labels;

    uint32_t count() const { return static_cast<uint32_t>(labels.size()); }
    const float* row(uint32_t i) const { return data.data() + static_cast<size_t>(i) * dim; }
};

void write_store(const std::string& path, const EmbeddingStore& store);
EmbeddingStore read_store(const std::string& path);

// 512-d convenience wrappers used by the identity pipeline.
void write_embedding_set(const std::string& path, const EmbeddingSet& set);
EmbeddingSet load_embedding_set(const std::string& path);

EmbeddingStore store_from_set(const EmbeddingSet& set);
EmbeddingSet set_from_store(const EmbeddingStore& store);

}  // namespace idface

#include "idface/embedding_store.hpp"

#include <cstring>
#include <fstream>

namespace idface {

namespace {

constexpr char kMagic[4] = {'E', 'M', 'B', '1'};

void put_u32(std::ostream& os, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_u32(std::istream& is, const std::string& path, std::streamoff offset) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4))
        throw format_error(path + ": truncated at offset " + std::to_string(offset));
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

}  // namespace

void write_store(const std::string& path, const EmbeddingStore& store) {
    if (store.data.size() != static_cast<size_t>(store.count()) * store.dim)
        throw dimension_mismatch_error("store data size does not match count*dim");
    for (const auto& label : store.labels)
        if (label.find('\n') != std::string::npos)
            throw format_error("label contains newline: " + label);
    std::ofstream os(path, std::ios::binary);
    if (!os) throw unreadable_input_error("cannot open for write: " + path);
    os.write(kMagic, 4);
    put_u32(os, store.count());
    put_u32(os, store.dim);
    static_assert(sizeof(float) == 4);
    // float32 is little-endian on every supported target
    os.write(reinterpret_cast<const char*>(store.data.data()),
             static_cast<std::streamsize>(store.data.size() * 4));
    for (const auto& label : store.labels) os << label << '\n';
    if (!os) throw unreadable_input_error("write failed: " + path);
}

EmbeddingStore read_store(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw unreadable_input_error("cannot open: " + path);
    char magic[4];
    if (!is.read(magic, 4)) throw format_error(path + ": truncated at offset 0");
    if (std::memcmp(magic, kMagic, 4) != 0)
        throw format_error(path + ": bad magic at offset 0, expected \"EMB1\"");
    EmbeddingStore store;
    const uint32_t count = get_u32(is, path, 4);
    store.dim = get_u32(is, path, 8);
    if (store.dim == 0) throw format_error(path + ": zero dimension at offset 8");
    const size_t n_floats = static_cast<size_t>(count) * store.dim;
    store.data.resize(n_floats);
    if (!is.read(reinterpret_cast<char*>(store.data.data()),
                 static_cast<std::streamsize>(n_floats * 4)))
        throw format_error(path + ": truncated payload at offset " +
                           std::to_string(12 + is.gcount()));
    store.labels.reserve(count);
    for (uint32_t i = 0; i < count; ++i) {
        std::string label;
        if (!std::getline(is, label))
            throw format_error(path + ": missing label " + std::to_string(i) + " at offset " +
                               std::to_string(12 + static_cast<std::streamoff>(n_floats) * 4));
        store.labels.push_back(std::move(label));
    }
    return store;
}

void write_embedding_set(const std::string& path, const EmbeddingSet& set) {
    write_store(path, store_from_set(set));
}

EmbeddingSet load_embedding_set(const std::string& path) {
    return set_from_store(read_store(path));
}

EmbeddingStore store_from_set(const EmbeddingSet& set) {
    EmbeddingStore store;
    store.dim = kIdDim;
    store.labels = set.ids;
    store.data.reserve(set.size() * kIdDim);
    for (const auto& e : set.embeddings)
        store.data.insert(store.data.end(), e.values().begin(), e.values().end());
    return store;
}

EmbeddingSet set_from_store(const EmbeddingStore& store) {
    if (store.dim != kIdDim)
        throw dimension_mismatch_error("expected dimension 512, got " + std::to_string(store.dim));
    EmbeddingSet set;
    for (uint32_t i = 0; i < store.count(); ++i)
        set.push_back(IdEmbedding::normalize({store.row(i), kIdDim}), store.labels[i]);
    return set;
}

}  // namespace idface

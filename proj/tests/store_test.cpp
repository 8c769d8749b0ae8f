#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <vector>

#include "idface/embedding_store.hpp"
#include "idface/rng.hpp"

using namespace idface;
namespace fs = std::filesystem;

namespace {

fs::path tmp_dir() {
    fs::path dir = fs::path(IDFACE_TEST_TMP) / "store";
    fs::create_directories(dir);
    return dir;
}

EmbeddingSet make_set(int n, uint64_t seed) {
    Rng rng(seed);
    EmbeddingSet set;
    for (int i = 0; i < n; ++i) {
        std::vector<float> v(kIdDim);
        for (auto& x : v) x = static_cast<float>(rng.normal());
        set.push_back(IdEmbedding::normalize(v), "subject_" + std::to_string(i));
    }
    return set;
}

}  // namespace

TEST_CASE("EMB1 round trip preserves values and labels") {
    auto set = make_set(9, 42);
    const auto path = (tmp_dir() / "roundtrip.emb").string();
    write_embedding_set(path, set);
    auto loaded = load_embedding_set(path);
    REQUIRE(loaded.size() == set.size());
    for (size_t i = 0; i < set.size(); ++i) {
        CHECK(loaded.ids[i] == set.ids[i]);
        for (int j = 0; j < kIdDim; ++j)
            CHECK(loaded.embeddings[i][j] == doctest::Approx(set.embeddings[i][j]).epsilon(1e-6));
    }
}

TEST_CASE("EMB1 rejects bad magic with offset diagnostic") {
    const auto path = (tmp_dir() / "badmagic.emb").string();
    {
        std::ofstream os(path, std::ios::binary);
        os << "XXXX" << std::string(64, '\0');
    }
    CHECK_THROWS_WITH_AS(read_store(path), doctest::Contains("offset 0"), Error);
}

TEST_CASE("EMB1 rejects truncated payload") {
    auto set = make_set(4, 43);
    const auto good = (tmp_dir() / "good.emb").string();
    write_embedding_set(good, set);

    std::ifstream is(good, std::ios::binary);
    std::vector<char> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    const auto cut = (tmp_dir() / "cut.emb").string();
    {
        std::ofstream os(cut, std::ios::binary);
        os.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
    }
    CHECK_THROWS_WITH_AS(read_store(cut), doctest::Contains("truncated"), Error);
}

TEST_CASE("EMB1 rejects missing labels") {
    auto set = make_set(3, 44);
    const auto good = (tmp_dir() / "good2.emb").string();
    write_embedding_set(good, set);

    std::ifstream is(good, std::ios::binary);
    std::vector<char> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    // keep header + floats, drop the label block
    const size_t keep = 12 + 3 * kIdDim * 4;
    const auto nolabel = (tmp_dir() / "nolabel.emb").string();
    {
        std::ofstream os(nolabel, std::ios::binary);
        os.write(bytes.data(), static_cast<std::streamsize>(keep));
    }
    CHECK_THROWS_WITH_AS(read_store(nolabel), doctest::Contains("label"), Error);
}

TEST_CASE("store with non-512 dimension is readable generically but rejected as a set") {
    EmbeddingStore store;
    store.dim = 8;
    store.data = std::vector<float>(16, 0.5f);
    store.labels = {"a", "b"};
    const auto path = (tmp_dir() / "dim8.emb").string();
    write_store(path, store);
    auto loaded = read_store(path);
    CHECK(loaded.dim == 8);
    CHECK(loaded.count() == 2);
    CHECK_THROWS_WITH_AS(set_from_store(loaded), doctest::Contains("DimensionMismatch"), Error);
}

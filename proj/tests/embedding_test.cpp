#include <doctest.h>

#include <cmath>
#include <vector>

#include "idface/embedding.hpp"
#include "idface/rng.hpp"

using namespace idface;

namespace {

std::vector<float> basis(int i) {
    std::vector<float> v(kIdDim, 0.0f);
    v[static_cast<size_t>(i)] = 1.0f;
    return v;
}

IdEmbedding random_embedding(Rng& rng) {
    std::vector<float> v(kIdDim);
    for (auto& x : v) x = static_cast<float>(rng.normal());
    return IdEmbedding::normalize(v);
}

}  // namespace

TEST_CASE("normalize: unit vector unchanged, scaling invariant") {
    auto e1 = IdEmbedding::normalize(basis(0));
    CHECK(e1[0] == doctest::Approx(1.0f));

    auto v = basis(0);
    v[0] = 2.0f;
    auto scaled = IdEmbedding::normalize(v);
    for (int i = 0; i < kIdDim; ++i) CHECK(scaled[i] == e1[i]);
}

TEST_CASE("normalize: all-ones vector") {
    std::vector<float> ones(kIdDim, 1.0f);
    auto e = IdEmbedding::normalize(ones);
    const double expected = 1.0 / std::sqrt(512.0);  // 0.044194...
    for (int i = 0; i < kIdDim; ++i) CHECK(e[i] == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("normalize: zero vector rejected") {
    std::vector<float> zeros(kIdDim, 0.0f);
    CHECK_THROWS_WITH_AS(IdEmbedding::normalize(zeros), doctest::Contains("ZeroVector"), Error);
}

TEST_CASE("normalize is idempotent") {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        auto e = random_embedding(rng);
        auto e2 = IdEmbedding::normalize(e.span());
        for (int i = 0; i < kIdDim; ++i) CHECK(std::abs(e2[i] - e[i]) < 1e-9);
    }
}

TEST_CASE("cosine similarity: self, orthogonal, antipodal") {
    Rng rng(11);
    auto w = random_embedding(rng);
    CHECK(cosine_similarity(w, w) == doctest::Approx(1.0).epsilon(1e-9));

    auto e1 = IdEmbedding::normalize(basis(0));
    auto e2 = IdEmbedding::normalize(basis(1));
    CHECK(cosine_similarity(e1, e2) == doctest::Approx(0.0));

    std::vector<float> neg(w.values().begin(), w.values().end());
    for (auto& x : neg) x = -x;
    auto wn = IdEmbedding::normalize(neg);
    CHECK(cosine_similarity(w, wn) == doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("cosine similarity: symmetric and bounded") {
    Rng rng(13);
    for (int trial = 0; trial < 50; ++trial) {
        auto a = random_embedding(rng);
        auto b = random_embedding(rng);
        const double ab = cosine_similarity(a, b);
        const double ba = cosine_similarity(b, a);
        CHECK(ab == ba);
        CHECK(std::abs(ab) <= 1.0 + 1e-9);
    }
}

TEST_CASE("average: idempotent on identical inputs") {
    Rng rng(17);
    auto w = random_embedding(rng);
    auto avg = average_embeddings({w, w, w});
    for (int i = 0; i < kIdDim; ++i) CHECK(avg[i] == doctest::Approx(w[i]).epsilon(1e-6));
}

TEST_CASE("average: two orthogonal basis vectors") {
    auto e1 = IdEmbedding::normalize(basis(0));
    auto e2 = IdEmbedding::normalize(basis(1));
    auto avg = average_embeddings({e1, e2});
    const double expected = 1.0 / std::sqrt(2.0);
    CHECK(avg[0] == doctest::Approx(expected).epsilon(1e-6));
    CHECK(avg[1] == doctest::Approx(expected).epsilon(1e-6));
    for (int i = 2; i < kIdDim; ++i) CHECK(avg[i] == 0.0f);
}

TEST_CASE("average: antipodal inputs cancel") {
    Rng rng(19);
    auto w = random_embedding(rng);
    std::vector<float> neg(w.values().begin(), w.values().end());
    for (auto& x : neg) x = -x;
    auto wn = IdEmbedding::normalize(neg);
    CHECK_THROWS_WITH_AS(average_embeddings({w, wn}), doctest::Contains("ZeroVector"), Error);
}

TEST_CASE("average: empty input rejected") {
    CHECK_THROWS_WITH_AS(average_embeddings({}), doctest::Contains("EmptyInput"), Error);
}

TEST_CASE("interpolate: endpoints and midpoint") {
    auto e1 = IdEmbedding::normalize(basis(0));
    auto e2 = IdEmbedding::normalize(basis(1));

    auto at0 = interpolate(e1, e2, 0.0);
    auto at1 = interpolate(e1, e2, 1.0);
    for (int i = 0; i < kIdDim; ++i) {
        CHECK(at0[i] == doctest::Approx(e1[i]));
        CHECK(at1[i] == doctest::Approx(e2[i]));
    }

    auto mid = interpolate(e1, e2, 0.5);
    const double expected = 1.0 / std::sqrt(2.0);
    CHECK(mid[0] == doctest::Approx(expected).epsilon(1e-6));
    CHECK(mid[1] == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("interpolate: alpha symmetry property") {
    Rng rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        auto a = random_embedding(rng);
        auto b = random_embedding(rng);
        const double alpha = rng.uniform();
        auto ab = interpolate(a, b, alpha);
        auto ba = interpolate(b, a, 1.0 - alpha);
        for (int i = 0; i < kIdDim; ++i) CHECK(std::abs(ab[i] - ba[i]) < 1e-9);
    }
}

TEST_CASE("interpolate: antipodal midpoint rejected") {
    Rng rng(29);
    auto w = random_embedding(rng);
    std::vector<float> neg(w.values().begin(), w.values().end());
    for (auto& x : neg) x = -x;
    auto wn = IdEmbedding::normalize(neg);
    CHECK_THROWS_AS(interpolate(w, wn, 0.5), Error);
}

TEST_CASE("zero_pad: layout, norm, round trip") {
    auto e1 = IdEmbedding::normalize(basis(0));
    auto p = zero_pad(e1);
    CHECK(p.values[0] == 1.0f);
    for (int i = 1; i < kCondDim; ++i) CHECK(p.values[static_cast<size_t>(i)] == 0.0f);

    Rng rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        auto w = random_embedding(rng);
        auto padded = zero_pad(w);
        double norm = 0.0;
        for (float x : padded.values) norm += static_cast<double>(x) * x;
        CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-6));
        for (int i = kIdDim; i < kCondDim; ++i)
            CHECK(padded.values[static_cast<size_t>(i)] == 0.0f);

        auto back = truncate(padded);
        for (int i = 0; i < kIdDim; ++i) CHECK(back[i] == w[i]);
    }
}

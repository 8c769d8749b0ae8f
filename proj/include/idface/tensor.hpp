#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <vector>

#include "idface/rng.hpp"

extern "C" {
#include <cblas.h>
}

namespace idface {

// Dense row-major tensor. Templated on the scalar so gradient checks can run
// the exact same code in double precision.
template <class S>
struct TensorT {
    std::vector<int64_t> shape;
    std::vector<S> data;

    TensorT() = default;
    explicit TensorT(std::vector<int64_t> shp) : shape(std::move(shp)), data(numel_of(shape)) {}
    TensorT(std::initializer_list<int64_t> shp) : TensorT(std::vector<int64_t>(shp)) {}

    static int64_t numel_of(const std::vector<int64_t>& s) {
        int64_t n = 1;
        for (int64_t d : s) n *= d;
        return n;
    }

    int64_t numel() const { return static_cast<int64_t>(data.size()); }
    int64_t dim(int i) const { return shape[static_cast<size_t>(i)]; }
    int ndim() const { return static_cast<int>(shape.size()); }

    S* ptr() { return data.data(); }
    const S* ptr() const { return data.data(); }

    S& operator[](int64_t i) { return data[static_cast<size_t>(i)]; }
    const S& operator[](int64_t i) const { return data[static_cast<size_t>(i)]; }

    void fill(S v) { std::fill(data.begin(), data.end(), v); }
    void zero() { fill(S(0)); }

    TensorT reshaped(std::vector<int64_t> shp) const {
        assert(numel_of(shp) == numel());
        TensorT out;
        out.shape = std::move(shp);
        out.data = data;
        return out;
    }

    static TensorT zeros(std::vector<int64_t> shp) { return TensorT(std::move(shp)); }

    static TensorT randn(std::vector<int64_t> shp, Rng& rng, double stddev = 1.0) {
        TensorT t(std::move(shp));
        for (auto& v : t.data) v = static_cast<S>(rng.normal() * stddev);
        return t;
    }

    bool all_finite() const {
        for (S v : data)
            if (!std::isfinite(static_cast<double>(v))) return false;
        return true;
    }

    void add_(const TensorT& other, S scale = S(1)) {
        assert(other.numel() == numel());
        for (int64_t i = 0; i < numel(); ++i) data[i] += scale * other.data[i];
    }

    void scale_(S s) {
        for (auto& v : data) v *= s;
    }
};

using Tensor = TensorT<float>;
using TensorD = TensorT<double>;

// C[m,n] = alpha * op(A) * op(B) + beta * C, row-major.
inline void gemm(bool trans_a, bool trans_b, int64_t m, int64_t n, int64_t k, float alpha,
                 const float* a, int64_t lda, const float* b, int64_t ldb, float beta, float* c,
                 int64_t ldc) {
    cblas_sgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans,
                trans_b ? CblasTrans : CblasNoTrans, static_cast<int>(m), static_cast<int>(n),
                static_cast<int>(k), alpha, a, static_cast<int>(lda), b, static_cast<int>(ldb),
                beta, c, static_cast<int>(ldc));
}

inline void gemm(bool trans_a, bool trans_b, int64_t m, int64_t n, int64_t k, double alpha,
                 const double* a, int64_t lda, const double* b, int64_t ldb, double beta, double* c,
                 int64_t ldc) {
    cblas_dgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans,
                trans_b ? CblasTrans : CblasNoTrans, static_cast<int>(m), static_cast<int>(n),
                static_cast<int>(k), alpha, a, static_cast<int>(lda), b, static_cast<int>(ldb),
                beta, c, static_cast<int>(ldc));
}

// out[m,n] = op(A)[m,k] * op(B)[k,n], convenience on contiguous tensors.
template <class S>
void matmul(const TensorT<S>& a, bool trans_a, const TensorT<S>& b, bool trans_b, TensorT<S>& out,
            int64_t m, int64_t n, int64_t k, S beta = S(0)) {
    const int64_t lda = trans_a ? m : k;
    const int64_t ldb = trans_b ? k : n;
    gemm(trans_a, trans_b, m, n, k, S(1), a.ptr(), lda, b.ptr(), ldb, beta, out.ptr(), n);
}

}  // namespace idface

#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "idface/errors.hpp"
#include "idface/tensor.hpp"

// Small training stack: layers with explicit forward/backward, an AdamW
// optimizer, and a named-parameter registry for checkpoints. Templated on the
// scalar type so the same code can be gradient-checked in double precision.
namespace idface::nn {

template <class S>
struct ParamT {
    std::string name;
    TensorT<S> w;
    TensorT<S> g;

    void init(std::string n, std::vector<int64_t> shape) {
        name = std::move(n);
        w = TensorT<S>(shape);
        g = TensorT<S>(std::move(shape));
    }
    void randn(Rng& rng, double stddev) {
        for (auto& v : w.data) v = static_cast<S>(rng.normal() * stddev);
    }
};

template <class S>
using ParamRefs = std::vector<ParamT<S>*>;

// ---------------------------------------------------------------------------
// elementwise activations

template <class S>
inline S gelu_fwd(S x) {
    return S(0.5) * x * (S(1) + std::erf(x * S(0.70710678118654752440)));
}

template <class S>
inline S gelu_bwd(S x) {
    const S cdf = S(0.5) * (S(1) + std::erf(x * S(0.70710678118654752440)));
    const S pdf = std::exp(S(-0.5) * x * x) * S(0.39894228040143267794);
    return cdf + x * pdf;
}

template <class S>
inline S silu_fwd(S x) {
    const S sig = S(1) / (S(1) + std::exp(-x));
    return x * sig;
}

template <class S>
inline S silu_bwd(S x) {
    const S sig = S(1) / (S(1) + std::exp(-x));
    return sig * (S(1) + x * (S(1) - sig));
}

enum class Act { gelu, silu, none };

template <class S>
struct ActivationT {
    Act kind = Act::none;
    TensorT<S> cache;

    explicit ActivationT(Act k = Act::none) : kind(k) {}

    TensorT<S> forward(const TensorT<S>& x) {
        cache = x;
        TensorT<S> y = x;
        if (kind == Act::gelu)
            for (auto& v : y.data) v = gelu_fwd(v);
        else if (kind == Act::silu)
            for (auto& v : y.data) v = silu_fwd(v);
        return y;
    }

    TensorT<S> backward(const TensorT<S>& dy) {
        TensorT<S> dx = dy;
        if (kind == Act::gelu)
            for (int64_t i = 0; i < dx.numel(); ++i) dx[i] *= gelu_bwd(cache[i]);
        else if (kind == Act::silu)
            for (int64_t i = 0; i < dx.numel(); ++i) dx[i] *= silu_bwd(cache[i]);
        return dx;
    }
};

// ---------------------------------------------------------------------------
// linear

template <class S>
struct LinearT {
    ParamT<S> weight;  // [out, in]
    ParamT<S> bias;    // [out]
    bool has_bias = true;
    int64_t in = 0, out = 0;
    TensorT<S> x_cache;

    void init(const std::string& name, int64_t in_dim, int64_t out_dim, Rng& rng,
              double init_std = -1.0, bool with_bias = true) {
        in = in_dim;
        out = out_dim;
        has_bias = with_bias;
        weight.init(name + ".weight", {out, in});
        if (init_std < 0.0) init_std = std::sqrt(1.0 / static_cast<double>(in));
        weight.randn(rng, init_std);
        if (has_bias) bias.init(name + ".bias", {out});
    }

    void collect(ParamRefs<S>& refs) {
        refs.push_back(&weight);
        if (has_bias) refs.push_back(&bias);
    }

    // x: [rows, in] -> [rows, out]
    TensorT<S> forward(const TensorT<S>& x) {
        const int64_t rows = x.numel() / in;
        x_cache = x;
        TensorT<S> y({rows, out});
        matmul(x, false, weight.w, true, y, rows, out, in);
        if (has_bias)
            for (int64_t r = 0; r < rows; ++r)
                for (int64_t c = 0; c < out; ++c) y[r * out + c] += bias.w[c];
        return y;
    }

    TensorT<S> backward(const TensorT<S>& dy) {
        const int64_t rows = dy.numel() / out;
        // dW += dy^T x
        gemm(true, false, out, in, rows, S(1), dy.ptr(), out, x_cache.ptr(), in, S(1),
             weight.g.ptr(), in);
        if (has_bias)
            for (int64_t r = 0; r < rows; ++r)
                for (int64_t c = 0; c < out; ++c) bias.g[c] += dy[r * out + c];
        TensorT<S> dx({rows, in});
        matmul(dy, false, weight.w, false, dx, rows, in, out);
        return dx;
    }
};

// ---------------------------------------------------------------------------
// layer norm over the last dimension

template <class S>
struct LayerNormT {
    ParamT<S> gamma, beta;
    int64_t dim = 0;
    S eps = S(1e-5);
    TensorT<S> xhat_cache;
    std::vector<S> rstd_cache;

    void init(const std::string& name, int64_t d) {
        dim = d;
        gamma.init(name + ".gamma", {d});
        beta.init(name + ".beta", {d});
        gamma.w.fill(S(1));
    }

    void collect(ParamRefs<S>& refs) {
        refs.push_back(&gamma);
        refs.push_back(&beta);
    }

    TensorT<S> forward(const TensorT<S>& x) {
        const int64_t rows = x.numel() / dim;
        xhat_cache = TensorT<S>({rows, dim});
        rstd_cache.resize(static_cast<size_t>(rows));
        TensorT<S> y({rows, dim});
        for (int64_t r = 0; r < rows; ++r) {
            const S* xr = x.ptr() + r * dim;
            S mean = 0;
            for (int64_t c = 0; c < dim; ++c) mean += xr[c];
            mean /= S(dim);
            S var = 0;
            for (int64_t c = 0; c < dim; ++c) var += (xr[c] - mean) * (xr[c] - mean);
            var /= S(dim);
            const S rstd = S(1) / std::sqrt(var + eps);
            rstd_cache[static_cast<size_t>(r)] = rstd;
            for (int64_t c = 0; c < dim; ++c) {
                const S xh = (xr[c] - mean) * rstd;
                xhat_cache[r * dim + c] = xh;
                y[r * dim + c] = xh * gamma.w[c] + beta.w[c];
            }
        }
        return y;
    }

    TensorT<S> backward(const TensorT<S>& dy) {
        const int64_t rows = dy.numel() / dim;
        TensorT<S> dx({rows, dim});
        for (int64_t r = 0; r < rows; ++r) {
            const S* dyr = dy.ptr() + r * dim;
            const S* xh = xhat_cache.ptr() + r * dim;
            S sum_dxhat = 0, sum_dxhat_xhat = 0;
            for (int64_t c = 0; c < dim; ++c) {
                const S dxhat = dyr[c] * gamma.w[c];
                sum_dxhat += dxhat;
                sum_dxhat_xhat += dxhat * xh[c];
                gamma.g[c] += dyr[c] * xh[c];
                beta.g[c] += dyr[c];
            }
            const S rstd = rstd_cache[static_cast<size_t>(r)];
            for (int64_t c = 0; c < dim; ++c) {
                const S dxhat = dyr[c] * gamma.w[c];
                dx[r * dim + c] =
                    rstd * (dxhat - sum_dxhat / S(dim) - xh[c] * sum_dxhat_xhat / S(dim));
            }
        }
        return dx;
    }
};

// ---------------------------------------------------------------------------
// group norm on [B, C, H, W]

template <class S>
struct GroupNormT {
    ParamT<S> gamma, beta;
    int64_t channels = 0;
    int groups = 8;
    S eps = S(1e-5);
    TensorT<S> xhat_cache;
    std::vector<S> rstd_cache;

    void init(const std::string& name, int64_t c, int g) {
        channels = c;
        groups = g;
        if (c % g != 0) throw config_error("group norm channels not divisible by groups");
        gamma.init(name + ".gamma", {c});
        beta.init(name + ".beta", {c});
        gamma.w.fill(S(1));
    }

    void collect(ParamRefs<S>& refs) {
        refs.push_back(&gamma);
        refs.push_back(&beta);
    }

    TensorT<S> forward(const TensorT<S>& x) {
        const int64_t b = x.dim(0), c = x.dim(1), hw = x.dim(2) * x.dim(3);
        const int64_t cpg = c / groups;
        const int64_t gsize = cpg * hw;
        xhat_cache = x;
        rstd_cache.resize(static_cast<size_t>(b * groups));
        TensorT<S> y = x;
        for (int64_t bi = 0; bi < b; ++bi) {
            for (int g = 0; g < groups; ++g) {
                S* base = xhat_cache.ptr() + bi * c * hw + g * gsize;
                S mean = 0;
                for (int64_t i = 0; i < gsize; ++i) mean += base[i];
                mean /= S(gsize);
                S var = 0;
                for (int64_t i = 0; i < gsize; ++i) var += (base[i] - mean) * (base[i] - mean);
                var /= S(gsize);
                const S rstd = S(1) / std::sqrt(var + eps);
                rstd_cache[static_cast<size_t>(bi * groups + g)] = rstd;
                for (int64_t i = 0; i < gsize; ++i) base[i] = (base[i] - mean) * rstd;
                S* yb = y.ptr() + bi * c * hw + g * gsize;
                for (int64_t ci = 0; ci < cpg; ++ci) {
                    const S gm = gamma.w[g * cpg + ci], bt = beta.w[g * cpg + ci];
                    for (int64_t i = 0; i < hw; ++i) yb[ci * hw + i] = base[ci * hw + i] * gm + bt;
                }
            }
        }
        return y;
    }

    TensorT<S> backward(const TensorT<S>& dy) {
        const int64_t b = dy.dim(0), c = dy.dim(1), hw = dy.dim(2) * dy.dim(3);
        const int64_t cpg = c / groups;
        const int64_t gsize = cpg * hw;
        TensorT<S> dx = dy;
        for (int64_t bi = 0; bi < b; ++bi) {
            for (int g = 0; g < groups; ++g) {
                const S* xh = xhat_cache.ptr() + bi * c * hw + g * gsize;
                const S* dyb = dy.ptr() + bi * c * hw + g * gsize;
                S* dxb = dx.ptr() + bi * c * hw + g * gsize;
                S sum_dxhat = 0, sum_dxhat_xhat = 0;
                for (int64_t ci = 0; ci < cpg; ++ci) {
                    const S gm = gamma.w[g * cpg + ci];
                    for (int64_t i = 0; i < hw; ++i) {
                        const S dxhat = dyb[ci * hw + i] * gm;
                        sum_dxhat += dxhat;
                        sum_dxhat_xhat += dxhat * xh[ci * hw + i];
                        gamma.g[g * cpg + ci] += dyb[ci * hw + i] * xh[ci * hw + i];
                        beta.g[g * cpg + ci] += dyb[ci * hw + i];
                    }
                }
                const S rstd = rstd_cache[static_cast<size_t>(bi * groups + g)];
                for (int64_t ci = 0; ci < cpg; ++ci) {
                    const S gm = gamma.w[g * cpg + ci];
                    for (int64_t i = 0; i < hw; ++i) {
                        const S dxhat = dyb[ci * hw + i] * gm;
                        dxb[ci * hw + i] = rstd * (dxhat - sum_dxhat / S(gsize) -
                                                   xh[ci * hw + i] * sum_dxhat_xhat / S(gsize));
                    }
                }
            }
        }
        return dx;
    }
};

// ---------------------------------------------------------------------------
// conv2d (square kernel) via im2col + GEMM

template <class S>
void im2col(const S* x, int64_t c, int64_t h, int64_t w, int k, int stride, int pad, S* col,
            int64_t ho, int64_t wo) {
    for (int64_t ci = 0; ci < c; ++ci) {
        for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
                S* dst = col + ((ci * k + ky) * k + kx) * ho * wo;
                for (int64_t oy = 0; oy < ho; ++oy) {
                    const int64_t iy = oy * stride + ky - pad;
                    if (iy < 0 || iy >= h) {
                        for (int64_t ox = 0; ox < wo; ++ox) dst[oy * wo + ox] = S(0);
                        continue;
                    }
                    const S* src = x + ci * h * w + iy * w;
                    for (int64_t ox = 0; ox < wo; ++ox) {
                        const int64_t ix = ox * stride + kx - pad;
                        dst[oy * wo + ox] = (ix >= 0 && ix < w) ? src[ix] : S(0);
                    }
                }
            }
        }
    }
}

template <class S>
void col2im(const S* col, int64_t c, int64_t h, int64_t w, int k, int stride, int pad, S* x,
            int64_t ho, int64_t wo) {
    for (int64_t ci = 0; ci < c; ++ci) {
        for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
                const S* src = col + ((ci * k + ky) * k + kx) * ho * wo;
                for (int64_t oy = 0; oy < ho; ++oy) {
                    const int64_t iy = oy * stride + ky - pad;
                    if (iy < 0 || iy >= h) continue;
                    S* dst = x + ci * h * w + iy * w;
                    for (int64_t ox = 0; ox < wo; ++ox) {
                        const int64_t ix = ox * stride + kx - pad;
                        if (ix >= 0 && ix < w) dst[ix] += src[oy * wo + ox];
                    }
                }
            }
        }
    }
}

template <class S>
struct Conv2dT {
    ParamT<S> weight;  // [out, in*k*k]
    ParamT<S> bias;    // [out]
    int64_t in = 0, out = 0;
    int k = 3, stride = 1, pad = 1;
    TensorT<S> x_cache;

    void init(const std::string& name, int64_t in_ch, int64_t out_ch, int kernel, int stride_,
              int pad_, Rng& rng, bool zero_init = false) {
        in = in_ch;
        out = out_ch;
        k = kernel;
        stride = stride_;
        pad = pad_;
        weight.init(name + ".weight", {out, in * k * k});
        bias.init(name + ".bias", {out});
        if (!zero_init) weight.randn(rng, std::sqrt(2.0 / static_cast<double>(in * k * k)));
    }

    void collect(ParamRefs<S>& refs) {
        refs.push_back(&weight);
        refs.push_back(&bias);
    }

    int64_t out_size(int64_t s) const { return (s + 2 * pad - k) / stride + 1; }

    TensorT<S> forward(const TensorT<S>& x) {
        const int64_t b = x.dim(0), h = x.dim(2), w = x.dim(3);
        const int64_t ho = out_size(h), wo = out_size(w);
        x_cache = x;
        TensorT<S> y({b, out, ho, wo});
        TensorT<S> col({in * k * k, ho * wo});
        for (int64_t bi = 0; bi < b; ++bi) {
            im2col(x.ptr() + bi * in * h * w, in, h, w, k, stride, pad, col.ptr(), ho, wo);
            gemm(false, false, out, ho * wo, in * k * k, S(1), weight.w.ptr(), in * k * k,
                 col.ptr(), ho * wo, S(0), y.ptr() + bi * out * ho * wo, ho * wo);
            S* yb = y.ptr() + bi * out * ho * wo;
            for (int64_t oc = 0; oc < out; ++oc)
                for (int64_t i = 0; i < ho * wo; ++i) yb[oc * ho * wo + i] += bias.w[oc];
        }
        return y;
    }

    TensorT<S> backward(const TensorT<S>& dy) {
        const int64_t b = x_cache.dim(0), h = x_cache.dim(2), w = x_cache.dim(3);
        const int64_t ho = dy.dim(2), wo = dy.dim(3);
        TensorT<S> dx({b, in, h, w});
        TensorT<S> col({in * k * k, ho * wo});
        TensorT<S> dcol({in * k * k, ho * wo});
        for (int64_t bi = 0; bi < b; ++bi) {
            const S* dyb = dy.ptr() + bi * out * ho * wo;
            im2col(x_cache.ptr() + bi * in * h * w, in, h, w, k, stride, pad, col.ptr(), ho, wo);
            // dW += dy_b col^T
            gemm(false, true, out, in * k * k, ho * wo, S(1), dyb, ho * wo, col.ptr(), ho * wo,
                 S(1), weight.g.ptr(), in * k * k);
            for (int64_t oc = 0; oc < out; ++oc)
                for (int64_t i = 0; i < ho * wo; ++i) bias.g[oc] += dyb[oc * ho * wo + i];
            // dcol = W^T dy_b
            gemm(true, false, in * k * k, ho * wo, out, S(1), weight.w.ptr(), in * k * k, dyb,
                 ho * wo, S(0), dcol.ptr(), ho * wo);
            col2im(dcol.ptr(), in, h, w, k, stride, pad, dx.ptr() + bi * in * h * w, ho, wo);
        }
        return dx;
    }
};

// ---------------------------------------------------------------------------
// nearest-neighbor 2x upsample

template <class S>
struct Upsample2xT {
    TensorT<S> forward(const TensorT<S>& x) {
        const int64_t b = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
        TensorT<S> y({b, c, h * 2, w * 2});
        for (int64_t n = 0; n < b * c; ++n) {
            const S* xs = x.ptr() + n * h * w;
            S* ys = y.ptr() + n * 4 * h * w;
            for (int64_t i = 0; i < h; ++i)
                for (int64_t j = 0; j < w; ++j) {
                    const S v = xs[i * w + j];
                    ys[(2 * i) * 2 * w + 2 * j] = v;
                    ys[(2 * i) * 2 * w + 2 * j + 1] = v;
                    ys[(2 * i + 1) * 2 * w + 2 * j] = v;
                    ys[(2 * i + 1) * 2 * w + 2 * j + 1] = v;
                }
        }
        return y;
    }

    TensorT<S> backward(const TensorT<S>& dy) {
        const int64_t b = dy.dim(0), c = dy.dim(1), h2 = dy.dim(2), w2 = dy.dim(3);
        const int64_t h = h2 / 2, w = w2 / 2;
        TensorT<S> dx({b, c, h, w});
        for (int64_t n = 0; n < b * c; ++n) {
            const S* dys = dy.ptr() + n * h2 * w2;
            S* dxs = dx.ptr() + n * h * w;
            for (int64_t i = 0; i < h; ++i)
                for (int64_t j = 0; j < w; ++j)
                    dxs[i * w + j] = dys[(2 * i) * w2 + 2 * j] + dys[(2 * i) * w2 + 2 * j + 1] +
                                     dys[(2 * i + 1) * w2 + 2 * j] +
                                     dys[(2 * i + 1) * w2 + 2 * j + 1];
        }
        return dx;
    }
};

// ---------------------------------------------------------------------------
// multi-head attention; self-attention when ctx == x

template <class S>
struct MultiHeadAttentionT {
    LinearT<S> wq, wk, wv, wo;
    int64_t d_model = 0, d_ctx = 0;
    int heads = 1;
    bool self_attn = true;
    // caches, head-major: [B*heads, T or N, dh]
    TensorT<S> q_cache, k_cache, v_cache, probs_cache;
    int64_t batch = 0, tq = 0, tk = 0;

    void init(const std::string& name, int64_t d, int64_t d_context, int n_heads, Rng& rng,
              bool self_attention, bool zero_out = false) {
        d_model = d;
        self_attn = self_attention;
        d_ctx = self_attn ? d : d_context;
        heads = n_heads;
        if (d % n_heads != 0) throw config_error("d_model not divisible by heads");
        wq.init(name + ".wq", d, d, rng);
        wk.init(name + ".wk", d_ctx, d, rng);
        wv.init(name + ".wv", d_ctx, d, rng);
        wo.init(name + ".wo", d, d, rng);
        if (zero_out) wo.weight.w.zero();
    }

    void collect(ParamRefs<S>& refs) {
        wq.collect(refs);
        wk.collect(refs);
        wv.collect(refs);
        wo.collect(refs);
    }

    // split [B*T, D] into head-major [B*heads, T, dh]
    TensorT<S> to_heads(const TensorT<S>& x, int64_t b, int64_t t) const {
        const int64_t dh = d_model / heads;
        TensorT<S> out({b * heads, t, dh});
        for (int64_t bi = 0; bi < b; ++bi)
            for (int64_t ti = 0; ti < t; ++ti)
                for (int h = 0; h < heads; ++h)
                    for (int64_t di = 0; di < dh; ++di)
                        out[((bi * heads + h) * t + ti) * dh + di] =
                            x[(bi * t + ti) * d_model + h * dh + di];
        return out;
    }

    TensorT<S> from_heads(const TensorT<S>& x, int64_t b, int64_t t) const {
        const int64_t dh = d_model / heads;
        TensorT<S> out({b * t, d_model});
        for (int64_t bi = 0; bi < b; ++bi)
            for (int64_t ti = 0; ti < t; ++ti)
                for (int h = 0; h < heads; ++h)
                    for (int64_t di = 0; di < dh; ++di)
                        out[(bi * t + ti) * d_model + h * dh + di] =
                            x[((bi * heads + h) * t + ti) * dh + di];
        return out;
    }

    // x: [B, T, D]; ctx: [B, N, d_ctx] (ignored when self_attn)
    TensorT<S> forward(const TensorT<S>& x, const TensorT<S>& ctx) {
        batch = x.dim(0);
        tq = x.dim(1);
        const TensorT<S>& kv = self_attn ? x : ctx;
        tk = kv.dim(1);
        const int64_t dh = d_model / heads;
        const S scale = S(1) / std::sqrt(S(dh));

        TensorT<S> q = wq.forward(x.reshaped({batch * tq, d_model}));
        TensorT<S> k = wk.forward(kv.reshaped({batch * tk, d_ctx}));
        TensorT<S> v = wv.forward(kv.reshaped({batch * tk, d_ctx}));
        q_cache = to_heads(q, batch, tq);
        k_cache = to_heads(k, batch, tk);
        v_cache = to_heads(v, batch, tk);

        probs_cache = TensorT<S>({batch * heads, tq, tk});
        TensorT<S> out_heads({batch * heads, tq, dh});
        for (int64_t bh = 0; bh < batch * heads; ++bh) {
            const S* qb = q_cache.ptr() + bh * tq * dh;
            const S* kb = k_cache.ptr() + bh * tk * dh;
            const S* vb = v_cache.ptr() + bh * tk * dh;
            S* pb = probs_cache.ptr() + bh * tq * tk;
            gemm(false, true, tq, tk, dh, scale, qb, dh, kb, dh, S(0), pb, tk);
            for (int64_t r = 0; r < tq; ++r) {
                S* row = pb + r * tk;
                S mx = row[0];
                for (int64_t c2 = 1; c2 < tk; ++c2) mx = std::max(mx, row[c2]);
                S sum = 0;
                for (int64_t c2 = 0; c2 < tk; ++c2) {
                    row[c2] = std::exp(row[c2] - mx);
                    sum += row[c2];
                }
                for (int64_t c2 = 0; c2 < tk; ++c2) row[c2] /= sum;
            }
            gemm(false, false, tq, dh, tk, S(1), pb, tk, vb, dh, S(0),
                 out_heads.ptr() + bh * tq * dh, dh);
        }
        TensorT<S> merged = from_heads(out_heads, batch, tq);
        TensorT<S> y = wo.forward(merged);
        return y.reshaped({batch, tq, d_model});
    }

    // returns dx; when cross-attending, dctx is accumulated into *dctx_out
    TensorT<S> backward(const TensorT<S>& dy, TensorT<S>* dctx_out = nullptr) {
        const int64_t dh = d_model / heads;
        const S scale = S(1) / std::sqrt(S(dh));

        TensorT<S> dmerged = wo.backward(dy.reshaped({batch * tq, d_model}));
        TensorT<S> dout_heads = to_heads(dmerged, batch, tq);

        TensorT<S> dq({batch * heads, tq, dh});
        TensorT<S> dk({batch * heads, tk, dh});
        TensorT<S> dv({batch * heads, tk, dh});
        TensorT<S> dprobs({tq, tk});
        TensorT<S> dscores({tq, tk});
        for (int64_t bh = 0; bh < batch * heads; ++bh) {
            const S* pb = probs_cache.ptr() + bh * tq * tk;
            const S* qb = q_cache.ptr() + bh * tq * dh;
            const S* kb = k_cache.ptr() + bh * tk * dh;
            const S* vb = v_cache.ptr() + bh * tk * dh;
            const S* dob = dout_heads.ptr() + bh * tq * dh;
            // dV = P^T dO
            gemm(true, false, tk, dh, tq, S(1), pb, tk, dob, dh, S(0), dv.ptr() + bh * tk * dh,
                 dh);
            // dP = dO V^T
            gemm(false, true, tq, tk, dh, S(1), dob, dh, vb, dh, S(0), dprobs.ptr(), tk);
            // softmax backward per row
            for (int64_t r = 0; r < tq; ++r) {
                const S* prow = pb + r * tk;
                const S* dprow = dprobs.ptr() + r * tk;
                S dot = 0;
                for (int64_t c2 = 0; c2 < tk; ++c2) dot += prow[c2] * dprow[c2];
                S* dsrow = dscores.ptr() + r * tk;
                for (int64_t c2 = 0; c2 < tk; ++c2) dsrow[c2] = prow[c2] * (dprow[c2] - dot);
            }
            // dQ = dS K * scale; dK = dS^T Q * scale
            gemm(false, false, tq, dh, tk, scale, dscores.ptr(), tk, kb, dh, S(0),
                 dq.ptr() + bh * tq * dh, dh);
            gemm(true, false, tk, dh, tq, scale, dscores.ptr(), tk, qb, dh, S(0),
                 dk.ptr() + bh * tk * dh, dh);
        }

        TensorT<S> dq_flat = from_heads(dq, batch, tq);
        TensorT<S> dk_flat = from_heads(dk, batch, tk);
        TensorT<S> dv_flat = from_heads(dv, batch, tk);

        TensorT<S> dx = wq.backward(dq_flat);
        TensorT<S> dkv_k = wk.backward(dk_flat);
        TensorT<S> dkv_v = wv.backward(dv_flat);
        dkv_k.add_(dkv_v);

        if (self_attn) {
            dx.add_(dkv_k);
            return dx.reshaped({batch, tq, d_model});
        }
        if (dctx_out != nullptr)
            dctx_out->add_(dkv_k.reshaped({batch, tk, d_ctx}));
        return dx.reshaped({batch, tq, d_model});
    }
};

// ---------------------------------------------------------------------------
// transformer feed-forward

template <class S>
struct MlpT {
    LinearT<S> fc1, fc2;
    ActivationT<S> act{Act::gelu};

    void init(const std::string& name, int64_t d, int64_t hidden, Rng& rng) {
        fc1.init(name + ".fc1", d, hidden, rng);
        fc2.init(name + ".fc2", hidden, d, rng);
    }

    void collect(ParamRefs<S>& refs) {
        fc1.collect(refs);
        fc2.collect(refs);
    }

    TensorT<S> forward(const TensorT<S>& x) { return fc2.forward(act.forward(fc1.forward(x))); }

    TensorT<S> backward(const TensorT<S>& dy) {
        return fc1.backward(act.backward(fc2.backward(dy)));
    }
};

// ---------------------------------------------------------------------------
// sinusoidal timestep features

template <class S>
inline TensorT<S> timestep_features(const std::vector<int>& t, int64_t dim) {
    const int64_t half = dim / 2;
    TensorT<S> out({static_cast<int64_t>(t.size()), dim});
    for (size_t b = 0; b < t.size(); ++b) {
        for (int64_t i = 0; i < half; ++i) {
            const double freq =
                std::exp(-std::log(10000.0) * static_cast<double>(i) / static_cast<double>(half));
            const double arg = static_cast<double>(t[b]) * freq;
            out[static_cast<int64_t>(b) * dim + i] = static_cast<S>(std::sin(arg));
            out[static_cast<int64_t>(b) * dim + half + i] = static_cast<S>(std::cos(arg));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// AdamW

template <class S>
struct AdamW {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;
    int64_t step_count = 0;
    std::map<const ParamT<S>*, std::pair<std::vector<double>, std::vector<double>>> state;

    void step(const ParamRefs<S>& params) {
        ++step_count;
        const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step_count));
        const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step_count));
        for (ParamT<S>* p : params) {
            auto& [m, v] = state[p];
            if (m.empty()) {
                m.assign(static_cast<size_t>(p->w.numel()), 0.0);
                v.assign(static_cast<size_t>(p->w.numel()), 0.0);
            }
            for (int64_t i = 0; i < p->w.numel(); ++i) {
                const double g = static_cast<double>(p->g[i]);
                m[static_cast<size_t>(i)] = beta1 * m[static_cast<size_t>(i)] + (1.0 - beta1) * g;
                v[static_cast<size_t>(i)] =
                    beta2 * v[static_cast<size_t>(i)] + (1.0 - beta2) * g * g;
                const double mhat = m[static_cast<size_t>(i)] / bc1;
                const double vhat = v[static_cast<size_t>(i)] / bc2;
                double w = static_cast<double>(p->w[i]);
                w -= lr * (mhat / (std::sqrt(vhat) + eps) + weight_decay * w);
                p->w[i] = static_cast<S>(w);
            }
        }
    }

    static void zero_grads(const ParamRefs<S>& params) {
        for (ParamT<S>* p : params) p->g.zero();
    }
};

template <class S>
inline double grad_norm(const ParamRefs<S>& params) {
    double acc = 0.0;
    for (const ParamT<S>* p : params)
        for (int64_t i = 0; i < p->g.numel(); ++i)
            acc += static_cast<double>(p->g[i]) * static_cast<double>(p->g[i]);
    return std::sqrt(acc);
}

}  // namespace idface::nn

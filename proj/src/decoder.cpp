#include "recon/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace recon {

namespace {

// Shift to component 0 = 0, then clamp. Inputs built from floored
// probabilities stay finite, so the clamp is the only saturation point.
void clamp_normalize(LlrVector& m) {
    double m0 = m.values[0];
    for (auto& v : m.values) v = std::clamp(v - m0, -LLR_CLAMP, LLR_CLAMP);
    m.values[0] = 0.0;
}

void wht_inplace(double* v, unsigned n) {
    for (unsigned h = 1; h < n; h <<= 1)
        for (unsigned i = 0; i < n; i += h << 1)
            for (unsigned j = i; j < i + h; ++j) {
                double a = v[j], b = v[j + h];
                v[j] = a + b;
                v[j + h] = a - b;
            }
}

}  // namespace

LlrVector llr_from_probs(const std::vector<double>& p) {
    if (p.empty()) throw std::invalid_argument("llr: empty probability vector");
    LlrVector m;
    m.values.resize(p.size());
    double p0 = std::max(p[0], PROB_FLOOR);
    for (std::size_t k = 0; k < p.size(); ++k)
        m.values[k] = std::log(p0 / std::max(p[k], PROB_FLOOR));
    clamp_normalize(m);
    return m;
}

std::vector<double> probs_from_llr(const LlrVector& m) {
    std::vector<double> p(m.values.size());
    double z = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        p[k] = std::exp(-m.values[k]);
        z += p[k];
    }
    for (auto& v : p) v /= z;
    return p;
}

LlrVector llr_from_channel(gf_elem observed, const ChannelParams& params) {
    if (observed >= params.q) throw std::invalid_argument("llr: symbol out of range");
    if (params.p == 0.0) return llr_shortened(observed, params.q);
    std::vector<double> p(params.q, params.p / (params.q - 1));
    p[observed] = 1.0 - params.p;
    return llr_from_probs(p);
}

LlrVector llr_punctured(unsigned q) {
    LlrVector m;
    m.values.assign(q, 0.0);
    return m;
}

LlrVector llr_shortened(gf_elem w, unsigned q) {
    if (w >= q) throw std::invalid_argument("llr: symbol out of range");
    LlrVector m;
    if (w == 0) {
        m.values.assign(q, LLR_CLAMP);
        m.values[0] = 0.0;
    } else {
        m.values.assign(q, 0.0);
        m.values[w] = -LLR_CLAMP;
    }
    return m;
}

LlrVector gf_permute(const LlrVector& msg, gf_elem a, PermuteMode mode, const GfContext& ctx) {
    if (a == 0) throw std::invalid_argument("gf_permute: zero multiplier");
    if (msg.values.size() != ctx.q) throw std::invalid_argument("gf_permute: length mismatch");
    LlrVector out;
    out.values.resize(ctx.q);
    for (unsigned k = 0; k < ctx.q; ++k) {
        gf_elem idx = (mode == PermuteMode::multiply) ? ctx.mul(static_cast<gf_elem>(k), a)
                                                      : ctx.div(static_cast<gf_elem>(k), a);
        out.values[k] = msg.values[idx];
    }
    return out;
}

void walsh_hadamard(std::vector<double>& vec) {
    auto n = vec.size();
    if (n == 0 || (n & (n - 1)) != 0)
        throw std::invalid_argument("wht: length must be a power of two");
    wht_inplace(vec.data(), static_cast<unsigned>(n));
}

void walsh_hadamard_inverse(std::vector<double>& vec) {
    walsh_hadamard(vec);
    for (auto& v : vec) v /= static_cast<double>(vec.size());
}

DecoderState make_state(const SparseParityMatrix& H, const std::vector<LlrVector>& priors,
                        std::size_t max_iterations) {
    if (priors.size() != H.n) throw std::invalid_argument("decoder: prior count mismatch");
    DecoderState st;
    st.q = H.q;
    st.max_iterations = max_iterations;
    st.row_ptr.resize(H.m + 1);
    std::size_t e = 0;
    for (std::size_t i = 0; i < H.m; ++i) {
        st.row_ptr[i] = e;
        for (auto [col, w] : H.rows[i]) {
            st.edge_col.push_back(col);
            st.edge_weight.push_back(w);
            ++e;
        }
    }
    st.row_ptr[H.m] = e;
    st.col_edges.resize(H.n);
    for (std::size_t k = 0; k < st.edge_col.size(); ++k) st.col_edges[st.edge_col[k]].push_back(k);

    st.prior = priors;
    st.aposteriori = priors;
    st.cv_messages.assign(e, llr_punctured(H.q));
    st.vc_messages.resize(e);
    for (std::size_t k = 0; k < e; ++k) st.vc_messages[k] = priors[st.edge_col[k]];
    st.hard_decision.resize(H.n);
    for (std::size_t j = 0; j < H.n; ++j) {
        const auto& v = priors[j].values;
        gf_elem best = 0;
        for (unsigned k = 1; k < H.q; ++k)
            if (v[k] < v[best]) best = static_cast<gf_elem>(k);
        st.hard_decision[j] = best;
    }
    return st;
}

LlrVector check_to_variable(const DecoderState& state, std::size_t row, std::size_t edge,
                            gf_elem syndrome_val, const GfContext& ctx) {
    const unsigned q = state.q;
    if (edge < state.row_ptr[row] || edge >= state.row_ptr[row + 1])
        throw std::invalid_argument("check_to_variable: edge not in row");

    // Transform-domain product of the weighted distributions of the other
    // edges on this check.
    std::vector<double> prod(q, 1.0);
    std::vector<double> weighted(q);
    for (std::size_t e2 = state.row_ptr[row]; e2 < state.row_ptr[row + 1]; ++e2) {
        if (e2 == edge) continue;
        auto p = probs_from_llr(state.vc_messages[e2]);
        gf_elem w2 = state.edge_weight[e2];
        for (unsigned u = 0; u < q; ++u) weighted[u] = p[ctx.div(static_cast<gf_elem>(u), w2)];
        wht_inplace(weighted.data(), q);
        for (unsigned k = 0; k < q; ++k) prod[k] *= weighted[k];
    }
    wht_inplace(prod.data(), q);
    for (auto& v : prod) v = std::max(v / q, PROB_FLOOR);

    // Index permutation by this edge's weight, then the coset shift that
    // folds in the (weighted) syndrome value.
    gf_elem w = state.edge_weight[edge];
    gf_elem s_prime = ctx.div(syndrome_val, w);
    std::vector<double> out(q);
    for (unsigned k = 0; k < q; ++k)
        out[k] = prod[ctx.mul(static_cast<gf_elem>(k ^ s_prime), w)];
    return llr_from_probs(out);
}

void variable_update_and_decision(DecoderState& state, std::uint32_t column) {
    const unsigned q = state.q;
    const auto& edges = state.col_edges[column];
    std::vector<double> sum = state.prior[column].values;
    for (auto e : edges)
        for (unsigned k = 0; k < q; ++k) sum[k] += state.cv_messages[e].values[k];

    LlrVector apost;
    apost.values = sum;
    clamp_normalize(apost);
    state.aposteriori[column] = apost;

    gf_elem best = 0;
    for (unsigned k = 1; k < q; ++k)
        if (apost.values[k] < apost.values[best]) best = static_cast<gf_elem>(k);
    state.hard_decision[column] = best;

    for (auto e : edges) {
        LlrVector out;
        out.values.resize(q);
        for (unsigned k = 0; k < q; ++k) out.values[k] = sum[k] - state.cv_messages[e].values[k];
        clamp_normalize(out);
        state.vc_messages[e] = out;
    }
}

namespace {

// Flat-array workspace for the production decode path. Messages live in
// the probability domain; ratio clamps mirror the log-domain limits
// exactly, so the two formulations stay numerically interchangeable.
struct FlatGraph {
    unsigned q = 0;
    std::size_t n = 0, m = 0, edges = 0;
    std::vector<std::size_t> row_ptr, col_ptr, col_edge;
    std::vector<std::uint32_t> edge_col;
    std::vector<gf_elem> edge_weight;
    std::vector<std::uint16_t> mul_idx, div_idx;  // [w*q + k]
    std::size_t max_row_deg = 0, max_col_deg = 0;
};

FlatGraph build_graph(const SparseParityMatrix& H, const GfContext& ctx) {
    FlatGraph g;
    g.q = H.q;
    g.n = H.n;
    g.m = H.m;
    g.edges = H.edge_count();
    g.row_ptr.resize(H.m + 1);
    g.edge_col.reserve(g.edges);
    g.edge_weight.reserve(g.edges);
    std::size_t e = 0;
    for (std::size_t i = 0; i < H.m; ++i) {
        g.row_ptr[i] = e;
        for (auto [col, w] : H.rows[i]) {
            g.edge_col.push_back(col);
            g.edge_weight.push_back(w);
            ++e;
        }
        g.max_row_deg = std::max(g.max_row_deg, H.rows[i].size());
    }
    g.row_ptr[H.m] = e;

    g.col_ptr.assign(H.n + 1, 0);
    for (auto c : g.edge_col) g.col_ptr[c + 1]++;
    std::partial_sum(g.col_ptr.begin(), g.col_ptr.end(), g.col_ptr.begin());
    for (std::size_t j = 0; j < H.n; ++j)
        g.max_col_deg = std::max(g.max_col_deg, g.col_ptr[j + 1] - g.col_ptr[j]);
    g.col_edge.resize(g.edges);
    {
        std::vector<std::size_t> fill(g.col_ptr.begin(), g.col_ptr.end() - 1);
        for (std::size_t k = 0; k < g.edges; ++k) g.col_edge[fill[g.edge_col[k]]++] = k;
    }

    g.mul_idx.resize(static_cast<std::size_t>(g.q) * g.q);
    g.div_idx.resize(static_cast<std::size_t>(g.q) * g.q);
    for (unsigned w = 1; w < g.q; ++w)
        for (unsigned k = 0; k < g.q; ++k) {
            g.mul_idx[w * g.q + k] = ctx.mul(static_cast<gf_elem>(k), static_cast<gf_elem>(w));
            g.div_idx[w * g.q + k] = ctx.div(static_cast<gf_elem>(k), static_cast<gf_elem>(w));
        }
    return g;
}

bool syndrome_matches(const FlatGraph& g, const GfContext& ctx, const std::vector<gf_elem>& x,
                      const std::vector<gf_elem>& s) {
    for (std::size_t i = 0; i < g.m; ++i) {
        gf_elem acc = 0;
        for (std::size_t e = g.row_ptr[i]; e < g.row_ptr[i + 1]; ++e)
            acc ^= ctx.mul(g.edge_weight[e], x[g.edge_col[e]]);
        if (acc != s[i]) return false;
    }
    return true;
}

void hard_decide(const FlatGraph& g, const double* post, std::vector<gf_elem>& x) {
    for (std::size_t j = 0; j < g.n; ++j) {
        const double* p = post + j * g.q;
        gf_elem best = 0;
        for (unsigned k = 1; k < g.q; ++k)
            if (p[k] > p[best]) best = static_cast<gf_elem>(k);
        x[j] = best;
    }
}

}  // namespace

DecodeResult decode(const SparseParityMatrix& H, const std::vector<gf_elem>& s,
                    const std::vector<LlrVector>& priors, const GfContext& ctx,
                    std::size_t max_iterations) {
    if (s.size() != H.m) throw std::invalid_argument("decode: syndrome length mismatch");
    if (priors.size() != H.n) throw std::invalid_argument("decode: prior count mismatch");
    const FlatGraph g = build_graph(H, ctx);
    const unsigned q = g.q;
    const double ratio_lo = std::exp(-LLR_CLAMP), ratio_hi = std::exp(LLR_CLAMP);

    std::vector<double> prior_p(g.n * q);
    for (std::size_t j = 0; j < g.n; ++j) {
        if (priors[j].values.size() != q) throw std::invalid_argument("decode: prior length mismatch");
        double z = 0.0;
        for (unsigned k = 0; k < q; ++k) {
            double v = std::exp(-priors[j].values[k]);
            prior_p[j * q + k] = v;
            z += v;
        }
        for (unsigned k = 0; k < q; ++k) prior_p[j * q + k] /= z;
    }

    DecodeResult res;
    res.x.resize(g.n);
    hard_decide(g, prior_p.data(), res.x);
    if (syndrome_matches(g, ctx, res.x, s)) {
        res.success = true;
        res.iterations = 0;
        return res;
    }

    std::vector<double> vc(g.edges * q), cv(g.edges * q);
    for (std::size_t e = 0; e < g.edges; ++e)
        std::copy_n(&prior_p[g.edge_col[e] * q], q, &vc[e * q]);

    const std::size_t rd = g.max_row_deg, cd = g.max_col_deg;
    std::vector<double> fwht((rd ? rd : 1) * q);
    std::vector<double> pre((std::max(rd, cd) + 1) * q), suf((std::max(rd, cd) + 1) * q);
    std::vector<double> tvec(q);
    std::vector<double> post(g.n * q);

    for (std::size_t iter = 1; iter <= max_iterations; ++iter) {
        // check side
        for (std::size_t i = 0; i < g.m; ++i) {
            const std::size_t base = g.row_ptr[i], d = g.row_ptr[i + 1] - base;
            if (d == 0) continue;
            for (std::size_t t = 0; t < d; ++t) {
                const double* p = &vc[(base + t) * q];
                double* f = &fwht[t * q];
                const std::uint16_t* div_w = &g.div_idx[g.edge_weight[base + t] * q];
                for (unsigned k = 0; k < q; ++k) f[k] = p[div_w[k]];
                wht_inplace(f, q);
            }
            for (unsigned k = 0; k < q; ++k) pre[k] = 1.0;
            for (std::size_t t = 0; t < d; ++t)
                for (unsigned k = 0; k < q; ++k)
                    pre[(t + 1) * q + k] = pre[t * q + k] * fwht[t * q + k];
            for (unsigned k = 0; k < q; ++k) suf[d * q + k] = 1.0;
            for (std::size_t t = d; t-- > 0;)
                for (unsigned k = 0; k < q; ++k)
                    suf[t * q + k] = suf[(t + 1) * q + k] * fwht[t * q + k];

            for (std::size_t t = 0; t < d; ++t) {
                for (unsigned k = 0; k < q; ++k)
                    tvec[k] = pre[t * q + k] * suf[(t + 1) * q + k];
                wht_inplace(tvec.data(), q);
                const double inv_q = 1.0 / q;
                const std::uint16_t* mul_w = &g.mul_idx[g.edge_weight[base + t] * q];
                const gf_elem si = s[i];
                double* out = &cv[(base + t) * q];
                for (unsigned k = 0; k < q; ++k)
                    out[k] = std::max(tvec[mul_w[k] ^ si] * inv_q, PROB_FLOOR);
                const double lo = out[0] * ratio_lo, hi = out[0] * ratio_hi;
                for (unsigned k = 1; k < q; ++k) out[k] = std::clamp(out[k], lo, hi);
            }
        }

        // variable side
        for (std::size_t j = 0; j < g.n; ++j) {
            const std::size_t base = g.col_ptr[j], d = g.col_ptr[j + 1] - base;
            std::copy_n(&prior_p[j * q], q, pre.data());
            for (std::size_t t = 0; t < d; ++t) {
                const double* m = &cv[g.col_edge[base + t] * q];
                double mx = 0.0;
                for (unsigned k = 0; k < q; ++k) {
                    double v = pre[t * q + k] * m[k];
                    pre[(t + 1) * q + k] = v;
                    mx = std::max(mx, v);
                }
                if (mx > 0.0)
                    for (unsigned k = 0; k < q; ++k) pre[(t + 1) * q + k] /= mx;
            }
            for (unsigned k = 0; k < q; ++k) suf[d * q + k] = 1.0;
            for (std::size_t t = d; t-- > 0;) {
                const double* m = &cv[g.col_edge[base + t] * q];
                double mx = 0.0;
                for (unsigned k = 0; k < q; ++k) {
                    double v = suf[(t + 1) * q + k] * m[k];
                    suf[t * q + k] = v;
                    mx = std::max(mx, v);
                }
                if (mx > 0.0)
                    for (unsigned k = 0; k < q; ++k) suf[t * q + k] /= mx;
            }
            std::copy_n(&pre[d * q], q, &post[j * q]);
            for (std::size_t t = 0; t < d; ++t) {
                double* out = &vc[g.col_edge[base + t] * q];
                for (unsigned k = 0; k < q; ++k)
                    out[k] = pre[t * q + k] * suf[(t + 1) * q + k];
                const double lo = out[0] * ratio_lo, hi = out[0] * ratio_hi;
                double z = out[0];
                for (unsigned k = 1; k < q; ++k) {
                    out[k] = std::clamp(out[k], lo, hi);
                    z += out[k];
                }
                if (z > 0.0) {
                    for (unsigned k = 0; k < q; ++k) out[k] /= z;
                } else {
                    // total underflow: fall back to a flat message
                    for (unsigned k = 0; k < q; ++k) out[k] = 1.0 / q;
                }
            }
        }

        hard_decide(g, post.data(), res.x);
        if (syndrome_matches(g, ctx, res.x, s)) {
            res.success = true;
            res.iterations = iter;
            return res;
        }
    }
    res.success = false;
    res.iterations = max_iterations;
    return res;
}

}  // namespace recon

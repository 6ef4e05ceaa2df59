#include "recon/nbldpc.hpp"
#include "recon/rng.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <limits>
#include <map>
#include <queue>
#include <stdexcept>
#include <vector>

namespace recon {

namespace {

// BFS over the bipartite graph from one variable node; fills row distances
// (-1 = unreachable in the current partial graph).
void row_distances(std::uint32_t start_col,
                   const std::vector<std::vector<std::uint32_t>>& var_adj,
                   const std::vector<std::vector<std::uint32_t>>& check_adj,
                   std::vector<int>& row_dist, std::vector<int>& col_dist) {
    std::fill(row_dist.begin(), row_dist.end(), -1);
    std::fill(col_dist.begin(), col_dist.end(), -1);
    col_dist[start_col] = 0;
    std::queue<std::uint32_t> cols, rows;
    cols.push(start_col);
    int depth = 0;
    while (!cols.empty() || !rows.empty()) {
        if (depth % 2 == 0) {
            while (!cols.empty()) {
                auto c = cols.front();
                cols.pop();
                for (auto r : var_adj[c])
                    if (row_dist[r] < 0) {
                        row_dist[r] = depth + 1;
                        rows.push(r);
                    }
            }
        } else {
            while (!rows.empty()) {
                auto r = rows.front();
                rows.pop();
                for (auto c : check_adj[r])
                    if (col_dist[c] < 0) {
                        col_dist[c] = depth + 1;
                        cols.push(c);
                    }
            }
        }
        ++depth;
    }
}

}  // namespace

SparseParityMatrix peg_construct(const DegreeDistribution& dist, std::size_t n, std::size_t m,
                                 const GfContext& ctx, std::uint64_t seed) {
    if (n == 0 || m == 0) throw std::invalid_argument("peg: empty graph");

    // Realize the edge-view variable distribution as per-column degrees,
    // processed lowest degree first (classic PEG ordering).
    auto counts = node_degree_counts(dist.lambda, n);
    std::sort(counts.begin(), counts.end());
    std::vector<unsigned> col_degree;
    col_degree.reserve(n);
    for (auto [d, c] : counts)
        for (std::size_t k = 0; k < c; ++k) col_degree.push_back(d);
    if (col_degree.size() != n) throw std::runtime_error("peg: node count mismatch");

    std::size_t total_edges = 0;
    for (auto d : col_degree) total_edges += d;
    if (total_edges < m) throw std::runtime_error("peg: fewer edges than checks");

    // Concentrated check side: rows get floor(E/m) or one more, so realized
    // check degrees sit on two adjacent values.
    std::vector<std::size_t> row_target(m, total_edges / m);
    for (std::size_t i = 0; i < total_edges % m; ++i) row_target[i] += 1;

    Rng rng(derive_seed(seed, 0x70656765));  // construction stream

    std::vector<std::vector<std::uint32_t>> var_adj(n), check_adj(m);
    std::vector<std::vector<gf_elem>> var_weights(n);
    std::vector<int> row_dist(m), col_dist(n);
    std::vector<std::uint32_t> candidates;

    for (std::uint32_t col = 0; col < n; ++col) {
        for (unsigned e = 0; e < col_degree[col]; ++e) {
            if (e == 0) {
                // First edge ignores girth: any non-saturated row works.
                std::fill(row_dist.begin(), row_dist.end(), -1);
            } else {
                row_distances(col, var_adj, check_adj, row_dist, col_dist);
            }

            // Prefer unreachable rows; otherwise the farthest reachable ones.
            // Saturated rows and rows already tied to this column are out.
            // When every admissible row is saturated (high-degree columns at
            // the tail), let row degrees bend past the target rather than
            // fail; the min-degree tie-break keeps the bend minimal.
            int best_class = -2;  // -1 encodes "unreachable", beats any distance
            candidates.clear();
            for (int relax = 0; relax < 2 && candidates.empty(); ++relax) {
                best_class = -2;
                for (std::uint32_t r = 0; r < m; ++r) {
                    if (!relax && check_adj[r].size() >= row_target[r]) continue;
                    if (row_dist[r] == 1) continue;  // parallel edge
                    int cls = (row_dist[r] < 0) ? std::numeric_limits<int>::max() : row_dist[r];
                    if (cls > best_class) {
                        best_class = cls;
                        candidates.clear();
                    }
                    if (cls == best_class) candidates.push_back(r);
                }
            }
            if (candidates.empty())
                throw std::runtime_error("peg: no feasible check node, degree demand infeasible");

            std::size_t min_deg = check_adj[candidates[0]].size();
            for (auto r : candidates) min_deg = std::min(min_deg, check_adj[r].size());
            std::erase_if(candidates,
                          [&](std::uint32_t r) { return check_adj[r].size() != min_deg; });
            std::uint32_t row = candidates[rng.below(candidates.size())];

            var_adj[col].push_back(row);
            check_adj[row].push_back(col);
            gf_elem w = (ctx.q == 2) ? 1 : static_cast<gf_elem>(1 + rng.below(ctx.q - 1));
            var_weights[col].push_back(w);
        }
    }

    // Uniform random weights leave roughly 1/(q-1) of the short structures
    // singular: two columns sharing two rows with a zero 2x2 determinant,
    // or a cycle of degree-2 columns whose ratio product closes to the
    // identity. Each such structure is a genuine low-weight codeword of the
    // realized code and stalls the decoder, so redraw weights until the
    // short structures are nonsingular. Graph and degree histograms are
    // untouched; the pass is driven by the construction stream, so the
    // result stays deterministic per seed.
    if (ctx.q > 2) {
        struct PairGroup {
            std::vector<std::array<std::uint32_t, 3>> members;  // col, idx_a, idx_b
        };
        std::map<std::uint64_t, PairGroup> pair_groups;
        for (std::uint32_t col = 0; col < n; ++col) {
            const auto& rows = var_adj[col];
            for (std::size_t a = 0; a + 1 < rows.size(); ++a)
                for (std::size_t b = a + 1; b < rows.size(); ++b) {
                    auto lo = std::min(rows[a], rows[b]), hi = std::max(rows[a], rows[b]);
                    auto ia = rows[a] == lo ? a : b, ib = rows[a] == lo ? b : a;
                    pair_groups[(std::uint64_t)lo << 32 | hi].members.push_back(
                        {col, static_cast<std::uint32_t>(ia), static_cast<std::uint32_t>(ib)});
                }
        }

        std::vector<std::uint32_t> deg2;
        std::vector<std::vector<std::uint32_t>> adj2(m);
        for (std::uint32_t col = 0; col < n; ++col)
            if (var_adj[col].size() == 2) {
                adj2[var_adj[col][0]].push_back(static_cast<std::uint32_t>(deg2.size()));
                adj2[var_adj[col][1]].push_back(static_cast<std::uint32_t>(deg2.size()));
                deg2.push_back(col);
            }

        auto redraw = [&]() { return static_cast<gf_elem>(1 + rng.below(ctx.q - 1)); };
        std::vector<gf_elem> used;

        // Product-set DP state: for one layer of walk length, the set of
        // ratio products reaching each check, as a bitmask over GF(q)\{0}.
        using ProductMask = std::array<std::uint64_t, 4>;
        auto mask_test = [](const ProductMask& mk, unsigned k) {
            return (mk[k >> 6] >> (k & 63)) & 1ULL;
        };
        auto mask_count = [](const ProductMask& mk) {
            unsigned c = 0;
            for (auto w : mk) c += static_cast<unsigned>(std::popcount(w));
            return c;
        };
        auto mask_or_mul = [&](ProductMask& dst, const ProductMask& src, gf_elem g) {
            for (unsigned w = 0; w < 4; ++w) {
                std::uint64_t bits = src[w];
                while (bits) {
                    unsigned k = (w << 6) + static_cast<unsigned>(std::countr_zero(bits));
                    bits &= bits - 1;
                    unsigned t = ctx.mul(static_cast<gf_elem>(k), g);
                    dst[t >> 6] |= 1ULL << (t & 63);
                }
            }
        };
        std::vector<ProductMask> cur(m), nxt(m);
        const int walk_cap = 6;  // cycles up to walk_cap + 1 columns

        for (int pass = 0; pass < 32; ++pass) {
            std::size_t changed = 0;

            for (auto& [key, group] : pair_groups) {
                if (group.members.size() < 2) continue;
                used.clear();
                for (auto& [col, ia, ib] : group.members) {
                    gf_elem ratio = ctx.div(var_weights[col][ia], var_weights[col][ib]);
                    if (std::find(used.begin(), used.end(), ratio) != used.end()) {
                        for (int t = 0; t < 16; ++t) {
                            var_weights[col][ia] = redraw();
                            ratio = ctx.div(var_weights[col][ia], var_weights[col][ib]);
                            if (std::find(used.begin(), used.end(), ratio) == used.end()) break;
                        }
                        ++changed;
                    }
                    used.push_back(ratio);
                }
            }

            // For each degree-2 column, collect every ratio product a short
            // walk between its two checks can realize while avoiding the
            // column itself; any of them closing the loop at identity is a
            // low-weight codeword, so keep the column's own ratio outside
            // the whole set. A set already covering GF(q)\{0} cannot be
            // avoided by any weight choice and is left alone.
            for (std::size_t ei = 0; ei < deg2.size(); ++ei) {
                std::uint32_t col = deg2[ei];
                std::uint32_t ra = var_adj[col][0], rb = var_adj[col][1];
                std::fill(cur.begin(), cur.end(), ProductMask{});
                ProductMask bad{};
                cur[ra][0] = 2;  // product 1 at walk length 0
                for (int d = 0; d < walk_cap; ++d) {
                    std::fill(nxt.begin(), nxt.end(), ProductMask{});
                    for (std::uint32_t u = 0; u < m; ++u) {
                        if (!cur[u][0] && !cur[u][1] && !cur[u][2] && !cur[u][3]) continue;
                        for (auto k : adj2[u]) {
                            if (k == ei) continue;
                            std::uint32_t c2 = deg2[k];
                            std::uint32_t v =
                                var_adj[c2][0] == u ? var_adj[c2][1] : var_adj[c2][0];
                            gf_elem g = var_adj[c2][0] == u
                                            ? ctx.div(var_weights[c2][0], var_weights[c2][1])
                                            : ctx.div(var_weights[c2][1], var_weights[c2][0]);
                            mask_or_mul(nxt[v], cur[u], g);
                        }
                    }
                    for (unsigned w = 0; w < 4; ++w) bad[w] |= nxt[rb][w];
                    cur.swap(nxt);
                }
                if (mask_count(bad) >= ctx.q - 1) continue;
                auto ratio = [&]() { return ctx.div(var_weights[col][0], var_weights[col][1]); };
                if (mask_test(bad, ratio())) {
                    for (int t = 0; t < 16 && mask_test(bad, ratio()); ++t)
                        var_weights[col][0] = redraw();
                    ++changed;
                }
            }

            if (changed == 0) break;
        }
    }

    SparseParityMatrix H;
    H.q = ctx.q;
    H.n = n;
    H.m = m;
    H.rows.assign(m, {});
    for (std::uint32_t col = 0; col < n; ++col)
        for (std::size_t k = 0; k < var_adj[col].size(); ++k)
            H.rows[var_adj[col][k]].emplace_back(col, var_weights[col][k]);
    for (auto& row : H.rows) std::sort(row.begin(), row.end());
    return H;
}

}  // namespace recon

#include "recon/mcde.hpp"

#include "recon/channel.hpp"
#include "recon/decoder.hpp"
#include "recon/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace recon {

namespace {

struct SampledDegrees {
    std::vector<unsigned> degree;
    std::vector<double> cum;  // cumulative edge fractions

    unsigned sample(Rng& rng) const {
        double r = rng.real();
        for (std::size_t i = 0; i < cum.size(); ++i) {
            if (r < cum[i]) return degree[i];
        }
        return degree.back();
    }
};

SampledDegrees from_pairs(const std::vector<std::pair<unsigned, double>>& terms) {
    SampledDegrees d;
    double total = 0.0;
    for (const auto& [deg, frac] : terms) total += frac;
    if (!(total > 0.0)) throw std::invalid_argument("mcde: degenerate degree distribution");
    double acc = 0.0;
    for (const auto& [deg, frac] : terms) {
        acc += frac / total;
        d.degree.push_back(deg);
        d.cum.push_back(acc);
    }
    d.cum.back() = 1.0;
    return d;
}

// Check side when no rho is given: concentrated at the average check degree
// a_c = a_v/(1-R) forced by edge balance, realized as the edge-view mix of
// the two adjacent integer degrees.
SampledDegrees concentrated_checks(const DegreeDistribution& dist) {
    if (!(dist.design_rate >= 0.0 && dist.design_rate < 1.0)) {
        throw std::invalid_argument("mcde: design rate outside [0, 1)");
    }
    double ac = dist.avg_variable_degree() / (1.0 - dist.design_rate);
    auto lo = static_cast<unsigned>(std::floor(ac));
    if (lo < 2) lo = 2;
    double hi_node_frac = ac - lo;
    if (hi_node_frac <= 0.0) {
        return from_pairs({{lo, 1.0}});
    }
    return from_pairs({{lo, lo * (1.0 - hi_node_frac)}, {lo + 1, (lo + 1) * hi_node_frac}});
}

void clamp_llr(std::vector<double>& m) {
    double base = m[0];
    for (auto& x : m) {
        x -= base;
        if (x > LLR_CLAMP) x = LLR_CLAMP;
        if (x < -LLR_CLAMP) x = -LLR_CLAMP;
    }
    m[0] = 0.0;
}

double entropy_bits(const LlrVector& m) {
    auto p = probs_from_llr(m);
    double h = 0.0;
    for (double x : p) {
        if (x > 0.0) h -= x * std::log2(x);
    }
    return h;
}

}  // namespace

ThresholdResult mcde_threshold(const EnsembleSim& sim, const GfContext& ctx, std::uint64_t seed) {
    if (sim.node_count < 1000) throw std::invalid_argument("mcde_threshold: population too small");
    if (!(sim.entropy_threshold > 0.0)) {
        throw std::invalid_argument("mcde_threshold: entropy threshold must be positive");
    }
    if (sim.qber_grid.empty() || !std::is_sorted(sim.qber_grid.begin(), sim.qber_grid.end())) {
        throw std::invalid_argument("mcde_threshold: grid must be nonempty and ascending");
    }
    if (sim.dist.lambda.empty()) throw std::invalid_argument("mcde_threshold: missing lambda");
    const unsigned q = ctx.q;

    auto var_deg = from_pairs(sim.dist.lambda);
    auto chk_deg = sim.dist.rho.empty() ? concentrated_checks(sim.dist) : from_pairs(sim.dist.rho);

    ThresholdResult result;
    for (std::size_t pi = 0; pi < sim.qber_grid.size(); ++pi) {
        double p = sim.qber_grid[pi];
        if (p < 0.0 || p >= 1.0) throw std::invalid_argument("mcde_threshold: p outside [0, 1)");
        ChannelParams params{q, p};
        Rng rng(derive_seed(seed, 0x6d636465u, pi));

        // Channel messages under the all-zero codeword take only q shapes.
        std::vector<std::vector<double>> chan(q);
        for (unsigned y = 0; y < q; ++y) chan[y] = llr_from_channel(y, params).values;
        auto draw_chan = [&]() -> const std::vector<double>& {
            gf_elem y = 0;
            if (p > 0.0 && rng.real() < p) y = static_cast<gf_elem>(1 + rng.below(q - 1));
            return chan[y];
        };

        std::vector<LlrVector> vc(sim.node_count), cv(sim.node_count), next(sim.node_count);
        for (auto& m : vc) m.values = draw_chan();

        PointRecord rec;
        rec.p = p;
        std::vector<double> gathered(q), acc(q), out(q);
        for (std::size_t iter = 1; iter <= sim.max_iterations; ++iter) {
            for (std::size_t i = 0; i < sim.node_count; ++i) {
                unsigned d = chk_deg.sample(rng);
                std::fill(acc.begin(), acc.end(), 1.0);
                for (unsigned e = 0; e + 1 < d; ++e) {
                    const auto& in = vc[rng.below(sim.node_count)];
                    gf_elem w = static_cast<gf_elem>(1 + rng.below(q - 1));
                    auto probs = probs_from_llr(in);
                    for (unsigned u = 0; u < q; ++u) gathered[u] = probs[ctx.div(u, w)];
                    walsh_hadamard(gathered);
                    for (unsigned u = 0; u < q; ++u) acc[u] *= gathered[u];
                }
                walsh_hadamard_inverse(acc);
                gf_elem wo = static_cast<gf_elem>(1 + rng.below(q - 1));
                for (unsigned k = 0; k < q; ++k) {
                    out[k] = acc[ctx.mul(static_cast<gf_elem>(k), wo)];
                }
                cv[i] = llr_from_probs(out);
            }
            double entropy_sum = 0.0;
            for (std::size_t i = 0; i < sim.node_count; ++i) {
                unsigned d = var_deg.sample(rng);
                auto& m = next[i].values;
                m = draw_chan();
                for (unsigned e = 0; e + 1 < d; ++e) {
                    const auto& in = cv[rng.below(sim.node_count)].values;
                    for (unsigned k = 0; k < q; ++k) m[k] += in[k];
                }
                clamp_llr(m);
                entropy_sum += entropy_bits(next[i]);
            }
            std::swap(vc, next);
            rec.iterations = iter;
            rec.final_entropy = entropy_sum / static_cast<double>(sim.node_count);
            if (rec.final_entropy < sim.entropy_threshold) {
                rec.converged = true;
                break;
            }
        }
        if (rec.converged) result.p_t = p;
        result.points.push_back(rec);
    }
    return result;
}

double ensemble_efficiency(const DegreeDistribution& dist, double p_t, unsigned q) {
    if (!(p_t > 0.0 && p_t < 1.0)) {
        throw std::invalid_argument("ensemble_efficiency: threshold outside (0, 1)");
    }
    double h = conditional_entropy(ChannelParams{q, p_t}, EntropyBase::base_q);
    return (1.0 - dist.design_rate) / h;
}

}  // namespace recon

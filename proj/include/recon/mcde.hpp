#pragma once

#include "recon/gf.hpp"
#include "recon/nbldpc.hpp"

#include <cstdint>
#include <vector>

namespace recon {

// Monte-Carlo density evolution over a sampled node population: cycle-free
// message passing with fresh random interconnections and edge weights every
// iteration, under the all-zero codeword.
struct EnsembleSim {
    DegreeDistribution dist;
    std::size_t node_count = 10000;
    std::size_t max_iterations = 150;
    double entropy_threshold = 1e-4;  // bits per message
    std::vector<double> qber_grid;    // sorted ascending
};

struct PointRecord {
    double p = 0.0;
    bool converged = false;
    std::size_t iterations = 0;     // iterations run until convergence or cap
    double final_entropy = 0.0;     // mean message entropy at the last iteration
};

struct ThresholdResult {
    double p_t = 0.0;  // largest grid p that converged; 0 when none did
    std::vector<PointRecord> points;
};

ThresholdResult mcde_threshold(const EnsembleSim& sim, const GfContext& ctx, std::uint64_t seed);

// (1 - R) / H_q(X|Y at p_t): how close the ensemble's threshold sits to the
// Slepian-Wolf limit (1.0 = capacity-achieving).
double ensemble_efficiency(const DegreeDistribution& dist, double p_t, unsigned q);

}  // namespace recon

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "recon/gf.hpp"

namespace recon {

// Edge-view degree distribution of a code ensemble: lambda[i] is the fraction
// of edges attached to variable nodes of degree i, rho likewise for checks.
// When rho is empty the check side is taken as concentrated at the average
// degree forced by edge-count balance.
struct DegreeDistribution {
    unsigned q = 2;
    double design_rate = 0.0;
    std::vector<std::pair<unsigned, double>> lambda;  // (node degree, edge fraction)
    std::vector<std::pair<unsigned, double>> rho;
    double det = -1.0;   // decoding threshold of the ensemble, if known
    double eeff = -1.0;  // efficiency at that threshold, if known

    double avg_variable_degree() const;  // node-view average
    // Renormalizes lambda (and rho if present) to sum 1. Returns the raw sum
    // of lambda before normalization so callers can flag suspect inputs.
    double normalize();
};

// Key-value text format: `q <order>`, `rate <r>`, repeated
// `lambda <degree> <fraction>` lines, optional `rho`/`det`/`eeff` lines.
// Lines starting with '#' are comments. Prints a warning to stderr when the
// lambda fractions sum more than 0.01 away from 1 before renormalization.
DegreeDistribution load_degree_file(const std::filesystem::path& path);

// Parity-check matrix over GF(q), rows as (column, nonzero weight) pairs.
struct SparseParityMatrix {
    unsigned q = 2;
    std::size_t m = 0;
    std::size_t n = 0;
    std::vector<std::vector<std::pair<std::uint32_t, gf_elem>>> rows;

    std::size_t edge_count() const;
};

// s_i = XOR over row i of (w_ij * x_j).
std::vector<gf_elem> syndrome(const SparseParityMatrix& H, const std::vector<gf_elem>& x,
                              const GfContext& ctx);

// R = (n - m - s) / (n - p - s) for p punctured and s shortened positions.
double code_rate(std::size_t n, std::size_t m, std::size_t p, std::size_t s);

// Punctured-to-shortened conversion step of the blind protocol:
// ceil(n * (0.028 - 0.02 R)), floored at 1.
std::size_t shorten_step_size(std::size_t n, double R);

// Progressive edge growth: builds an m x n matrix whose variable-degree
// histogram realizes dist's lambda (largest-remainder rounding), placing each
// edge at a check that maximizes the local girth; ties broken by lowest check
// degree, then by a seeded random pick. Edge weights start uniform over
// GF(q)\{0} and are then redrawn where needed so that columns sharing two
// rows form nonsingular 2x2 blocks and short cycles of degree-2 columns
// have non-identity ratio products; both would otherwise be low-weight
// codewords of the realized code.
SparseParityMatrix peg_construct(const DegreeDistribution& dist, std::size_t n,
                                 std::size_t m, const GfContext& ctx, std::uint64_t seed);

// Matrix file format ("alist-ext"): first line `q n m`, then one line per row
// with space-separated `col:weight` entries, both 0-indexed decimal.
void save_matrix(const SparseParityMatrix& H, const std::filesystem::path& path);
SparseParityMatrix load_matrix(const std::filesystem::path& path);

// Realized node counts per degree for n nodes under an edge-view
// distribution, rounded by largest remainder so the counts sum to n.
std::vector<std::pair<unsigned, std::size_t>> node_degree_counts(
    const std::vector<std::pair<unsigned, double>>& edge_view, std::size_t n);

}  // namespace recon

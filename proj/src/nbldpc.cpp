#include "recon/nbldpc.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace recon {

double DegreeDistribution::avg_variable_degree() const {
    double inv = 0.0;
    for (auto [d, f] : lambda) inv += f / d;
    return 1.0 / inv;
}

double DegreeDistribution::normalize() {
    double sum = 0.0;
    for (auto& [d, f] : lambda) sum += f;
    if (sum <= 0.0) throw std::invalid_argument("degree: empty lambda");
    for (auto& [d, f] : lambda) f /= sum;
    if (!rho.empty()) {
        double rsum = 0.0;
        for (auto& [d, f] : rho) rsum += f;
        for (auto& [d, f] : rho) f /= rsum;
    }
    return sum;
}

DegreeDistribution load_degree_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("degree: cannot open " + path.string());
    DegreeDistribution dist;
    bool have_rate = false, have_q = false;
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key)) continue;
        if (key == "q") {
            ls >> dist.q;
            have_q = true;
        } else if (key == "rate") {
            ls >> dist.design_rate;
            have_rate = true;
        } else if (key == "lambda" || key == "rho") {
            unsigned degree = 0;
            double fraction = 0.0;
            if (!(ls >> degree >> fraction) || degree < 2)
                throw std::runtime_error("degree: bad " + key + " line in " + path.string());
            auto& coeffs = (key == "lambda") ? dist.lambda : dist.rho;
            coeffs.emplace_back(degree, fraction);
        } else if (key == "det") {
            ls >> dist.det;
        } else if (key == "eeff") {
            ls >> dist.eeff;
        } else {
            throw std::runtime_error("degree: unknown key '" + key + "' in " + path.string());
        }
    }
    if (!have_q || !have_rate || dist.lambda.empty())
        throw std::runtime_error("degree: missing q, rate, or lambda in " + path.string());
    double raw = dist.normalize();
    if (std::abs(raw - 1.0) > 0.01)
        std::cerr << "warning: lambda fractions in " << path.string() << " sum to " << raw
                  << "; renormalized\n";
    return dist;
}

std::size_t SparseParityMatrix::edge_count() const {
    std::size_t e = 0;
    for (const auto& row : rows) e += row.size();
    return e;
}

std::vector<gf_elem> syndrome(const SparseParityMatrix& H, const std::vector<gf_elem>& x,
                              const GfContext& ctx) {
    if (x.size() != H.n) throw std::invalid_argument("syndrome: length mismatch");
    std::vector<gf_elem> s(H.m, 0);
    for (std::size_t i = 0; i < H.m; ++i) {
        gf_elem acc = 0;
        for (auto [col, w] : H.rows[i]) acc ^= ctx.mul(w, x[col]);
        s[i] = acc;
    }
    return s;
}

double code_rate(std::size_t n, std::size_t m, std::size_t p, std::size_t s) {
    if (p + s > n || n - p - s == 0)
        throw std::invalid_argument("code_rate: degenerate denominator");
    return (static_cast<double>(n) - static_cast<double>(m) - static_cast<double>(s)) /
           (static_cast<double>(n) - static_cast<double>(p) - static_cast<double>(s));
}

std::size_t shorten_step_size(std::size_t n, double R) {
    double demand = static_cast<double>(n) * (0.028 - 0.02 * R);
    // Tolerance so exact-decimal products (e.g. n=10000, R=0.5 -> 180) do
    // not round up through floating-point residue.
    auto step = static_cast<long long>(std::ceil(demand - 1e-9));
    return step < 1 ? 1 : static_cast<std::size_t>(step);
}

std::vector<std::pair<unsigned, std::size_t>> node_degree_counts(
    const std::vector<std::pair<unsigned, double>>& edge_view, std::size_t n) {
    // Edge view to node view: nu_i proportional to lambda_i / i.
    double norm = 0.0;
    for (auto [d, f] : edge_view) norm += f / d;
    std::vector<std::pair<unsigned, double>> exact;
    for (auto [d, f] : edge_view) exact.emplace_back(d, (f / d) / norm * n);

    std::vector<std::pair<unsigned, std::size_t>> counts;
    std::vector<std::pair<double, std::size_t>> remainders;  // (fraction, index)
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < exact.size(); ++i) {
        auto floor_count = static_cast<std::size_t>(exact[i].second);
        counts.emplace_back(exact[i].first, floor_count);
        assigned += floor_count;
        remainders.emplace_back(exact[i].second - floor_count, i);
    }
    // Hand out the leftover nodes by largest remainder, index as tie-break.
    std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (std::size_t k = 0; assigned < n; ++k, ++assigned)
        counts[remainders[k % remainders.size()].second].second += 1;
    return counts;
}

void save_matrix(const SparseParityMatrix& H, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("matrix: cannot write " + path.string());
    out << H.q << ' ' << H.n << ' ' << H.m << '\n';
    for (const auto& row : H.rows) {
        for (std::size_t k = 0; k < row.size(); ++k) {
            if (k) out << ' ';
            out << row[k].first << ':' << static_cast<unsigned>(row[k].second);
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("matrix: write failed for " + path.string());
}

SparseParityMatrix load_matrix(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("matrix: cannot open " + path.string());
    SparseParityMatrix H;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("matrix: empty file " + path.string());
    {
        std::istringstream hs(line);
        if (!(hs >> H.q >> H.n >> H.m))
            throw std::runtime_error("matrix: bad header in " + path.string());
    }
    H.rows.resize(H.m);
    for (std::size_t i = 0; i < H.m; ++i) {
        if (!std::getline(in, line))
            throw std::runtime_error("matrix: truncated file " + path.string());
        std::istringstream ls(line);
        std::string entry;
        while (ls >> entry) {
            auto colon = entry.find(':');
            if (colon == std::string::npos)
                throw std::runtime_error("matrix: bad entry '" + entry + "' in " + path.string());
            std::uint32_t col = std::stoul(entry.substr(0, colon));
            unsigned w = std::stoul(entry.substr(colon + 1));
            if (col >= H.n || w == 0 || w >= H.q)
                throw std::runtime_error("matrix: entry out of range in " + path.string());
            H.rows[i].emplace_back(col, static_cast<gf_elem>(w));
        }
    }
    return H;
}

}  // namespace recon

#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "recon/channel.hpp"
#include "recon/gf.hpp"
#include "recon/harness.hpp"
#include "recon/keyrate.hpp"
#include "recon/mcde.hpp"
#include "recon/nbldpc.hpp"

namespace {

std::string num(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os << std::setprecision(10) << x;
    return os.str();
}

struct RunArgs {
    std::string config, method, qber, catalog, out, matrix_cache, transcript_dump;
    unsigned q = 2;
    std::uint64_t frames = 1, n = 0, seed = 1, early_stop = 0;
    double delta = 0.10, estimate_offset = 0.0;
};

int cmd_run(const RunArgs& a, const CLI::App& sub) {
    recon::ExperimentConfig cfg;
    if (!a.config.empty()) cfg = recon::load_experiment_config(a.config);
    if (sub.count("--method")) cfg.method = a.method;
    if (sub.count("--q")) cfg.q = a.q;
    if (sub.count("--qber")) cfg.qber_grid = recon::parse_qber_grid(a.qber);
    if (sub.count("--frames")) cfg.frames = a.frames;
    if (sub.count("--n")) cfg.n = a.n;
    if (sub.count("--seed")) cfg.seed = a.seed;
    if (sub.count("--catalog")) cfg.catalog = a.catalog;
    if (sub.count("--out")) cfg.out = a.out;
    if (sub.count("--matrix-cache")) cfg.matrix_cache = a.matrix_cache;
    if (sub.count("--transcript-dump")) cfg.transcript_dump = a.transcript_dump;
    if (sub.count("--early-stop")) cfg.early_stop_rounds = a.early_stop;
    if (sub.count("--delta")) cfg.delta_fraction = a.delta;
    if (sub.count("--estimate-offset")) cfg.estimate_offset = a.estimate_offset;

    auto rows = recon::run_experiment(cfg);
    std::cout << "method,q,qber,frames,mean_f,fer,mean_rounds,mean_serial_messages,mean_tries\n";
    for (const auto& r : rows) {
        std::cout << r.method << ',' << r.q << ',' << num(r.qber) << ',' << r.frames << ','
                  << num(r.mean_f) << ',' << num(r.fer) << ',' << num(r.mean_rounds) << ','
                  << num(r.mean_serial_messages) << ',' << num(r.mean_tries) << '\n';
    }
    return 0;
}

int cmd_mcde(const std::string& dist_path, const std::string& grid, std::uint64_t nodes,
             std::uint64_t iters, double threshold, std::uint64_t seed) {
    auto dist = recon::load_degree_file(dist_path);
    recon::EnsembleSim sim;
    sim.dist = dist;
    sim.node_count = nodes;
    sim.max_iterations = iters;
    sim.entropy_threshold = threshold;
    sim.qber_grid = recon::parse_qber_grid(grid);
    auto ctx = recon::GfContext::make(dist.q);
    auto res = recon::mcde_threshold(sim, ctx, seed);
    std::cout << "p,converged,iterations,mean_entropy_bits\n";
    for (const auto& pt : res.points) {
        std::cout << num(pt.p) << ',' << (pt.converged ? 1 : 0) << ',' << pt.iterations << ','
                  << num(pt.final_entropy) << '\n';
    }
    if (res.p_t > 0.0) {
        std::cout << "threshold," << num(res.p_t) << '\n';
        std::cout << "efficiency," << num(recon::ensemble_efficiency(dist, res.p_t, dist.q))
                  << '\n';
    } else {
        std::cout << "threshold,none\n";
    }
    return 0;
}

int cmd_keyrate(const std::string& scenario_path, const std::string& csv_path) {
    auto sc = recon::load_scenario(scenario_path);
    auto rows = recon::load_result_csv(csv_path);
    std::cout << "loss_db,qber,method,mean_f,leak_bits,secret_key_length,improvement_vs_binary\n";
    for (const auto& row : sc.rows) {
        double lb = std::numeric_limits<double>::quiet_NaN();  // binary baseline, if present
        struct Entry {
            std::string method;
            double mean_f, leak, l;
        };
        std::vector<Entry> entries;
        for (const auto& r : rows) {
            if (r.q != sc.q || std::abs(r.qber - row.qber) > 1e-9) continue;
            double h2 = recon::conditional_entropy(recon::ChannelParams{sc.q, row.qber},
                                                   recon::EntropyBase::base_2);
            double leak = r.mean_f * row.n * h2;
            recon::KeyRateInputs in{sc.q,     row.d0,     row.d1,    row.phi_z,
                                    leak,     sc.eps_sec, sc.eps_cor};
            double l = recon::secret_key_length(in);
            if (r.method == "cascade-binary") lb = l;
            entries.push_back(Entry{r.method, r.mean_f, leak, l});
        }
        for (const auto& e : entries) {
            std::cout << num(row.loss_db) << ',' << num(row.qber) << ',' << e.method << ','
                      << num(e.mean_f) << ',' << num(e.leak) << ',' << num(e.l) << ',';
            if (!std::isnan(lb) && e.method != "cascade-binary")
                std::cout << num(recon::relative_improvement(e.l, lb));
            std::cout << '\n';
        }
    }
    return 0;
}

int cmd_build(const std::string& dist_path, std::uint64_t n, const std::string& out,
              std::uint64_t seed) {
    auto dist = recon::load_degree_file(dist_path);
    auto ctx = recon::GfContext::make(dist.q);
    auto m = static_cast<std::size_t>(
        std::llround(static_cast<double>(n) * (1.0 - dist.design_rate)));
    auto H = recon::peg_construct(dist, n, m, ctx, seed);
    recon::save_matrix(H, out);
    std::cout << "wrote " << out << ": GF(" << H.q << "), " << H.m << " x " << H.n << ", "
              << H.edge_count() << " edges\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Information reconciliation simulator for high-dimensional QKD"};
    app.require_subcommand(1);

    RunArgs ra;
    auto* run = app.add_subcommand("run", "Run a reconciliation method over a QBER grid");
    run->add_option("--config", ra.config, "Key-value config file; flags override it");
    run->add_option("--method", ra.method,
                    "ldpc-blind | cascade-binary | cascade-hd-serial | cascade-hd-parallel");
    run->add_option("--q", ra.q, "Alphabet size (power of two, 2..256)");
    run->add_option("--qber", ra.qber, "Grid: single value, comma list, or a:b:step");
    run->add_option("--frames", ra.frames, "Frames per grid point");
    run->add_option("--n", ra.n, "Frame length in symbols (0 = method default)");
    run->add_option("--seed", ra.seed, "Master seed");
    run->add_option("--catalog", ra.catalog, "Code catalog for ldpc-blind");
    run->add_option("--out", ra.out, "CSV file to append results to");
    run->add_option("--matrix-cache", ra.matrix_cache, "Directory for built matrices");
    run->add_option("--transcript-dump", ra.transcript_dump, "JSON-lines per-frame debug dump");
    run->add_option("--early-stop", ra.early_stop, "Cascade wave budget (0 = unlimited)");
    run->add_option("--delta", ra.delta, "Blind reserved fraction");
    run->add_option("--estimate-offset", ra.estimate_offset,
                    "Error added to the true QBER before code selection");

    std::string mc_dist, mc_grid;
    std::uint64_t mc_nodes = 10000, mc_iters = 150, mc_seed = 1;
    double mc_threshold = 1e-4;
    auto* mc = app.add_subcommand("mcde", "Monte Carlo density evolution threshold estimate");
    mc->add_option("--dist", mc_dist, "Degree distribution file")->required();
    mc->add_option("--grid", mc_grid, "QBER grid a:b:step (or comma list)")->required();
    mc->add_option("--nodes", mc_nodes, "Population size per side");
    mc->add_option("--iters", mc_iters, "Iteration cap");
    mc->add_option("--threshold", mc_threshold, "Convergence entropy, bits per message");
    mc->add_option("--seed", mc_seed, "Master seed");

    std::string kr_scenario, kr_csv;
    auto* kr = app.add_subcommand(
        "keyrate", "Secret key length per scenario row, joined with reconciliation results");
    kr->add_option("--scenario", kr_scenario, "Scenario fixture file")->required();
    kr->add_option("--leak-from", kr_csv, "Result CSV produced by `run`")->required();

    std::string b_dist, b_out;
    std::uint64_t b_n = 0, b_seed = 1;
    auto* bld = app.add_subcommand("build", "Construct a parity-check matrix from a degree file");
    bld->add_option("--dist", b_dist, "Degree distribution file")->required();
    bld->add_option("--n", b_n, "Number of variable nodes")->required();
    bld->add_option("--out", b_out, "Matrix output path")->required();
    bld->add_option("--seed", b_seed, "Construction seed");

    try {
        app.parse(argc, argv);
        if (*run) return cmd_run(ra, *run);
        if (*mc) return cmd_mcde(mc_dist, mc_grid, mc_nodes, mc_iters, mc_threshold, mc_seed);
        if (*kr) return cmd_keyrate(kr_scenario, kr_csv);
        if (*bld) return cmd_build(b_dist, b_n, b_out, b_seed);
        return 2;
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const recon::config_error& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const recon::io_error& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const std::runtime_error& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "recon/gf.hpp"
#include "recon/nbldpc.hpp"

namespace recon {

// Invalid or inconsistent configuration; the CLI maps this to exit code 2.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Filesystem failure while reading or writing data files; exit code 3.
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One simulation campaign: a reconciliation method evaluated over a QBER
// grid with a fixed number of frames per grid point.
struct ExperimentConfig {
    std::string method;  // ldpc-blind | cascade-binary | cascade-hd-serial | cascade-hd-parallel
    unsigned q = 2;
    std::vector<double> qber_grid;
    std::size_t frames = 1;
    std::size_t n = 0;  // frame length in symbols; 0 picks the method default
    std::uint64_t seed = 1;
    std::filesystem::path catalog;  // code catalog, required for ldpc-blind
    std::filesystem::path out;      // CSV to append to; empty keeps results in memory
    std::filesystem::path matrix_cache = "matrix-cache";
    std::filesystem::path transcript_dump;  // optional JSON-lines debug dump
    std::size_t early_stop_rounds = 0;      // cascade wave budget, 0 = unlimited
    double delta_fraction = 0.10;           // blind reserved fraction
    double estimate_offset = 0.0;  // added to the true p before code selection
};

// Flat key-value text, one `key value` pair per line, '#' comments. Keys
// mirror the CLI flags: method, q, qber (single value, comma list, or
// a:b:step range), frames, n, seed, catalog, out, matrix_cache,
// transcript_dump, early_stop, delta, estimate_offset. Relative paths are
// resolved against the config file's directory.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

// "0.05" | "0.01,0.05,0.1" | "0.01:0.2:0.01" (inclusive endpoints).
std::vector<double> parse_qber_grid(const std::string& text);

struct ResultRow {
    std::string method;
    unsigned q = 0;
    double qber = 0.0;
    std::size_t frames = 0;
    double mean_f = 0.0;  // over successful frames only; nan when none succeed
    double fer = 0.0;
    double mean_rounds = 0.0;
    double mean_serial_messages = 0.0;
    double mean_tries = 0.0;
};

// Runs frames x grid points sequentially with one fresh transcript per
// frame and frame seeds derived from (cfg.seed, point index, frame index),
// so a given config always produces byte-identical CSV output. Each
// frame's reported f and residual-error count are audited against an
// independent recomputation from its transcript before aggregation.
// Appends one row per grid point to cfg.out (header written first when
// the file is new or empty) and returns the same rows.
std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg);

void append_result_csv(const std::filesystem::path& path, const std::vector<ResultRow>& rows);
std::vector<ResultRow> load_result_csv(const std::filesystem::path& path);

// Exact comparison plus the symbol Hamming distance; throws on length
// mismatch rather than guessing an alignment.
std::pair<bool, std::size_t> verify_keys(const std::vector<gf_elem>& alice,
                                         const std::vector<gf_elem>& bob);

// Builds the parity-check matrix for dist at blocklength n, or loads it
// from cache_dir when an earlier run already built it. The construction
// seed is a fixed function of (q, design rate, n), never of the
// experiment seed, so cached and fresh runs agree for every experiment.
SparseParityMatrix cached_matrix(const DegreeDistribution& dist, std::size_t n,
                                 const std::filesystem::path& cache_dir);

}  // namespace recon

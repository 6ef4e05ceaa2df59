#include "recon/harness.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "recon/blind.hpp"
#include "recon/cascade.hpp"
#include "recon/channel.hpp"
#include "recon/rng.hpp"
#include "recon/transcript.hpp"

namespace recon {
namespace {

constexpr const char* kCsvHeader =
    "method,q,qber,frames,mean_f,fer,mean_rounds,mean_serial_messages,mean_tries";

bool known_method(const std::string& m) {
    return m == "ldpc-blind" || m == "cascade-binary" || m == "cascade-hd-serial" ||
           m == "cascade-hd-parallel";
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        double x = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return x;
    } catch (const std::exception&) {
        throw config_error("invalid number for " + what + ": '" + s + "'");
    }
}

std::uint64_t parse_u64(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        unsigned long long x = std::stoull(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return x;
    } catch (const std::exception&) {
        throw config_error("invalid integer for " + what + ": '" + s + "'");
    }
}

// Stable textual form for CSV cells: round-trippable, and the nonfinite
// values spelled the way strtod reads them back.
std::string fmt(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os << std::setprecision(10) << x;
    return os.str();
}

void set_config_key(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "method") {
        cfg.method = value;
    } else if (key == "q") {
        cfg.q = static_cast<unsigned>(parse_u64(value, key));
    } else if (key == "qber") {
        cfg.qber_grid = parse_qber_grid(value);
    } else if (key == "frames") {
        cfg.frames = parse_u64(value, key);
    } else if (key == "n") {
        cfg.n = parse_u64(value, key);
    } else if (key == "seed") {
        cfg.seed = parse_u64(value, key);
    } else if (key == "catalog") {
        cfg.catalog = value;
    } else if (key == "out") {
        cfg.out = value;
    } else if (key == "matrix_cache") {
        cfg.matrix_cache = value;
    } else if (key == "transcript_dump") {
        cfg.transcript_dump = value;
    } else if (key == "early_stop") {
        cfg.early_stop_rounds = parse_u64(value, key);
    } else if (key == "delta") {
        cfg.delta_fraction = parse_double(value, key);
    } else if (key == "estimate_offset") {
        cfg.estimate_offset = parse_double(value, key);
    } else {
        throw config_error("unknown config key '" + key + "'");
    }
}

void validate(const ExperimentConfig& cfg) {
    if (!known_method(cfg.method))
        throw config_error("unknown method '" + cfg.method +
                           "' (expected ldpc-blind, cascade-binary, cascade-hd-serial "
                           "or cascade-hd-parallel)");
    if (cfg.q < 2 || cfg.q > 256 || !std::has_single_bit(cfg.q))
        throw config_error("q must be a power of two in [2, 256]");
    if (cfg.qber_grid.empty()) throw config_error("qber grid is empty");
    for (double p : cfg.qber_grid)
        if (!(p >= 0.0 && p < 1.0)) throw config_error("qber values must lie in [0, 1)");
    if (cfg.frames == 0) throw config_error("frames must be at least 1");
    if (!(cfg.delta_fraction >= 0.0 && cfg.delta_fraction < 1.0))
        throw config_error("delta must lie in [0, 1)");
    if (cfg.method == "ldpc-blind") {
        if (cfg.catalog.empty()) throw config_error("ldpc-blind requires a code catalog");
        if (!std::filesystem::exists(cfg.catalog))
            throw config_error("code catalog not found: " + cfg.catalog.string());
    }
}

// JSON-friendly number: nonfinite values have no JSON spelling, use null.
std::string jnum(double x) { return std::isfinite(x) ? fmt(x) : "null"; }

const char* kind_name(EventKind k) {
    switch (k) {
        case EventKind::syndrome: return "syndrome";
        case EventKind::parity: return "parity";
        case EventKind::parity_batch: return "parity_batch";
        case EventKind::partner_bits: return "partner_bits";
        case EventKind::shortened_values: return "shortened_values";
        case EventKind::plain_reveal: return "plain_reveal";
    }
    return "?";
}

void dump_frame(std::ostream& os, const ExperimentConfig& cfg, double p, std::size_t pi,
                std::size_t fi, const Transcript& tr, const FrameOutcome& out) {
    os << "{\"method\":\"" << cfg.method << "\",\"q\":" << cfg.q << ",\"qber\":" << fmt(p)
       << ",\"point\":" << pi << ",\"frame\":" << fi
       << ",\"success\":" << (out.success ? "true" : "false") << ",\"f\":" << jnum(out.f)
       << ",\"tries\":" << out.tries << ",\"leak_bits\":" << out.leak_bits
       << ",\"message_rounds\":" << out.message_rounds
       << ",\"serial_messages\":" << out.serial_messages << ",\"mismatches\":" << out.mismatches
       << ",\"events\":[";
    bool first = true;
    for (const auto& ev : tr.events()) {
        if (!first) os << ',';
        first = false;
        os << "{\"dir\":\"" << (ev.direction == Direction::alice_to_bob ? "a2b" : "b2a")
           << "\",\"kind\":\"" << kind_name(ev.kind) << "\",\"items\":" << ev.items
           << ",\"payload_bits\":" << ev.payload_bits << ",\"leak_bits\":" << ev.leak_bits
           << ",\"round\":" << ev.round << '}';
    }
    os << "]}\n";
}

// The reported outcome must be reproducible from the transcript and the raw
// keys alone; any disagreement is a bug in a protocol implementation, not a
// property of the channel, so it throws rather than skewing the statistics.
void audit_frame(const FrameOutcome& out, const Transcript& tr, const ChannelParams& accounted,
                 const std::vector<gf_elem>& alice_key, const std::vector<gf_elem>& bob_key) {
    auto totals = tr.recompute_totals();
    if (totals.leak_bits != tr.leak_bits() || totals.message_rounds != tr.message_rounds() ||
        totals.serial_message_count != tr.serial_message_count())
        throw std::logic_error("transcript running totals diverge from its events");
    if (out.leak_bits != tr.leak_bits() || out.message_rounds != tr.message_rounds() ||
        out.serial_messages != tr.serial_message_count())
        throw std::logic_error("frame outcome counters diverge from the transcript");
    double f = efficiency(out.leak_bits, out.key_length, accounted);
    if (!(f == out.f))
        throw std::logic_error("frame efficiency does not recompute from the transcript");
    auto [equal, distance] = verify_keys(alice_key, bob_key);
    if (distance != out.mismatches || (equal != out.success && out.key_length != 0))
        throw std::logic_error("frame outcome disagrees with the key comparison");
}

}  // namespace

std::vector<double> parse_qber_grid(const std::string& text) {
    std::vector<double> grid;
    if (text.find(':') != std::string::npos) {
        std::istringstream is(text);
        std::string a, b, s;
        if (!std::getline(is, a, ':') || !std::getline(is, b, ':') || !std::getline(is, s))
            throw config_error("grid range must be a:b:step, got '" + text + "'");
        double lo = parse_double(trim(a), "grid start");
        double hi = parse_double(trim(b), "grid end");
        double step = parse_double(trim(s), "grid step");
        if (!(step > 0.0)) throw config_error("grid step must be positive");
        if (hi < lo) throw config_error("grid end is below its start");
        auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
        for (std::size_t i = 0; i < count; ++i) grid.push_back(lo + static_cast<double>(i) * step);
        return grid;
    }
    std::istringstream is(text);
    std::string part;
    while (std::getline(is, part, ',')) {
        part = trim(part);
        if (!part.empty()) grid.push_back(parse_double(part, "qber"));
    }
    if (grid.empty()) throw config_error("empty qber grid '" + text + "'");
    return grid;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path.string());
    ExperimentConfig cfg;
    std::string line;
    std::size_t ln = 0;
    while (std::getline(in, line)) {
        ++ln;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto sp = line.find_first_of(" \t");
        if (sp == std::string::npos)
            throw config_error(path.string() + ":" + std::to_string(ln) + ": expected 'key value'");
        std::string key = line.substr(0, sp);
        std::string value = trim(line.substr(sp + 1));
        try {
            set_config_key(cfg, key, value);
        } catch (const config_error& e) {
            throw config_error(path.string() + ":" + std::to_string(ln) + ": " + e.what());
        }
    }
    auto base = path.parent_path();
    for (auto* p : {&cfg.catalog, &cfg.out, &cfg.matrix_cache, &cfg.transcript_dump}) {
        if (!p->empty() && p->is_relative()) *p = base / *p;
    }
    validate(cfg);
    return cfg;
}

std::pair<bool, std::size_t> verify_keys(const std::vector<gf_elem>& alice,
                                         const std::vector<gf_elem>& bob) {
    if (alice.size() != bob.size())
        throw std::invalid_argument("verify_keys: key lengths differ (" +
                                    std::to_string(alice.size()) + " vs " +
                                    std::to_string(bob.size()) + ")");
    std::size_t distance = 0;
    for (std::size_t i = 0; i < alice.size(); ++i)
        if (alice[i] != bob[i]) ++distance;
    return {distance == 0, distance};
}

SparseParityMatrix cached_matrix(const DegreeDistribution& dist, std::size_t n,
                                 const std::filesystem::path& cache_dir) {
    auto rate_mills = static_cast<std::uint64_t>(std::llround(dist.design_rate * 1000.0));
    std::ostringstream name;
    name << "gf" << dist.q << "_r" << std::setw(3) << std::setfill('0') << rate_mills << "_n" << n
         << ".alist";
    auto path = cache_dir / name.str();
    if (std::filesystem::exists(path)) {
        auto H = load_matrix(path);
        if (H.q == dist.q && H.n == n) return H;
    }
    auto m = static_cast<std::size_t>(std::llround(static_cast<double>(n) * (1.0 - dist.design_rate)));
    auto ctx = GfContext::make(dist.q);
    std::uint64_t seed = derive_seed(0x70656773656564ULL, dist.q, rate_mills, n);
    auto H = peg_construct(dist, n, m, ctx, seed);
    std::error_code ec;
    std::filesystem::create_directories(cache_dir, ec);
    try {
        save_matrix(H, path);
    } catch (const std::exception&) {
        // A read-only cache is not fatal; the matrix is simply rebuilt next time.
    }
    return H;
}

void append_result_csv(const std::filesystem::path& path, const std::vector<ResultRow>& rows) {
    bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
    if (auto dir = path.parent_path(); !dir.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
    }
    std::ofstream out(path, std::ios::app);
    if (!out) throw io_error("cannot open result file for append: " + path.string());
    if (fresh) out << kCsvHeader << '\n';
    for (const auto& r : rows) {
        out << r.method << ',' << r.q << ',' << fmt(r.qber) << ',' << r.frames << ','
            << fmt(r.mean_f) << ',' << fmt(r.fer) << ',' << fmt(r.mean_rounds) << ','
            << fmt(r.mean_serial_messages) << ',' << fmt(r.mean_tries) << '\n';
    }
    if (!out) throw io_error("write failed: " + path.string());
}

std::vector<ResultRow> load_result_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open result file: " + path.string());
    std::string line;
    std::size_t ln = 0;
    std::vector<ResultRow> rows;
    while (std::getline(in, line)) {
        ++ln;
        line = trim(line);
        if (line.empty() || line == kCsvHeader) continue;
        std::istringstream ls(line);
        std::vector<std::string> cell;
        std::string c;
        while (std::getline(ls, c, ',')) cell.push_back(trim(c));
        if (cell.size() != 9)
            throw io_error(path.string() + ":" + std::to_string(ln) +
                           ": expected 9 CSV fields, got " + std::to_string(cell.size()));
        try {
            ResultRow r;
            r.method = cell[0];
            r.q = static_cast<unsigned>(std::stoul(cell[1]));
            r.qber = std::stod(cell[2]);
            r.frames = std::stoul(cell[3]);
            r.mean_f = std::stod(cell[4]);
            r.fer = std::stod(cell[5]);
            r.mean_rounds = std::stod(cell[6]);
            r.mean_serial_messages = std::stod(cell[7]);
            r.mean_tries = std::stod(cell[8]);
            rows.push_back(std::move(r));
        } catch (const std::exception&) {
            throw io_error(path.string() + ":" + std::to_string(ln) + ": malformed CSV row");
        }
    }
    return rows;
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg) {
    validate(cfg);
    const bool ldpc = cfg.method == "ldpc-blind";
    const auto v = static_cast<unsigned>(std::bit_width(cfg.q) - 1);
    const std::size_t n = cfg.n ? cfg.n : (ldpc ? 10000 : (std::size_t{1} << 16) / v);

    std::vector<CodeCatalogEntry> catalog;
    GfContext ctx;
    if (ldpc) {
        catalog = load_catalog(cfg.catalog);
        ctx = GfContext::make(cfg.q);
    }
    std::ofstream dump;
    if (!cfg.transcript_dump.empty()) {
        if (auto dir = cfg.transcript_dump.parent_path(); !dir.empty()) {
            std::error_code ec;
            std::filesystem::create_directories(dir, ec);
        }
        dump.open(cfg.transcript_dump, std::ios::app);
        if (!dump) throw io_error("cannot open transcript dump: " + cfg.transcript_dump.string());
    }

    std::vector<ResultRow> rows;
    for (std::size_t pi = 0; pi < cfg.qber_grid.size(); ++pi) {
        double p = cfg.qber_grid[pi];
        double est = std::clamp(p + cfg.estimate_offset, 0.0, 1.0 - 1e-12);

        SparseParityMatrix H;
        if (ldpc) {
            auto choice = select_code(catalog, est);
            auto dist = load_degree_file(catalog[choice.index].degree_file);
            if (dist.q != cfg.q)
                throw config_error("catalog entry is over GF(" + std::to_string(dist.q) +
                                   "), experiment wants GF(" + std::to_string(cfg.q) + ")");
            H = cached_matrix(dist, n, cfg.matrix_cache);
        }

        double sum_f = 0.0;
        std::size_t successes = 0;
        double sum_rounds = 0.0, sum_serial = 0.0, sum_tries = 0.0;
        for (std::size_t fi = 0; fi < cfg.frames; ++fi) {
            std::uint64_t fseed = derive_seed(cfg.seed, pi, fi);
            auto frame = sample_frame(ChannelParams{cfg.q, p}, n, fseed);
            Transcript tr;
            FrameOutcome out;
            std::vector<gf_elem> alice_key, bob_key;
            ChannelParams accounted{cfg.q, p};
            if (ldpc) {
                BlindParams bp{cfg.delta_fraction, 100};
                auto res = run_blind(H, frame, ChannelParams{cfg.q, p}, bp, ctx, tr, fseed);
                out = res.outcome;
                alice_key = std::move(res.alice_key);
                bob_key = std::move(res.bob_key);
            } else {
                CascadeParams cp{est, cfg.early_stop_rounds};
                CascadeResult res;
                if (cfg.method == "cascade-binary")
                    res = run_binary_cascade(frame.x, frame.y, cfg.q, cp, tr, fseed);
                else if (cfg.method == "cascade-hd-serial")
                    res = run_hd_cascade_serial(frame.x, frame.y, cfg.q, cp, tr, fseed);
                else
                    res = run_hd_cascade_parallel(frame.x, frame.y, cfg.q, cp, tr, fseed);
                out = res.outcome;
                alice_key = std::move(res.alice_key);
                bob_key = std::move(res.bob_key);
                accounted.p = est;
            }
            audit_frame(out, tr, accounted, alice_key, bob_key);
            if (out.success) {
                sum_f += out.f;
                ++successes;
            }
            sum_rounds += static_cast<double>(out.message_rounds);
            sum_serial += static_cast<double>(out.serial_messages);
            sum_tries += static_cast<double>(out.tries);
            if (dump.is_open()) dump_frame(dump, cfg, p, pi, fi, tr, out);
        }

        ResultRow row;
        row.method = cfg.method;
        row.q = cfg.q;
        row.qber = p;
        row.frames = cfg.frames;
        row.mean_f = successes ? sum_f / static_cast<double>(successes)
                               : std::numeric_limits<double>::quiet_NaN();
        row.fer = static_cast<double>(cfg.frames - successes) / static_cast<double>(cfg.frames);
        row.mean_rounds = sum_rounds / static_cast<double>(cfg.frames);
        row.mean_serial_messages = sum_serial / static_cast<double>(cfg.frames);
        row.mean_tries = sum_tries / static_cast<double>(cfg.frames);
        rows.push_back(row);
    }
    if (!cfg.out.empty()) append_result_csv(cfg.out, rows);
    return rows;
}

}  // namespace recon

#include "recon/keyrate.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>

namespace recon {

double h_hd(double phi_z, unsigned q) {
    if (q < 2) throw std::invalid_argument("h_hd: q must be at least 2");
    if (phi_z < 0.0 || phi_z > 1.0) throw std::invalid_argument("h_hd: phi outside [0, 1]");
    double h = 0.0;
    if (phi_z > 0.0) h -= phi_z * std::log2(phi_z / (q - 1));
    if (phi_z < 1.0) h -= (1.0 - phi_z) * std::log2(1.0 - phi_z);
    return h;
}

double secret_key_length(const KeyRateInputs& inp) {
    if (inp.d0 < 0.0 || inp.d1 < 0.0 || inp.leak_ir < 0.0) {
        throw std::invalid_argument("secret_key_length: counts and leak must be nonnegative");
    }
    if (!(inp.eps_sec > 0.0 && inp.eps_sec < 1.0) || !(inp.eps_cor > 0.0 && inp.eps_cor < 1.0)) {
        throw std::invalid_argument("secret_key_length: eps outside (0, 1)");
    }
    double lq = std::log2(static_cast<double>(inp.q)) * inp.d0 +
                inp.d1 * (std::log2(static_cast<double>(inp.q)) - h_hd(inp.phi_z, inp.q)) -
                inp.leak_ir - 6.0 * std::log2(19.0 / inp.eps_sec) - std::log2(2.0 / inp.eps_cor);
    return lq > 0.0 ? lq : 0.0;
}

double relative_improvement(double skr_a, double skr_b) {
    if (skr_a < 0.0 || skr_b < 0.0) {
        throw std::invalid_argument("relative_improvement: rates must be nonnegative");
    }
    if (skr_b == 0.0) {
        if (skr_a == 0.0) return 0.0;
        return std::numeric_limits<double>::infinity();
    }
    return skr_a / skr_b - 1.0;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_scenario: cannot open " + path.string());
    Scenario sc;
    bool have_q = false;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ss(line);
        std::string key;
        if (!(ss >> key) || key[0] == '#') continue;
        auto bad = [&](const char* what) {
            return std::runtime_error("load_scenario: " + path.string() + ":" +
                                      std::to_string(lineno) + ": " + what);
        };
        if (key == "q") {
            unsigned q = 0;
            if (!(ss >> q) || q < 2) throw bad("bad q");
            sc.q = q;
            have_q = true;
        } else if (key == "eps_sec") {
            if (!(ss >> sc.eps_sec)) throw bad("bad eps_sec");
        } else if (key == "eps_cor") {
            if (!(ss >> sc.eps_cor)) throw bad("bad eps_cor");
        } else if (key == "row") {
            ScenarioRow r;
            if (!(ss >> r.loss_db >> r.d0 >> r.d1 >> r.phi_z >> r.n >> r.qber)) {
                throw bad("row needs loss_db d0 d1 phi_z n qber");
            }
            if (r.d0 < 0 || r.d1 < 0 || r.phi_z < 0 || r.phi_z > 1 || r.n <= 0 || r.qber < 0 ||
                r.qber >= 1) {
                throw bad("row values out of range");
            }
            sc.rows.push_back(r);
        } else {
            throw bad("unknown key");
        }
    }
    if (!have_q) throw std::runtime_error("load_scenario: " + path.string() + ": missing q");
    if (sc.rows.empty()) throw std::runtime_error("load_scenario: " + path.string() + ": no rows");
    return sc;
}

}  // namespace recon

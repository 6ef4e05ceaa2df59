#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace recon {

// 1-decoy secret-key-length evaluation for high-dimensional keys, plus the
// relative-improvement comparison between two reconciliation methods.

// -phi*log2(phi/(q-1)) - (1-phi)*log2(1-phi), with 0*log(0) := 0.
double h_hd(double phi_z, unsigned q);

struct KeyRateInputs {
    unsigned q = 2;
    double d0 = 0.0;     // lower bound on vacuum events per block
    double d1 = 0.0;     // lower bound on single-photon events per block
    double phi_z = 0.0;  // phase-error upper bound
    double leak_ir = 0.0;
    double eps_sec = 1e-12;
    double eps_cor = 1e-12;
};

// log2(q)*d0 + d1*(log2(q) - h_hd(phi_z, q)) - leak_ir
//   - 6*log2(19/eps_sec) - log2(2/eps_cor), clamped at 0.
double secret_key_length(const KeyRateInputs& inp);

// skr_a/skr_b - 1; both zero compares equal (0), zero baseline with a
// positive alternative returns +infinity (range-extension case).
double relative_improvement(double skr_a, double skr_b);

// Count scenario fixture: `q <order>` header, then
// `row <loss_db> <d0> <d1> <phi_z> <n> <qber>` lines ('#' comments allowed).
// n is the reconciled key length in symbols and qber the channel error rate
// used to turn an efficiency f into leak_ir = f * n * H_2(X|Y).
struct ScenarioRow {
    double loss_db = 0.0;
    double d0 = 0.0;
    double d1 = 0.0;
    double phi_z = 0.0;
    double n = 0.0;
    double qber = 0.0;
};

struct Scenario {
    unsigned q = 2;
    double eps_sec = 1e-12;
    double eps_cor = 1e-12;
    std::vector<ScenarioRow> rows;
};

Scenario load_scenario(const std::filesystem::path& path);

}  // namespace recon

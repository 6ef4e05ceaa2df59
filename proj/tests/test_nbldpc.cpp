#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "doctest.h"
#include "recon/gf.hpp"
#include "recon/nbldpc.hpp"

using recon::DegreeDistribution;
using recon::GfContext;
using recon::SparseParityMatrix;
using recon::gf_elem;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& content) {
    auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path);
    out << content;
    return path;
}

}  // namespace

TEST_SUITE("nbldpc") {
    TEST_CASE("code rate counts punctured and shortened positions") {
        CHECK(recon::code_rate(10, 4, 2, 1) == doctest::Approx(5.0 / 7.0));
        CHECK(recon::code_rate(10, 4, 0, 0) == doctest::Approx(0.6));
        // All-punctured start of the blind protocol: every redundant symbol
        // is masked, so the starting rate is 1 when m equals the reserve.
        CHECK(recon::code_rate(10000, 1000, 1000, 0) == doctest::Approx(1.0));
    }

    TEST_CASE("shortening step size follows the linear rule with a floor of one") {
        CHECK(recon::shorten_step_size(10000, 1.0) == 80);
        CHECK(recon::shorten_step_size(10000, 0.5) == 180);
        CHECK(recon::shorten_step_size(10000, 1.4) == 1);
        CHECK(recon::shorten_step_size(3, 1.0) == 1);
    }

    TEST_CASE("average variable degree inverts the edge-view mixture") {
        DegreeDistribution d;
        d.q = 4;
        d.lambda = {{2, 0.5}, {3, 0.5}};
        CHECK(d.avg_variable_degree() == doctest::Approx(2.4));
    }

    TEST_CASE("node counts use largest-remainder rounding and sum to n") {
        auto counts = recon::node_degree_counts({{2, 0.5}, {3, 0.5}}, 5);
        REQUIRE(counts.size() == 2);
        CHECK(counts[0] == std::pair<unsigned, std::size_t>{2, 3});
        CHECK(counts[1] == std::pair<unsigned, std::size_t>{3, 2});

        for (std::size_t n : {7u, 100u, 999u, 10000u}) {
            auto c = recon::node_degree_counts({{2, 0.3}, {5, 0.33}, {17, 0.37}}, n);
            std::size_t total = 0;
            for (auto [deg, cnt] : c) total += cnt;
            CHECK(total == n);
        }
    }

    TEST_CASE("degree files parse values, comments, and optional lines") {
        auto path = write_temp("deg_parse_test.deg",
                               "# header comment\n"
                               "q 8\n"
                               "rate 0.75\n"
                               "det 0.096\n"
                               "eeff 1.030\n"
                               "lambda 2 0.5\n"
                               "lambda 3 0.25\n"
                               "lambda 10 0.25\n"
                               "rho 12 1.0\n");
        auto d = recon::load_degree_file(path);
        CHECK(d.q == 8);
        CHECK(d.design_rate == doctest::Approx(0.75));
        CHECK(d.det == doctest::Approx(0.096));
        CHECK(d.eeff == doctest::Approx(1.030));
        REQUIRE(d.lambda.size() == 3);
        CHECK(d.lambda[0].first == 2);
        double sum = 0.0;
        for (auto [deg, f] : d.lambda) sum += f;
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        REQUIRE(d.rho.size() == 1);
        CHECK(d.rho[0].first == 12);
        std::filesystem::remove(path);
    }

    TEST_CASE("the shipped degree files all load and normalize") {
        auto data = std::filesystem::path(RECON_SOURCE_DIR) / "data";
        std::size_t seen = 0;
        for (const auto& entry : std::filesystem::directory_iterator(data)) {
            if (entry.path().extension() != ".deg") continue;
            ++seen;
            auto d = recon::load_degree_file(entry.path());
            CHECK((d.q == 4 || d.q == 8));
            CHECK(d.design_rate >= 0.50);
            CHECK(d.design_rate <= 0.90);
            CHECK(d.det > 0.0);
            CHECK(d.eeff > 1.0);
            double sum = 0.0;
            for (auto [deg, f] : d.lambda) sum += f;
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
            CHECK(d.avg_variable_degree() > 2.0);
        }
        CHECK(seen == 18);
    }

    TEST_CASE("syndrome multiplies row weights in GF(4)") {
        auto ctx = GfContext::make(4);
        SparseParityMatrix H;
        H.q = 4;
        H.m = 2;
        H.n = 3;
        H.rows = {{{0, 1}, {1, 2}}, {{1, 3}, {2, 1}}};
        std::vector<gf_elem> x = {1, 2, 3};
        auto s = recon::syndrome(H, x, ctx);
        REQUIRE(s.size() == 2);
        CHECK(s[0] == 2);  // 1*1 xor 2*2 = 1 xor 3
        CHECK(s[1] == 2);  // 3*2 xor 1*3 = 1 xor 3
    }

    TEST_CASE("matrix construction realizes the degree histogram exactly") {
        DegreeDistribution d;
        d.q = 8;
        d.design_rate = 0.5;
        d.lambda = {{2, 0.4}, {3, 0.6}};
        auto ctx = GfContext::make(8);
        auto H = recon::peg_construct(d, 400, 200, ctx, 17);
        CHECK(H.q == 8);
        CHECK(H.m == 200);
        CHECK(H.n == 400);

        std::vector<std::size_t> col_deg(H.n, 0);
        for (const auto& row : H.rows) {
            std::set<std::uint32_t> cols;
            for (auto [col, w] : row) {
                REQUIRE(col < H.n);
                CHECK(w != 0);
                CHECK(cols.insert(col).second);  // no parallel edges
                ++col_deg[col];
            }
        }
        auto counts = recon::node_degree_counts(d.lambda, 400);
        std::vector<std::size_t> want_hist(8, 0), got_hist(8, 0);
        for (auto [deg, cnt] : counts) want_hist[deg] = cnt;
        for (auto deg : col_deg) {
            REQUIRE(deg < 8);
            ++got_hist[deg];
        }
        CHECK(want_hist == got_hist);
    }

    TEST_CASE("construction at moderate density avoids length-4 cycles") {
        DegreeDistribution d;
        d.q = 4;
        d.design_rate = 0.5;
        d.lambda = {{2, 0.4}, {3, 0.6}};
        auto ctx = GfContext::make(4);
        auto H = recon::peg_construct(d, 400, 200, ctx, 3);
        std::vector<std::set<std::uint32_t>> row_cols(H.m);
        for (std::size_t i = 0; i < H.m; ++i)
            for (auto [col, w] : H.rows[i]) row_cols[i].insert(col);
        std::size_t shared_pairs = 0;
        for (std::size_t i = 0; i < H.m; ++i)
            for (std::size_t j = i + 1; j < H.m; ++j) {
                std::size_t common = 0;
                for (auto c : row_cols[i]) common += row_cols[j].count(c);
                if (common >= 2) ++shared_pairs;
            }
        CHECK(shared_pairs == 0);
    }

    TEST_CASE("row degrees stay concentrated around the edge balance") {
        DegreeDistribution d;
        d.q = 4;
        d.design_rate = 0.5;
        d.lambda = {{2, 0.5}, {3, 0.5}};
        auto ctx = GfContext::make(4);
        auto H = recon::peg_construct(d, 300, 150, ctx, 9);
        std::size_t lo = H.n, hi = 0;
        for (const auto& row : H.rows) {
            lo = std::min(lo, row.size());
            hi = std::max(hi, row.size());
        }
        CHECK(hi - lo <= 1);
    }

    TEST_CASE("construction is a pure function of its seed") {
        DegreeDistribution d;
        d.q = 8;
        d.design_rate = 0.5;
        d.lambda = {{3, 1.0}};
        auto ctx = GfContext::make(8);
        auto a = recon::peg_construct(d, 120, 60, ctx, 5);
        auto b = recon::peg_construct(d, 120, 60, ctx, 5);
        auto c = recon::peg_construct(d, 120, 60, ctx, 6);
        CHECK(a.rows == b.rows);
        CHECK(a.rows != c.rows);
    }

    TEST_CASE("matrices survive a save and load round trip") {
        DegreeDistribution d;
        d.q = 16;
        d.design_rate = 0.5;
        d.lambda = {{2, 0.3}, {4, 0.7}};
        auto ctx = GfContext::make(16);
        auto H = recon::peg_construct(d, 80, 40, ctx, 21);
        auto path = std::filesystem::temp_directory_path() / "matrix_roundtrip.alist";
        recon::save_matrix(H, path);
        auto back = recon::load_matrix(path);
        CHECK(back.q == H.q);
        CHECK(back.m == H.m);
        CHECK(back.n == H.n);
        CHECK(back.rows == H.rows);
        std::filesystem::remove(path);
    }
}

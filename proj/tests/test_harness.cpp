#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "dostbc/harness.hpp"

using namespace dostbc;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream is(path);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("constellation pairing at 1 bps/Hz") {
    const auto p44 = pair_constellations(4, 4, 1.0);
    REQUIRE(p44.feasible);
    CHECK(p44.dostbc_bits == 2);      // QPSK
    CHECK(p44.repetition_bits == 4);  // 16-QAM

    const auto p55 = pair_constellations(5, 5, 1.0);
    REQUIRE(p55.feasible);
    CHECK(p55.dostbc_bits == 3);      // 8-PSK
    CHECK(p55.repetition_bits == 5);  // 32-QAM

    const auto p44_2 = pair_constellations(4, 4, 2.0);
    REQUIRE(p44_2.feasible);
    CHECK(p44_2.dostbc_bits == 4);
    CHECK(p44_2.repetition_bits == 8);  // 256-QAM
}

TEST_CASE("pairing is infeasible for X(5,4), naming the fractional exponent") {
    const auto p = pair_constellations(5, 4, 1.0);
    CHECK_FALSE(p.feasible);
    CHECK(p.infeasible_reason.find("12/5") != std::string::npos);
}

TEST_CASE("paired schemes match bandwidth efficiency exactly") {
    for (double bps : {1.0, 2.0}) {
        for (auto [n, k] : std::vector<std::pair<int, int>>{{4, 4}, {2, 2}, {5, 5}, {4, 5}}) {
            const auto p = pair_constellations(n, k, bps);
            if (!p.feasible) continue;
            CHECK(p.dostbc_rate * Rational(p.dostbc_bits, 1) ==
                  p.repetition_rate * Rational(p.repetition_bits, 1));
        }
    }
}

TEST_CASE("rate table difference column follows the parity cases") {
    const auto table = emit_rate_table(9, 9);
    for (const auto& e : table.entries) {
        INFO("N=" << e.n << " K=" << e.k);
        const std::int64_t l = e.l, m = e.m;
        switch (e.parity_case) {
            case 0:  // even, even
                CHECK(e.difference == Rational(0, 1));
                break;
            case 1:  // odd N, even K
                CHECK(e.difference == Rational(1, 2 * l * m + 2 * m));
                break;
            case 2:  // even N, odd K
                CHECK(e.difference == Rational(1, (2 * m + 1) * (m + 1)));
                break;
            case 3:  // odd, odd
                CHECK(e.difference ==
                      dostbc::max(Rational(m * (2 * l + 1),
                                           (2 * l * m + l + m + 1) * (2 * l * m + 2 * m + l + 1)),
                                  Rational(l * (2 * l + 1),
                                           (2 * l * m + l + m + 1) * (2 * l * m + 2 * l + m + 1))));
                break;
        }
    }
}

TEST_CASE("rate table numeric spot check at (4,5)") {
    const auto table = emit_rate_table(5, 5);
    const auto it = std::find_if(table.entries.begin(), table.entries.end(),
                                 [](const RateTableEntry& e) { return e.n == 4 && e.k == 5; });
    REQUIRE(it != table.entries.end());
    CHECK(it->dostbc.value() == Rational(2, 5));
    CHECK(it->row_monomial.value() == Rational(1, 3));
    CHECK(it->difference == Rational(1, 15));
}

TEST_CASE("rate table CSV carries the symbolic rows and the series files work") {
    const auto table = emit_rate_table(4, 6);
    write_rate_table_csv(table, "/tmp/dostbc_rate_table.csv");
    const auto text = slurp("/tmp/dostbc_rate_table.csv");
    CHECK(text.find("min((2l+1)/(2lm+2m+l+1), (2l+1)/(2lm+2l+m+1))") != std::string::npos);
    CHECK(text.find("1/((2m+1)(m+1))") != std::string::npos);
    write_bound_series_csv(2, 6, "/tmp/dostbc_series_n2.csv");
    const auto series = slurp("/tmp/dostbc_series_n2.csv");
    CHECK(series.find("repetition") != std::string::npos);
}

TEST_CASE("diversity estimate is exact on a synthetic power law") {
    BerCurve curve;
    for (double snr = 10; snr <= 24; snr += 2) {
        BerPoint p;
        p.snr_db = snr;
        p.ber = 0.5 * std::pow(10.0, -3.0 * snr / 10.0);  // BER = c * P^-3
        p.bit_errors = 100000;
        p.trials = 1000000;
        curve.points.push_back(p);
    }
    const auto est = estimate_diversity(curve, 10, 24, 100);
    CHECK(est.slope == Catch::Approx(3.0).margin(1e-6));
    CHECK(est.r2 == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("diversity estimate rejects sparse windows and thin points") {
    BerCurve curve;
    for (double snr : {10.0, 12.0}) {
        BerPoint p;
        p.snr_db = snr;
        p.ber = 1e-3;
        p.bit_errors = 1000;
        curve.points.push_back(p);
    }
    CHECK_THROWS(estimate_diversity(curve, 10, 12, 100));
}

TEST_CASE("zero-trials config produces an empty curve with metadata") {
    ExperimentConfig cfg;
    cfg.n = 2;
    cfg.k = 2;
    cfg.trials = 0;
    cfg.bps = 1.0;
    cfg.snr_db = {};
    const auto curve = run_ber(cfg);
    CHECK(curve.points.empty());
    CHECK_FALSE(curve.config_hash.empty());
    CHECK(curve.bits_per_frame == 2);  // BPSK at rate 1
}

TEST_CASE("the same seed yields byte-identical CSV output") {
    ExperimentConfig cfg;
    cfg.n = 2;
    cfg.k = 2;
    cfg.bps = 1.0;
    cfg.snr_db = {6.0, 10.0};
    cfg.trials = 3000;
    cfg.seed = 99;
    cfg.threads = 2;
    const auto c1 = run_ber(cfg);
    cfg.threads = 1;  // thread count must not matter
    const auto c2 = run_ber(cfg);
    write_ber_csv(c1, "/tmp/dostbc_ber_a.csv");
    write_ber_csv(c2, "/tmp/dostbc_ber_b.csv");
    CHECK(slurp("/tmp/dostbc_ber_a.csv") == slurp("/tmp/dostbc_ber_b.csv"));
}

TEST_CASE("a pairing-breaking constellation is rejected unless forced") {
    ExperimentConfig cfg;
    cfg.n = 4;
    cfg.k = 4;
    cfg.bps = 1.0;
    cfg.constellation = "16qam";  // rate 1/2 * 4 bits = 2 bps/Hz != 1
    cfg.snr_db = {8.0};
    cfg.trials = 10;
    CHECK_THROWS_AS(run_ber(cfg), std::invalid_argument);
    cfg.force = true;
    CHECK_NOTHROW(run_ber(cfg));
}

TEST_CASE("repetition sweeps run and count errors sensibly") {
    ExperimentConfig cfg;
    cfg.scheme = SchemeKind::Repetition;
    cfg.n = 2;
    cfg.k = 2;
    cfg.bps = 1.0;  // QPSK on the repetition side
    cfg.snr_db = {0.0, 14.0};
    cfg.trials = 4000;
    cfg.seed = 7;
    const auto curve = run_ber(cfg);
    REQUIRE(curve.points.size() == 2);
    CHECK(curve.constellation == "qpsk");
    CHECK(curve.points[0].ber > curve.points[1].ber);  // 14 dB beats 0 dB
    CHECK(curve.points[0].ci_low <= curve.points[0].ber);
    CHECK(curve.points[0].ci_high >= curve.points[0].ber);
}

TEST_CASE("error-targeted stopping keeps running past the minimum trial count") {
    ExperimentConfig cfg;
    cfg.n = 2;
    cfg.k = 2;
    cfg.bps = 1.0;
    cfg.snr_db = {18.0};
    cfg.trials = 1000;
    cfg.target_errors = 50;
    cfg.max_trials = 2000000;
    cfg.seed = 3;
    const auto curve = run_ber(cfg);
    REQUIRE(curve.points.size() == 1);
    CHECK((curve.points[0].bit_errors >= 50 || curve.points[0].trials >= 2000000));
    CHECK(curve.points[0].trials >= 1000);
}

TEST_CASE("wilson interval behaves at the boundaries") {
    const auto [lo0, hi0] = wilson_interval(0, 10000);
    CHECK(lo0 == 0.0);
    CHECK(hi0 > 0.0);
    CHECK(hi0 < 1e-3);
    const auto [lo, hi] = wilson_interval(100, 10000);
    CHECK(lo < 0.01);
    CHECK(hi > 0.01);
}

TEST_CASE("snr grid parsing") {
    const auto g = parse_snr_grid("0:2:24");
    REQUIRE(g.size() == 13);
    CHECK(g.front() == 0.0);
    CHECK(g.back() == 24.0);
    const auto list = parse_snr_grid("1.5,3,4.5");
    REQUIRE(list.size() == 3);
    CHECK(list[1] == 3.0);
    CHECK_THROWS(parse_snr_grid("5:-1:0"));
}

TEST_CASE("experiment config from JSON") {
    const auto j = nlohmann::json::parse(R"({
        "scheme": "repetition", "n": 5, "k": 5, "bps": 2.0,
        "snr": "0:4:8", "trials": 123, "seed": 9, "force": true
    })");
    const auto cfg = config_from_json(j);
    CHECK(cfg.scheme == SchemeKind::Repetition);
    CHECK(cfg.n == 5);
    CHECK(cfg.bps == 2.0);
    CHECK(cfg.snr_db.size() == 3);
    CHECK(cfg.trials == 123);
    CHECK(cfg.force);
}

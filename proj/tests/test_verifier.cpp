#include <catch2/catch_amalgamated.hpp>

#include "dostbc/codebook.hpp"
#include "dostbc/rng.hpp"
#include "dostbc/verifier.hpp"

using namespace dostbc;

namespace {

// code built from entry strings, one vector<string> per matrix row
DistributedCode make_code(int n, int k, int t,
                          const std::vector<std::vector<std::vector<std::string>>>& a,
                          const std::vector<std::vector<std::vector<std::string>>>& b) {
    std::vector<RelayMatrixPair> relays;
    for (int kk = 0; kk < k; ++kk) {
        UnitMatrix ma(n, t), mb(n, t);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < t; ++c) {
                ma(r, c) = GaussianUnit::parse(a[kk][r][c]);
                mb(r, c) = GaussianUnit::parse(b[kk][r][c]);
            }
        relays.emplace_back(ma, mb);
    }
    return DistributedCode(n, k, t, std::move(relays));
}

const std::vector<std::vector<std::string>> kZeros24 = {{"0", "0", "0", "0"},
                                                        {"0", "0", "0", "0"}};

/// Channel-free conditions hold here, yet the weighted condition fails on
/// every generic draw: the middle relay's conjugate matrix straddles the
/// column blocks of the two outer relays, so inverting the (non-diagonal)
/// noise covariance mixes columns that the unweighted cancellation never
/// sees.
DistributedCode weighted_counterexample() {
    return make_code(
        2, 3, 4,
        {
            {{"1", "0", "0", "0"}, {"0", "1", "0", "0"}},    // A_1
            {{"0", "0", "1", "0"}, {"0", "0", "0", "1"}},    // A_2
            kZeros24,                                        // A_3
        },
        {
            kZeros24,                                        // B_1
            kZeros24,                                        // B_2
            {{"0", "-1", "0", "-1"}, {"1", "0", "1", "0"}},  // B_3
        });
}

}  // namespace

TEST_CASE("structural checks pass on a construction output") {
    const auto rep = check_structural(construct_even_even(4, 4));
    CHECK(rep.alphabet);
    CHECK(rep.disjoint_support);
    CHECK(rep.column_monomial);
    CHECK(rep.row_monomial);
    CHECK(rep.column_disjoint_across_relays);
}

TEST_CASE("structural: shared non-zero column across relays fails column-disjointness") {
    // A_1 and A_2 both use column 0
    const auto code = make_code(1, 2, 2, {{{"1", "0"}}, {{"1", "0"}}},
                                {{{"0", "0"}}, {{"0", "0"}}});
    const auto rep = check_structural(code);
    CHECK_FALSE(rep.column_disjoint_across_relays);
    CHECK(rep.column_monomial);
}

TEST_CASE("structural: overlapping a/b support fails disjoint_support") {
    const auto code = make_code(1, 1, 2, {{{"1", "0"}}}, {{{"j", "0"}}});
    const auto rep = check_structural(code);
    CHECK_FALSE(rep.disjoint_support);
}

TEST_CASE("assemble_code_matrix expands the two-relay code") {
    const auto code = construct_even_even(2, 2);
    const std::vector<Cplx> h = {1.0, 1.0};
    const Cplx s1{0.3, -0.7}, s2{-1.1, 0.2};
    const auto x = assemble_code_matrix(code, h, {s1, s2});
    CHECK(std::abs(x(0, 0) - s1) < 1e-15);
    CHECK(std::abs(x(0, 1) + s2) < 1e-15);
    CHECK(std::abs(x(1, 0) - std::conj(s2)) < 1e-15);
    CHECK(std::abs(x(1, 1) - std::conj(s1)) < 1e-15);
}

TEST_CASE("assemble_code_matrix is zero at s = 0") {
    const auto code = construct_odd_odd(5, 5);
    Rng rng(7);
    std::vector<Cplx> h(5);
    for (auto& v : h) v = rng.complex_gaussian();
    const auto x = assemble_code_matrix(code, h, std::vector<Cplx>(5, 0.0));
    CHECK(x.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("assemble_code_matrix agrees with the symbolic expansion") {
    const auto code = construct_even_even(4, 4);
    Rng rng(3);
    std::vector<Cplx> h(4), s(4);
    for (auto& v : h) v = rng.complex_gaussian();
    for (auto& v : s) v = rng.complex_gaussian();
    const auto x = assemble_code_matrix(code, h, s);
    const auto sym = symbolic_code_matrix(code);
    for (int k = 0; k < 4; ++k)
        for (int t = 0; t < 8; ++t) {
            Cplx want = 0.0;
            if (!sym[k][t].zero) {
                const Cplx hs = sym[k][t].conjugated
                                    ? std::conj(h[k]) * std::conj(s[sym[k][t].symbol])
                                    : h[k] * s[sym[k][t].symbol];
                want = sym[k][t].coef.to_complex() * hs;
            }
            CHECK(std::abs(x(k, t) - want) < 1e-14);
        }
}

TEST_CASE("noise covariance is the identity when f = 0") {
    const auto code = construct_even_even(4, 4);
    const auto r = noise_covariance(code, std::vector<Cplx>(4, 0.0), 1.0);
    CHECK((r - CMat::Identity(8, 8)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("noise covariance of X(4,4) is diagonal with the block profile") {
    const auto code = construct_even_even(4, 4);
    Rng rng(11);
    std::vector<Cplx> f(4);
    for (auto& v : f) v = rng.complex_gaussian();
    const double rho = 0.8;
    const auto r = noise_covariance(code, f, rho);
    const double w12 = std::norm(rho * f[0]) + std::norm(rho * f[1]);
    const double w34 = std::norm(rho * f[2]) + std::norm(rho * f[3]);
    for (int t = 0; t < 8; ++t)
        CHECK(std::abs(r(t, t).real() - (1.0 + (t < 4 ? w12 : w34))) < 1e-12);
    for (int t1 = 0; t1 < 8; ++t1)
        for (int t2 = 0; t2 < 8; ++t2)
            if (t1 != t2) CHECK(std::abs(r(t1, t2)) == 0.0);
}

TEST_CASE("a doubly-occupied row makes the covariance non-diagonal") {
    // column-monomial but not row-monomial: both entries of A_1 sit in row 0
    const auto code = make_code(2, 1, 2, {{{"1", "1"}, {"0", "0"}}},
                                {{{"0", "0"}, {"0", "0"}}});
    const auto r = noise_covariance(code, {Cplx(1.0, 0.5)}, 1.0);
    CHECK(std::abs(r(0, 1)) > 0.5);
}

TEST_CASE("channel-free check passes X(5,5) with unit and double row weights") {
    const auto res = check_channel_free_orthogonality(construct_odd_odd(5, 5));
    REQUIRE(res.pass());
    for (int n = 0; n < 5; ++n)
        for (int k = 0; k < 5; ++k) {
            const auto e = res.e[n][k];
            CHECK((e == 1 || e == 2));
        }
}

TEST_CASE("E(n,k) equals the per-row non-zero count") {
    for (auto code : {construct_even_even(4, 4), construct_odd_odd(5, 5),
                      construct_even_odd(4, 5)}) {
        const auto res = check_channel_free_orthogonality(code);
        REQUIRE(res.pass());
        for (int n = 0; n < code.n_symbols(); ++n)
            for (int k = 0; k < code.n_relays(); ++k) {
                int count = 0;
                for (int t = 0; t < code.length(); ++t)
                    count += !code.relay(k).a(n, t).is_zero() +
                             !code.relay(k).b(n, t).is_zero();
                CHECK(res.e[n][k] == count);
            }
    }
}

TEST_CASE("a sign flip in X(2,2) breaks the cross-relay condition") {
    auto code = construct_even_even(2, 2);
    std::vector<RelayMatrixPair> relays(code.relays());
    relays[0].a(0, 0) = -relays[0].a(0, 0);
    const DistributedCode flipped(2, 2, 2, std::move(relays));
    const auto res = check_channel_free_orthogonality(flipped);
    CHECK_FALSE(res.orthogonality);
    CHECK(res.first_violation.find("cross condition") != std::string::npos);
}

TEST_CASE("an empty symbol row fails strict positivity") {
    auto code = construct_even_even(2, 2);
    std::vector<RelayMatrixPair> relays(code.relays());
    relays[0].a(0, 0) = GaussianUnit::zero();  // relay 0 loses its only s1 entry
    const DistributedCode wiped(2, 2, 2, std::move(relays));
    const auto res = check_channel_free_orthogonality(wiped);
    CHECK_FALSE(res.positive_e);
    CHECK(res.e[0][0] == 0);
}

TEST_CASE("weighted orthogonality passes X(4,4) at 8 draws, tol 1e-9") {
    const auto res = check_weighted_orthogonality(construct_even_even(4, 4), 8, 1e-9);
    CHECK(res.pass);
    CHECK(res.max_residual < 1e-9);
    CHECK(res.min_abs_d > 1e-9);
}

TEST_CASE("with f = 0 the weighted gram reduces to the channel-free one") {
    const auto code = construct_even_even(2, 2);
    Rng rng(5);
    std::vector<Cplx> h(2), s(2);
    for (auto& v : h) v = rng.complex_gaussian();
    for (auto& v : s) v = rng.complex_gaussian();
    const auto r = noise_covariance(code, std::vector<Cplx>(2, 0.0), 1.0);  // identity
    const auto x = assemble_code_matrix(code, h, s);
    const CMat lhs = x * r.llt().solve(x.adjoint());
    const CMat rhs = x * x.adjoint();
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("counterexample: channel-free conditions hold but the weighted ones fail") {
    const auto code = weighted_counterexample();
    REQUIRE(check_structural(code).entry_conditions_pass());
    CHECK_FALSE(check_structural(code).row_monomial);
    const auto cf = check_channel_free_orthogonality(code);
    CHECK(cf.pass());
    const auto w = check_weighted_orthogonality(code, 8, 1e-9);
    CHECK_FALSE(w.pass);
    const auto rep = verify_code(code);
    CHECK(rep.verdict == Verdict::NotDostbc);
}

TEST_CASE("a valid code that is not row-monomial gets the plain dostbc verdict") {
    // single symbol, two relays, doubled rows with a sign cancellation
    const auto code = make_code(1, 2, 2, {{{"1", "1"}}, {{"1", "-1"}}},
                                {{{"0", "0"}}, {{"0", "0"}}});
    const auto rep = verify_code(code);
    CHECK(rep.verdict == Verdict::Dostbc);
    CHECK_FALSE(rep.structural.row_monomial);
    CHECK(rep.weighted.pass);
    CHECK(rep.diagonal_r.pass());  // non-diagonal R matches the structure
    CHECK_FALSE(rep.diagonal_r.diagonal_on_all_draws);
}

TEST_CASE("diagonal R holds on every construction output") {
    for (auto code : {construct_even_even(4, 4), construct_odd_even(5, 4),
                      construct_even_odd(4, 5), construct_odd_odd(5, 5)}) {
        const auto res = check_diagonal_R(code, 8, 1e-9);
        CHECK(res.diagonal_on_all_draws);
        CHECK(res.pass());
    }
}

TEST_CASE("iff property: diagonal R exactly for row-monomial candidates") {
    // random column-monomial candidates, half of them row-monomial
    Rng rng(1234);
    int checked = 0;
    for (int trial = 0; trial < 120; ++trial) {
        const int n = 2 + static_cast<int>(rng.uniform_below(3));
        const int k = 2 + static_cast<int>(rng.uniform_below(3));
        const int t = n + static_cast<int>(rng.uniform_below(4));
        const bool want_row_monomial = trial % 2 == 0;
        std::vector<RelayMatrixPair> relays(
            k, RelayMatrixPair(UnitMatrix(n, t), UnitMatrix(n, t)));
        static const GaussianUnit units[4] = {GaussianUnit::one(), GaussianUnit::minus_one(),
                                              GaussianUnit::j(), GaussianUnit::minus_j()};
        for (int kk = 0; kk < k; ++kk) {
            std::vector<int> used_a, used_b;
            for (int c = 0; c < t; ++c) {
                const auto what = rng.uniform_below(3);  // 0 none, 1 a, 2 b
                if (what == 0) continue;
                int row;
                if (want_row_monomial) {
                    auto& used = what == 1 ? used_a : used_b;
                    if (static_cast<int>(used.size()) == n) continue;
                    do {
                        row = static_cast<int>(rng.uniform_below(n));
                    } while (std::find(used.begin(), used.end(), row) != used.end());
                    used.push_back(row);
                } else {
                    row = static_cast<int>(rng.uniform_below(n));
                }
                auto& mat = what == 1 ? relays[kk].a : relays[kk].b;
                mat(row, c) = units[rng.uniform_below(4)];
            }
        }
        const DistributedCode code(n, k, t, std::move(relays));
        const auto res = check_diagonal_R(code, 4, 1e-9, 99 + trial);
        INFO("trial " << trial);
        CHECK(res.pass());  // zero disagreements allowed
        ++checked;
    }
    CHECK(checked >= 100);
}

TEST_CASE("necessity: weighted pass implies channel-free pass on perturbed codes") {
    Rng rng(777);
    const std::vector<DistributedCode> bases = {construct_even_even(4, 4),
                                                construct_odd_even(3, 2),
                                                construct_odd_odd(3, 3)};
    static const GaussianUnit units[5] = {GaussianUnit::zero(), GaussianUnit::one(),
                                          GaussianUnit::minus_one(), GaussianUnit::j(),
                                          GaussianUnit::minus_j()};
    for (int trial = 0; trial < 24; ++trial) {
        const auto& base = bases[trial % bases.size()];
        std::vector<RelayMatrixPair> relays(base.relays());
        const int k = static_cast<int>(rng.uniform_below(base.n_relays()));
        const int n = static_cast<int>(rng.uniform_below(base.n_symbols()));
        const int t = static_cast<int>(rng.uniform_below(base.length()));
        auto& mat = rng.uniform_below(2) ? relays[k].a : relays[k].b;
        GaussianUnit nv = units[rng.uniform_below(5)];
        while (nv == mat(n, t)) nv = units[rng.uniform_below(5)];
        mat(n, t) = nv;
        const DistributedCode mutated(base.n_symbols(), base.n_relays(), base.length(),
                                      std::move(relays));
        const bool w = check_weighted_orthogonality(mutated, 8, 1e-9, 1000 + trial).pass;
        const bool cf = check_channel_free_orthogonality(mutated).pass();
        INFO("trial " << trial);
        if (w) CHECK(cf);
    }
}

TEST_CASE("column classification of the reference codes") {
    const auto c44 = classify_columns(construct_even_even(4, 4));
    CHECK(c44.type_ii_count == 8);
    CHECK(c44.type_i_count == 0);
    CHECK(c44.invalid_count == 0);

    const auto c45 = classify_columns(construct_even_odd(4, 5));
    CHECK(c45.type_ii_count == 8);
    CHECK(c45.type_i_count == 4);

    const auto c55 = classify_columns(construct_odd_odd(5, 5));
    CHECK(c55.type_ii_count_even());
    CHECK(c55.symbol_counts_even());
}

TEST_CASE("verdicts: constructions verify as row-monomial codes") {
    const auto rep = verify_code(construct_even_even(4, 4));
    CHECK(rep.verdict == Verdict::RowMonomialDostbc);
    CHECK(rep.is_dostbc());
    const auto j = report_to_json(rep);
    CHECK(j["verdict"] == "row_monomial_dostbc");
    CHECK(j["algebraic"]["weighted_orthogonality"] == true);
}

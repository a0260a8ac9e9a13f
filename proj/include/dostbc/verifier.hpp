#pragma once

#include <algorithm>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "dostbc/code.hpp"
#include "dostbc/rng.hpp"

namespace dostbc {

using Cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CRowVec = Eigen::RowVectorXcd;

inline CMat to_complex_matrix(const UnitMatrix& m) {
    CMat out(m.rows(), m.cols());
    for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c) out(r, c) = m(r, c).to_complex();
    return out;
}

// --- structural checks ------------------------------------------------------

struct StructuralReport {
    bool alphabet = true;  // guaranteed by the entry type, reported for completeness
    bool disjoint_support = true;
    bool column_monomial = true;
    bool row_monomial = true;
    bool column_disjoint_across_relays = true;

    std::vector<bool> disjoint_support_per_relay;
    std::vector<bool> column_monomial_per_relay;
    std::vector<bool> row_monomial_per_relay;

    /// The conditions a code must satisfy merely to have well-formed entries.
    bool entry_conditions_pass() const {
        return alphabet && disjoint_support && column_monomial;
    }
    bool all_pass() const {
        return entry_conditions_pass() && row_monomial && column_disjoint_across_relays;
    }
};

inline bool columns_disjoint(const UnitMatrix& x, const UnitMatrix& y) {
    for (int c = 0; c < x.cols(); ++c) {
        bool in_x = false, in_y = false;
        for (int r = 0; r < x.rows(); ++r) in_x = in_x || !x(r, c).is_zero();
        for (int r = 0; r < y.rows(); ++r) in_y = in_y || !y(r, c).is_zero();
        if (in_x && in_y) return false;
    }
    return true;
}

/// Exact inspection of the per-relay and cross-relay support conditions.
/// No arithmetic tolerance is involved anywhere here.
inline StructuralReport check_structural(const DistributedCode& code) {
    StructuralReport rep;
    const int K = code.n_relays();
    rep.disjoint_support_per_relay.resize(K);
    rep.column_monomial_per_relay.resize(K);
    rep.row_monomial_per_relay.resize(K);
    for (int k = 0; k < K; ++k) {
        const auto& rp = code.relay(k);
        const bool dis = rp.has_disjoint_support();
        const bool colm = rp.a.is_column_monomial() && rp.b.is_column_monomial() &&
                          rp.sum_is_column_monomial();
        const bool rowm = rp.a.is_row_monomial() && rp.b.is_row_monomial();
        rep.disjoint_support_per_relay[k] = dis;
        rep.column_monomial_per_relay[k] = colm;
        rep.row_monomial_per_relay[k] = rowm;
        rep.disjoint_support = rep.disjoint_support && dis;
        rep.column_monomial = rep.column_monomial && colm;
        rep.row_monomial = rep.row_monomial && rowm;
    }
    for (int k1 = 0; k1 < K && rep.column_disjoint_across_relays; ++k1)
        for (int k2 = k1 + 1; k2 < K; ++k2) {
            if (!columns_disjoint(code.relay(k1).a, code.relay(k2).a) ||
                !columns_disjoint(code.relay(k1).b, code.relay(k2).b)) {
                rep.column_disjoint_across_relays = false;
                break;
            }
        }
    return rep;
}

// --- numeric assembly -------------------------------------------------------

/// Code matrix X for concrete channel gains h and symbols s:
/// row k = h_k * s * A_k + conj(h_k) * conj(s) * B_k.
inline CMat assemble_code_matrix(const DistributedCode& code, const std::vector<Cplx>& h,
                                 const std::vector<Cplx>& s) {
    if (static_cast<int>(h.size()) != code.n_relays() ||
        static_cast<int>(s.size()) != code.n_symbols())
        throw std::invalid_argument("assemble_code_matrix: dimension mismatch");
    CMat x = CMat::Zero(code.n_relays(), code.length());
    for (int k = 0; k < code.n_relays(); ++k) {
        const auto& rp = code.relay(k);
        for (int n = 0; n < code.n_symbols(); ++n)
            for (int t = 0; t < code.length(); ++t) {
                if (!rp.a(n, t).is_zero())
                    x(k, t) += h[k] * s[n] * rp.a(n, t).to_complex();
                if (!rp.b(n, t).is_zero())
                    x(k, t) += std::conj(h[k]) * std::conj(s[n]) * rp.b(n, t).to_complex();
            }
    }
    return x;
}

/// Destination noise covariance
/// R = sum_k |rho_k f_k|^2 (A_k^H A_k + B_k^H B_k) + I, Hermitian and >= I.
inline CMat noise_covariance(const DistributedCode& code, const std::vector<Cplx>& f,
                             const std::vector<double>& rho) {
    if (static_cast<int>(f.size()) != code.n_relays() || rho.size() != f.size())
        throw std::invalid_argument("noise_covariance: dimension mismatch");
    const int T = code.length();
    CMat r = CMat::Identity(T, T);
    for (int k = 0; k < code.n_relays(); ++k) {
        const double w = std::norm(rho[k] * f[k]);
        if (w == 0.0) continue;
        const CMat a = to_complex_matrix(code.relay(k).a);
        const CMat b = to_complex_matrix(code.relay(k).b);
        r += w * (a.adjoint() * a + b.adjoint() * b);
    }
    return r;
}

inline CMat noise_covariance(const DistributedCode& code, const std::vector<Cplx>& f,
                             double rho) {
    return noise_covariance(code, f, std::vector<double>(f.size(), rho));
}

// --- channel-free orthogonality (exact) -------------------------------------

struct ChannelFreeResult {
    bool orthogonality = true;  // all cross conditions hold and Gram parts are diagonal
    bool positive_e = true;     // every E(n,k) >= 1
    std::vector<std::vector<std::int64_t>> e;  // N x K
    std::string first_violation;

    bool pass() const { return orthogonality && positive_e; }
};

namespace detail {

inline GInt gram_aa(const UnitMatrix& x, const UnitMatrix& y, int n1, int n2) {
    GInt s{0, 0};
    for (int t = 0; t < x.cols(); ++t) s += x(n1, t).gint() * y(n2, t).gint().conj();
    return s;
}

}  // namespace detail

/// Exact Gaussian-integer verification of the channel-free conditions:
///   A_{k1} A_{k2}^H = 0 and B_{k1} B_{k2}^H = 0            (k1 != k2)
///   A_{k1} B_{k2}^H + conj(B_{k2}) A_{k1}^T = 0            (all k1, k2)
///   B_{k1} A_{k2}^H + conj(A_{k2}) B_{k1}^T = 0            (all k1, k2)
///   A_k A_k^H + conj(B_k) B_k^T diagonal with entries E(n,k) >= 1.
inline ChannelFreeResult check_channel_free_orthogonality(const DistributedCode& code) {
    ChannelFreeResult res;
    const int N = code.n_symbols(), K = code.n_relays(), T = code.length();
    res.e.assign(N, std::vector<std::int64_t>(K, 0));
    auto record = [&](const std::string& what) {
        if (res.orthogonality) res.first_violation = what;
        res.orthogonality = false;
    };

    for (int k1 = 0; k1 < K; ++k1) {
        const auto& r1 = code.relay(k1);
        for (int k2 = 0; k2 < K; ++k2) {
            const auto& r2 = code.relay(k2);
            for (int n1 = 0; n1 < N; ++n1)
                for (int n2 = 0; n2 < N; ++n2) {
                    if (k1 != k2) {
                        if (!detail::gram_aa(r1.a, r2.a, n1, n2).is_zero())
                            record("A_" + std::to_string(k1) + " A_" + std::to_string(k2) +
                                   "^H != 0");
                        if (!detail::gram_aa(r1.b, r2.b, n1, n2).is_zero())
                            record("B_" + std::to_string(k1) + " B_" + std::to_string(k2) +
                                   "^H != 0");
                    }
                    // cross conditions, all relay pairs including k1 == k2
                    GInt c3{0, 0}, c4{0, 0};
                    for (int t = 0; t < T; ++t) {
                        c3 += r1.a(n1, t).gint() * r2.b(n2, t).gint().conj() +
                              r2.b(n1, t).gint().conj() * r1.a(n2, t).gint();
                        c4 += r1.b(n1, t).gint() * r2.a(n2, t).gint().conj() +
                              r2.a(n1, t).gint().conj() * r1.b(n2, t).gint();
                    }
                    if (!c3.is_zero())
                        record("A_" + std::to_string(k1) + " B_" + std::to_string(k2) +
                               " cross condition != 0");
                    if (!c4.is_zero())
                        record("B_" + std::to_string(k1) + " A_" + std::to_string(k2) +
                               " cross condition != 0");
                }
        }
        // Gram of relay k1: A A^H + conj(B) B^T must be diagonal, positive.
        for (int n1 = 0; n1 < N; ++n1)
            for (int n2 = 0; n2 < N; ++n2) {
                GInt g{0, 0};
                for (int t = 0; t < T; ++t)
                    g += r1.a(n1, t).gint() * r1.a(n2, t).gint().conj() +
                         r1.b(n1, t).gint().conj() * r1.b(n2, t).gint();
                if (n1 == n2) {
                    res.e[n1][k1] = g.re;  // sum of squared unit moduli, integer
                    if (g.re <= 0 || g.im != 0) {
                        res.positive_e = false;
                        if (res.first_violation.empty())
                            res.first_violation = "E(" + std::to_string(n1) + "," +
                                                  std::to_string(k1) + ") not strictly positive";
                    }
                } else if (!g.is_zero()) {
                    record("Gram of relay " + std::to_string(k1) + " not diagonal");
                }
            }
    }
    return res;
}

// --- weighted orthogonality (sampled) ---------------------------------------

struct WeightedResult {
    bool pass = true;
    int draws = 0;
    double max_residual = 0.0;   // worst off-target magnitude, relative to scale
    double min_abs_d = 0.0;      // smallest |D(n,k)| over all draws
    std::vector<std::vector<double>> d_mean;  // N x K, averaged over draws
    std::string first_violation;
};

namespace detail {

inline std::vector<Cplx> draw_generic_gains(Rng& rng, int k, double min_abs = 0.05) {
    std::vector<Cplx> g(k);
    for (auto& v : g) {
        do { v = rng.complex_gaussian(); } while (std::abs(v) < min_abs);
    }
    return g;
}

}  // namespace detail

/// Verifies the full weighted orthogonality (the condition with R^{-1} in the
/// middle) on `draws` independent generic channel realizations. R is formed
/// with unit amplification; R >= I guarantees conditioning, so the inverse is
/// taken through an LLT factorization without regularization. The five
/// equivalent matrix identities are checked directly, then cross-validated
/// against X R^{-1} X^H for a random symbol vector.
inline WeightedResult check_weighted_orthogonality(const DistributedCode& code, int draws = 8,
                                                   double tol = 1e-9,
                                                   std::uint64_t seed = 0x5EEDULL) {
    WeightedResult res;
    res.draws = draws;
    const int N = code.n_symbols(), K = code.n_relays(), T = code.length();
    res.d_mean.assign(N, std::vector<double>(K, 0.0));
    res.min_abs_d = std::numeric_limits<double>::infinity();
    Rng rng(seed);

    std::vector<CMat> a(K), b(K), bc(K);  // A_k, B_k, conj(B_k)
    for (int k = 0; k < K; ++k) {
        a[k] = to_complex_matrix(code.relay(k).a);
        b[k] = to_complex_matrix(code.relay(k).b);
        bc[k] = b[k].conjugate();
    }

    auto fail = [&](const std::string& what) {
        if (res.pass) res.first_violation = what;
        res.pass = false;
    };

    for (int d = 0; d < draws; ++d) {
        const auto f = detail::draw_generic_gains(rng, K);
        const auto h = detail::draw_generic_gains(rng, K);
        const CMat r = noise_covariance(code, f, 1.0);
        Eigen::LLT<CMat> llt(r);
        if (llt.info() != Eigen::Success)
            throw std::runtime_error("weighted check: covariance factorization failed");
        const CMat rinv = llt.solve(CMat::Identity(T, T));

        std::vector<CMat> arinv(K), brinv(K), bcrinv(K);
        for (int k = 0; k < K; ++k) {
            arinv[k] = a[k] * rinv;
            brinv[k] = b[k] * rinv;
            bcrinv[k] = bc[k] * rinv;
        }

        Eigen::MatrixXd dnk(N, K);
        double resid = 0.0;
        for (int k1 = 0; k1 < K; ++k1) {
            for (int k2 = 0; k2 < K; ++k2) {
                if (k1 != k2) {
                    resid = std::max(resid,
                                     (arinv[k1] * a[k2].adjoint()).cwiseAbs().maxCoeff());
                    resid = std::max(resid,
                                     (brinv[k1] * b[k2].adjoint()).cwiseAbs().maxCoeff());
                }
                // The mirrored cross condition is the adjoint of this one with
                // the relay pair swapped, so sweeping all ordered pairs covers
                // both.
                const CMat c3 = arinv[k1] * b[k2].adjoint() + bcrinv[k2] * a[k1].transpose();
                resid = std::max(resid, c3.cwiseAbs().maxCoeff());
            }
            const CMat gram = arinv[k1] * a[k1].adjoint() + bcrinv[k1] * bc[k1].adjoint();
            for (int n1 = 0; n1 < N; ++n1)
                for (int n2 = 0; n2 < N; ++n2) {
                    if (n1 == n2) {
                        dnk(n1, k1) = gram(n1, n1).real();
                        resid = std::max(resid, std::abs(gram(n1, n1).imag()));
                    } else {
                        resid = std::max(resid, std::abs(gram(n1, n2)));
                    }
                }
        }

        // Cross-route: the assembled X against the sampled diagonal profile.
        std::vector<Cplx> s(N);
        for (auto& v : s) v = rng.complex_gaussian();
        const CMat x = assemble_code_matrix(code, h, s);
        CMat target = CMat::Zero(K, K);
        for (int k = 0; k < K; ++k) {
            Cplx acc = 0.0;
            for (int n = 0; n < N; ++n) acc += std::norm(s[n]) * std::norm(h[k]) * dnk(n, k);
            target(k, k) = acc;
        }
        const CMat gram_x = x * llt.solve(x.adjoint());
        const double xresid = (gram_x - target).cwiseAbs().maxCoeff();

        const double scale = std::max(1.0, dnk.cwiseAbs().maxCoeff());
        if (resid > tol * scale)
            fail("weighted orthogonality residual " + std::to_string(resid) + " on draw " +
                 std::to_string(d));
        const double xscale = std::max(1.0, gram_x.cwiseAbs().maxCoeff());
        if (xresid > tol * xscale * 10)  // extra headroom: |s|, |h| enter quadratically
            fail("X R^-1 X^H mismatch " + std::to_string(xresid) + " on draw " +
                 std::to_string(d));
        res.max_residual = std::max(res.max_residual, resid / scale);

        for (int n = 0; n < N; ++n)
            for (int k = 0; k < K; ++k) {
                const double v = dnk(n, k);
                res.min_abs_d = std::min(res.min_abs_d, std::abs(v));
                if (std::abs(v) <= tol)
                    fail("D(" + std::to_string(n) + "," + std::to_string(k) +
                         ") vanishes on draw " + std::to_string(d));
                res.d_mean[n][k] += v / draws;
            }
    }
    return res;
}

// --- diagonal noise covariance vs row-monomial structure ---------------------

struct DiagonalRResult {
    bool diagonal_on_all_draws = true;
    bool consistent_with_row_monomial = true;  // the iff held on every generic draw
    bool structural_row_monomial = false;
    int draws = 0;
    double worst_offdiag_ratio = 0.0;
    std::string note;

    bool pass() const { return consistent_with_row_monomial; }
};

/// Checks diagonality of R on generic draws (all gains bounded away from zero,
/// pairwise distinct moduli; degenerate draws are re-drawn) and cross-validates
/// the verdict against the structural row-monomial flag. A disagreement on a
/// generic draw would mean a broken toolkit, not a property of the code.
inline DiagonalRResult check_diagonal_R(const DistributedCode& code, int draws = 8,
                                        double tol = 1e-9, std::uint64_t seed = 0xD1A6ULL) {
    DiagonalRResult res;
    res.draws = draws;
    res.structural_row_monomial = check_structural(code).row_monomial;
    const int T = code.length();
    Rng rng(seed);
    for (int d = 0; d < draws; ++d) {
        std::vector<Cplx> f;
        bool generic = false;
        while (!generic) {
            f = detail::draw_generic_gains(rng, code.n_relays());
            generic = true;
            for (size_t i = 0; i < f.size() && generic; ++i)
                for (size_t j = i + 1; j < f.size(); ++j)
                    if (std::abs(std::abs(f[i]) - std::abs(f[j])) < 1e-3) { generic = false; break; }
        }
        const CMat r = noise_covariance(code, f, 1.0);
        double offdiag = 0.0;
        for (int t1 = 0; t1 < T; ++t1)
            for (int t2 = 0; t2 < T; ++t2)
                if (t1 != t2) offdiag = std::max(offdiag, std::abs(r(t1, t2)));
        const double thresh = tol * r.real().trace() / T;
        const bool diag = offdiag <= thresh;
        res.worst_offdiag_ratio = std::max(res.worst_offdiag_ratio,
                                           offdiag / (r.real().trace() / T));
        res.diagonal_on_all_draws = res.diagonal_on_all_draws && diag;
        if (diag != res.structural_row_monomial) {
            res.consistent_with_row_monomial = false;
            res.note = "diagonality and row-monomial structure disagree on draw " +
                       std::to_string(d);
        }
    }
    return res;
}

// --- column classification ----------------------------------------------------

enum class ColumnTag { Zero, TypeI, TypeII, Invalid };

inline const char* to_string(ColumnTag t) {
    switch (t) {
        case ColumnTag::Zero: return "zero";
        case ColumnTag::TypeI: return "type_I";
        case ColumnTag::TypeII: return "type_II";
        case ColumnTag::Invalid: return "invalid";
    }
    return "?";
}

struct ColumnClassification {
    std::vector<ColumnTag> tags;
    int zero_count = 0, type_i_count = 0, type_ii_count = 0, invalid_count = 0;
    std::vector<int> symbol_counts_type_ii;  // per symbol, entries in type-II columns

    bool type_ii_count_even() const { return type_ii_count % 2 == 0; }
    bool symbol_counts_even() const {
        return std::all_of(symbol_counts_type_ii.begin(), symbol_counts_type_ii.end(),
                           [](int c) { return c % 2 == 0; });
    }
};

/// Tags each column of the symbolic X: exactly one non-zero entry -> type I;
/// exactly one non-conjugate plus one conjugate entry -> type II; anything
/// else non-empty -> invalid for a row-monomial code.
inline ColumnClassification classify_columns(const DistributedCode& code) {
    ColumnClassification cc;
    cc.symbol_counts_type_ii.assign(code.n_symbols(), 0);
    const auto x = symbolic_code_matrix(code);
    cc.tags.resize(code.length());
    for (int t = 0; t < code.length(); ++t) {
        std::vector<const SymbolicEntry*> entries;
        bool mixed = false;
        for (int k = 0; k < code.n_relays(); ++k) {
            if (x[k][t].mixed) mixed = true;
            if (!x[k][t].zero) entries.push_back(&x[k][t]);
        }
        ColumnTag tag;
        if (mixed) {
            tag = ColumnTag::Invalid;
        } else if (entries.empty()) {
            tag = ColumnTag::Zero;
        } else if (entries.size() == 1) {
            tag = ColumnTag::TypeI;
        } else if (entries.size() == 2 && entries[0]->conjugated != entries[1]->conjugated) {
            tag = ColumnTag::TypeII;
        } else {
            tag = ColumnTag::Invalid;
        }
        cc.tags[t] = tag;
        switch (tag) {
            case ColumnTag::Zero: ++cc.zero_count; break;
            case ColumnTag::TypeI: ++cc.type_i_count; break;
            case ColumnTag::TypeII:
                ++cc.type_ii_count;
                for (auto* e : entries) ++cc.symbol_counts_type_ii[e->symbol];
                break;
            case ColumnTag::Invalid: ++cc.invalid_count; break;
        }
    }
    return cc;
}

// --- full verification ---------------------------------------------------------

enum class Verdict { NotDostbc, Dostbc, RowMonomialDostbc };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::NotDostbc: return "not_dostbc";
        case Verdict::Dostbc: return "dostbc";
        case Verdict::RowMonomialDostbc: return "row_monomial_dostbc";
    }
    return "?";
}

struct VerifyOptions {
    int draws = 8;
    double tol = 1e-9;
    std::uint64_t seed = 42;
};

struct VerificationReport {
    StructuralReport structural;
    ChannelFreeResult channel_free;
    WeightedResult weighted;
    DiagonalRResult diagonal_r;
    ColumnClassification column_classes;
    Verdict verdict = Verdict::NotDostbc;

    bool is_dostbc() const { return verdict != Verdict::NotDostbc; }
    bool is_row_monomial_dostbc() const { return verdict == Verdict::RowMonomialDostbc; }
};

inline VerificationReport verify_code(const DistributedCode& code, VerifyOptions opt = {}) {
    VerificationReport rep;
    rep.structural = check_structural(code);
    rep.channel_free = check_channel_free_orthogonality(code);
    rep.weighted = check_weighted_orthogonality(code, opt.draws, opt.tol, opt.seed);
    rep.diagonal_r = check_diagonal_R(code, opt.draws, opt.tol, opt.seed + 1);
    rep.column_classes = classify_columns(code);

    const bool dostbc = rep.structural.entry_conditions_pass() && rep.channel_free.pass() &&
                        rep.weighted.pass;
    if (dostbc && rep.structural.all_pass() && rep.diagonal_r.pass() &&
        rep.diagonal_r.diagonal_on_all_draws)
        rep.verdict = Verdict::RowMonomialDostbc;
    else if (dostbc)
        rep.verdict = Verdict::Dostbc;
    else
        rep.verdict = Verdict::NotDostbc;
    return rep;
}

inline nlohmann::json report_to_json(const VerificationReport& rep) {
    nlohmann::json j;
    j["structural"] = {
        {"alphabet", rep.structural.alphabet},
        {"disjoint_support", rep.structural.disjoint_support},
        {"column_monomial", rep.structural.column_monomial},
        {"row_monomial", rep.structural.row_monomial},
        {"column_disjoint_across_relays", rep.structural.column_disjoint_across_relays},
    };
    j["algebraic"] = {
        {"channel_free_orthogonality", rep.channel_free.orthogonality},
        {"positive_E", rep.channel_free.positive_e},
        {"weighted_orthogonality", rep.weighted.pass},
        {"diagonal_R", rep.diagonal_r.pass()},
    };
    if (!rep.channel_free.first_violation.empty())
        j["algebraic"]["channel_free_violation"] = rep.channel_free.first_violation;
    if (!rep.weighted.first_violation.empty())
        j["algebraic"]["weighted_violation"] = rep.weighted.first_violation;
    j["E"] = rep.channel_free.e;
    std::vector<std::string> tags;
    for (auto t : rep.column_classes.tags) tags.push_back(to_string(t));
    j["column_classes"] = {
        {"tags", tags},
        {"zero", rep.column_classes.zero_count},
        {"type_I", rep.column_classes.type_i_count},
        {"type_II", rep.column_classes.type_ii_count},
        {"invalid", rep.column_classes.invalid_count},
        {"symbol_counts_type_II", rep.column_classes.symbol_counts_type_ii},
    };
    j["verdict"] = to_string(rep.verdict);
    return j;
}

}  // namespace dostbc

#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dostbc/gaussian_unit.hpp"
#include "dostbc/rational.hpp"

namespace dostbc {

/// Dense matrix over the {0, +1, -1, +j, -j} alphabet, row-major.
class UnitMatrix {
  public:
    UnitMatrix() = default;
    UnitMatrix(int rows, int cols)
        : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols) {
        if (rows <= 0 || cols <= 0) throw std::invalid_argument("UnitMatrix: non-positive dims");
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    GaussianUnit operator()(int r, int c) const { return data_[idx(r, c)]; }
    GaussianUnit& operator()(int r, int c) { return data_[idx(r, c)]; }

    bool operator==(const UnitMatrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
    }

    int nonzero_count() const {
        int n = 0;
        for (auto u : data_) n += !u.is_zero();
        return n;
    }

    bool is_column_monomial() const {
        for (int c = 0; c < cols_; ++c) {
            int nz = 0;
            for (int r = 0; r < rows_; ++r) nz += !(*this)(r, c).is_zero();
            if (nz > 1) return false;
        }
        return true;
    }

    bool is_row_monomial() const {
        for (int r = 0; r < rows_; ++r) {
            int nz = 0;
            for (int c = 0; c < cols_; ++c) nz += !(*this)(r, c).is_zero();
            if (nz > 1) return false;
        }
        return true;
    }

  private:
    size_t idx(int r, int c) const {
        if (r < 0 || r >= rows_ || c < 0 || c >= cols_)
            throw std::out_of_range("UnitMatrix: index out of range");
        return static_cast<size_t>(r) * cols_ + c;
    }

    int rows_ = 0, cols_ = 0;
    std::vector<GaussianUnit> data_;
};

/// One relay's pair of encoding matrices. The relay transmits
/// rho * (y * a + conj(y) * b), so `a` rows multiply the received vector and
/// `b` rows its conjugate.
struct RelayMatrixPair {
    UnitMatrix a;
    UnitMatrix b;

    RelayMatrixPair() = default;
    RelayMatrixPair(UnitMatrix a_, UnitMatrix b_) : a(std::move(a_)), b(std::move(b_)) {
        if (a.rows() != b.rows() || a.cols() != b.cols())
            throw std::invalid_argument("RelayMatrixPair: a/b dimension mismatch");
    }

    bool has_disjoint_support() const {
        for (int r = 0; r < a.rows(); ++r)
            for (int c = 0; c < a.cols(); ++c)
                if (!a(r, c).is_zero() && !b(r, c).is_zero()) return false;
        return true;
    }

    bool sum_is_column_monomial() const {
        for (int c = 0; c < a.cols(); ++c) {
            int nz = 0;
            for (int r = 0; r < a.rows(); ++r)
                nz += !a(r, c).is_zero() || !b(r, c).is_zero();
            if (nz > 1) return false;
        }
        return true;
    }
};

/// A distributed code: K relay matrix pairs of common dimension N x T.
/// Symbol indices are 0-based throughout (the first transmitted symbol is
/// symbol 0); the serialized form uses the same convention.
class DistributedCode {
  public:
    DistributedCode(int n_symbols, int n_relays, int length, std::vector<RelayMatrixPair> relays)
        : n_(n_symbols), k_(n_relays), t_(length), relays_(std::move(relays)) {
        if (n_ <= 0 || k_ <= 0 || t_ <= 0)
            throw std::invalid_argument("DistributedCode: non-positive dimension");
        if (static_cast<int>(relays_.size()) != k_)
            throw std::invalid_argument("DistributedCode: relay count mismatch");
        for (const auto& rp : relays_)
            if (rp.a.rows() != n_ || rp.a.cols() != t_)
                throw std::invalid_argument("DistributedCode: relay matrix dimension mismatch");
    }

    int n_symbols() const { return n_; }
    int n_relays() const { return k_; }
    int length() const { return t_; }
    const std::vector<RelayMatrixPair>& relays() const { return relays_; }
    const RelayMatrixPair& relay(int k) const { return relays_.at(k); }

    /// Data-rate N/T, kept unreduced.
    Rational rate() const { return Rational(n_, t_); }

    /// Non-zero entries in row k of the code matrix (= transmissions by relay k).
    int row_weight(int k) const {
        const auto& rp = relay(k);
        int w = 0;
        for (int n = 0; n < n_; ++n)
            for (int t = 0; t < t_; ++t)
                w += !rp.a(n, t).is_zero() || !rp.b(n, t).is_zero();
        return w;
    }

    bool operator==(const DistributedCode& o) const {
        if (n_ != o.n_ || k_ != o.k_ || t_ != o.t_) return false;
        for (int k = 0; k < k_; ++k)
            if (!(relays_[k].a == o.relays_[k].a) || !(relays_[k].b == o.relays_[k].b))
                return false;
        return true;
    }

  private:
    int n_, k_, t_;
    std::vector<RelayMatrixPair> relays_;
};

/// Symbolic entry of the code matrix X. A valid entry is either zero or
/// coef * h_k * s_n (non-conjugate) / coef * conj(h_k) * conj(s_n)
/// (conjugate), with the row index k implied by position. `mixed` marks a
/// position where both the a- and the b-matrix contribute, which no valid
/// code produces.
struct SymbolicEntry {
    bool zero = true;
    bool mixed = false;
    bool conjugated = false;
    int symbol = -1;
    GaussianUnit coef;

    bool operator==(const SymbolicEntry& o) const {
        if (zero || o.zero) return zero == o.zero;
        return mixed == o.mixed && conjugated == o.conjugated && symbol == o.symbol &&
               coef == o.coef;
    }

    /// Renders as e.g. "h3*s2*", "-jh1s4", "0" (1-based indices for display).
    std::string str(int row_k) const {
        if (zero) return "0";
        if (mixed) return "<mixed>";
        std::string s;
        switch (coef.value()) {
            case GaussianUnit::One: break;
            case GaussianUnit::MinusOne: s += "-"; break;
            case GaussianUnit::J: s += "j"; break;
            case GaussianUnit::MinusJ: s += "-j"; break;
            default: return "0";
        }
        s += "h" + std::to_string(row_k + 1);
        if (conjugated) s += "*";
        s += "s" + std::to_string(symbol + 1);
        if (conjugated) s += "*";
        return s;
    }
};

/// The code matrix X in symbolic form, K x T.
inline std::vector<std::vector<SymbolicEntry>> symbolic_code_matrix(const DistributedCode& code) {
    std::vector<std::vector<SymbolicEntry>> x(code.n_relays(),
                                              std::vector<SymbolicEntry>(code.length()));
    for (int k = 0; k < code.n_relays(); ++k) {
        const auto& rp = code.relay(k);
        for (int t = 0; t < code.length(); ++t) {
            SymbolicEntry e;
            for (int n = 0; n < code.n_symbols(); ++n) {
                if (!rp.a(n, t).is_zero()) {
                    if (!e.zero) { e.mixed = true; continue; }
                    e = {false, false, false, n, rp.a(n, t)};
                }
                if (!rp.b(n, t).is_zero()) {
                    if (!e.zero) { e.mixed = true; continue; }
                    e = {false, false, true, n, rp.b(n, t)};
                }
            }
            x[k][t] = e;
        }
    }
    return x;
}

// --- code file format ------------------------------------------------------
//
// JSON object {"n":..,"k":..,"t":..,"relays":[{"a":[[..]],"b":[[..]]},..]}
// with entries encoded as the strings "0", "1", "-1", "j", "-j". Matrix "a"
// of relay k is N rows by T columns; row n corresponds to symbol index n
// (0-based).

inline nlohmann::json code_to_json(const DistributedCode& code) {
    nlohmann::json j;
    j["n"] = code.n_symbols();
    j["k"] = code.n_relays();
    j["t"] = code.length();
    j["relays"] = nlohmann::json::array();
    for (int k = 0; k < code.n_relays(); ++k) {
        nlohmann::json a = nlohmann::json::array(), b = nlohmann::json::array();
        for (int n = 0; n < code.n_symbols(); ++n) {
            nlohmann::json ra = nlohmann::json::array(), rb = nlohmann::json::array();
            for (int t = 0; t < code.length(); ++t) {
                ra.push_back(code.relay(k).a(n, t).str());
                rb.push_back(code.relay(k).b(n, t).str());
            }
            a.push_back(ra);
            b.push_back(rb);
        }
        j["relays"].push_back({{"a", a}, {"b", b}});
    }
    return j;
}

inline DistributedCode code_from_json(const nlohmann::json& j) {
    const int n = j.at("n").get<int>();
    const int k = j.at("k").get<int>();
    const int t = j.at("t").get<int>();
    const auto& relays = j.at("relays");
    if (static_cast<int>(relays.size()) != k)
        throw std::invalid_argument("code file: relay count does not match k");
    std::vector<RelayMatrixPair> pairs;
    pairs.reserve(k);
    auto parse_matrix = [&](const nlohmann::json& m) {
        if (static_cast<int>(m.size()) != n)
            throw std::invalid_argument("code file: matrix row count does not match n");
        UnitMatrix um(n, t);
        for (int r = 0; r < n; ++r) {
            if (static_cast<int>(m[r].size()) != t)
                throw std::invalid_argument("code file: matrix column count does not match t");
            for (int c = 0; c < t; ++c)
                um(r, c) = GaussianUnit::parse(m[r][c].get<std::string>());
        }
        return um;
    };
    for (const auto& rj : relays)
        pairs.emplace_back(parse_matrix(rj.at("a")), parse_matrix(rj.at("b")));
    return DistributedCode(n, k, t, std::move(pairs));
}

inline void save_code(const DistributedCode& code, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os << code_to_json(code).dump(1) << "\n";
}

inline DistributedCode load_code(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);
    nlohmann::json j;
    is >> j;
    return code_from_json(j);
}

}  // namespace dostbc

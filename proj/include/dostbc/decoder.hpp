#pragma once

#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "dostbc/channel.hpp"
#include "dostbc/code.hpp"
#include "dostbc/constellation.hpp"
#include "dostbc/verifier.hpp"

namespace dostbc {

enum class DecodePath { SingleSymbol, Joint, Repetition };

struct DecodeResult {
    std::vector<int> symbols;  // constellation labels, one per transmitted symbol
    long metric_evals = 0;
    DecodePath path = DecodePath::Joint;
    std::optional<Eigen::MatrixXd> per_symbol_metrics;  // N x M, single-symbol path
};

/// ML decoding for one code. The whitened metric
///   (y - w X) R^{-1} (y - w X)^H
/// is evaluated as  yR'y - 2 Re(z q) + z R^{-1} z^H  with z = w X and
/// q = R^{-1} y^H, so the covariance factorization is done once per frame and
/// shared by every candidate. Not thread-safe; use one instance per thread.
class DostbcDecoder {
  public:
    /// Single-symbol decoding leans on the verified per-symbol separability
    /// of the metric, so construction demands a verification verdict.
    DostbcDecoder(const DistributedCode& code, const VerificationReport& report)
        : code_(code), verified_(report.is_dostbc()) {
        build_cache();
    }

    /// Joint-only decoder for arbitrary (possibly invalid) codes.
    static DostbcDecoder joint_only(const DistributedCode& code) {
        return DostbcDecoder(code);
    }

    /// Exhaustive minimization over all M^N candidate vectors. Ties go to the
    /// lexicographically smallest label vector (enumeration order). The
    /// candidate count must stay within `budget`.
    /// `assume_white_noise` replaces R by I in the metric (diagnostics only).
    DecodeResult joint(const ReceivedFrame& frame, const Constellation& cons,
                       long budget = 1 << 20, bool assume_white_noise = false) {
        const int n = code_.n_symbols(), m = cons.size();
        double cand_count = 1;
        for (int i = 0; i < n; ++i) cand_count *= m;
        if (cand_count > static_cast<double>(budget))
            throw std::invalid_argument("joint decode: candidate budget exceeded");
        prepare(frame, assume_white_noise);

        DecodeResult res;
        res.path = DecodePath::Joint;
        std::vector<int> labels(n, 0), best(n, 0);
        std::vector<Cplx> s(n);
        double best_metric = std::numeric_limits<double>::infinity();
        while (true) {
            for (int i = 0; i < n; ++i) s[i] = cons.point(labels[i]);
            const double v = metric_full(frame, s);
            ++res.metric_evals;
            if (v < best_metric) {
                best_metric = v;
                best = labels;
            }
            int pos = n - 1;
            while (pos >= 0 && ++labels[pos] == m) labels[pos--] = 0;
            if (pos < 0) break;
        }
        res.symbols = best;
        return res;
    }

    /// Per-symbol minimization: for slot n, the full metric evaluated at the
    /// vector c * e_n. The quadratic form separates per symbol for verified
    /// codes, so the per-slot argmins coincide with the joint decision; the
    /// tie-break (smallest label) matches joint().
    DecodeResult single_symbol(const ReceivedFrame& frame, const Constellation& cons) {
        if (!verified_)
            throw std::logic_error(
                "single-symbol decode requires a code that passed verification");
        prepare(frame, false);
        const int n = code_.n_symbols(), m = cons.size();
        DecodeResult res;
        res.path = DecodePath::SingleSymbol;
        res.symbols.assign(n, 0);
        res.per_symbol_metrics = Eigen::MatrixXd(n, m);
        for (int slot = 0; slot < n; ++slot) {
            double best_metric = std::numeric_limits<double>::infinity();
            int best_label = 0;
            for (int c = 0; c < m; ++c) {
                const double v = metric_single(frame, slot, cons.point(c));
                (*res.per_symbol_metrics)(slot, c) = v;
                ++res.metric_evals;
                if (v < best_metric) {
                    best_metric = v;
                    best_label = c;
                }
            }
            res.symbols[slot] = best_label;
        }
        return res;
    }

  private:
    explicit DostbcDecoder(const DistributedCode& code) : code_(code), verified_(false) {
        build_cache();
    }

    struct Entry {
        int k, t;
        Cplx coef;
        bool conj;
    };

    void build_cache() {
        const int n = code_.n_symbols();
        per_symbol_.assign(n, {});
        for (int k = 0; k < code_.n_relays(); ++k) {
            const auto& rp = code_.relay(k);
            for (int sym = 0; sym < n; ++sym)
                for (int t = 0; t < code_.length(); ++t) {
                    if (!rp.a(sym, t).is_zero())
                        per_symbol_[sym].push_back({k, t, rp.a(sym, t).to_complex(), false});
                    if (!rp.b(sym, t).is_zero())
                        per_symbol_[sym].push_back({k, t, rp.b(sym, t).to_complex(), true});
                }
        }
    }

    void prepare(const ReceivedFrame& frame, bool assume_white_noise) {
        const int t = code_.length();
        if (frame.y_d.size() != t)
            throw std::invalid_argument("decode: frame length mismatch");
        wh_.resize(code_.n_relays());
        whc_.resize(code_.n_relays());
        for (int k = 0; k < code_.n_relays(); ++k) {
            const Cplx w = frame.rho[k] * frame.draw.f[k];
            wh_[k] = w * frame.draw.h[k];
            whc_[k] = w * std::conj(frame.draw.h[k]);
        }
        if (assume_white_noise)
            rinv_ = CMat::Identity(t, t);
        else
            rinv_ = Eigen::LLT<CMat>(frame.r).solve(CMat::Identity(t, t));
        q_ = rinv_ * frame.y_d.adjoint();
        c0_ = (frame.y_d * q_).value().real();
        z_ = CRowVec::Zero(t);
    }

    // metric at a full symbol vector
    double metric_full(const ReceivedFrame&, const std::vector<Cplx>& s) {
        z_.setZero();
        touched_.clear();
        for (size_t sym = 0; sym < s.size(); ++sym)
            accumulate(static_cast<int>(sym), s[sym]);
        return finish();
    }

    // metric at c * e_slot
    double metric_single(const ReceivedFrame&, int slot, Cplx c) {
        z_.setZero();
        touched_.clear();
        accumulate(slot, c);
        return finish();
    }

    void accumulate(int sym, Cplx value) {
        for (const auto& e : per_symbol_[sym]) {
            const Cplx contrib =
                e.conj ? whc_[e.k] * std::conj(value) * e.coef : wh_[e.k] * value * e.coef;
            if (z_(e.t) == Cplx(0.0, 0.0)) touched_.push_back(e.t);
            z_(e.t) += contrib;
        }
    }

    double finish() const {
        Cplx cross = 0.0;
        for (int t : touched_) cross += z_(t) * q_(t);
        double quad = 0.0;
        for (int t1 : touched_)
            for (int t2 : touched_)
                quad += (z_(t1) * rinv_(t1, t2) * std::conj(z_(t2))).real();
        return c0_ - 2.0 * cross.real() + quad;
    }

    DistributedCode code_;
    bool verified_;
    std::vector<std::vector<Entry>> per_symbol_;

    // per-frame workspace
    std::vector<Cplx> wh_, whc_;
    CMat rinv_;
    Eigen::VectorXcd q_;
    double c0_ = 0.0;
    mutable CRowVec z_;
    mutable std::vector<int> touched_;
};

inline DecodeResult joint_ml_decode(const ReceivedFrame& frame, const DistributedCode& code,
                                    const Constellation& cons, long budget = 1 << 20) {
    auto dec = DostbcDecoder::joint_only(code);
    return dec.joint(frame, cons, budget);
}

inline DecodeResult single_symbol_ml_decode(const ReceivedFrame& frame,
                                            const DistributedCode& code,
                                            const VerificationReport& report,
                                            const Constellation& cons) {
    DostbcDecoder dec(code, report);
    return dec.single_symbol(frame, cons);
}

/// Repetition decoding: per symbol, maximal-ratio combine the K whitened
/// single-relay observations and minimize the scalar metric over the
/// constellation. Slots are independent here, so this equals joint ML.
inline DecodeResult repetition_ml_decode(const ReceivedFrame& frame, int n_relays,
                                         const Constellation& cons) {
    const int n = frame.n_symbols;
    const int m = cons.size();
    DecodeResult res;
    res.path = DecodePath::Repetition;
    res.symbols.assign(n, 0);
    res.metric_evals = 0;
    for (int sym = 0; sym < n; ++sym) {
        double best_metric = std::numeric_limits<double>::infinity();
        int best_label = 0;
        for (int c = 0; c < m; ++c) {
            double v = 0.0;
            for (int k = 0; k < n_relays; ++k) {
                const int slot = k * n + sym;
                const Cplx gain = frame.rho[k] * frame.draw.f[k] * frame.draw.h[k];
                const double var = frame.r(slot, slot).real();
                v += std::norm(frame.y_d(slot) - gain * cons.point(c)) / var;
            }
            ++res.metric_evals;
            if (v < best_metric) {
                best_metric = v;
                best_label = c;
            }
        }
        res.symbols[sym] = best_label;
    }
    return res;
}

}  // namespace dostbc

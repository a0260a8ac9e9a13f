#pragma once

#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "dostbc/code.hpp"
#include "dostbc/rng.hpp"
#include "dostbc/verifier.hpp"

namespace dostbc {

/// One realization of the two-hop fading channel: h[k] source->relay k,
/// f[k] relay k->destination, each CN(0,1), all independent, redrawn per
/// frame.
struct ChannelDraw {
    std::vector<Cplx> h;
    std::vector<Cplx> f;
};

inline ChannelDraw draw_channels(Rng& rng, int k) {
    ChannelDraw d;
    d.h.resize(k);
    d.f.resize(k);
    for (auto& v : d.h) v = rng.complex_gaussian();
    for (auto& v : d.f) v = rng.complex_gaussian();
    return d;
}

/// Source/relay power settings. Relay k amplifies by
/// rho_k = sqrt(er * scale_k / (1 + es)), which makes its mean per-use
/// transmit power exactly er * scale_k under unit-variance relay noise.
struct PowerConfig {
    double es = 1.0;
    double er = 1.0;
    std::vector<double> per_relay_scale;  // empty = all ones

    double scale(int k) const {
        return per_relay_scale.empty() ? 1.0 : per_relay_scale.at(k);
    }
    double rho(int k) const { return std::sqrt(er * scale(k) / (1.0 + es)); }
    std::vector<double> rho_profile(int n_relays) const {
        std::vector<double> r(n_relays);
        for (int k = 0; k < n_relays; ++k) r[k] = rho(k);
        return r;
    }
};

enum class SchemeKind { Dostbc, Repetition };

/// One destination observation window plus everything the decoder needs:
/// the channel draw, the per-relay amplification and the noise covariance
/// for this draw.
struct ReceivedFrame {
    CRowVec y_d;
    ChannelDraw draw;
    CMat r;
    std::vector<double> rho;
    SchemeKind scheme = SchemeKind::Dostbc;
    int n_symbols = 0;
};

/// rho * (y * A_k + conj(y) * B_k) for one relay.
inline CRowVec relay_encode(const RelayMatrixPair& rp, const CRowVec& y, double rho) {
    if (y.size() != rp.a.rows()) throw std::invalid_argument("relay_encode: length mismatch");
    CRowVec x = CRowVec::Zero(rp.a.cols());
    for (int n = 0; n < rp.a.rows(); ++n)
        for (int t = 0; t < rp.a.cols(); ++t) {
            if (!rp.a(n, t).is_zero()) x(t) += y(n) * rp.a(n, t).to_complex();
            if (!rp.b(n, t).is_zero()) x(t) += std::conj(y(n)) * rp.b(n, t).to_complex();
        }
    return rho * x;
}

/// Frame simulator for one code. Precomputes the sparse entry lists and the
/// per-relay Gram matrices A_k^H A_k + B_k^H B_k so the per-frame noise
/// covariance is a weighted sum instead of fresh matrix products. One
/// instance per thread; simulate() reuses internal buffers.
class DostbcChannel {
  public:
    explicit DostbcChannel(const DistributedCode& code) : code_(code) {
        const int K = code.n_relays(), T = code.length();
        grams_.reserve(K);
        entries_.resize(K);
        for (int k = 0; k < K; ++k) {
            const CMat a = to_complex_matrix(code.relay(k).a);
            const CMat b = to_complex_matrix(code.relay(k).b);
            grams_.push_back(((a.adjoint() * a + b.adjoint() * b).real()).eval());
            for (int n = 0; n < code.n_symbols(); ++n)
                for (int t = 0; t < T; ++t) {
                    if (!code.relay(k).a(n, t).is_zero())
                        entries_[k].push_back({n, t, code.relay(k).a(n, t).gint(), false});
                    if (!code.relay(k).b(n, t).is_zero())
                        entries_[k].push_back({n, t, code.relay(k).b(n, t).gint(), true});
                }
        }
    }

    const DistributedCode& code() const { return code_; }

    /// Relay phase: y_k = h_k s + n_k per relay, amplify-and-forward through
    /// the encoding matrices, superpose at the destination. With
    /// noise_enabled = false every noise term is zero and y_D = w X exactly.
    ReceivedFrame simulate(const std::vector<Cplx>& s, const PowerConfig& power, Rng& rng,
                           bool noise_enabled = true) {
        return simulate_given(draw_channels(rng, code_.n_relays()), s, power, rng,
                              noise_enabled);
    }

    /// Same, for an externally fixed channel draw (fresh noise only).
    ReceivedFrame simulate_given(const ChannelDraw& draw, const std::vector<Cplx>& s,
                                 const PowerConfig& power, Rng& rng,
                                 bool noise_enabled = true) {
        const int N = code_.n_symbols(), K = code_.n_relays(), T = code_.length();
        if (static_cast<int>(s.size()) != N)
            throw std::invalid_argument("simulate: symbol count mismatch");
        ReceivedFrame fr;
        fr.scheme = SchemeKind::Dostbc;
        fr.n_symbols = N;
        fr.draw = draw;
        fr.rho = power.rho_profile(K);
        fr.y_d = CRowVec::Zero(T);
        for (int k = 0; k < K; ++k) {
            yk_.resize(N);
            for (int n = 0; n < N; ++n) {
                yk_[n] = fr.draw.h[k] * s[n];
                if (noise_enabled) yk_[n] += rng.complex_gaussian();
            }
            const Cplx g = fr.rho[k] * fr.draw.f[k];
            for (const auto& e : entries_[k]) {
                const Cplx v = e.conj ? std::conj(yk_[e.n]) : yk_[e.n];
                fr.y_d(e.t) += g * v * e.coef.to_complex();
            }
        }
        if (noise_enabled)
            for (int t = 0; t < T; ++t) fr.y_d(t) += rng.complex_gaussian();

        fr.r = CMat::Identity(T, T);
        for (int k = 0; k < K; ++k) {
            const double w = std::norm(fr.rho[k] * fr.draw.f[k]);
            fr.r.real() += w * grams_[k];
        }
        return fr;
    }

    /// Mean transmit power per time slot of relay k over one frame, given s.
    /// Used by the power-accounting tests.
    double relay_slot_power(int k, const std::vector<Cplx>& s, const PowerConfig& power,
                            Rng& rng, bool noise_enabled = true) const {
        const int N = code_.n_symbols();
        const Cplx h = rng.complex_gaussian();
        CRowVec y(N);
        for (int n = 0; n < N; ++n) {
            y(n) = h * s[n];
            if (noise_enabled) y(n) += rng.complex_gaussian();
        }
        const CRowVec x = relay_encode(code_.relay(k), y, power.rho(k));
        return x.squaredNorm() / code_.length();
    }

  private:
    struct Entry {
        int n, t;
        GInt coef;
        bool conj;
    };

    DistributedCode code_;
    std::vector<Eigen::MatrixXd> grams_;
    std::vector<std::vector<Entry>> entries_;
    std::vector<Cplx> yk_;
};

inline ReceivedFrame simulate_dostbc_frame(const DistributedCode& code,
                                           const std::vector<Cplx>& s,
                                           const PowerConfig& power, Rng& rng,
                                           bool noise_enabled = true) {
    DostbcChannel ch(code);
    return ch.simulate(s, power, rng, noise_enabled);
}

/// Repetition baseline: relay k amplifies-and-forwards its N received symbols
/// in its own slot block, slots k*N .. k*N+N-1 carrying symbols 0..N-1 in
/// order. Exactly one relay transmits per slot, so the noise covariance is
/// diagonal with 1 + rho_k^2 |f_k|^2 on relay k's block.
inline ReceivedFrame simulate_repetition_frame(int n_relays, const std::vector<Cplx>& s,
                                               const PowerConfig& power, Rng& rng,
                                               bool noise_enabled = true) {
    const int N = static_cast<int>(s.size());
    const int K = n_relays;
    const int T = N * K;
    ReceivedFrame fr;
    fr.scheme = SchemeKind::Repetition;
    fr.n_symbols = N;
    fr.draw = draw_channels(rng, K);
    fr.rho = power.rho_profile(K);
    fr.y_d = CRowVec::Zero(T);
    fr.r = CMat::Identity(T, T);
    for (int k = 0; k < K; ++k) {
        const Cplx g = fr.rho[k] * fr.draw.f[k];
        for (int n = 0; n < N; ++n) {
            Cplx y = fr.draw.h[k] * s[n];
            if (noise_enabled) y += rng.complex_gaussian();
            Cplx v = g * y;
            if (noise_enabled) v += rng.complex_gaussian();
            fr.y_d(k * N + n) = v;
            fr.r(k * N + n, k * N + n) = 1.0 + std::norm(g);
        }
    }
    return fr;
}

/// Per-relay repetition power scale that matches each relay's per-slot
/// average power to what it spends under the given code: scale_k = K * W_k / T
/// with W_k the relay's transmission count.
inline std::vector<double> repetition_power_scales(const DistributedCode& code) {
    std::vector<double> s(code.n_relays());
    for (int k = 0; k < code.n_relays(); ++k)
        s[k] = static_cast<double>(code.n_relays()) * code.row_weight(k) / code.length();
    return s;
}

}  // namespace dostbc

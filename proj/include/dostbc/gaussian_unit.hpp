#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace dostbc {

/// Exact Gaussian integer (a + b*j with integer a, b). Used wherever the
/// orthogonality conditions must hold exactly rather than to a tolerance.
struct GInt {
    std::int64_t re = 0;
    std::int64_t im = 0;

    constexpr GInt() = default;
    constexpr GInt(std::int64_t r, std::int64_t i) : re(r), im(i) {}

    constexpr bool is_zero() const { return re == 0 && im == 0; }
    constexpr GInt conj() const { return {re, -im}; }

    friend constexpr GInt operator+(GInt a, GInt b) { return {a.re + b.re, a.im + b.im}; }
    friend constexpr GInt operator-(GInt a, GInt b) { return {a.re - b.re, a.im - b.im}; }
    friend constexpr GInt operator-(GInt a) { return {-a.re, -a.im}; }
    friend constexpr GInt operator*(GInt a, GInt b) {
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    friend constexpr bool operator==(GInt a, GInt b) { return a.re == b.re && a.im == b.im; }
    friend constexpr bool operator!=(GInt a, GInt b) { return !(a == b); }

    GInt& operator+=(GInt b) { re += b.re; im += b.im; return *this; }

    std::int64_t norm() const { return re * re + im * im; }
    std::complex<double> to_complex() const { return {double(re), double(im)}; }
};

/// One entry of a relay encoding matrix: exactly 0, +1, -1, +j or -j.
/// The five values are closed under negation and conjugation, and the four
/// non-zero ones are closed under multiplication.
class GaussianUnit {
  public:
    enum Value : std::uint8_t { Zero = 0, One, MinusOne, J, MinusJ };

    constexpr GaussianUnit() : v_(Zero) {}
    constexpr GaussianUnit(Value v) : v_(v) {}

    static constexpr GaussianUnit zero() { return GaussianUnit(Zero); }
    static constexpr GaussianUnit one() { return GaussianUnit(One); }
    static constexpr GaussianUnit minus_one() { return GaussianUnit(MinusOne); }
    static constexpr GaussianUnit j() { return GaussianUnit(J); }
    static constexpr GaussianUnit minus_j() { return GaussianUnit(MinusJ); }

    constexpr bool is_zero() const { return v_ == Zero; }
    constexpr Value value() const { return v_; }

    constexpr GInt gint() const {
        switch (v_) {
            case Zero: return {0, 0};
            case One: return {1, 0};
            case MinusOne: return {-1, 0};
            case J: return {0, 1};
            case MinusJ: return {0, -1};
        }
        return {0, 0};
    }

    std::complex<double> to_complex() const { return gint().to_complex(); }

    constexpr GaussianUnit conj() const {
        return v_ == J ? GaussianUnit(MinusJ) : v_ == MinusJ ? GaussianUnit(J) : *this;
    }

    constexpr GaussianUnit operator-() const {
        switch (v_) {
            case One: return GaussianUnit(MinusOne);
            case MinusOne: return GaussianUnit(One);
            case J: return GaussianUnit(MinusJ);
            case MinusJ: return GaussianUnit(J);
            default: return GaussianUnit(Zero);
        }
    }

    friend constexpr GaussianUnit operator*(GaussianUnit a, GaussianUnit b) {
        return from_gint(a.gint() * b.gint());
    }

    friend constexpr bool operator==(GaussianUnit a, GaussianUnit b) { return a.v_ == b.v_; }
    friend constexpr bool operator!=(GaussianUnit a, GaussianUnit b) { return a.v_ != b.v_; }

    /// Serialized form used by the code file format.
    std::string str() const {
        switch (v_) {
            case Zero: return "0";
            case One: return "1";
            case MinusOne: return "-1";
            case J: return "j";
            case MinusJ: return "-j";
        }
        return "0";
    }

    static GaussianUnit parse(const std::string& s) {
        if (s == "0") return zero();
        if (s == "1") return one();
        if (s == "-1") return minus_one();
        if (s == "j") return j();
        if (s == "-j") return minus_j();
        throw std::invalid_argument("GaussianUnit: unrecognized entry '" + s + "'");
    }

  private:
    static constexpr GaussianUnit from_gint(GInt g) {
        if (g.re == 1) return one();
        if (g.re == -1) return minus_one();
        if (g.im == 1) return j();
        if (g.im == -1) return minus_j();
        return zero();
    }

    Value v_;
};

}  // namespace dostbc

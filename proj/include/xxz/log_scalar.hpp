#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>

namespace xxz {

using cplx = std::complex<double>;

// Complex number stored as mantissa * 2^exponent. The mantissa is kept with
// max(|re|, |im|) in [0.5, 1) so sequences growing like e^{2k} for k ~ 10^3
// stay representable. Rescaling by powers of two is exact.
class LogComplex {
public:
    LogComplex() = default;
    LogComplex(cplx value) : mant_(value) { normalize(); }
    LogComplex(double value) : mant_(value, 0.0) { normalize(); }

    static LogComplex from_parts(cplx mant, std::int64_t exp2) {
        LogComplex out;
        out.mant_ = mant;
        out.exp2_ = exp2;
        out.normalize();
        return out;
    }

    [[nodiscard]] cplx mantissa() const { return mant_; }
    [[nodiscard]] std::int64_t exponent() const { return exp2_; }
    [[nodiscard]] bool is_zero() const { return mant_ == cplx{}; }

    // ln|z|; -inf for zero.
    [[nodiscard]] double log_abs() const {
        if (is_zero()) return -std::numeric_limits<double>::infinity();
        return std::log(std::abs(mant_)) + static_cast<double>(exp2_) * std::numbers::ln2;
    }
    // 2 ln|z| = ln|z|^2, the transfer-matrix weight.
    [[nodiscard]] double log_norm2() const { return 2.0 * log_abs(); }

    // Plain value; may overflow to inf or underflow to 0.
    [[nodiscard]] cplx value() const {
        if (is_zero()) return {};
        if (exp2_ > 4096) return {std::copysign(HUGE_VAL, mant_.real()), std::copysign(HUGE_VAL, mant_.imag())};
        if (exp2_ < -4096) return {};
        const int e = static_cast<int>(exp2_);
        return {std::ldexp(mant_.real(), e), std::ldexp(mant_.imag(), e)};
    }

    [[nodiscard]] LogComplex conj() const { return from_parts(std::conj(mant_), exp2_); }

    friend LogComplex operator*(const LogComplex& x, const LogComplex& y) {
        return from_parts(x.mant_ * y.mant_, x.exp2_ + y.exp2_);
    }
    friend LogComplex operator/(const LogComplex& x, const LogComplex& y) {
        return from_parts(x.mant_ / y.mant_, x.exp2_ - y.exp2_);
    }
    friend LogComplex operator+(const LogComplex& x, const LogComplex& y) {
        if (x.is_zero()) return y;
        if (y.is_zero()) return x;
        const std::int64_t e = std::max(x.exp2_, y.exp2_);
        return from_parts(shifted(x.mant_, x.exp2_ - e) + shifted(y.mant_, y.exp2_ - e), e);
    }
    friend LogComplex operator-(const LogComplex& x) { return from_parts(-x.mant_, x.exp2_); }
    friend LogComplex operator-(const LogComplex& x, const LogComplex& y) { return x + (-y); }

private:
    static cplx shifted(cplx m, std::int64_t by) {
        if (by < -1100) return {};
        const int e = static_cast<int>(by);
        return {std::ldexp(m.real(), e), std::ldexp(m.imag(), e)};
    }

    void normalize() {
        const double big = std::max(std::abs(mant_.real()), std::abs(mant_.imag()));
        if (big == 0.0) {
            mant_ = {};
            exp2_ = 0;
            return;
        }
        int e = 0;
        std::frexp(big, &e);
        mant_ = {std::ldexp(mant_.real(), -e), std::ldexp(mant_.imag(), -e)};
        exp2_ += e;
    }

    cplx mant_{};
    std::int64_t exp2_ = 0;
};

}  // namespace xxz

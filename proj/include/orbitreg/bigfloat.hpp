#pragma once

#include <gmpxx.h>
#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <utility>

namespace orbitreg {

// Decimal digits -> mpfr bits, with headroom.
inline mpfr_prec_t bits_for_digits(int digits) {
    return static_cast<mpfr_prec_t>(digits * 3.3219280948873623 + 24);
}

// Thin RAII wrapper over mpfr_t.  Every value carries its own precision;
// binary operations work at the larger precision of the two operands.
class BigFloat {
  public:
    BigFloat() { mpfr_init2(v_, 64); mpfr_set_zero(v_, 1); }
    explicit BigFloat(mpfr_prec_t bits) { mpfr_init2(v_, bits); mpfr_set_zero(v_, 1); }
    BigFloat(double d, mpfr_prec_t bits) {
        mpfr_init2(v_, bits);
        mpfr_set_d(v_, d, MPFR_RNDN);
    }
    BigFloat(long n, mpfr_prec_t bits) {
        mpfr_init2(v_, bits);
        mpfr_set_si(v_, n, MPFR_RNDN);
    }
    BigFloat(const mpq_class& q, mpfr_prec_t bits) {
        mpfr_init2(v_, bits);
        mpfr_set_q(v_, q.get_mpq_t(), MPFR_RNDN);
    }
    BigFloat(const mpz_class& z, mpfr_prec_t bits) {
        mpfr_init2(v_, bits);
        mpfr_set_z(v_, z.get_mpz_t(), MPFR_RNDN);
    }
    // Parses a decimal literal.
    BigFloat(const std::string& s, mpfr_prec_t bits) {
        mpfr_init2(v_, bits);
        mpfr_set_str(v_, s.c_str(), 10, MPFR_RNDN);
    }

    BigFloat(const BigFloat& o) {
        mpfr_init2(v_, mpfr_get_prec(o.v_));
        mpfr_set(v_, o.v_, MPFR_RNDN);
    }
    BigFloat(BigFloat&& o) noexcept {
        mpfr_init2(v_, 64);
        mpfr_swap(v_, o.v_);
    }
    BigFloat& operator=(const BigFloat& o) {
        if (this != &o) {
            mpfr_set_prec(v_, mpfr_get_prec(o.v_));
            mpfr_set(v_, o.v_, MPFR_RNDN);
        }
        return *this;
    }
    BigFloat& operator=(BigFloat&& o) noexcept {
        mpfr_swap(v_, o.v_);
        return *this;
    }
    ~BigFloat() { mpfr_clear(v_); }

    mpfr_prec_t prec() const { return mpfr_get_prec(v_); }
    const mpfr_t& raw() const { return v_; }
    mpfr_t& raw() { return v_; }

    static BigFloat pi(mpfr_prec_t bits) {
        BigFloat r(bits);
        mpfr_const_pi(r.v_, MPFR_RNDN);
        return r;
    }

    double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
    bool is_zero() const { return mpfr_zero_p(v_) != 0; }
    bool is_nan() const { return mpfr_nan_p(v_) != 0; }
    int sign() const { return mpfr_sgn(v_); }

    friend BigFloat operator+(const BigFloat& a, const BigFloat& b) {
        BigFloat r(std::max(a.prec(), b.prec()));
        mpfr_add(r.v_, a.v_, b.v_, MPFR_RNDN);
        return r;
    }
    friend BigFloat operator-(const BigFloat& a, const BigFloat& b) {
        BigFloat r(std::max(a.prec(), b.prec()));
        mpfr_sub(r.v_, a.v_, b.v_, MPFR_RNDN);
        return r;
    }
    friend BigFloat operator*(const BigFloat& a, const BigFloat& b) {
        BigFloat r(std::max(a.prec(), b.prec()));
        mpfr_mul(r.v_, a.v_, b.v_, MPFR_RNDN);
        return r;
    }
    friend BigFloat operator/(const BigFloat& a, const BigFloat& b) {
        BigFloat r(std::max(a.prec(), b.prec()));
        mpfr_div(r.v_, a.v_, b.v_, MPFR_RNDN);
        return r;
    }
    BigFloat operator-() const {
        BigFloat r(prec());
        mpfr_neg(r.v_, v_, MPFR_RNDN);
        return r;
    }
    BigFloat& operator+=(const BigFloat& o) { return *this = *this + o; }
    BigFloat& operator-=(const BigFloat& o) { return *this = *this - o; }
    BigFloat& operator*=(const BigFloat& o) { return *this = *this * o; }
    BigFloat& operator/=(const BigFloat& o) { return *this = *this / o; }

    friend bool operator<(const BigFloat& a, const BigFloat& b) { return mpfr_less_p(a.v_, b.v_) != 0; }
    friend bool operator>(const BigFloat& a, const BigFloat& b) { return mpfr_greater_p(a.v_, b.v_) != 0; }
    friend bool operator<=(const BigFloat& a, const BigFloat& b) { return mpfr_lessequal_p(a.v_, b.v_) != 0; }
    friend bool operator>=(const BigFloat& a, const BigFloat& b) { return mpfr_greaterequal_p(a.v_, b.v_) != 0; }
    friend bool operator==(const BigFloat& a, const BigFloat& b) { return mpfr_equal_p(a.v_, b.v_) != 0; }
    friend bool operator!=(const BigFloat& a, const BigFloat& b) { return !(a == b); }

    friend BigFloat abs(const BigFloat& a) {
        BigFloat r(a.prec());
        mpfr_abs(r.v_, a.v_, MPFR_RNDN);
        return r;
    }
    friend BigFloat sqrt(const BigFloat& a) {
        BigFloat r(a.prec());
        mpfr_sqrt(r.v_, a.v_, MPFR_RNDN);
        return r;
    }
    friend BigFloat log(const BigFloat& a) {
        BigFloat r(a.prec());
        mpfr_log(r.v_, a.v_, MPFR_RNDN);
        return r;
    }
    friend BigFloat exp(const BigFloat& a) {
        BigFloat r(a.prec());
        mpfr_exp(r.v_, a.v_, MPFR_RNDN);
        return r;
    }
    friend BigFloat sin(const BigFloat& a) {
        BigFloat r(a.prec());
        mpfr_sin(r.v_, a.v_, MPFR_RNDN);
        return r;
    }
    friend BigFloat cos(const BigFloat& a) {
        BigFloat r(a.prec());
        mpfr_cos(r.v_, a.v_, MPFR_RNDN);
        return r;
    }
    friend BigFloat atan2(const BigFloat& y, const BigFloat& x) {
        BigFloat r(std::max(y.prec(), x.prec()));
        mpfr_atan2(r.v_, y.v_, x.v_, MPFR_RNDN);
        return r;
    }
    // Nearest integer.
    mpz_class round_to_int() const {
        BigFloat t(prec());
        mpfr_round(t.v_, v_);
        mpz_class z;
        mpfr_get_z(z.get_mpz_t(), t.v_, MPFR_RNDN);
        return z;
    }

    std::string str(int digits) const {
        mpfr_exp_t e;
        char* s = mpfr_get_str(nullptr, &e, 10, static_cast<size_t>(digits), v_, MPFR_RNDN);
        std::string mant(s);
        mpfr_free_str(s);
        bool neg = !mant.empty() && mant[0] == '-';
        if (neg) mant.erase(0, 1);
        std::string out = (neg ? "-" : "");
        if (mant.find_first_not_of("0") == std::string::npos) return "0";
        out += "0." + mant + "e" + std::to_string(static_cast<long>(e));
        return out;
    }

  private:
    mpfr_t v_;
};

inline BigFloat pow10i(long e, mpfr_prec_t bits) {
    BigFloat r(bits);
    mpfr_set_ui(r.raw(), 10, MPFR_RNDN);
    mpfr_pow_si(r.raw(), r.raw(), e, MPFR_RNDN);
    return r;
}

struct BigComplex {
    BigFloat re, im;

    BigComplex() = default;
    explicit BigComplex(mpfr_prec_t bits) : re(bits), im(bits) {}
    BigComplex(BigFloat r, BigFloat i) : re(std::move(r)), im(std::move(i)) {}
    BigComplex(double r, double i, mpfr_prec_t bits) : re(r, bits), im(i, bits) {}

    mpfr_prec_t prec() const { return std::max(re.prec(), im.prec()); }
    bool is_zero() const { return re.is_zero() && im.is_zero(); }

    friend BigComplex operator+(const BigComplex& a, const BigComplex& b) {
        return {a.re + b.re, a.im + b.im};
    }
    friend BigComplex operator-(const BigComplex& a, const BigComplex& b) {
        return {a.re - b.re, a.im - b.im};
    }
    friend BigComplex operator*(const BigComplex& a, const BigComplex& b) {
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    friend BigComplex operator/(const BigComplex& a, const BigComplex& b) {
        BigFloat d = b.re * b.re + b.im * b.im;
        return {(a.re * b.re + a.im * b.im) / d, (a.im * b.re - a.re * b.im) / d};
    }
    BigComplex operator-() const { return {-re, -im}; }
    BigComplex& operator+=(const BigComplex& o) { return *this = *this + o; }
    BigComplex& operator-=(const BigComplex& o) { return *this = *this - o; }
    BigComplex& operator*=(const BigComplex& o) { return *this = *this * o; }
    BigComplex& operator/=(const BigComplex& o) { return *this = *this / o; }

    friend BigFloat abs(const BigComplex& a) {
        return sqrt(a.re * a.re + a.im * a.im);
    }
    // Principal logarithm; the branch cut lands arg(-x) at +pi.
    friend BigComplex log(const BigComplex& a) {
        return {log(abs(a)), atan2(a.im, a.re)};
    }
    friend BigComplex exp(const BigComplex& a) {
        BigFloat m = exp(a.re);
        return {m * cos(a.im), m * sin(a.im)};
    }
};

}  // namespace orbitreg

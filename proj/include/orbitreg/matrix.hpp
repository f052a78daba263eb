#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "orbitreg/errors.hpp"
#include "orbitreg/symbolic.hpp"

namespace orbitreg {

template <class T>
struct Mat {
    size_t rows = 0, cols = 0;
    std::vector<T> a;

    Mat() = default;
    Mat(size_t r, size_t c, const T& fill) : rows(r), cols(c), a(r * c, fill) {}

    T& operator()(size_t i, size_t j) { return a[i * cols + j]; }
    const T& operator()(size_t i, size_t j) const { return a[i * cols + j]; }
};

// Division for symbolic reals rides on the complex solver.
inline std::optional<SymbolicReal> try_div(const SymbolicReal& num, const SymbolicReal& den) {
    auto q = SymbolicComplex::try_div(SymbolicComplex{num, SymbolicReal(num.basis())},
                                      SymbolicComplex{den, SymbolicReal(den.basis())});
    if (!q || !q->im.is_zero()) return std::nullopt;
    return q->re;
}
inline SymbolicReal operator/(const SymbolicReal& a, const SymbolicReal& b) {
    auto r = try_div(a, b);
    if (!r) throw SpanError("quotient leaves the declared constant span");
    return *r;
}

// --- scalar policies -------------------------------------------------------

struct SymRealPolicy {
    using S = SymbolicReal;
    BasisPtr basis;
    S zero() const { return S(basis); }
    S one() const { return S(basis, mpq_class(1)); }
    S from_int(long k) const { return S(basis, mpq_class(k)); }
    bool is_zero(const S& x) const { return x.is_zero(); }
    double score(const S& x) const { return x.is_zero() ? 0.0 : 1.0; }
};

struct SymComplexPolicy {
    using S = SymbolicComplex;
    BasisPtr basis;
    S zero() const { return S(basis); }
    S one() const { return S(basis, mpq_class(1)); }
    S from_int(long k) const { return S(basis, mpq_class(k)); }
    bool is_zero(const S& x) const { return x.is_zero(); }
    double score(const S& x) const { return x.is_zero() ? 0.0 : 1.0; }
};

struct NumRealPolicy {
    using S = BigFloat;
    mpfr_prec_t bits;
    BigFloat tol;
    S zero() const { return S(bits); }
    S one() const { return S(1L, bits); }
    S from_int(long k) const { return S(k, bits); }
    bool is_zero(const S& x) const { return abs(x) < tol; }
    double score(const S& x) const { return abs(x).to_double(); }
};

struct NumComplexPolicy {
    using S = BigComplex;
    mpfr_prec_t bits;
    BigFloat tol;
    S zero() const { return S(bits); }
    S one() const { return S(BigFloat(1L, bits), BigFloat(bits)); }
    S from_int(long k) const { return S(BigFloat(k, bits), BigFloat(bits)); }
    bool is_zero(const S& x) const { return abs(x) < tol; }
    double score(const S& x) const { return abs(x).to_double(); }
};

// --- basic operations ------------------------------------------------------

template <class P>
Mat<typename P::S> identity(size_t n, const P& p) {
    Mat<typename P::S> m(n, n, p.zero());
    for (size_t i = 0; i < n; ++i) m(i, i) = p.one();
    return m;
}

template <class T>
Mat<T> operator*(const Mat<T>& x, const Mat<T>& y) {
    Mat<T> r(x.rows, y.cols, x.a.front());
    for (auto& v : r.a) v = v - v;  // zero of the right shape
    for (size_t i = 0; i < x.rows; ++i)
        for (size_t k = 0; k < x.cols; ++k) {
            const T& xv = x(i, k);
            for (size_t j = 0; j < y.cols; ++j) r(i, j) = r(i, j) + xv * y(k, j);
        }
    return r;
}

template <class T>
Mat<T> operator+(const Mat<T>& x, const Mat<T>& y) {
    Mat<T> r = x;
    for (size_t i = 0; i < r.a.size(); ++i) r.a[i] = r.a[i] + y.a[i];
    return r;
}

template <class T>
Mat<T> operator-(const Mat<T>& x, const Mat<T>& y) {
    Mat<T> r = x;
    for (size_t i = 0; i < r.a.size(); ++i) r.a[i] = r.a[i] - y.a[i];
    return r;
}

template <class T>
std::vector<T> get_col(const Mat<T>& m, size_t j) {
    std::vector<T> v;
    v.reserve(m.rows);
    for (size_t i = 0; i < m.rows; ++i) v.push_back(m(i, j));
    return v;
}

// Builds an nrows x cols.size() matrix from column vectors.
template <class T>
Mat<T> from_columns(size_t nrows, const std::vector<std::vector<T>>& cols, const T& fill) {
    Mat<T> m(nrows, cols.size(), fill);
    for (size_t j = 0; j < cols.size(); ++j)
        for (size_t i = 0; i < nrows; ++i) m(i, j) = cols[j][i];
    return m;
}

template <class P>
Mat<typename P::S> mat_pow(const Mat<typename P::S>& a, size_t e, const P& p) {
    Mat<typename P::S> r = identity(a.rows, p);
    for (size_t i = 0; i < e; ++i) r = r * a;
    return r;
}

template <class T>
std::vector<T> mat_vec(const Mat<T>& m, const std::vector<T>& v) {
    std::vector<T> r;
    r.reserve(m.rows);
    for (size_t i = 0; i < m.rows; ++i) {
        T acc = m(i, 0) * v[0];
        for (size_t j = 1; j < m.cols; ++j) acc = acc + m(i, j) * v[j];
        r.push_back(acc);
    }
    return r;
}

// --- elimination -----------------------------------------------------------

struct RrefResult {
    size_t rank = 0;
    std::vector<size_t> pivot_cols;
};

// In-place reduced row echelon form.  Numeric policies pick the largest
// pivot; exact policies the first nonzero.
template <class P>
RrefResult rref(Mat<typename P::S>& m, const P& p) {
    RrefResult res;
    size_t row = 0;
    for (size_t col = 0; col < m.cols && row < m.rows; ++col) {
        size_t piv = m.rows;
        double best = 0;
        for (size_t i = row; i < m.rows; ++i) {
            double s = p.score(m(i, col));
            if (!p.is_zero(m(i, col)) && s > best) { best = s; piv = i; }
        }
        if (piv == m.rows) continue;
        if (piv != row)
            for (size_t j = 0; j < m.cols; ++j) std::swap(m(row, j), m(piv, j));
        typename P::S d = m(row, col);
        for (size_t j = col; j < m.cols; ++j) m(row, j) = m(row, j) / d;
        m(row, col) = p.one();
        for (size_t i = 0; i < m.rows; ++i) {
            if (i == row || p.is_zero(m(i, col))) continue;
            typename P::S f = m(i, col);
            for (size_t j = col; j < m.cols; ++j) m(i, j) = m(i, j) - f * m(row, j);
            m(i, col) = p.zero();
        }
        res.pivot_cols.push_back(col);
        ++row;
    }
    res.rank = row;
    return res;
}

template <class P>
size_t mat_rank(Mat<typename P::S> m, const P& p) {
    return rref(m, p).rank;
}

// Basis of the right kernel of m.
template <class P>
std::vector<std::vector<typename P::S>> kernel(Mat<typename P::S> m, const P& p) {
    auto rr = rref(m, p);
    std::vector<bool> is_pivot(m.cols, false);
    for (size_t c : rr.pivot_cols) is_pivot[c] = true;
    std::vector<std::vector<typename P::S>> out;
    for (size_t f = 0; f < m.cols; ++f) {
        if (is_pivot[f]) continue;
        std::vector<typename P::S> v(m.cols, p.zero());
        v[f] = p.one();
        for (size_t i = 0; i < rr.pivot_cols.size(); ++i)
            v[rr.pivot_cols[i]] = p.zero() - m(i, f);
        out.push_back(std::move(v));
    }
    return out;
}

// One solution of A x = b, or nullopt when inconsistent.
template <class P>
std::optional<std::vector<typename P::S>> solve(const Mat<typename P::S>& a,
                                                const std::vector<typename P::S>& b, const P& p) {
    Mat<typename P::S> aug(a.rows, a.cols + 1, p.zero());
    for (size_t i = 0; i < a.rows; ++i) {
        for (size_t j = 0; j < a.cols; ++j) aug(i, j) = a(i, j);
        aug(i, a.cols) = b[i];
    }
    auto rr = rref(aug, p);
    if (!rr.pivot_cols.empty() && rr.pivot_cols.back() == a.cols) return std::nullopt;
    std::vector<typename P::S> x(a.cols, p.zero());
    for (size_t i = 0; i < rr.pivot_cols.size(); ++i) x[rr.pivot_cols[i]] = aug(i, a.cols);
    return x;
}

template <class P>
std::optional<Mat<typename P::S>> inverse(const Mat<typename P::S>& a, const P& p) {
    const size_t n = a.rows;
    Mat<typename P::S> aug(n, 2 * n, p.zero());
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < n; ++j) aug(i, j) = a(i, j);
        aug(i, n + i) = p.one();
    }
    auto rr = rref(aug, p);
    if (rr.rank < n) return std::nullopt;
    for (size_t c : rr.pivot_cols)
        if (c >= n) return std::nullopt;  // singular left block: pivot escaped into the identity half
    Mat<typename P::S> inv(n, n, p.zero());
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) inv(i, j) = aug(i, n + j);
    return inv;
}

// --- characteristic polynomial / roots -------------------------------------

template <class P>
typename P::S trace(const Mat<typename P::S>& m, const P& p) {
    typename P::S t = p.zero();
    for (size_t i = 0; i < m.rows; ++i) t = t + m(i, i);
    return t;
}

// Monic characteristic polynomial by Faddeev-LeVerrier.
// Returned coefficients c[0..n], c[n] = 1, p(x) = sum c[k] x^k.
template <class P>
std::vector<typename P::S> char_poly(const Mat<typename P::S>& a, const P& p) {
    const size_t n = a.rows;
    std::vector<typename P::S> c(n + 1, p.zero());
    c[n] = p.one();
    Mat<typename P::S> m = identity(n, p);
    for (size_t k = 1; k <= n; ++k) {
        m = a * m;
        typename P::S ck = (p.zero() - trace(m, p)) / p.from_int(static_cast<long>(k));
        c[n - k] = ck;
        for (size_t i = 0; i < n; ++i) m(i, i) = m(i, i) + ck;
    }
    return c;
}

// Durand-Kerner iteration for all roots of a monic complex polynomial.
inline std::vector<BigComplex> poly_roots(std::vector<BigComplex> c, int digits) {
    const mpfr_prec_t bits = bits_for_digits(digits + 10);
    const size_t n = c.size() - 1;
    if (n == 0) return {};
    // normalize to monic
    for (auto& x : c) x = x / c[n];
    auto horner = [&](const BigComplex& z) {
        BigComplex acc = c[n];
        for (size_t k = n; k-- > 0;) acc = acc * z + c[k];
        return acc;
    };
    BigFloat radius(1L, bits);
    for (size_t k = 0; k < n; ++k) {
        BigFloat m = abs(c[k]) + BigFloat(1L, bits);
        if (m > radius) radius = m;
    }
    std::vector<BigComplex> z(n, BigComplex(bits));
    BigFloat two_pi = BigFloat(2L, bits) * BigFloat::pi(bits);
    for (size_t k = 0; k < n; ++k) {
        BigFloat ang = two_pi * BigFloat(static_cast<long>(k), bits) / BigFloat(static_cast<long>(n), bits) +
                       BigFloat(0.3573, bits);
        z[k] = BigComplex(radius * cos(ang), radius * sin(ang));
    }
    BigFloat stop = pow10i(-(digits + 2), bits);
    for (int iter = 0; iter < 2000; ++iter) {
        BigFloat max_step(bits);
        for (size_t k = 0; k < n; ++k) {
            BigComplex denom(BigFloat(1L, bits), BigFloat(bits));
            for (size_t j = 0; j < n; ++j)
                if (j != k) denom = denom * (z[k] - z[j]);
            BigComplex step = horner(z[k]) / denom;
            z[k] = z[k] - step;
            BigFloat s = abs(step);
            if (s > max_step) max_step = s;
        }
        if (max_step < stop) break;
    }
    return z;
}

// --- conversions / norms ---------------------------------------------------

inline Mat<BigComplex> to_numeric(const Mat<SymbolicComplex>& m, int digits) {
    Mat<BigComplex> r(m.rows, m.cols, BigComplex(bits_for_digits(digits)));
    for (size_t i = 0; i < m.a.size(); ++i) r.a[i] = m.a[i].eval(digits);
    return r;
}

inline std::vector<BigComplex> to_numeric(const std::vector<SymbolicComplex>& v, int digits) {
    std::vector<BigComplex> r;
    r.reserve(v.size());
    for (const auto& x : v) r.push_back(x.eval(digits));
    return r;
}

inline BigFloat max_norm(const Mat<BigComplex>& m) {
    BigFloat r(m.a.empty() ? mpfr_prec_t(64) : m.a.front().prec());
    for (const auto& x : m.a) {
        BigFloat v = abs(x);
        if (v > r) r = v;
    }
    return r;
}

inline bool sym_matrix(const Mat<SymbolicComplex>& m) { return !m.a.empty(); }

}  // namespace orbitreg

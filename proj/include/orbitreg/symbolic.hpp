#pragma once

#include <cctype>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "orbitreg/bigfloat.hpp"
#include "orbitreg/errors.hpp"

namespace orbitreg {

namespace detail {

// Exact solution of A x = b over the rationals (A given as rows).
// Returns one solution, or nullopt if the system is inconsistent.
inline std::optional<std::vector<mpq_class>> qsolve(std::vector<std::vector<mpq_class>> a,
                                                    std::vector<mpq_class> b) {
    const size_t m = a.size();
    const size_t n = m == 0 ? 0 : a[0].size();
    std::vector<size_t> pivot_col;
    size_t row = 0;
    for (size_t col = 0; col < n && row < m; ++col) {
        size_t piv = row;
        while (piv < m && a[piv][col] == 0) ++piv;
        if (piv == m) continue;
        std::swap(a[piv], a[row]);
        std::swap(b[piv], b[row]);
        mpq_class d = a[row][col];
        for (size_t j = col; j < n; ++j) a[row][j] /= d;
        b[row] /= d;
        for (size_t i = 0; i < m; ++i) {
            if (i == row || a[i][col] == 0) continue;
            mpq_class f = a[i][col];
            for (size_t j = col; j < n; ++j) a[i][j] -= f * a[row][j];
            b[i] -= f * b[row];
        }
        pivot_col.push_back(col);
        ++row;
    }
    for (size_t i = row; i < m; ++i)
        if (b[i] != 0) return std::nullopt;
    std::vector<mpq_class> x(n, mpq_class(0));
    for (size_t i = 0; i < pivot_col.size(); ++i) x[pivot_col[i]] = b[i];
    return x;
}

}  // namespace detail

struct ConstantSpec {
    std::string name;
    std::string value;  // decimal literal or builtin form: pi, sqrt(k), log(k), sin(k), cos(k)
    std::string note;
};

// Ordered basis of real constants, first entry always 1.  Q-linear
// independence of the entries is a recorded input assertion, not verified.
// An optional product table closes the span under selected products
// (e.g. sqrt2*sqrt2 = 2), which is what lets sqrt(2)-valued data stay exact.
class ConstantBasis {
  public:
    ConstantBasis() { consts_.push_back({"1", "1", "the rational unit"}); }

    size_t add(const std::string& name, const std::string& value, const std::string& note = "") {
        if (name == "i" || name.empty()) throw ValidationError("invalid constant name: '" + name + "'");
        if (index_of(name)) throw ValidationError("duplicate constant name: " + name);
        consts_.push_back({name, value, note});
        return consts_.size() - 1;
    }

    size_t size() const { return consts_.size(); }
    const ConstantSpec& spec(size_t i) const { return consts_[i]; }

    std::optional<size_t> index_of(const std::string& name) const {
        for (size_t i = 0; i < consts_.size(); ++i)
            if (consts_[i].name == name) return i;
        return std::nullopt;
    }

    void set_product(size_t i, size_t j, std::vector<mpq_class> coeffs) {
        if (i == 0 || j == 0) throw ValidationError("products with 1 are implicit");
        if (coeffs.size() != consts_.size()) throw ValidationError("product rule coefficient length mismatch");
        products_[key(i, j)] = std::move(coeffs);
    }

    // c_i * c_j as a coefficient vector over the basis, if known.
    std::optional<std::vector<mpq_class>> product(size_t i, size_t j) const {
        if (i == 0 || j == 0) {
            std::vector<mpq_class> r(consts_.size(), mpq_class(0));
            r[i == 0 ? j : i] = 1;
            return r;
        }
        auto it = products_.find(key(i, j));
        if (it == products_.end()) return std::nullopt;
        auto r = it->second;
        r.resize(consts_.size(), mpq_class(0));
        return r;
    }

    BigFloat value(size_t i, int digits) const {
        auto k = std::make_pair(i, digits);
        {
            std::lock_guard<std::mutex> lock(cache_mutex_);
            auto it = cache_.find(k);
            if (it != cache_.end()) return it->second;
        }
        BigFloat v = compute_value(consts_[i].value, digits);
        std::lock_guard<std::mutex> lock(cache_mutex_);
        cache_.emplace(k, v);
        return v;
    }

    // Index of a constant numerically equal to pi, if declared.
    std::optional<size_t> find_pi(int digits = 40) const {
        BigFloat p = BigFloat::pi(bits_for_digits(digits));
        BigFloat tol = pow10i(-(digits - 8), bits_for_digits(digits));
        for (size_t i = 1; i < consts_.size(); ++i)
            if (abs(value(i, digits) - p) < tol) return i;
        return std::nullopt;
    }

    std::string independence_note() const {
        std::string s = "declared Q-linearly independent: {";
        for (size_t i = 0; i < consts_.size(); ++i)
            s += (i ? ", " : "") + consts_[i].name;
        return s + "} (input assertion, not verified)";
    }

  private:
    static std::pair<size_t, size_t> key(size_t i, size_t j) {
        return {std::min(i, j), std::max(i, j)};
    }

    static BigFloat compute_value(const std::string& v, int digits) {
        mpfr_prec_t bits = bits_for_digits(digits + 10);
        auto arg_of = [&](const std::string& fn) -> BigFloat {
            std::string inner = v.substr(fn.size() + 1, v.size() - fn.size() - 2);
            mpq_class q(inner);
            q.canonicalize();
            return BigFloat(q, bits);
        };
        auto starts = [&](const std::string& fn) {
            return v.size() > fn.size() + 1 && v.compare(0, fn.size() + 1, fn + "(") == 0 && v.back() == ')';
        };
        if (v == "pi") return BigFloat::pi(bits);
        if (starts("sqrt")) return sqrt(arg_of("sqrt"));
        if (starts("log")) return log(arg_of("log"));
        if (starts("sin")) return sin(arg_of("sin"));
        if (starts("cos")) return cos(arg_of("cos"));
        if (starts("exp")) return exp(arg_of("exp"));
        if (v.find('/') != std::string::npos && v.find('.') == std::string::npos) {
            mpq_class q(v);
            q.canonicalize();
            return BigFloat(q, bits);
        }
        BigFloat r(v, bits);
        if (r.is_nan()) throw ValidationError("bad constant value literal: " + v);
        return r;
    }

    std::vector<ConstantSpec> consts_;
    std::map<std::pair<size_t, size_t>, std::vector<mpq_class>> products_;
    mutable std::mutex cache_mutex_;
    mutable std::map<std::pair<size_t, int>, BigFloat> cache_;
};

using BasisPtr = std::shared_ptr<const ConstantBasis>;

// A real number written as a rational combination over the constant basis.
class SymbolicReal {
  public:
    SymbolicReal() = default;
    explicit SymbolicReal(BasisPtr b) : basis_(std::move(b)), c_(basis_->size(), mpq_class(0)) {}
    SymbolicReal(BasisPtr b, const mpq_class& q) : SymbolicReal(std::move(b)) { c_[0] = q; }
    SymbolicReal(BasisPtr b, std::vector<mpq_class> coeffs) : basis_(std::move(b)), c_(std::move(coeffs)) {
        if (c_.size() != basis_->size()) throw ValidationError("coefficient length mismatch");
    }

    const BasisPtr& basis() const { return basis_; }
    const std::vector<mpq_class>& coeffs() const { return c_; }
    mpq_class& operator[](size_t i) { return c_[i]; }
    const mpq_class& operator[](size_t i) const { return c_[i]; }

    bool is_zero() const {
        for (const auto& q : c_)
            if (q != 0) return false;
        return true;
    }
    bool is_rational() const {
        for (size_t i = 1; i < c_.size(); ++i)
            if (c_[i] != 0) return false;
        return true;
    }
    const mpq_class& rational_value() const {
        if (!is_rational()) throw SpanError("value is not rational");
        return c_[0];
    }

    friend bool operator==(const SymbolicReal& a, const SymbolicReal& b) { return a.c_ == b.c_; }

    friend SymbolicReal operator+(const SymbolicReal& a, const SymbolicReal& b) {
        SymbolicReal r = a;
        for (size_t i = 0; i < r.c_.size(); ++i) r.c_[i] += b.c_[i];
        return r;
    }
    friend SymbolicReal operator-(const SymbolicReal& a, const SymbolicReal& b) {
        SymbolicReal r = a;
        for (size_t i = 0; i < r.c_.size(); ++i) r.c_[i] -= b.c_[i];
        return r;
    }
    SymbolicReal operator-() const {
        SymbolicReal r = *this;
        for (auto& q : r.c_) q = -q;
        return r;
    }
    friend SymbolicReal operator*(const mpq_class& s, const SymbolicReal& a) {
        SymbolicReal r = a;
        for (auto& q : r.c_) q *= s;
        return r;
    }

    std::optional<SymbolicReal> try_mul(const SymbolicReal& o) const {
        SymbolicReal r(basis_);
        for (size_t i = 0; i < c_.size(); ++i) {
            if (c_[i] == 0) continue;
            for (size_t j = 0; j < o.c_.size(); ++j) {
                if (o.c_[j] == 0) continue;
                auto p = basis_->product(i, j);
                if (!p) return std::nullopt;
                mpq_class f = c_[i] * o.c_[j];
                for (size_t k = 0; k < r.c_.size(); ++k) r.c_[k] += f * (*p)[k];
            }
        }
        return r;
    }

    friend SymbolicReal operator*(const SymbolicReal& a, const SymbolicReal& b) {
        auto r = a.try_mul(b);
        if (!r) throw SpanError("product leaves the declared constant span");
        return *r;
    }

    BigFloat eval(int digits) const {
        mpfr_prec_t bits = bits_for_digits(digits + 10);
        BigFloat acc(0.0, bits);
        for (size_t i = 0; i < c_.size(); ++i) {
            if (c_[i] == 0) continue;
            acc += BigFloat(c_[i], bits) * basis_->value(i, digits + 10);
        }
        return acc;
    }

  private:
    BasisPtr basis_;
    std::vector<mpq_class> c_;
};

// Complex value with symbolic real and imaginary parts.
struct SymbolicComplex {
    SymbolicReal re, im;

    SymbolicComplex() = default;
    explicit SymbolicComplex(BasisPtr b) : re(b), im(std::move(b)) {}
    SymbolicComplex(SymbolicReal r, SymbolicReal i) : re(std::move(r)), im(std::move(i)) {}
    SymbolicComplex(BasisPtr b, const mpq_class& q) : re(b, q), im(std::move(b)) {}

    const BasisPtr& basis() const { return re.basis(); }
    bool is_zero() const { return re.is_zero() && im.is_zero(); }
    bool is_rational() const { return im.is_zero() && re.is_rational(); }
    bool is_gaussian_rational() const { return re.is_rational() && im.is_rational(); }

    friend bool operator==(const SymbolicComplex& a, const SymbolicComplex& b) {
        return a.re == b.re && a.im == b.im;
    }

    friend SymbolicComplex operator+(const SymbolicComplex& a, const SymbolicComplex& b) {
        return {a.re + b.re, a.im + b.im};
    }
    friend SymbolicComplex operator-(const SymbolicComplex& a, const SymbolicComplex& b) {
        return {a.re - b.re, a.im - b.im};
    }
    SymbolicComplex operator-() const { return {-re, -im}; }

    std::optional<SymbolicComplex> try_mul(const SymbolicComplex& o) const {
        auto rr = re.try_mul(o.re);
        auto ii = im.try_mul(o.im);
        auto ri = re.try_mul(o.im);
        auto ir = im.try_mul(o.re);
        if (!rr || !ii || !ri || !ir) return std::nullopt;
        return SymbolicComplex{*rr - *ii, *ri + *ir};
    }
    friend SymbolicComplex operator*(const SymbolicComplex& a, const SymbolicComplex& b) {
        auto r = a.try_mul(b);
        if (!r) throw SpanError("product leaves the declared constant span");
        return *r;
    }

    // Solves x * den = num for x in the declared span.  Unknown coefficients
    // whose column would need an undeclared constant product are pinned to 0;
    // the system is then solved exactly and checked for consistency.
    static std::optional<SymbolicComplex> try_div(const SymbolicComplex& num, const SymbolicComplex& den) {
        if (den.is_zero()) throw ValidationError("division by zero");
        const auto& basis = num.basis();
        const size_t t = basis->size();
        if (den.is_rational()) {
            mpq_class inv = 1 / den.re.rational_value();
            return SymbolicComplex{inv * num.re, inv * num.im};
        }
        // Proportionality shortcut: num = q*den with q rational.
        {
            mpq_class ratio;
            bool found = false, ok = true;
            auto scan = [&](const SymbolicReal& n, const SymbolicReal& d) {
                for (size_t i = 0; i < t && ok; ++i) {
                    if (d[i] == 0) {
                        if (n[i] != 0) ok = false;
                    } else {
                        mpq_class r = n[i] / d[i];
                        if (!found) { ratio = r; found = true; }
                        else if (r != ratio) ok = false;
                    }
                }
            };
            scan(num.re, den.re);
            scan(num.im, den.im);
            if (ok && found)
                return SymbolicComplex{SymbolicReal(basis, ratio), SymbolicReal(basis)};
        }
        // General: unknowns xr_j, xi_j; equations over (component, constant).
        std::vector<std::optional<std::vector<mpq_class>>> cj_dre(t), cj_dim(t);
        auto mul_cj = [&](size_t j, const SymbolicReal& d) -> std::optional<std::vector<mpq_class>> {
            std::vector<mpq_class> out(t, mpq_class(0));
            for (size_t l = 0; l < t; ++l) {
                if (d[l] == 0) continue;
                auto p = basis->product(j, l);
                if (!p) return std::nullopt;
                for (size_t k = 0; k < t; ++k) out[k] += d[l] * (*p)[k];
            }
            return out;
        };
        std::vector<size_t> cols;  // usable unknown indices: 2 per j (re, im)
        for (size_t j = 0; j < t; ++j) {
            cj_dre[j] = mul_cj(j, den.re);
            cj_dim[j] = mul_cj(j, den.im);
            if (cj_dre[j] && cj_dim[j]) cols.push_back(j);
        }
        const size_t nc = cols.size();
        std::vector<std::vector<mpq_class>> A(2 * t, std::vector<mpq_class>(2 * nc, mpq_class(0)));
        std::vector<mpq_class> b(2 * t, mpq_class(0));
        for (size_t k = 0; k < t; ++k) {
            b[k] = num.re[k];
            b[t + k] = num.im[k];
            for (size_t a = 0; a < nc; ++a) {
                size_t j = cols[a];
                // re part: xr*dre - xi*dim ; im part: xr*dim + xi*dre
                A[k][a] = (*cj_dre[j])[k];
                A[k][nc + a] = -(*cj_dim[j])[k];
                A[t + k][a] = (*cj_dim[j])[k];
                A[t + k][nc + a] = (*cj_dre[j])[k];
            }
        }
        auto x = detail::qsolve(std::move(A), std::move(b));
        if (!x) return std::nullopt;
        SymbolicComplex q(basis);
        for (size_t a = 0; a < nc; ++a) {
            q.re[cols[a]] = (*x)[a];
            q.im[cols[a]] = (*x)[nc + a];
        }
        return q;
    }

    friend SymbolicComplex operator/(const SymbolicComplex& a, const SymbolicComplex& b) {
        auto r = try_div(a, b);
        if (!r) throw SpanError("quotient leaves the declared constant span");
        return *r;
    }

    BigComplex eval(int digits) const { return {re.eval(digits), im.eval(digits)}; }
};

// ---------------------------------------------------------------------------
// Scalar grammar: term (('+'|'-') term)*
//   term := rational ('*'? constname)? 'i'?   (also constname-first forms
//   like pi/2, and a bare i)
// ---------------------------------------------------------------------------

namespace detail {

struct Token {
    enum Kind { Num, Name, Plus, Minus, Star, Slash, Imag, End } kind;
    std::string text;
};

inline std::vector<Token> lex_scalar(const std::string& s) {
    std::vector<Token> out;
    size_t i = 0;
    while (i < s.size()) {
        char ch = s[i];
        if (std::isspace(static_cast<unsigned char>(ch))) { ++i; continue; }
        if (ch == '+') { out.push_back({Token::Plus, "+"}); ++i; }
        else if (ch == '-') { out.push_back({Token::Minus, "-"}); ++i; }
        else if (ch == '*') { out.push_back({Token::Star, "*"}); ++i; }
        else if (ch == '/') { out.push_back({Token::Slash, "/"}); ++i; }
        else if (std::isdigit(static_cast<unsigned char>(ch))) {
            size_t j = i;
            while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
            out.push_back({Token::Num, s.substr(i, j - i)});
            i = j;
        } else if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
            size_t j = i;
            while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
            std::string w = s.substr(i, j - i);
            if (w == "i") out.push_back({Token::Imag, w});
            else out.push_back({Token::Name, w});
            i = j;
        } else {
            throw ValidationError(std::string("unexpected character '") + ch + "' in scalar literal");
        }
    }
    out.push_back({Token::End, ""});
    return out;
}

}  // namespace detail

// Parses one scalar literal over the given basis.
inline SymbolicComplex parse_scalar(const std::string& text, const BasisPtr& basis) {
    auto toks = detail::lex_scalar(text);
    size_t pos = 0;
    SymbolicComplex acc(basis);
    bool first_term = true;
    while (toks[pos].kind != detail::Token::End) {
        mpq_class sign = 1;
        if (toks[pos].kind == detail::Token::Plus) { ++pos; }
        else if (toks[pos].kind == detail::Token::Minus) { sign = -1; ++pos; }
        else if (!first_term) throw ValidationError("expected '+' or '-' in scalar literal: " + text);
        first_term = false;

        mpq_class coeff = 1;
        bool saw_number = false;
        size_t const_idx = 0;
        bool saw_const = false, is_im = false, done = false;
        while (!done) {
            const auto& t = toks[pos];
            switch (t.kind) {
                case detail::Token::Num:
                    if (saw_number || saw_const || is_im)
                        throw ValidationError("malformed term in scalar literal: " + text);
                    coeff = mpq_class(t.text);
                    saw_number = true;
                    ++pos;
                    break;
                case detail::Token::Slash: {
                    ++pos;
                    if (toks[pos].kind != detail::Token::Num)
                        throw ValidationError("expected integer after '/' in: " + text);
                    mpq_class den(toks[pos].text);
                    if (den == 0) throw ValidationError("zero denominator in: " + text);
                    coeff /= den;
                    ++pos;
                    break;
                }
                case detail::Token::Star:
                    ++pos;
                    break;
                case detail::Token::Name: {
                    if (saw_const || is_im) throw ValidationError("two constants in one term: " + text);
                    auto idx = basis->index_of(t.text);
                    if (!idx) throw ValidationError("unknown constant name: " + t.text);
                    const_idx = *idx;
                    saw_const = true;
                    ++pos;
                    break;
                }
                case detail::Token::Imag:
                    if (is_im) throw ValidationError("duplicate 'i' in term: " + text);
                    is_im = true;
                    ++pos;
                    break;
                default:
                    done = true;
                    break;
            }
            if (t.kind == detail::Token::Plus || t.kind == detail::Token::Minus) done = true;
        }
        if (!saw_number && !saw_const && !is_im)
            throw ValidationError("empty term in scalar literal: " + text);
        coeff *= sign;
        if (is_im) acc.im[const_idx] += coeff;
        else acc.re[const_idx] += coeff;
    }
    return acc;
}

namespace detail {

inline std::string q_str(const mpq_class& q) {
    std::ostringstream os;
    os << q;
    return os.str();
}

// Emits terms of one real part in the input grammar; suffix is "" or " i".
inline void print_terms(std::string& out, const SymbolicReal& x, const ConstantBasis& basis,
                        const std::string& suffix) {
    for (size_t j = 0; j < x.coeffs().size(); ++j) {
        const mpq_class& q = x[j];
        if (q == 0) continue;
        mpq_class a = abs(q);
        std::string term;
        if (j == 0) term = q_str(a);
        else if (a == 1) term = basis.spec(j).name;
        else term = q_str(a) + "*" + basis.spec(j).name;
        term += suffix;
        if (out.empty()) out = (q < 0 ? "-" : "") + term;
        else out += (q < 0 ? " - " : " + ") + term;
    }
}

}  // namespace detail

inline std::string print_scalar(const SymbolicComplex& x) {
    std::string out;
    detail::print_terms(out, x.re, *x.basis(), "");
    detail::print_terms(out, x.im, *x.basis(), " i");
    if (out.empty()) out = "0";
    return out;
}

// evaluate() of the arith module: q >= 30 digits.
inline BigComplex evaluate(const SymbolicComplex& x, int digits) {
    if (digits < 30) throw ValidationError("evaluation precision must be at least 30 digits");
    return x.eval(digits);
}

// q_decompose() of the arith module.
inline SymbolicComplex q_decompose(const std::string& literal, const BasisPtr& basis) {
    return parse_scalar(literal, basis);
}

}  // namespace orbitreg

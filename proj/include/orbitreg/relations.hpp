#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "orbitreg/bigfloat.hpp"
#include "orbitreg/errors.hpp"
#include "orbitreg/intlat.hpp"
#include "orbitreg/symbolic.hpp"

namespace orbitreg {

struct RelationBasis {
    ZMat basis;      // HNF-reduced rows, each a relation s with sum s_i v_i = 0
    bool heuristic;  // true for the numeric (LLL) tier
};

// Z-basis of { s : sum s_i v_i = 0 } for symbolic reals over one shared
// basis.  Stacks the rational coefficient arrays and takes the integer
// kernel; complete and exact under the declared independence.
inline RelationBasis integer_relations_exact(const std::vector<SymbolicReal>& v) {
    if (v.empty()) return {{}, false};
    const size_t t = v[0].basis()->size();
    QMat rows(t, QVec(v.size(), mpq_class(0)));
    for (size_t i = 0; i < v.size(); ++i)
        for (size_t j = 0; j < t; ++j) rows[j][i] = v[i][j];
    return {intlat::hnf_rows(intlat::kernel_rational(rows)), false};
}

namespace detail {

// LLL-based search for short integer relations among real values.
// Returns every reduced basis row whose first block gives residual < tau.
inline ZMat lll_relation_candidates(const std::vector<BigFloat>& vals, int digits,
                                    const BigFloat& tau) {
    const size_t q = vals.size();
    const mpfr_prec_t bits = bits_for_digits(digits + 10);
    BigFloat mag = pow10i(digits - 15, bits);
    ZMat b(q, ZVec(q + 1, mpz_class(0)));
    for (size_t k = 0; k < q; ++k) {
        b[k][k] = 1;
        b[k][q] = (mag * vals[k]).round_to_int();
    }
    intlat::lll_reduce(b);
    ZMat found;
    for (const auto& row : b) {
        ZVec s(row.begin(), row.begin() + q);
        if (intlat::is_zero_vec(s)) continue;
        BigFloat resid(bits);
        for (size_t k = 0; k < q; ++k) resid += BigFloat(s[k], bits) * vals[k];
        if (abs(resid) < tau) found.push_back(std::move(s));
    }
    return found;
}

// Generalization to several simultaneous linear forms: finds integer vectors
// m of length p with |<m, f_k>| < tau for every form f_k.
inline ZMat lll_relation_candidates_forms(const std::vector<std::vector<BigFloat>>& forms, size_t p,
                                          int digits, const BigFloat& tau) {
    const mpfr_prec_t bits = bits_for_digits(digits + 10);
    BigFloat mag = pow10i(digits - 15, bits);
    ZMat b(p, ZVec(p + forms.size(), mpz_class(0)));
    for (size_t i = 0; i < p; ++i) {
        b[i][i] = 1;
        for (size_t k = 0; k < forms.size(); ++k) b[i][p + k] = (mag * forms[k][i]).round_to_int();
    }
    intlat::lll_reduce(b);
    ZMat found;
    for (const auto& row : b) {
        ZVec s(row.begin(), row.begin() + p);
        if (intlat::is_zero_vec(s)) continue;
        bool ok = true;
        for (const auto& f : forms) {
            BigFloat resid(bits);
            for (size_t i = 0; i < p; ++i) resid += BigFloat(s[i], bits) * f[i];
            if (!(abs(resid) < tau)) ok = false;
        }
        if (ok) found.push_back(std::move(s));
    }
    return found;
}

}  // namespace detail

// Integer vectors annihilating every given linear form within tau; flagged
// heuristic like all LLL-based detection.
inline RelationBasis integer_relations_forms(const std::vector<std::vector<BigFloat>>& forms, size_t p,
                                             int digits, const BigFloat& tau) {
    const mpfr_prec_t bits = bits_for_digits(digits);
    if (!(tau < pow10i(-5, bits)))
        throw ValidationError("relation threshold too permissive: tau must be < 1e-5");
    if (p == 0) return {{}, true};
    return {intlat::hnf_rows(detail::lll_relation_candidates_forms(forms, p, digits, tau)), true};
}

// Numeric-tier relation detection.  Results satisfy |sum s_i v_i| < tau at
// working precision and are flagged heuristic.
inline RelationBasis integer_relations_numeric(const std::vector<BigFloat>& vals, int digits,
                                               const BigFloat& tau) {
    const mpfr_prec_t bits = bits_for_digits(digits);
    if (!(tau < pow10i(-5, bits)))
        throw ValidationError("relation threshold too permissive: tau must be < 1e-5");
    if (vals.empty()) return {{}, true};
    return {intlat::hnf_rows(detail::lll_relation_candidates(vals, digits, tau)), true};
}

inline BigFloat default_tau(int digits) {
    return pow10i(-(digits - 10), bits_for_digits(digits));
}

// Attempts to express a computable real as a rational combination of the
// declared constants.  valfn must produce the value at any requested digit
// count; the candidate from LLL is re-verified at roughly twice the working
// precision before being accepted.
inline std::optional<std::vector<mpq_class>> recognize_value(
    const std::function<BigFloat(int)>& valfn, const ConstantBasis& basis, int digits) {
    const size_t t = basis.size();
    const int hi = 2 * digits + 10;
    const mpfr_prec_t bits = bits_for_digits(hi);
    std::vector<BigFloat> vals;
    vals.reserve(t + 1);
    vals.push_back(valfn(hi));
    for (size_t j = 0; j < t; ++j) vals.push_back(basis.value(j, hi));

    BigFloat tau = pow10i(-(digits - 10), bits);
    ZMat cands = detail::lll_relation_candidates(vals, digits, tau);
    mpz_class coeff_cap = 1;
    for (int i = 0; i < std::min(12, digits / 4); ++i) coeff_cap *= 10;
    for (const auto& s : cands) {
        if (s[0] == 0) continue;
        bool sane = true;
        for (const auto& x : s)
            if (abs(x) > coeff_cap) sane = false;
        if (!sane) continue;
        // verify at elevated precision
        BigFloat resid(bits), scale(1L, bits);
        for (size_t k = 0; k < vals.size(); ++k) {
            resid += BigFloat(s[k], bits) * vals[k];
            scale += abs(BigFloat(s[k], bits) * vals[k]);
        }
        if (!(abs(resid) < pow10i(-(2 * digits - 15), bits) * scale)) continue;
        std::vector<mpq_class> coeffs(t, mpq_class(0));
        for (size_t j = 0; j < t; ++j) {
            coeffs[j] = mpq_class(-s[j + 1]) / mpq_class(s[0]);
            coeffs[j].canonicalize();
        }
        return coeffs;
    }
    return std::nullopt;
}

// Same, for a value already held as a float; verification happens at the
// precision the value carries.
inline std::optional<std::vector<mpq_class>> recognize(const BigFloat& value,
                                                       const ConstantBasis& basis, int digits) {
    return recognize_value([&](int) { return value; }, basis, digits);
}

// Public entry matching the spec's integer_relations operation.
// Exact mode when symbolic inputs are provided, numeric otherwise.
inline RelationBasis integer_relations(const std::vector<SymbolicReal>& v) {
    return integer_relations_exact(v);
}
inline RelationBasis integer_relations(const std::vector<BigFloat>& v, int digits, const BigFloat& tau) {
    return integer_relations_numeric(v, digits, tau);
}

}  // namespace orbitreg

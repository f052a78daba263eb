#pragma once

#include <optional>
#include <string>
#include <vector>

#include "orbitreg/errors.hpp"
#include "orbitreg/matrix.hpp"
#include "orbitreg/normal_form.hpp"
#include "orbitreg/relations.hpp"
#include "orbitreg/symbolic.hpp"

namespace orbitreg {

template <class T>
Mat<T> scale_mat(const Mat<T>& m, const T& s) {
    Mat<T> r = m;
    for (auto& x : r.a) x = x * s;
    return r;
}

// Principal complex log with a deterministic branch: values within tol of the
// negative real axis take argument +pi.
inline BigComplex principal_log(const BigComplex& z, const BigFloat& tol) {
    if (abs(z.im) < tol && z.re.sign() < 0)
        return {log(abs(z)), BigFloat::pi(z.prec())};
    return log(z);
}

// ---------------------------------------------------------------------------
// Block logarithm: B = (log mu) I + sum (-1)^{j+1} N^j / j, N = T/mu - I.
// ---------------------------------------------------------------------------

template <class P>
Mat<typename P::S> block_log_T(const Mat<typename P::S>& t, const typename P::S& mu,
                               const typename P::S& logmu, const P& pol) {
    using S = typename P::S;
    if (pol.is_zero(mu)) throw ValidationError("singular block: diagonal value mu is zero");
    const size_t m = t.rows;
    Mat<S> n(m, m, pol.zero());
    for (size_t i = 0; i < m; ++i)
        for (size_t j = 0; j < m; ++j) n(i, j) = t(i, j) / mu;
    for (size_t i = 0; i < m; ++i) n(i, i) = n(i, i) - pol.one();
    Mat<S> b(m, m, pol.zero());
    for (size_t i = 0; i < m; ++i) b(i, i) = logmu;
    Mat<S> pw = identity(m, pol);
    for (size_t j = 1; j < m; ++j) {
        pw = pw * n;
        S coeff = pol.from_int(j % 2 ? 1 : -1) / pol.from_int(static_cast<long>(j));
        b = b + scale_mat(pw, coeff);
    }
    return b;
}

// Finite exponential of a single-eigenvalue triangular block (for roundtrip
// checks): exp(B) = e^lambda sum N^j / j!, N = B - lambda I.
template <class P>
Mat<typename P::S> block_exp_numeric(const Mat<BigComplex>& b, const P& pol) {
    const size_t m = b.rows;
    BigComplex lambda = b(0, 0);
    Mat<BigComplex> n = b;
    for (size_t i = 0; i < m; ++i) n(i, i) = n(i, i) - lambda;
    Mat<BigComplex> r = identity(m, pol);
    Mat<BigComplex> pw = identity(m, pol);
    BigComplex fact = pol.one();
    for (size_t j = 1; j < m; ++j) {
        pw = pw * n;
        fact = fact * pol.from_int(static_cast<long>(j));
        r = r + scale_mat(pw, pol.one() / fact);
    }
    BigComplex el = exp(lambda);
    return scale_mat(r, el);
}

// ---------------------------------------------------------------------------
// Exact logarithm of a diagonal value over the declared constants.
// ---------------------------------------------------------------------------

inline SymbolicComplex exact_log_mu(const SymbolicComplex& mu, int digits) {
    const BasisPtr& basis = mu.basis();
    if (mu.is_zero()) throw ValidationError("singular block: diagonal value mu is zero");
    SymbolicComplex out(basis);
    if (mu.is_rational() && mu.re.rational_value() == 1) return out;

    auto absfn = [&](int d) { return log(abs(mu.eval(d))); };
    auto re = recognize_value(absfn, *basis, digits);
    if (!re) throw TierError("log|mu| is not in the declared constant span");

    std::vector<mpq_class> im(basis->size(), mpq_class(0));
    if (mu.im.is_zero()) {
        int sgn = mu.re.eval(30).sign();
        if (sgn == 0) throw TierError("sign of a real diagonal value could not be determined");
        if (sgn < 0) {
            auto pi_idx = basis->find_pi();
            if (!pi_idx) throw TierError("arg(mu) = pi but pi is not among the declared constants");
            im[*pi_idx] = 1;
        }
    } else {
        auto argfn = [&](int d) {
            BigComplex v = mu.eval(d);
            return atan2(v.im, v.re);
        };
        auto rec = recognize_value(argfn, *basis, digits);
        if (!rec) throw TierError("arg(mu) is not in the declared constant span");
        im = *rec;
    }
    return {SymbolicReal(basis, *re), SymbolicReal(basis, im)};
}

// 2*pi*x as a symbolic real; needs pi declared (and, for irrational x, a
// product rule covering pi * x).
inline SymbolicReal times_two_pi(const SymbolicReal& x) {
    const BasisPtr& b = x.basis();
    auto pi_idx = b->find_pi();
    if (!pi_idx) throw TierError("pi is not among the declared constants");
    if (x.is_rational()) {
        SymbolicReal r(b);
        r[*pi_idx] = 2 * x.rational_value();
        return r;
    }
    SymbolicReal pi2(b);
    pi2[*pi_idx] = 2;
    auto p = pi2.try_mul(x);
    if (!p) throw TierError("2*pi times a coordinate leaves the declared span");
    return *p;
}

// ---------------------------------------------------------------------------
// Group logarithms
// ---------------------------------------------------------------------------

template <class S>
struct LieGeneratorsT {
    std::vector<Mat<S>> B;                        // block-diagonal logs, normal coordinates
    std::vector<std::vector<S>> logmu;            // [gen][block]
    std::vector<std::vector<long>> branch_shift;  // [gen][block], multiples of 2*pi*i added
};

namespace detail {

inline std::vector<size_t> block_offsets(const std::vector<size_t>& eta) {
    std::vector<size_t> off{0};
    for (size_t s : eta) off.push_back(off.back() + s);
    return off;
}

template <class S>
Mat<S> extract_block(const Mat<S>& m, size_t off, size_t sz, const S& fill) {
    Mat<S> b(sz, sz, fill);
    for (size_t i = 0; i < sz; ++i)
        for (size_t j = 0; j < sz; ++j) b(i, j) = m(off + i, off + j);
    return b;
}

}  // namespace detail

inline LieGeneratorsT<SymbolicComplex> group_log_exact(
    const NormalFormT<SymbolicComplex>& nf, int digits,
    const std::vector<std::vector<long>>* shifts = nullptr) {
    const BasisPtr& basis = nf.P.a.front().basis();
    SymComplexPolicy pol{basis};
    auto off = detail::block_offsets(nf.eta);
    LieGeneratorsT<SymbolicComplex> lg;
    try {
        for (size_t k = 0; k < nf.transformed.size(); ++k) {
            Mat<SymbolicComplex> b(nf.n, nf.n, pol.zero());
            std::vector<SymbolicComplex> logs;
            std::vector<long> br;
            for (size_t j = 0; j < nf.eta.size(); ++j) {
                SymbolicComplex logmu = exact_log_mu(nf.mu[k][j], digits);
                long shift = shifts ? (*shifts)[k][j] : 0;
                if (shift != 0) {
                    auto pi_idx = basis->find_pi();
                    if (!pi_idx) throw TierError("branch shift requires pi among the declared constants");
                    logmu.im[*pi_idx] += 2 * shift;
                }
                auto t = detail::extract_block(nf.transformed[k], off[j], nf.eta[j], pol.zero());
                auto bl = block_log_T(t, nf.mu[k][j], logmu, pol);
                for (size_t i = 0; i < nf.eta[j]; ++i)
                    for (size_t c = 0; c < nf.eta[j]; ++c) b(off[j] + i, off[j] + c) = bl(i, c);
                logs.push_back(std::move(logmu));
                br.push_back(shift);
            }
            lg.B.push_back(std::move(b));
            lg.logmu.push_back(std::move(logs));
            lg.branch_shift.push_back(std::move(br));
        }
    } catch (const SpanError& e) {
        throw TierError(std::string("group logarithm leaves the declared span: ") + e.what());
    }
    return lg;
}

inline LieGeneratorsT<BigComplex> group_log_numeric(
    const NormalFormT<BigComplex>& nf, const BackendConfig& cfg,
    const std::vector<std::vector<long>>* shifts = nullptr) {
    const mpfr_prec_t bits = cfg.work_bits();
    NumComplexPolicy pol{bits, cfg.work_tol()};
    auto off = detail::block_offsets(nf.eta);
    BigFloat two_pi = BigFloat(2L, bits) * BigFloat::pi(bits);
    LieGeneratorsT<BigComplex> lg;
    for (size_t k = 0; k < nf.transformed.size(); ++k) {
        Mat<BigComplex> b(nf.n, nf.n, pol.zero());
        std::vector<BigComplex> logs;
        std::vector<long> br;
        for (size_t j = 0; j < nf.eta.size(); ++j) {
            BigComplex logmu = principal_log(nf.mu[k][j], cfg.work_tol());
            long shift = shifts ? (*shifts)[k][j] : 0;
            if (shift != 0) logmu.im += two_pi * BigFloat(shift, bits);
            auto t = detail::extract_block(nf.transformed[k], off[j], nf.eta[j], pol.zero());
            auto bl = block_log_T(t, nf.mu[k][j], logmu, pol);
            for (size_t i = 0; i < nf.eta[j]; ++i)
                for (size_t c = 0; c < nf.eta[j]; ++c) b(off[j] + i, off[j] + c) = bl(i, c);
            logs.push_back(std::move(logmu));
            br.push_back(shift);
        }
        lg.B.push_back(std::move(b));
        lg.logmu.push_back(std::move(logs));
        lg.branch_shift.push_back(std::move(br));
    }
    return lg;
}

// ---------------------------------------------------------------------------
// Generators of the additive group g_u (theta coordinates)
// ---------------------------------------------------------------------------

inline std::vector<SymbolicReal> theta_embed(const std::vector<SymbolicComplex>& v) {
    std::vector<SymbolicReal> out;
    out.reserve(2 * v.size());
    for (const auto& z : v) out.push_back(z.re);
    for (const auto& z : v) out.push_back(z.im);
    return out;
}

inline std::vector<BigFloat> theta_embed(const std::vector<BigComplex>& v) {
    std::vector<BigFloat> out;
    out.reserve(2 * v.size());
    for (const auto& z : v) out.push_back(z.re);
    for (const auto& z : v) out.push_back(z.im);
    return out;
}

// Verifies u has a nonzero leading coordinate in every block (u in U).
template <class P>
void check_in_U(const std::vector<typename P::S>& u, const std::vector<size_t>& eta, const P& pol) {
    auto off = detail::block_offsets(eta);
    for (size_t j = 0; j < eta.size(); ++j)
        if (pol.is_zero(u[off[j]]))
            throw ValidationError("vector is outside the regular region U: leading coordinate of block " +
                                  std::to_string(j + 1) + " vanishes");
}

struct AdditiveGroupGens {
    size_t d = 0;
    bool exact = false;
    std::optional<std::vector<std::vector<SymbolicReal>>> sym;
    std::vector<std::vector<BigFloat>> num;  // evaluated at the working precision
    std::vector<std::string> provenance;
};

// The block-k component of u padded with zeros; times 2*pi*i this is the
// lattice direction contributed by block k.
template <class S>
std::vector<S> block_component(const std::vector<S>& u, const std::vector<size_t>& eta, size_t k,
                               const S& zero) {
    auto off = detail::block_offsets(eta);
    std::vector<S> v(u.size(), zero);
    for (size_t i = off[k]; i < off[k + 1]; ++i) v[i] = u[i];
    return v;
}

inline std::vector<std::vector<SymbolicReal>> g_u_generators_exact(
    const LieGeneratorsT<SymbolicComplex>& lg, const NormalFormT<SymbolicComplex>& nf,
    const std::vector<SymbolicComplex>& u, std::vector<std::string>* provenance = nullptr) {
    const BasisPtr& basis = u.front().basis();
    SymComplexPolicy pol{basis};
    check_in_U(u, nf.eta, pol);
    std::vector<std::vector<SymbolicReal>> out;
    try {
        for (size_t k = 0; k < lg.B.size(); ++k) {
            out.push_back(theta_embed(mat_vec(lg.B[k], u)));
            if (provenance) provenance->push_back("B_" + std::to_string(k + 1) + " u");
        }
        for (size_t j = 0; j < nf.eta.size(); ++j) {
            auto blk = block_component(u, nf.eta, j, pol.zero());
            // 2*pi*i * (a + b i) = -2*pi*b + 2*pi*a i
            std::vector<SymbolicComplex> w;
            w.reserve(blk.size());
            for (const auto& z : blk)
                w.push_back({-times_two_pi(z.im), times_two_pi(z.re)});
            out.push_back(theta_embed(w));
            if (provenance) provenance->push_back("2 pi i pi_" + std::to_string(j + 1) + "(u)");
        }
    } catch (const SpanError& e) {
        throw TierError(std::string("g_u generators leave the declared span: ") + e.what());
    }
    return out;
}

inline std::vector<std::vector<BigFloat>> g_u_generators_numeric(
    const LieGeneratorsT<BigComplex>& lg, const NormalFormT<BigComplex>& nf,
    const std::vector<BigComplex>& u, const BackendConfig& cfg,
    std::vector<std::string>* provenance = nullptr) {
    const mpfr_prec_t bits = cfg.work_bits();
    NumComplexPolicy pol{bits, cfg.work_tol()};
    check_in_U(u, nf.eta, pol);
    BigFloat two_pi = BigFloat(2L, bits) * BigFloat::pi(bits);
    std::vector<std::vector<BigFloat>> out;
    for (size_t k = 0; k < lg.B.size(); ++k) {
        out.push_back(theta_embed(mat_vec(lg.B[k], u)));
        if (provenance) provenance->push_back("B_" + std::to_string(k + 1) + " u");
    }
    for (size_t j = 0; j < nf.eta.size(); ++j) {
        auto blk = block_component(u, nf.eta, j, pol.zero());
        std::vector<BigComplex> w;
        w.reserve(blk.size());
        for (const auto& z : blk) w.push_back({-(two_pi * z.im), two_pi * z.re});
        out.push_back(theta_embed(w));
        if (provenance) provenance->push_back("2 pi i pi_" + std::to_string(j + 1) + "(u)");
    }
    return out;
}

}  // namespace orbitreg

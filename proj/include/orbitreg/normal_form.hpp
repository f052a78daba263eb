#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "orbitreg/errors.hpp"
#include "orbitreg/matrix.hpp"
#include "orbitreg/relations.hpp"
#include "orbitreg/symbolic.hpp"

namespace orbitreg {

// ---------------------------------------------------------------------------
// Group specification
// ---------------------------------------------------------------------------

struct BackendConfig {
    int digits = 60;
    std::optional<BigFloat> tau_override;
    bool strict_exact = false;
    int sampler_L = 20;
    std::optional<double> sampler_R;

    BigFloat tau() const { return tau_override ? *tau_override : default_tau(digits); }
    // Residual bound for "should be exactly zero" checks at reporting precision.
    BigFloat loose_tol() const { return pow10i(-(digits - 10), bits_for_digits(digits)); }
    // Zero threshold inside numeric linear algebra, which runs with headroom.
    BigFloat work_tol() const { return pow10i(-digits, work_bits()); }
    mpfr_prec_t work_bits() const { return bits_for_digits(2 * digits); }
};

struct GroupSpec {
    size_t n = 0;
    bool real_field = false;
    BasisPtr basis;
    std::vector<Mat<SymbolicComplex>> gens;
    BackendConfig cfg;

    std::vector<Mat<BigComplex>> numeric_gens(int digits) const {
        std::vector<Mat<BigComplex>> out;
        out.reserve(gens.size());
        for (const auto& g : gens) out.push_back(to_numeric(g, digits));
        return out;
    }
};

inline void validate_spec(const GroupSpec& spec) {
    if (spec.gens.empty()) throw ValidationError("at least one generator is required");
    if (spec.n == 0) throw ValidationError("dimension must be positive");
    for (size_t k = 0; k < spec.gens.size(); ++k) {
        const auto& g = spec.gens[k];
        if (g.rows != spec.n || g.cols != spec.n)
            throw ValidationError("generator " + std::to_string(k + 1) + " is not " +
                                  std::to_string(spec.n) + "x" + std::to_string(spec.n));
        if (spec.real_field)
            for (const auto& e : g.a)
                if (!e.im.is_zero())
                    throw ValidationError("field marker is R but generator " + std::to_string(k + 1) +
                                          " has a nonzero imaginary entry");
    }
    const int q = spec.cfg.digits;
    const mpfr_prec_t bits = spec.cfg.work_bits();
    NumComplexPolicy np{bits, spec.cfg.work_tol()};
    auto num = spec.numeric_gens(2 * q);

    BigFloat scale(1L, bits);
    for (const auto& g : num) {
        BigFloat m = max_norm(g);
        if (m > scale) scale = m;
    }
    BigFloat comm_tol = spec.cfg.loose_tol() * scale * scale;

    for (size_t j = 0; j < spec.gens.size(); ++j)
        for (size_t k = j + 1; k < spec.gens.size(); ++k) {
            bool ok;
            try {
                Mat<SymbolicComplex> c = spec.gens[j] * spec.gens[k] - spec.gens[k] * spec.gens[j];
                ok = true;
                for (const auto& e : c.a)
                    if (!e.is_zero()) ok = false;
            } catch (const SpanError&) {
                ok = max_norm(num[j] * num[k] - num[k] * num[j]) < comm_tol;
            }
            if (!ok)
                throw ValidationError("generators " + std::to_string(j + 1) + " and " +
                                      std::to_string(k + 1) + " do not commute");
        }
    for (size_t k = 0; k < num.size(); ++k)
        if (mat_rank(num[k], np) < spec.n)
            throw ValidationError("generator " + std::to_string(k + 1) + " is singular");
}

// ---------------------------------------------------------------------------
// Eigenvalues
// ---------------------------------------------------------------------------

struct EigCluster {
    BigComplex mu;
    size_t mult;
};

// Clusters the Durand-Kerner roots with relative tolerance 10^(-digits/2).
// Clusters closer than 10x the tolerance abort: guessing would corrupt the
// block structure downstream.
inline std::vector<EigCluster> numeric_eigenvalues(const Mat<BigComplex>& a, int digits) {
    const int hi = 3 * digits;
    const mpfr_prec_t bits = bits_for_digits(hi);
    if (a.rows == 1) return {{a(0, 0), 1}};
    NumComplexPolicy pol{bits, pow10i(-2 * digits, bits)};
    auto roots = poly_roots(char_poly(a, pol), hi);

    BigFloat scale(1L, bits);
    for (const auto& r : roots) {
        BigFloat m = abs(r);
        if (m > scale) scale = m;
    }
    BigFloat tol = pow10i(-(digits / 2), bits) * scale;

    std::vector<EigCluster> cl;
    for (const auto& z : roots) {
        bool placed = false;
        for (auto& c : cl) {
            if (abs(z - c.mu) < tol) {
                BigComplex cnt(BigFloat(static_cast<long>(c.mult), bits), BigFloat(bits));
                BigComplex cnt1(BigFloat(static_cast<long>(c.mult + 1), bits), BigFloat(bits));
                c.mu = (c.mu * cnt + z) / cnt1;
                ++c.mult;
                placed = true;
                break;
            }
        }
        if (!placed) cl.push_back({z, 1});
    }
    for (size_t i = 0; i < cl.size(); ++i)
        for (size_t j = i + 1; j < cl.size(); ++j)
            if (abs(cl[i].mu - cl[j].mu) < tol * BigFloat(10L, bits))
                throw ClusterError("eigenvalue clusters are ambiguously separated; rerun at higher precision");
    return cl;
}

// Exact eigenvalues: numeric clustering plus recognition of each cluster mean
// over the declared constants, verified against the symbolic characteristic
// polynomial.  Throws TierError when the exact tier cannot decide.
inline std::vector<std::pair<SymbolicComplex, size_t>> exact_eigenvalues(const Mat<SymbolicComplex>& a,
                                                                         int digits) {
    const BasisPtr& basis = a.a.front().basis();
    if (a.rows == 1) return {{a(0, 0), 1}};

    std::vector<SymbolicComplex> cp;
    try {
        cp = char_poly(a, SymComplexPolicy{basis});
    } catch (const SpanError& e) {
        throw TierError(std::string("characteristic polynomial leaves the declared span: ") + e.what());
    }

    auto clusters = numeric_eigenvalues(to_numeric(a, 3 * digits), digits);
    std::vector<std::pair<SymbolicComplex, size_t>> out;
    for (const auto& c : clusters) {
        // A root of multiplicity m computed from 3q-digit coefficients is
        // accurate to roughly 3q/m digits; recognition must verify within
        // that budget.
        int eff = std::min(digits, static_cast<int>((3 * digits / static_cast<int>(c.mult) - 10) / 2));
        if (eff < 17) throw TierError("eigenvalue multiplicity too high for exact recognition");
        auto re = recognize(c.mu.re, *basis, eff);
        auto im = recognize(c.mu.im, *basis, eff);
        if (!re || !im) throw TierError("eigenvalue is not recognizable over the declared constants");
        SymbolicComplex mu{SymbolicReal(basis, *re), SymbolicReal(basis, *im)};
        try {
            SymbolicComplex acc = cp.back();
            for (size_t k = cp.size() - 1; k-- > 0;) acc = acc * mu + cp[k];
            if (!acc.is_zero()) throw TierError("recognized eigenvalue fails the characteristic polynomial");
        } catch (const SpanError& e) {
            throw TierError(std::string("eigenvalue verification leaves the declared span: ") + e.what());
        }
        out.emplace_back(std::move(mu), c.mult);
    }
    return out;
}

inline std::pair<double, double> eig_key(const BigComplex& z) {
    return {z.re.to_double(), z.im.to_double()};
}
inline std::pair<double, double> eig_key(const SymbolicComplex& z) {
    BigComplex v = z.eval(30);
    return {v.re.to_double(), v.im.to_double()};
}

// ---------------------------------------------------------------------------
// Normal form construction (tier-generic)
// ---------------------------------------------------------------------------

template <class S>
struct NormalFormT {
    size_t n = 0;
    Mat<S> P, Pinv;
    std::vector<size_t> eta;
    std::vector<Mat<S>> transformed;  // one per generator, block structure eta
    std::vector<std::vector<S>> mu;   // mu[gen][block]
};

template <class S>
struct CommonSubspaceT {
    Mat<S> basis;        // n x m, columns span the subspace
    std::vector<S> mu;   // single eigenvalue per generator on this subspace
};

template <class P>
using EigFn = std::function<std::vector<std::pair<typename P::S, size_t>>(const Mat<typename P::S>&)>;

// Matrix of the generator action in the coordinates of an invariant subspace.
template <class P>
Mat<typename P::S> restriction(const Mat<typename P::S>& v, const Mat<typename P::S>& a, const P& pol) {
    Mat<typename P::S> av = a * v;
    Mat<typename P::S> r(v.cols, v.cols, pol.zero());
    for (size_t j = 0; j < v.cols; ++j) {
        auto x = solve(v, get_col(av, j), pol);
        if (!x) throw ValidationError("subspace is not invariant under the group");
        for (size_t i = 0; i < v.cols; ++i) r(i, j) = (*x)[i];
    }
    return r;
}

template <class P>
std::vector<CommonSubspaceT<typename P::S>> common_generalized_eigenspaces_T(
    const std::vector<Mat<typename P::S>>& gens, const P& pol, const EigFn<P>& eig) {
    using S = typename P::S;
    const size_t n = gens[0].rows;
    std::vector<CommonSubspaceT<S>> cur{{identity(n, pol), {}}};
    for (const auto& a : gens) {
        std::vector<CommonSubspaceT<S>> next;
        for (auto& sub : cur) {
            Mat<S> r = restriction(sub.basis, a, pol);
            auto evs = eig(r);
            size_t total = 0;
            for (auto& [mu, mult] : evs) {
                Mat<S> shifted = r;
                for (size_t i = 0; i < r.rows; ++i) shifted(i, i) = shifted(i, i) - mu;
                auto k = kernel(mat_pow(shifted, mult, pol), pol);
                if (k.size() != mult)
                    throw ClusterError("generalized eigenspace dimension mismatch; rerun at higher precision");
                CommonSubspaceT<S> child{sub.basis * from_columns(r.rows, k, pol.zero()), sub.mu};
                child.mu.push_back(mu);
                next.push_back(std::move(child));
                total += mult;
            }
            if (total != r.rows)
                throw ClusterError("eigenvalue multiplicities do not sum to the subspace dimension");
        }
        cur = std::move(next);
    }
    return cur;
}

// Basis (in subspace coordinates) triangularizing the commuting restrictions:
// an invariant flag is built from iterated common eigenvectors, and the flag
// is emitted in reverse so each matrix comes out lower triangular.
template <class P>
Mat<typename P::S> block_flag_basis(const std::vector<Mat<typename P::S>>& rs, const P& pol,
                                    const EigFn<P>& eig) {
    using S = typename P::S;
    const size_t m = rs[0].rows;
    std::vector<std::vector<S>> flag;
    while (flag.size() < m) {
        const size_t f = flag.size();
        // complement coordinates: standard basis vectors outside span(flag)
        Mat<S> fr(f, m, pol.zero());
        for (size_t i = 0; i < f; ++i)
            for (size_t j = 0; j < m; ++j) fr(i, j) = flag[i][j];
        auto rr = rref(fr, pol);
        std::vector<bool> is_pivot(m, false);
        for (size_t c : rr.pivot_cols) is_pivot[c] = true;
        std::vector<size_t> compl_idx;
        for (size_t j = 0; j < m; ++j)
            if (!is_pivot[j]) compl_idx.push_back(j);
        const size_t w = compl_idx.size();

        // change of basis [flag | complement]; quotient = last w coordinates
        Mat<S> b(m, m, pol.zero());
        for (size_t j = 0; j < f; ++j)
            for (size_t i = 0; i < m; ++i) b(i, j) = flag[j][i];
        for (size_t j = 0; j < w; ++j) b(compl_idx[j], f + j) = pol.one();
        auto binv = inverse(b, pol);
        if (!binv) throw ClusterError("flag basis degenerated; rerun at higher precision");

        std::vector<Mat<S>> induced;
        for (const auto& r : rs) {
            Mat<S> q(w, w, pol.zero());
            for (size_t j = 0; j < w; ++j) {
                auto coords = mat_vec(*binv, get_col(r, compl_idx[j]));
                for (size_t i = 0; i < w; ++i) q(i, j) = coords[f + i];
            }
            induced.push_back(std::move(q));
        }

        // common eigenvector of the commuting induced maps
        Mat<S> wb = identity(w, pol);
        for (const auto& q : induced) {
            if (wb.cols == 1) break;
            Mat<S> rq = restriction(wb, q, pol);
            auto evs = eig(rq);
            std::stable_sort(evs.begin(), evs.end(), [](const auto& x, const auto& y) {
                return eig_key(x.first) < eig_key(y.first);
            });
            Mat<S> shifted = rq;
            for (size_t i = 0; i < rq.rows; ++i) shifted(i, i) = shifted(i, i) - evs[0].first;
            auto k = kernel(shifted, pol);
            if (k.empty()) throw ClusterError("empty eigenspace; rerun at higher precision");
            wb = wb * from_columns(rq.rows, k, pol.zero());
        }
        std::vector<S> lift(m, pol.zero());
        for (size_t j = 0; j < w; ++j) lift[compl_idx[j]] = lift[compl_idx[j]] + wb(j, 0);
        flag.push_back(std::move(lift));
    }
    Mat<S> c(m, m, pol.zero());
    for (size_t j = 0; j < m; ++j)
        for (size_t i = 0; i < m; ++i) c(i, j) = flag[m - 1 - j][i];
    return c;
}

// True iff m is block diagonal w.r.t. eta with each block lower triangular
// with a constant diagonal.
template <class P>
bool verify_K_structure(const Mat<typename P::S>& m, const std::vector<size_t>& eta, const P& pol,
                        bool require_invertible = false) {
    size_t n = 0;
    for (size_t s : eta) n += s;
    if (m.rows != n || m.cols != n) return false;
    size_t off = 0;
    for (size_t s : eta) {
        for (size_t i = off; i < off + s; ++i)
            for (size_t j = 0; j < n; ++j) {
                bool inside = j >= off && j < off + s;
                if (!inside && !pol.is_zero(m(i, j))) return false;
                if (inside && j > i && !pol.is_zero(m(i, j))) return false;
            }
        for (size_t i = 1; i < s; ++i)
            if (!pol.is_zero(m(off + i, off + i) - m(off, off))) return false;
        if (require_invertible && pol.is_zero(m(off, off))) return false;
        off += s;
    }
    return true;
}

template <class P>
NormalFormT<typename P::S> build_normal_form_T(const std::vector<Mat<typename P::S>>& gens, const P& pol,
                                               const EigFn<P>& eig) {
    using S = typename P::S;
    const size_t n = gens[0].rows;
    auto subs = common_generalized_eigenspaces_T(gens, pol, eig);

    struct Blk {
        Mat<S> cols;
        std::vector<S> mu;
        std::vector<std::pair<double, double>> keys;
    };
    std::vector<Blk> blocks;
    for (auto& sub : subs) {
        std::vector<Mat<S>> rs;
        for (const auto& a : gens) rs.push_back(restriction(sub.basis, a, pol));
        Mat<S> flag = block_flag_basis(rs, pol, eig);
        Blk b{sub.basis * flag, sub.mu, {}};
        for (const auto& v : sub.mu) b.keys.push_back(eig_key(v));
        blocks.push_back(std::move(b));
    }
    std::stable_sort(blocks.begin(), blocks.end(), [](const Blk& x, const Blk& y) {
        if (x.cols.cols != y.cols.cols) return x.cols.cols > y.cols.cols;
        return x.keys < y.keys;
    });

    NormalFormT<S> nf;
    nf.n = n;
    nf.P = Mat<S>(n, n, pol.zero());
    size_t off = 0;
    for (const auto& b : blocks) {
        nf.eta.push_back(b.cols.cols);
        for (size_t j = 0; j < b.cols.cols; ++j)
            for (size_t i = 0; i < n; ++i) nf.P(i, off + j) = b.cols(i, j);
        off += b.cols.cols;
    }
    auto pinv = inverse(nf.P, pol);
    if (!pinv) throw ClusterError("normal form basis is singular; rerun at higher precision");
    nf.Pinv = *pinv;
    for (size_t k = 0; k < gens.size(); ++k) {
        nf.transformed.push_back(nf.Pinv * gens[k] * nf.P);
        std::vector<S> row;
        for (const auto& b : blocks) row.push_back(b.mu[k]);
        nf.mu.push_back(std::move(row));
        if (!verify_K_structure(nf.transformed.back(), nf.eta, pol, true))
            throw ClusterError("normal form verification failed; rerun at higher precision");
    }
    return nf;
}

// ---------------------------------------------------------------------------
// Public tiered entry points
// ---------------------------------------------------------------------------

inline EigFn<SymComplexPolicy> exact_eig_fn(int digits) {
    return [digits](const Mat<SymbolicComplex>& a) { return exact_eigenvalues(a, digits); };
}
inline EigFn<NumComplexPolicy> numeric_eig_fn(int digits) {
    return [digits](const Mat<BigComplex>& a) {
        std::vector<std::pair<BigComplex, size_t>> out;
        for (auto& c : numeric_eigenvalues(a, digits)) out.emplace_back(c.mu, c.mult);
        return out;
    };
}

inline NormalFormT<SymbolicComplex> build_normal_form_exact(const std::vector<Mat<SymbolicComplex>>& gens,
                                                            const BasisPtr& basis, int digits) {
    try {
        return build_normal_form_T(gens, SymComplexPolicy{basis}, exact_eig_fn(digits));
    } catch (const SpanError& e) {
        throw TierError(std::string("normal form leaves the declared span: ") + e.what());
    }
}

inline NormalFormT<BigComplex> build_normal_form_numeric(const std::vector<Mat<SymbolicComplex>>& gens,
                                                         const BackendConfig& cfg) {
    NumComplexPolicy pol{cfg.work_bits(), cfg.work_tol()};
    std::vector<Mat<BigComplex>> num;
    for (const auto& g : gens) num.push_back(to_numeric(g, 2 * cfg.digits));
    return build_normal_form_T(num, pol, numeric_eig_fn(cfg.digits));
}

struct NormalForm {
    bool exact = false;
    std::optional<NormalFormT<SymbolicComplex>> sym;
    std::optional<NormalFormT<BigComplex>> num;
    std::vector<std::string> notes;

    const std::vector<size_t>& eta() const { return exact ? sym->eta : num->eta; }
    size_t block_count() const { return eta().size(); }
};

inline NormalForm build_normal_form(const GroupSpec& spec) {
    validate_spec(spec);
    NormalForm nf;
    try {
        nf.sym = build_normal_form_exact(spec.gens, spec.basis, spec.cfg.digits);
        nf.exact = true;
        return nf;
    } catch (const TierError& e) {
        if (spec.cfg.strict_exact) throw;
        nf.notes.push_back(std::string("normal form downgraded to numeric tier: ") + e.what());
    }
    nf.num = build_normal_form_numeric(spec.gens, spec.cfg);
    nf.exact = false;
    return nf;
}

// Exact-tier common generalized eigenspace decomposition with numeric fallback.
struct CommonSubspaces {
    bool exact = false;
    std::vector<CommonSubspaceT<SymbolicComplex>> sym;
    std::vector<CommonSubspaceT<BigComplex>> num;
};

inline CommonSubspaces common_generalized_eigenspaces(const GroupSpec& spec) {
    validate_spec(spec);
    CommonSubspaces cs;
    try {
        cs.sym = common_generalized_eigenspaces_T(spec.gens, SymComplexPolicy{spec.basis},
                                                  exact_eig_fn(spec.cfg.digits));
        cs.exact = true;
        return cs;
    } catch (const TierError&) {
        if (spec.cfg.strict_exact) throw;
    } catch (const SpanError&) {
        if (spec.cfg.strict_exact) throw;
    }
    NumComplexPolicy pol{spec.cfg.work_bits(), spec.cfg.work_tol()};
    cs.num = common_generalized_eigenspaces_T(spec.numeric_gens(2 * spec.cfg.digits), pol,
                                              numeric_eig_fn(spec.cfg.digits));
    cs.exact = false;
    return cs;
}

}  // namespace orbitreg

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "orbitreg/errors.hpp"
#include "orbitreg/intlat.hpp"
#include "orbitreg/matrix.hpp"
#include "orbitreg/normal_form.hpp"
#include "orbitreg/relations.hpp"
#include "orbitreg/symbolic.hpp"

namespace orbitreg {

// Finitely generated additive subgroup of R^d, given by generator vectors.
// The symbolic form is present on the exact tier; the numeric form (at the
// working precision) is always present.
struct RealGens {
    size_t d = 0;
    std::optional<std::vector<std::vector<SymbolicReal>>> sym;
    std::vector<std::vector<BigFloat>> num;

    size_t count() const { return num.size(); }
};

inline RealGens real_gens_from_symbolic(std::vector<std::vector<SymbolicReal>> v, int digits) {
    RealGens g;
    g.d = v.empty() ? 0 : v[0].size();
    g.num.reserve(v.size());
    for (const auto& vec : v) {
        std::vector<BigFloat> n;
        n.reserve(vec.size());
        for (const auto& x : vec) n.push_back(x.eval(2 * digits));
        g.num.push_back(std::move(n));
    }
    g.sym = std::move(v);
    return g;
}

inline RealGens real_gens_from_numeric(std::vector<std::vector<BigFloat>> v) {
    RealGens g;
    g.d = v.empty() ? 0 : v[0].size();
    g.num = std::move(v);
    return g;
}

namespace detail {

inline BigFloat vec_dot(const std::vector<BigFloat>& a, const std::vector<BigFloat>& b) {
    BigFloat s(a.empty() ? mpfr_prec_t(64) : a[0].prec());
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline BigFloat vec_norm(const std::vector<BigFloat>& a) { return sqrt(vec_dot(a, a)); }

inline BigFloat max_abs(const std::vector<std::vector<BigFloat>>& vs) {
    BigFloat m(64);
    for (const auto& v : vs)
        for (const auto& x : v) {
            BigFloat a = abs(x);
            if (a > m) m = a;
        }
    return m;
}

// Greedily extends an orthogonal family; returns the residual added, or
// nothing when v is already (numerically) in the span.
inline std::optional<std::vector<BigFloat>> orthogonal_residual(
    const std::vector<std::vector<BigFloat>>& ortho, std::vector<BigFloat> v, const BigFloat& tol) {
    for (const auto& b : ortho) {
        BigFloat c = vec_dot(v, b) / vec_dot(b, b);
        for (size_t i = 0; i < v.size(); ++i) v[i] -= c * b[i];
    }
    if (vec_norm(v) < tol) return std::nullopt;
    return v;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// relation_lattice: Z-basis of { s : sum s_i v_i = 0 }
// ---------------------------------------------------------------------------

inline RelationBasis relation_lattice(const RealGens& gens, const BackendConfig& cfg) {
    const size_t p = gens.count();
    if (p == 0) return {{}, false};
    if (gens.sym) {
        const size_t t = (*gens.sym)[0].empty() ? 1 : (*gens.sym)[0][0].basis()->size();
        QMat rows;
        for (size_t c = 0; c < gens.d; ++c)
            for (size_t j = 0; j < t; ++j) {
                QVec row(p);
                for (size_t i = 0; i < p; ++i) row[i] = (*gens.sym)[i][c][j];
                rows.push_back(std::move(row));
            }
        return {intlat::hnf_rows(intlat::kernel_rational(rows)), false};
    }
    std::vector<std::vector<BigFloat>> forms(gens.d);
    for (size_t c = 0; c < gens.d; ++c) {
        forms[c].reserve(p);
        for (size_t i = 0; i < p; ++i) forms[c].push_back(gens.num[i][c]);
    }
    return integer_relations_forms(forms, p, cfg.digits, cfg.tau());
}

// ---------------------------------------------------------------------------
// integer_rowspace_lattice: M = Z^p ∩ rowspace(U), U = (generators as columns)
// ---------------------------------------------------------------------------

namespace detail {

// Numeric kernel of U as linear forms on Z^p.
inline std::vector<std::vector<BigFloat>> numeric_kernel_forms(const RealGens& gens,
                                                               const BackendConfig& cfg) {
    NumRealPolicy pol{cfg.work_bits(), cfg.loose_tol() * (BigFloat(1L, 64) + max_abs(gens.num))};
    Mat<BigFloat> u(gens.d, gens.count(), BigFloat(cfg.work_bits()));
    for (size_t i = 0; i < gens.d; ++i)
        for (size_t j = 0; j < gens.count(); ++j) u(i, j) = gens.num[j][i];
    return kernel(u, pol);
}

}  // namespace detail

inline RelationBasis integer_rowspace_lattice(const RealGens& gens, const BackendConfig& cfg) {
    const size_t p = gens.count();
    if (p == 0) return {{}, false};
    if (gens.sym) {
        try {
            SymRealPolicy pol{(*gens.sym)[0][0].basis()};
            Mat<SymbolicReal> u(gens.d, p, pol.zero());
            for (size_t i = 0; i < gens.d; ++i)
                for (size_t j = 0; j < p; ++j) u(i, j) = (*gens.sym)[j][i];
            auto ker = kernel(u, pol);
            if (ker.empty()) {
                // full column rank: the rowspace is all of R^p
                ZMat id(p, ZVec(p, mpz_class(0)));
                for (size_t i = 0; i < p; ++i) id[i][i] = 1;
                return {std::move(id), false};
            }
            const size_t t = pol.basis->size();
            QMat rows;
            for (const auto& s : ker)
                for (size_t j = 0; j < t; ++j) {
                    QVec row(p);
                    for (size_t i = 0; i < p; ++i) row[i] = s[i][j];
                    rows.push_back(std::move(row));
                }
            return {intlat::hnf_rows(intlat::kernel_rational(rows)), false};
        } catch (const SpanError&) {
            if (cfg.strict_exact)
                throw TierError("integer rowspace lattice is not decidable within the declared span");
            // fall through to the numeric tier
        }
    }
    auto forms = detail::numeric_kernel_forms(gens, cfg);
    auto rel = integer_relations_forms(forms, p, cfg.digits, cfg.tau());

    // re-verify each candidate: its component off the rowspace must vanish
    std::vector<std::vector<BigFloat>> row_ortho;
    for (size_t i = 0; i < gens.d; ++i) {
        std::vector<BigFloat> row(p, BigFloat(cfg.work_bits()));
        for (size_t j = 0; j < p; ++j) row[j] = gens.num[j][i];
        auto r = detail::orthogonal_residual(row_ortho, row, cfg.loose_tol());
        if (r) row_ortho.push_back(std::move(*r));
    }
    ZMat kept;
    for (const auto& m : rel.basis) {
        std::vector<BigFloat> v(p, BigFloat(cfg.work_bits()));
        for (size_t j = 0; j < p; ++j) v[j] = BigFloat(m[j], cfg.work_bits());
        BigFloat scale = detail::vec_norm(v);
        auto r = detail::orthogonal_residual(row_ortho, v, cfg.tau() * scale);
        if (!r) kept.push_back(m);
    }
    return {intlat::hnf_rows(std::move(kept)), true};
}

// ---------------------------------------------------------------------------
// closure_decomposition
// ---------------------------------------------------------------------------

struct ClosureDecomposition {
    size_t d = 0;         // ambient dimension
    size_t span_dim = 0;  // d' = dim_R span(generators)
    size_t dim = 0;       // dim V = closure dimension
    ZMat M;               // Z-basis of Z^p ∩ rowspace(U), HNF rows
    ZMat S;               // Z-basis of M^perp ∩ Z^p
    ZMat lattice_combos;  // rows completing S to Z^p; their images span the lattice
    std::vector<std::vector<BigFloat>> V_basis;
    std::vector<std::vector<BigFloat>> W_basis;
    std::vector<std::vector<BigFloat>> lattice_basis;
    std::optional<BigFloat> min_lattice_norm;
    bool heuristic = false;
};

inline ClosureDecomposition closure_decomposition(const RealGens& gens, const BackendConfig& cfg) {
    ClosureDecomposition cd;
    cd.d = gens.d;
    const size_t p = gens.count();
    if (p == 0) return cd;
    const mpfr_prec_t bits = cfg.work_bits();
    BigFloat span_tol = cfg.loose_tol() * (BigFloat(1L, 64) + detail::max_abs(gens.num));

    // d' = rank of the generator family
    bool rank_exact = false;
    if (gens.sym) {
        try {
            SymRealPolicy pol{(*gens.sym)[0][0].basis()};
            Mat<SymbolicReal> u(gens.d, p, pol.zero());
            for (size_t i = 0; i < gens.d; ++i)
                for (size_t j = 0; j < p; ++j) u(i, j) = (*gens.sym)[j][i];
            cd.span_dim = mat_rank(u, pol);
            rank_exact = true;
        } catch (const SpanError&) {
            if (cfg.strict_exact) throw TierError("span dimension is not decidable within the declared span");
        }
    }
    std::vector<std::vector<BigFloat>> span_ortho;
    for (const auto& v : gens.num) {
        auto r = detail::orthogonal_residual(span_ortho, v, span_tol);
        if (r) span_ortho.push_back(std::move(*r));
    }
    if (!rank_exact) cd.span_dim = span_ortho.size();
    else if (cd.span_dim != span_ortho.size())
        throw ValidationError("span rank disagreement between tiers; rerun at higher precision");

    auto m = integer_rowspace_lattice(gens, cfg);
    cd.M = m.basis;
    cd.heuristic = m.heuristic;
    if (cd.M.size() > cd.span_dim)
        throw ValidationError("inconsistent closure computation: rank(M) exceeds the span dimension");
    cd.dim = cd.span_dim - cd.M.size();

    cd.S = cd.M.empty() ? ZMat() : intlat::hnf_rows(intlat::kernel_int(cd.M));
    if (cd.M.empty()) {
        cd.S.assign(p, ZVec(p, mpz_class(0)));
        for (size_t i = 0; i < p; ++i) cd.S[i][i] = 1;
    }
    cd.lattice_combos = intlat::complete_saturated(cd.S, p);

    auto image = [&](const ZVec& c) {
        std::vector<BigFloat> v(gens.d, BigFloat(bits));
        for (size_t j = 0; j < p; ++j) {
            BigFloat cj(c[j], bits);
            for (size_t i = 0; i < gens.d; ++i) v[i] += cj * gens.num[j][i];
        }
        return v;
    };

    // V = span{ U s : s in S }
    for (const auto& s : cd.S) {
        auto v = image(s);
        auto r = detail::orthogonal_residual(cd.V_basis, v, span_tol);
        if (r) cd.V_basis.push_back(std::move(*r));
    }
    if (cd.V_basis.size() != cd.dim)
        throw ValidationError("inconsistent closure computation: dim V disagrees with d' - rank(M)");

    // W = orthogonal complement of V inside span(generators)
    std::vector<std::vector<BigFloat>> vw = cd.V_basis;
    for (const auto& v : gens.num) {
        auto r = detail::orthogonal_residual(vw, v, span_tol);
        if (r) {
            cd.W_basis.push_back(*r);
            vw.push_back(std::move(*r));
        }
    }

    // lattice basis: projections of the complement images onto W along V
    for (const auto& c : cd.lattice_combos) {
        auto v = image(c);
        for (const auto& b : cd.V_basis) {
            BigFloat coef = detail::vec_dot(v, b) / detail::vec_dot(b, b);
            for (size_t i = 0; i < v.size(); ++i) v[i] -= coef * b[i];
        }
        cd.lattice_basis.push_back(std::move(v));
    }
    for (const auto& v : cd.lattice_basis) {
        BigFloat n = detail::vec_norm(v);
        if (!cd.min_lattice_norm || n < *cd.min_lattice_norm) cd.min_lattice_norm = n;
    }
    return cd;
}

inline bool density_test(const RealGens& gens, size_t target_dim, const BackendConfig& cfg) {
    return closure_decomposition(gens, cfg).dim == target_dim;
}

// ---------------------------------------------------------------------------
// property D(m)
// ---------------------------------------------------------------------------

// vectors: p vectors in R^n, the first n forming a basis, the trailing p - n
// lying in the span of the last m basis vectors.  True iff the integer span
// of the last m basis vectors together with the trailing vectors is dense in
// their m-dimensional real span.
inline bool property_D(const RealGens& vectors, size_t m, const BackendConfig& cfg) {
    const size_t p = vectors.count();
    if (p == 0) throw ValidationError("property D requires at least one vector");
    const size_t n = vectors.d;
    if (p < n) throw ValidationError("property D hypothesis violated: fewer vectors than the dimension");
    if (m > n) throw ValidationError("property D requires m <= n");
    const mpfr_prec_t bits = cfg.work_bits();
    BigFloat tol = cfg.loose_tol() * (BigFloat(1L, 64) + detail::max_abs(vectors.num));

    // coordinates of every vector in the basis formed by the first n
    NumRealPolicy pol{bits, tol};
    Mat<BigFloat> basis_mat(n, n, BigFloat(bits));
    for (size_t j = 0; j < n; ++j)
        for (size_t i = 0; i < n; ++i) basis_mat(i, j) = vectors.num[j][i];
    auto inv = inverse(basis_mat, pol);
    if (!inv) throw ValidationError("property D hypothesis violated: the first n vectors are dependent");

    std::vector<std::vector<BigFloat>> reduced;  // coordinates on the last m basis vectors
    for (size_t j = 0; j < m; ++j) {
        std::vector<BigFloat> e(m, BigFloat(bits));
        e[j] = BigFloat(1L, bits);
        reduced.push_back(std::move(e));
    }
    for (size_t j = n; j < p; ++j) {
        auto coords = mat_vec(*inv, [&] {
            std::vector<BigFloat> v(n, BigFloat(bits));
            for (size_t i = 0; i < n; ++i) v[i] = vectors.num[j][i];
            return v;
        }());
        for (size_t i = 0; i + m < n; ++i)
            if (!(abs(coords[i]) < tol))
                throw ValidationError("property D hypothesis violated: vector " + std::to_string(j + 1) +
                                      " escapes the span of the last " + std::to_string(m) +
                                      " basis vectors");
        std::vector<BigFloat> r(m, BigFloat(bits));
        for (size_t i = 0; i < m; ++i) r[i] = coords[n - m + i];
        reduced.push_back(std::move(r));
    }
    if (m == 0) return true;
    return density_test(real_gens_from_numeric(std::move(reduced)), m, cfg);
}

}  // namespace orbitreg

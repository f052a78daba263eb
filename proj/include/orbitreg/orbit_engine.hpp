#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "orbitreg/errors.hpp"
#include "orbitreg/group_closure.hpp"
#include "orbitreg/lie_log.hpp"
#include "orbitreg/normal_form.hpp"

namespace orbitreg {

// ---------------------------------------------------------------------------
// incremental span construction
// ---------------------------------------------------------------------------

namespace detail {

// Maintains an ordered spanning set together with reduced copies used for
// membership tests.  Inserted vectors are kept verbatim in `raw`; each
// reduced row has a normalized pivot and zeros at all earlier pivots.
template <class P>
struct SpanBuilder {
    using S = typename P::S;
    const P& pol;
    std::vector<std::vector<S>> raw;
    std::vector<std::vector<S>> red;
    std::vector<size_t> pivots;

    explicit SpanBuilder(const P& p) : pol(p) {}

    bool contains(std::vector<S> w) const {
        for (size_t i = 0; i < red.size(); ++i) {
            S c = w[pivots[i]];
            for (size_t j = 0; j < w.size(); ++j) w[j] = w[j] - c * red[i][j];
        }
        for (const auto& x : w)
            if (!pol.is_zero(x)) return false;
        return true;
    }

    // Returns true when w enlarged the span.
    bool add(const std::vector<S>& w) {
        std::vector<S> r = w;
        for (size_t i = 0; i < red.size(); ++i) {
            S c = r[pivots[i]];
            for (size_t j = 0; j < r.size(); ++j) r[j] = r[j] - c * red[i][j];
        }
        size_t piv = r.size();
        double best = 0;
        for (size_t j = 0; j < r.size(); ++j) {
            if (pol.is_zero(r[j])) continue;
            double sc = pol.score(r[j]);
            if (piv == r.size() || sc > best) { piv = j; best = sc; }
        }
        if (piv == r.size()) return false;
        S inv_head = r[piv];
        for (size_t j = 0; j < r.size(); ++j) r[j] = r[j] / inv_head;
        raw.push_back(w);
        red.push_back(std::move(r));
        pivots.push_back(piv);
        return true;
    }
};

inline BigFloat gens_scale(const std::vector<Mat<BigComplex>>& gens, mpfr_prec_t bits) {
    BigFloat s(1L, bits);
    for (const auto& g : gens) {
        BigFloat m = max_norm(g);
        if (m > s) s = m;
    }
    return s;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// E(u): smallest subspace containing u invariant under the group
// ---------------------------------------------------------------------------

struct Subspace {
    size_t n = 0;
    size_t dim = 0;
    bool exact = false;
    std::optional<Mat<SymbolicComplex>> sym;  // n x dim, columns are the basis
    Mat<BigComplex> num;                      // always present, work precision
};

namespace detail {

template <class P>
std::vector<std::vector<typename P::S>> saturate_span(
    const std::vector<Mat<typename P::S>>& gens, const std::vector<typename P::S>& u, const P& pol) {
    SpanBuilder<P> sb(pol);
    if (!sb.add(u)) return {};
    for (size_t head = 0; head < sb.raw.size(); ++head) {
        auto v = sb.raw[head];
        for (const auto& a : gens) sb.add(mat_vec(a, v));
    }
    return sb.raw;
}

}  // namespace detail

inline Subspace orbit_span(const GroupSpec& spec, const std::vector<SymbolicComplex>& u) {
    Subspace e;
    e.n = spec.n;
    const int q = spec.cfg.digits;
    try {
        SymComplexPolicy pol{spec.basis};
        auto basis = detail::saturate_span(spec.gens, u, pol);
        e.dim = basis.size();
        e.exact = true;
        e.sym = from_columns(spec.n, basis, pol.zero());
        e.num = to_numeric(*e.sym, 2 * q);
        return e;
    } catch (const SpanError& ex) {
        if (spec.cfg.strict_exact)
            throw TierError(std::string("orbit span leaves the declared span: ") + ex.what());
    }
    auto num_gens = spec.numeric_gens(2 * q);
    NumComplexPolicy pol{spec.cfg.work_bits(),
                        spec.cfg.loose_tol() * detail::gens_scale(num_gens, spec.cfg.work_bits())};
    std::vector<BigComplex> un;
    for (const auto& z : u) un.push_back(z.eval(2 * q));
    auto basis = detail::saturate_span(num_gens, un, pol);
    e.dim = basis.size();
    e.exact = false;
    e.num = from_columns(spec.n, basis, pol.zero());
    return e;
}

// ---------------------------------------------------------------------------
// restriction of the group to an invariant subspace
// ---------------------------------------------------------------------------

struct RestrictedGroup {
    bool exact = false;
    std::optional<GroupSpec> sym_spec;      // generators in subspace coordinates
    std::vector<Mat<BigComplex>> num_gens;  // always present
    size_t dim = 0;
};

inline RestrictedGroup restrict_group(const GroupSpec& spec, const Subspace& e) {
    RestrictedGroup rg;
    rg.dim = e.dim;
    if (e.dim == 0) throw ValidationError("cannot restrict to the zero subspace");
    const int q = spec.cfg.digits;
    if (e.exact) {
        try {
            SymComplexPolicy pol{spec.basis};
            GroupSpec rs;
            rs.n = e.dim;
            rs.real_field = false;  // subspace coordinates are complex in general
            rs.basis = spec.basis;
            rs.cfg = spec.cfg;
            for (const auto& a : spec.gens) rs.gens.push_back(restriction(*e.sym, a, pol));
            for (const auto& g : rs.gens) rg.num_gens.push_back(to_numeric(g, 2 * q));
            rg.exact = true;
            rg.sym_spec = std::move(rs);
            return rg;
        } catch (const SpanError& ex) {
            if (spec.cfg.strict_exact)
                throw TierError(std::string("restriction leaves the declared span: ") + ex.what());
        }
    }
    auto num_gens = spec.numeric_gens(2 * q);
    NumComplexPolicy pol{spec.cfg.work_bits(),
                        spec.cfg.loose_tol() * detail::gens_scale(num_gens, spec.cfg.work_bits())};
    for (const auto& a : num_gens) rg.num_gens.push_back(restriction(e.num, a, pol));
    // re-verify commutativity survived the coordinate change
    BigFloat scale = detail::gens_scale(rg.num_gens, spec.cfg.work_bits());
    for (size_t j = 0; j < rg.num_gens.size(); ++j)
        for (size_t k = j + 1; k < rg.num_gens.size(); ++k) {
            BigFloat resid = max_norm(rg.num_gens[j] * rg.num_gens[k] - rg.num_gens[k] * rg.num_gens[j]);
            if (!(resid < spec.cfg.loose_tol() * scale * scale))
                throw ValidationError("restricted generators fail to commute; rerun at higher precision");
        }
    return rg;
}

// ---------------------------------------------------------------------------
// singular locus: block-leading-coordinate hyperplanes in subspace coordinates
// ---------------------------------------------------------------------------

template <class S>
std::vector<std::vector<S>> singular_locus_T(const NormalFormT<S>& nf) {
    auto off = detail::block_offsets(nf.eta);
    std::vector<std::vector<S>> out;
    for (size_t j = 0; j < nf.eta.size(); ++j) {
        std::vector<S> f;
        for (size_t c = 0; c < nf.n; ++c) f.push_back(nf.Pinv(off[j], c));
        out.push_back(std::move(f));
    }
    return out;
}

inline std::vector<std::vector<BigComplex>> singular_locus(const NormalForm& nf, int digits) {
    if (nf.exact) {
        std::vector<std::vector<BigComplex>> out;
        for (const auto& f : singular_locus_T(*nf.sym)) {
            std::vector<BigComplex> g;
            for (const auto& z : f) g.push_back(z.eval(2 * digits));
            out.push_back(std::move(g));
        }
        return out;
    }
    return singular_locus_T(*nf.num);
}

// ---------------------------------------------------------------------------
// the full pipeline
// ---------------------------------------------------------------------------

struct OrbitReport {
    std::vector<SymbolicComplex> u;
    size_t n = 0;
    bool real_field = false;
    bool exact = false;      // every stage ran on the exact tier
    bool heuristic = false;  // some lattice/relation step relied on LLL detection
    Subspace E;
    size_t r_u = 0;
    AdditiveGroupGens gu;
    std::optional<ClosureDecomposition> closure;
    size_t m = 0;
    std::string classification;
    std::vector<std::vector<BigComplex>> hyperplanes;  // functionals on E(u) coordinates
    std::vector<std::string> notes;
};

inline std::string classify_orbit(const OrbitReport& rep) {
    if (rep.m == 0) return "discrete";
    if (!rep.real_field && rep.m == 2 * rep.n) return "dense_in_ambient";
    if (rep.real_field && rep.m == rep.n) return "dense_in_ambient";
    if (rep.m == 2 * rep.r_u) return "closure_is_subspace";
    return "regular(" + std::to_string(rep.m) + ")";
}

inline OrbitReport orbit_order(const GroupSpec& spec, const std::vector<SymbolicComplex>& u,
                               const std::vector<std::vector<long>>* branch_shifts = nullptr) {
    validate_spec(spec);
    if (u.size() != spec.n) throw ValidationError("vector length does not match the group dimension");
    OrbitReport rep;
    rep.u = u;
    rep.n = spec.n;
    rep.real_field = spec.real_field;
    const BackendConfig& cfg = spec.cfg;

    bool zero = true;
    for (const auto& z : u)
        if (!z.is_zero()) zero = false;
    if (zero) {
        rep.exact = true;
        rep.m = 0;
        rep.E.n = spec.n;
        rep.classification = "discrete";
        rep.notes.push_back("zero vector: orbit is the fixed point 0");
        return rep;
    }

    rep.E = orbit_span(spec, u);
    rep.r_u = rep.E.dim;
    auto rg = restrict_group(spec, rep.E);

    // u is the first spanning vector, so its subspace coordinates are e_1 and
    // its normal coordinates are the first column of Pinv.
    auto run_numeric = [&](const NormalFormT<BigComplex>& nfn) {
        auto lg = group_log_numeric(nfn, cfg, branch_shifts);
        auto uhat = get_col(nfn.Pinv, 0);
        try {
            rep.gu.num = g_u_generators_numeric(lg, nfn, uhat, cfg, &rep.gu.provenance);
        } catch (const ValidationError& e) {
            throw ValidationError(std::string("internal inconsistency: the base vector left the regular "
                                              "region after restriction (") +
                                  e.what() + "); rerun at higher precision");
        }
        rep.gu.d = 2 * rep.r_u;
        rep.gu.exact = false;
        RealGens gens;
        gens.d = rep.gu.d;
        gens.num = rep.gu.num;
        rep.closure = closure_decomposition(gens, cfg);
        rep.exact = false;
    };

    bool done = false;
    if (rg.exact) {
        NormalForm nf = build_normal_form(*rg.sym_spec);
        for (const auto& s : nf.notes) rep.notes.push_back(s);
        if (nf.exact) {
            try {
                auto lg = group_log_exact(*nf.sym, cfg.digits, branch_shifts);
                auto uhat = get_col(nf.sym->Pinv, 0);
                std::vector<std::vector<SymbolicReal>> sym_gens;
                try {
                    sym_gens = g_u_generators_exact(lg, *nf.sym, uhat, &rep.gu.provenance);
                } catch (const ValidationError& e) {
                    throw ValidationError(
                        std::string("internal inconsistency: the base vector left the regular region "
                                    "after restriction (") +
                        e.what() + ")");
                }
                rep.gu.d = 2 * rep.r_u;
                rep.gu.exact = true;
                rep.gu.sym = sym_gens;
                RealGens gens = real_gens_from_symbolic(std::move(sym_gens), cfg.digits);
                rep.gu.num = gens.num;
                rep.closure = closure_decomposition(gens, cfg);
                rep.exact = true;
                rep.hyperplanes = singular_locus(nf, cfg.digits);
                done = true;
            } catch (const TierError& e) {
                if (cfg.strict_exact) throw;
                rep.notes.push_back(std::string("orbit analysis downgraded to numeric tier: ") + e.what());
                rep.gu = AdditiveGroupGens{};
            }
        }
        if (!done) {
            auto nfn = nf.exact ? build_normal_form_numeric(rg.sym_spec->gens, cfg) : *nf.num;
            run_numeric(nfn);
            rep.hyperplanes = singular_locus_T(nfn);
            done = true;
        }
    } else {
        NumComplexPolicy pol{cfg.work_bits(), cfg.work_tol()};
        auto nfn = build_normal_form_T(rg.num_gens, pol, numeric_eig_fn(cfg.digits));
        run_numeric(nfn);
        rep.hyperplanes = singular_locus_T(nfn);
    }

    rep.m = rep.closure->dim;
    rep.heuristic = rep.closure->heuristic || !rep.exact;
    if (rep.m > 2 * rep.r_u)
        throw ValidationError("internal inconsistency: order exceeds twice the orbit span dimension");
    if (rep.real_field && rep.m > rep.n)
        throw ValidationError("internal inconsistency: real-field order exceeds the dimension");
    rep.classification = classify_orbit(rep);
    return rep;
}

// ---------------------------------------------------------------------------
// GroupSpan and conjugators between orbit points
// ---------------------------------------------------------------------------

struct GroupSpan {
    size_t n = 0;
    std::vector<Mat<BigComplex>> basis;  // contains I; closed under generator products
};

inline GroupSpan group_span(const GroupSpec& spec) {
    validate_spec(spec);
    const int q = spec.cfg.digits;
    auto num_gens = spec.numeric_gens(2 * q);
    NumComplexPolicy pol{spec.cfg.work_bits(),
                        spec.cfg.loose_tol() * detail::gens_scale(num_gens, spec.cfg.work_bits())};
    detail::SpanBuilder<NumComplexPolicy> sb(pol);
    sb.add(identity(spec.n, pol).a);
    for (size_t head = 0; head < sb.raw.size(); ++head) {
        auto flat = sb.raw[head];
        Mat<BigComplex> b(spec.n, spec.n, pol.zero());
        b.a = flat;
        for (const auto& a : num_gens) sb.add((b * a).a);
    }
    GroupSpan gs;
    gs.n = spec.n;
    for (const auto& flat : sb.raw) {
        Mat<BigComplex> b(spec.n, spec.n, pol.zero());
        b.a = flat;
        gs.basis.push_back(std::move(b));
    }
    return gs;
}

// Finds an invertible B in the span of the group with B u = v.  Requires v
// in the regular region of u's orbit.
inline Mat<BigComplex> map_orbit(const GroupSpec& spec, const std::vector<SymbolicComplex>& u,
                                 const std::vector<SymbolicComplex>& v) {
    validate_spec(spec);
    const BackendConfig& cfg = spec.cfg;
    const mpfr_prec_t bits = cfg.work_bits();
    NumComplexPolicy pol{bits, cfg.work_tol()};

    auto eu = orbit_span(spec, u);
    if (eu.dim == 0) throw ValidationError("cannot map from the zero vector");
    {
        // v = u needs no search: the identity conjugates
        BigFloat d(bits);
        for (size_t i = 0; i < spec.n; ++i) {
            BigFloat e2 = abs(v[i].eval(2 * cfg.digits) - u[i].eval(2 * cfg.digits));
            if (e2 > d) d = e2;
        }
        if (d < cfg.work_tol()) return identity(spec.n, pol);
    }
    auto ev = orbit_span(spec, v);
    std::vector<BigComplex> vn;
    for (const auto& z : v) vn.push_back(z.eval(2 * cfg.digits));
    auto vcoords = solve(eu.num, vn, pol);
    if (!vcoords || ev.dim != eu.dim)
        throw NotInRegularRegion("target vector does not span the same orbit subspace");

    // v must avoid every block-leading hyperplane of the restricted normal form
    auto rg = restrict_group(spec, eu);
    NormalFormT<BigComplex> nfn =
        rg.exact ? build_normal_form_numeric(rg.sym_spec->gens, cfg)
                 : build_normal_form_T(rg.num_gens, pol, numeric_eig_fn(cfg.digits));
    auto vhat = mat_vec(nfn.Pinv, *vcoords);
    BigFloat vscale = BigFloat(1L, bits);
    for (const auto& z : vhat)
        if (abs(z) > vscale) vscale = abs(z);
    auto off = detail::block_offsets(nfn.eta);
    for (size_t j = 0; j < nfn.eta.size(); ++j)
        if (abs(vhat[off[j]]) < cfg.loose_tol() * vscale)
            throw NotInRegularRegion("target vector lies on the singular hyperplane of block " +
                                     std::to_string(j + 1));

    auto gs = group_span(spec);
    std::vector<BigComplex> un;
    for (const auto& z : u) un.push_back(z.eval(2 * cfg.digits));
    Mat<BigComplex> c(spec.n, gs.basis.size(), pol.zero());
    for (size_t i = 0; i < gs.basis.size(); ++i) {
        auto w = mat_vec(gs.basis[i], un);
        for (size_t r = 0; r < spec.n; ++r) c(r, i) = w[r];
    }
    auto x = solve(c, vn, pol);
    if (!x)
        throw ValidationError("conjugator system is numerically rank-deficient; no B with Bu = v found");
    auto ker = kernel(c, pol);

    auto assemble = [&](const std::vector<BigComplex>& coeffs) {
        Mat<BigComplex> b(spec.n, spec.n, pol.zero());
        for (size_t i = 0; i < gs.basis.size(); ++i)
            for (size_t e2 = 0; e2 < b.a.size(); ++e2) b.a[e2] = b.a[e2] + coeffs[i] * gs.basis[i].a[e2];
        return b;
    };

    std::mt19937 rng(7391);
    std::vector<BigComplex> coeffs = *x;
    for (int attempt = 0; attempt < 50; ++attempt) {
        Mat<BigComplex> b = assemble(coeffs);
        if (inverse(b, pol)) {
            BigFloat resid(bits);
            auto bu = mat_vec(b, un);
            for (size_t i = 0; i < spec.n; ++i) {
                BigFloat d = abs(bu[i] - vn[i]);
                if (d > resid) resid = d;
            }
            BigFloat scale = detail::gens_scale({b}, bits);
            if (!(resid < cfg.loose_tol() * scale))
                throw ValidationError("conjugator residual exceeds tolerance");
            return b;
        }
        if (ker.empty()) break;
        coeffs = *x;
        std::uniform_int_distribution<int> coin(-2, 2);
        for (const auto& kv : ker) {
            BigComplex t(BigFloat(long(coin(rng)), bits), BigFloat(long(coin(rng)), bits));
            for (size_t i = 0; i < coeffs.size(); ++i) coeffs[i] = coeffs[i] + t * kv[i];
        }
    }
    throw ValidationError("no invertible conjugator found in the group span");
}

}  // namespace orbitreg

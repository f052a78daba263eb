// Acceptance suite: one pass/fail line per criterion, exit code = number of
// failed criteria.  Each criterion pins its own tolerances.

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "closure_oracle.hpp"
#include "orbitreg/orbitreg.hpp"

using namespace orbitreg;

namespace {

struct Check {
    bool ok = true;
    std::string why;
    void req(bool c, const std::string& w) {
        if (!c && ok) {
            ok = false;
            why = w;
        }
    }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::string input(const std::string& name) { return std::string(ORBITREG_INPUT_DIR) + "/" + name; }

InputDocument load(const std::string& name) { return parse_input(slurp(input(name))); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Numeric equality of column spans at 10^-40.
bool same_span(const Mat<BigComplex>& a, const Mat<BigComplex>& b) {
    if (a.cols != b.cols || a.rows != b.rows) return false;
    const mpfr_prec_t bits = bits_for_digits(120);
    NumComplexPolicy pol{bits, pow10i(-40, bits)};
    Mat<BigComplex> joint(a.rows, a.cols + b.cols, pol.zero());
    for (size_t i = 0; i < a.rows; ++i) {
        for (size_t j = 0; j < a.cols; ++j) joint(i, j) = a(i, j);
        for (size_t j = 0; j < b.cols; ++j) joint(i, a.cols + j) = b(i, j);
    }
    return mat_rank(joint, pol) == a.cols && mat_rank(a, pol) == a.cols;
}

// ---------------------------------------------------------------------------
// randomized commuting-group instances (polynomials in one base matrix)
// ---------------------------------------------------------------------------

struct RandomGroupInstance {
    GroupSpec spec;
    std::vector<SymbolicComplex> u;
};

mpq_class rand_q(std::mt19937& rng, int lo, int hi, int max_den) {
    long num = lo + long(rng() % (unsigned long)(hi - lo + 1));
    long den = 1 + long(rng() % (unsigned long)max_den);
    return mpq_class(num, den);
}

RandomGroupInstance random_group(std::mt19937& rng, const BasisPtr& basis, bool real_field) {
    const size_t s2 = *basis->index_of("sqrt2");
    RandomGroupInstance inst;
    size_t n = 1 + rng() % 3;
    size_t p = 1 + rng() % 3;
    SymComplexPolicy pol{basis};
    NumComplexPolicy np{bits_for_digits(120), pow10i(-40, bits_for_digits(120))};

    auto rand_scalar = [&](bool allow_imag) {
        SymbolicComplex z(basis);
        z.re[0] = rand_q(rng, -2, 2, 2);
        if (rng() % 4 == 0) z.re[s2] = rand_q(rng, -1, 1, 1);
        if (allow_imag && rng() % 2 == 0) z.im[0] = rand_q(rng, -2, 2, 2);
        return z;
    };

    Mat<SymbolicComplex> t(n, n, pol.zero());
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) t(i, j) = rand_scalar(!real_field);

    for (size_t k = 0; k < p; ++k) {
        for (int tries = 0;; ++tries) {
            SymbolicComplex c0(basis, rand_q(rng, -3, 3, 1)), c1(basis, rand_q(rng, -1, 1, 2)),
                c2(basis, rand_q(rng, -1, 1, 2));
            Mat<SymbolicComplex> g = identity(n, pol);
            for (auto& e : g.a) e = e * c0;
            Mat<SymbolicComplex> tt = t * t;
            for (size_t i = 0; i < n; ++i)
                for (size_t j = 0; j < n; ++j) g(i, j) = g(i, j) + c1 * t(i, j) + c2 * tt(i, j);
            if (mat_rank(to_numeric(g, 60), np) == n) {
                inst.spec.gens.push_back(std::move(g));
                break;
            }
            if (tries > 20) {  // give up on this polynomial; fall back to a shift of t
                Mat<SymbolicComplex> h = t;
                for (size_t i = 0; i < n; ++i) h(i, i) = h(i, i) + SymbolicComplex(basis, mpq_class(5));
                if (mat_rank(to_numeric(h, 60), np) != n)
                    for (size_t i = 0; i < n; ++i) h(i, i) = h(i, i) + SymbolicComplex(basis, mpq_class(2));
                inst.spec.gens.push_back(std::move(h));
                break;
            }
        }
    }
    inst.spec.n = n;
    inst.spec.real_field = real_field;
    inst.spec.basis = basis;
    for (;;) {
        inst.u.clear();
        bool nonzero = false;
        for (size_t i = 0; i < n; ++i) {
            SymbolicComplex z(basis, rand_q(rng, -2, 2, 2));
            if (!real_field && rng() % 2 == 0) z.im[0] = rand_q(rng, -2, 2, 2);
            if (!z.is_zero()) nonzero = true;
            inst.u.push_back(std::move(z));
        }
        if (nonzero) break;
    }
    return inst;
}

// Retries instance analysis past numerically degenerate draws; genuine
// invariant violations surface through the returned report.
bool analyze_or_skip(const RandomGroupInstance& inst, OrbitReport& rep, std::string& hard_error,
                     const std::vector<std::vector<long>>* shifts = nullptr) {
    try {
        rep = orbit_order(inst.spec, inst.u, shifts);
        return true;
    } catch (const ClusterError&) {
        return false;  // eigenvalue clusters too close to separate; resample
    } catch (const ValidationError& e) {
        std::string w = e.what();
        if (w.find("commute") != std::string::npos || w.find("singular") != std::string::npos ||
            w.find("higher precision") != std::string::npos)
            return false;  // conditioning artifact of the draw; resample
        hard_error = w;
        return true;  // real violation: let the caller fail on it
    }
}

BasisPtr acceptance_basis() {
    auto b = std::make_shared<ConstantBasis>();
    size_t s2 = b->add("sqrt2", "sqrt(2)");
    b->add("pi", "pi");
    b->set_product(s2, s2, {mpq_class(2), mpq_class(0), mpq_class(0)});
    return b;
}

// ---------------------------------------------------------------------------
// criteria
// ---------------------------------------------------------------------------

Check criterion1() {
    Check c;
    InputDocument doc = load("pair44.orb");
    GroupSpec spec = doc.spec();
    auto t0 = std::chrono::steady_clock::now();
    OrbitReport r1 = orbit_order(spec, doc.vectors[0].second);
    double dt1 = seconds_since(t0);
    t0 = std::chrono::steady_clock::now();
    OrbitReport r2 = orbit_order(spec, doc.vectors[1].second);
    double dt2 = seconds_since(t0);
    c.req(r1.exact, "case (1,1,0,0) did not stay on the exact tier");
    c.req(r1.m == 0, "case (1,1,0,0): order " + std::to_string(r1.m) + ", expected 0");
    c.req(r1.classification == "discrete", "case (1,1,0,0): classified " + r1.classification);
    c.req(r2.exact, "case (1,sqrt2,0,0) did not stay on the exact tier");
    c.req(r2.m == 1, "case (1,sqrt2,0,0): order " + std::to_string(r2.m) + ", expected 1");
    c.req(r2.classification == "regular(1)", "case (1,sqrt2,0,0): classified " + r2.classification);
    c.req(dt1 < 2.0 && dt2 < 2.0,
          "runtime " + std::to_string(dt1) + "s / " + std::to_string(dt2) + "s exceeds 2s");
    return c;
}

Check criterion2() {
    Check c;
    InputDocument doc = load("pair44.orb");
    GroupSpec spec = doc.spec();
    SymComplexPolicy pol{doc.basis};

    // orbit span of e_1 is span{e_1, e_4} with complex dimension 2
    std::vector<SymbolicComplex> e1(4, pol.zero()), e4(4, pol.zero());
    e1[0] = pol.one();
    e4[3] = pol.one();
    OrbitReport re1 = orbit_order(spec, e1);
    c.req(re1.r_u == 2, "r(e_1) = " + std::to_string(re1.r_u) + ", expected 2");
    Mat<BigComplex> expected = to_numeric(from_columns(4, {e1, e4}, pol.zero()), 60);
    c.req(same_span(re1.E.num, expected), "orbit span of e_1 is not span{e_1, e_4}");

    // additive-group generators at u = (x, y, 0, 0) = (1, sqrt2, 0, 0),
    // reproduced on the exact tier and mapped back through the coordinates
    auto u = doc.vectors[1].second;
    Subspace E = orbit_span(spec, u);
    c.req(E.exact && E.dim == 2, "orbit span of u did not resolve exactly to dimension 2");
    RestrictedGroup rg = restrict_group(spec, E);
    c.req(rg.exact, "restriction left the exact tier");
    if (!c.ok) return c;
    auto nf = build_normal_form_exact(rg.sym_spec->gens, doc.basis, 60);
    auto lg = group_log_exact(nf, 60);
    auto uhat = get_col(nf.Pinv, 0);
    auto gu = g_u_generators_exact(lg, nf, uhat);
    c.req(gu.size() == 3, "expected 3 additive generators, got " + std::to_string(gu.size()));
    if (!c.ok) return c;

    auto unembed = [&](const std::vector<SymbolicReal>& th) {
        size_t r = th.size() / 2;
        std::vector<SymbolicComplex> v;
        for (size_t i = 0; i < r; ++i) v.push_back({th[i], th[r + i]});
        return v;
    };
    // first two generators, in ambient coordinates: x e_4 and y e_4 with
    // (x, y) = (1, sqrt2), exact symbolic match
    for (size_t k = 0; k < 2; ++k) {
        auto ambient = mat_vec(*E.sym, mat_vec(nf.P, unembed(gu[k])));
        std::vector<SymbolicComplex> want(4, pol.zero());
        want[3] = u[k];  // x for k=0, y for k=1
        for (size_t i = 0; i < 4; ++i)
            c.req((ambient[i] - want[i]).is_zero(),
                  "generator " + std::to_string(k + 1) + " is not u_" + std::to_string(k + 1) + " e_4");
    }
    // third generator: the lattice direction 2*pi*i along u, which reads
    // 2*pi*i e_1 in the orbit-span coordinates (u is the first basis vector)
    auto vres = mat_vec(nf.P, unembed(gu[2]));
    auto pi_idx = doc.basis->find_pi();
    c.req(pi_idx.has_value(), "pi missing from the basis");
    if (!c.ok) return c;
    SymbolicComplex two_pi_i(doc.basis);
    two_pi_i.im[*pi_idx] = 2;
    c.req((vres[0] - two_pi_i).is_zero() && vres[1].is_zero(),
          "lattice generator is not 2*pi*i times the first span coordinate");
    return c;
}

Check criterion3() {
    Check c;
    InputDocument doc = load("scaling2.orb");
    GroupSpec spec = doc.spec();
    OrbitReport rep = orbit_order(spec, doc.vectors[0].second);
    c.req(rep.m == 0, "order " + std::to_string(rep.m) + ", expected 0");
    c.req(rep.classification == "discrete", "classified " + rep.classification);
    std::string text = render_analyze(doc, "x", {rep}).text;
    c.req(text.find("manifold") == std::string::npos, "report claims a manifold");
    // the truncated orbit accumulates at 0, so the closure is not a manifold
    auto cloud = enumerate_orbit(spec, doc.vectors[0].second, 30);
    BigFloat mn = cloud.R;
    for (const auto& p : cloud.points) {
        BigFloat a = abs(p[0]);
        if (a < mn) mn = a;
    }
    c.req(mn < pow10i(-8, 64), "no accumulation near 0 in the sampled cloud");
    return c;
}

Check criterion4() {
    Check c;
    InputDocument doc = load("dense1c.orb");
    GroupSpec spec = doc.spec();
    auto t0 = std::chrono::steady_clock::now();
    OrbitReport rep = orbit_order(spec, doc.vectors[0].second);
    double dt = seconds_since(t0);
    c.req(rep.m == 2, "order " + std::to_string(rep.m) + ", expected 2 = 2n");
    c.req(rep.classification == "dense_in_ambient", "classified " + rep.classification);
    c.req(dt < 2.0, "runtime " + std::to_string(dt) + "s exceeds 2s");
    return c;
}

Check criterion5() {
    Check c;
    auto basis = acceptance_basis();
    std::mt19937 rng(20250823);
    int done = 0, attempts = 0;
    while (done < 200 && attempts < 2000 && c.ok) {
        ++attempts;
        bool real_field = done % 2 == 0;
        RandomGroupInstance inst = random_group(rng, basis, real_field);
        OrbitReport rep;
        std::string hard;
        if (!analyze_or_skip(inst, rep, hard)) continue;
        c.req(hard.empty(), "instance " + std::to_string(done) + ": " + hard);
        if (!c.ok) break;
        size_t n = inst.spec.n;
        c.req(rep.m <= 2 * n, "instance " + std::to_string(done) + ": m > 2n");
        c.req(rep.m <= 2 * rep.r_u, "instance " + std::to_string(done) + ": m > 2r(u)");
        if (!real_field) {
            bool subspace_flag = rep.classification == "closure_is_subspace" ||
                                 rep.classification == "dense_in_ambient";
            c.req((rep.m == 2 * rep.r_u) == subspace_flag,
                  "instance " + std::to_string(done) + ": m = 2r(u) iff subspace-closure violated (m=" +
                      std::to_string(rep.m) + ", r=" + std::to_string(rep.r_u) + ", " +
                      rep.classification + ")");
        } else {
            c.req(rep.m <= n, "instance " + std::to_string(done) + ": real group with m > n");
        }
        ++done;
    }
    c.req(done == 200, "only " + std::to_string(done) + " of 200 instances analyzed");
    return c;
}

Check criterion6() {
    Check c;
    auto basis = acceptance_basis();
    std::mt19937 rng(424243);
    BackendConfig cfg;
    for (int t = 0; t < 100 && c.ok; ++t) {
        auto inst = closure_oracle::random_instance(rng);
        std::vector<std::vector<SymbolicReal>> sym;
        for (const auto& g : inst.gens) {
            std::vector<SymbolicReal> v;
            for (const auto& e : g) {
                SymbolicReal x(basis);
                x[0] = mpq_class(e.an, e.ad);
                x[*basis->index_of("sqrt2")] = mpq_class(e.bn, e.bd);
                v.push_back(std::move(x));
            }
            sym.push_back(std::move(v));
        }
        RealGens rg = real_gens_from_symbolic(std::move(sym), cfg.digits);
        ClosureDecomposition cd = closure_decomposition(rg, cfg);
        c.req(cd.dim == inst.true_dim, "instance " + std::to_string(t) + ": library dim " +
                                           std::to_string(cd.dim) + " != ground truth " +
                                           std::to_string(inst.true_dim));
        int grid = closure_oracle::dimension_estimate(inst.numeric());
        c.req(grid == int(cd.dim), "instance " + std::to_string(t) + ": grid oracle " +
                                       std::to_string(grid) + " != library " + std::to_string(cd.dim));
        // numeric tier must agree wherever both tiers run (here: everywhere)
        ClosureDecomposition cdn = closure_decomposition(real_gens_from_numeric(rg.num), cfg);
        c.req(cdn.dim == cd.dim, "instance " + std::to_string(t) + ": numeric tier dim " +
                                     std::to_string(cdn.dim) + " != exact " + std::to_string(cd.dim));
    }
    return c;
}

Check criterion7() {
    Check c;
    const mpfr_prec_t bits = bits_for_digits(120);
    NumComplexPolicy pol{bits, pow10i(-100, bits)};
    BigFloat tol = pow10i(-50, bits);
    for (const char* name :
         {"pair44.orb", "diag23.orb", "dense1c.orb", "scaling2.orb", "rotation.orb"}) {
        InputDocument doc = load(name);
        GroupSpec spec = doc.spec();
        NormalForm nf = build_normal_form(spec);
        std::vector<size_t> eta = nf.eta();
        auto off = orbitreg::detail::block_offsets(eta);
        Mat<BigComplex> P = nf.exact ? to_numeric(nf.sym->P, 60) : nf.num->P;
        Mat<BigComplex> Pinv = nf.exact ? to_numeric(nf.sym->Pinv, 60) : nf.num->Pinv;
        Mat<BigComplex> prod = P * Pinv;
        Mat<BigComplex> id = identity(P.rows, pol);
        c.req(max_norm(prod - id) < tol, std::string(name) + ": P * Pinv residual exceeds 1e-50");

        std::vector<Mat<BigComplex>> B, transformed;
        bool exact_logs = false;
        if (nf.exact) {
            try {
                auto lg = group_log_exact(*nf.sym, 60);
                for (const auto& b : lg.B) B.push_back(to_numeric(b, 60));
                for (const auto& tmat : nf.sym->transformed) transformed.push_back(to_numeric(tmat, 60));
                exact_logs = true;
            } catch (const TierError&) {
                // logarithms leave the declared span; same downgrade the engine takes
            }
        }
        if (!exact_logs) {
            BackendConfig cfg = spec.cfg;
            auto nfn = nf.exact ? build_normal_form_numeric(spec.gens, cfg) : *nf.num;
            auto lg = group_log_numeric(nfn, cfg);
            B = lg.B;
            transformed = nfn.transformed;
            eta = nfn.eta;
            off = orbitreg::detail::block_offsets(eta);
        }
        for (size_t k = 0; k < B.size(); ++k)
            for (size_t j = 0; j < eta.size(); ++j) {
                auto bb = orbitreg::detail::extract_block(B[k], off[j], eta[j], pol.zero());
                auto tb = orbitreg::detail::extract_block(transformed[k], off[j], eta[j], pol.zero());
                auto eb = block_exp_numeric(bb, pol);
                c.req(max_norm(eb - tb) < tol, std::string(name) + ": exp(B) residual exceeds 1e-50 (generator " +
                                                   std::to_string(k + 1) + ", block " +
                                                   std::to_string(j + 1) + ")");
            }
    }

    // branch-shift invariance of the order on 50 random instances
    auto basis = acceptance_basis();
    std::mt19937 rng(7312025);
    int done = 0, attempts = 0;
    while (done < 50 && attempts < 600 && c.ok) {
        ++attempts;
        RandomGroupInstance inst = random_group(rng, basis, false);
        OrbitReport rep0;
        std::string hard;
        if (!analyze_or_skip(inst, rep0, hard)) continue;
        if (!hard.empty()) continue;  // regularity guards are criterion 5's subject
        size_t blocks = rep0.hyperplanes.size();
        if (blocks == 0) continue;
        std::vector<std::vector<long>> shifts(inst.spec.gens.size(), std::vector<long>(blocks));
        for (auto& row : shifts)
            for (auto& s : row) s = long(rng() % 5) - 2;
        OrbitReport rep1;
        if (!analyze_or_skip(inst, rep1, hard, &shifts)) continue;
        if (!hard.empty()) continue;
        c.req(rep1.m == rep0.m, "branch shift changed the order from " + std::to_string(rep0.m) +
                                    " to " + std::to_string(rep1.m));
        ++done;
    }
    c.req(done == 50, "only " + std::to_string(done) + " of 50 shift instances analyzed");
    return c;
}

Check criterion8() {
    Check c;
    auto t0 = std::chrono::steady_clock::now();
    struct Case {
        const char* file;
        size_t vec;
        long L;
    };
    for (const Case& k : {Case{"pair44.orb", 0, 20}, Case{"pair44.orb", 1, 50},
                          Case{"scaling2.orb", 0, 30}, Case{"dense1c.orb", 0, 50}}) {
        InputDocument doc = load(k.file);
        GroupSpec spec = doc.spec();
        OrbitReport rep = orbit_order(spec, doc.vectors[k.vec].second);
        auto cloud = enumerate_orbit(spec, doc.vectors[k.vec].second, k.L);
        OracleDiagnostic diag = oracle_compare(rep, cloud);
        c.req(diag.estimate.has_value(), std::string(k.file) + ": no box-dimension estimate");
        if (diag.estimate)
            c.req(std::fabs(*diag.estimate - double(rep.m)) <= 0.5,
                  std::string(k.file) + ": |estimate - m| = " +
                      std::to_string(std::fabs(*diag.estimate - double(rep.m))) + " > 0.5");
    }
    double dt = seconds_since(t0);
    c.req(dt < 60.0, "sampler total runtime " + std::to_string(dt) + "s exceeds 60s");
    return c;
}

Check criterion9() {
    Check c;
    struct Case {
        const char* file;
        size_t vec;
    };
    std::mt19937 rng(909090);
    for (const Case& k : {Case{"pair44.orb", 1}, Case{"diag23.orb", 0}, Case{"dense1c.orb", 0},
                          Case{"rotation.orb", 0}, Case{"scaling2.orb", 0}}) {
        InputDocument doc = load(k.file);
        GroupSpec spec = doc.spec();
        const auto& u = doc.vectors[k.vec].second;
        OrbitReport rep0 = orbit_order(spec, u);

        for (int t = 0; t < 20 && c.ok; ++t) {  // homogeneity: order(lambda u) = order(u)
            mpq_class lam = rand_q(rng, -3, 3, 2);
            if (lam == 0) lam = 1;
            std::vector<SymbolicComplex> v;
            for (const auto& z : u) v.push_back({lam * z.re, lam * z.im});
            OrbitReport rep = orbit_order(spec, v);
            c.req(rep.m == rep0.m, std::string(k.file) + ": order changed under scaling by " +
                                       lam.get_str() + " (" + std::to_string(rep0.m) + " -> " +
                                       std::to_string(rep.m) + ")");
        }

        // region invariance: E(v) = E(u) for random v in the orbit span built
        // from rational combinations of group translates of u
        std::vector<std::vector<SymbolicComplex>> translates{u};
        for (const auto& g : spec.gens) translates.push_back(mat_vec(g, u));
        const mpfr_prec_t bits = bits_for_digits(60);
        for (int t = 0; t < 20 && c.ok; ++t) {
            std::vector<SymbolicComplex> v;
            for (;;) {
                v.assign(u.size(), SymbolicComplex(doc.basis));
                for (const auto& w : translates) {
                    mpq_class cq = rand_q(rng, -2, 2, 1);
                    for (size_t i = 0; i < v.size(); ++i)
                        v[i] = v[i] + SymbolicComplex{cq * w[i].re, cq * w[i].im};
                }
                BigFloat norm(bits);
                for (const auto& z : v) {
                    BigComplex zz = z.eval(60);
                    norm += zz.re * zz.re + zz.im * zz.im;
                }
                if (norm > pow10i(-6, bits)) break;
            }
            OrbitReport rep;
            try {
                rep = orbit_order(spec, v);
            } catch (const ValidationError&) {
                continue;  // v landed on the singular locus; does not count against the criterion
            }
            if (rep.E.dim != rep0.E.dim) continue;  // singular v: outside U_u by definition
            c.req(same_span(rep.E.num, rep0.E.num), std::string(k.file) + ": E(v) differs from E(u)");
            c.req(rep.m == rep0.m, std::string(k.file) + ": order changed inside the regular region");
        }
    }
    return c;
}

}  // namespace

int main() {
    struct Entry {
        int id;
        const char* title;
        std::function<Check()> fn;
    };
    std::vector<Entry> criteria = {
        {1, "worked 4x4 corpus orders (discrete / regular(1), exact tier, < 2s)", criterion1},
        {2, "structural outputs: orbit span, r(u), exact additive generators", criterion2},
        {3, "scalar scaling group: order 0, no manifold claim, accumulation at 0", criterion3},
        {4, "dense 1-D complex group: order 2 = 2n, < 2s", criterion4},
        {5, "order bounds on 200 random commuting instances", criterion5},
        {6, "closure dimension vs epsilon-grid oracle on 100 instances", criterion6},
        {7, "exp/log and P*Pinv roundtrips < 1e-50; branch-shift invariance", criterion7},
        {8, "sampler box dimension within 0.5 of the analytic order, < 60s", criterion8},
        {9, "homogeneity and region invariance, zero violations", criterion9},
    };
    int failures = 0;
    for (const auto& e : criteria) {
        Check c;
        try {
            c = e.fn();
        } catch (const std::exception& ex) {
            c.ok = false;
            c.why = std::string("exception: ") + ex.what();
        }
        if (c.ok) {
            std::cout << "criterion " << e.id << ": PASS - " << e.title << "\n";
        } else {
            std::cout << "criterion " << e.id << ": FAIL - " << e.title << " (" << c.why << ")\n";
            ++failures;
        }
        std::cout.flush();
    }
    return failures;
}

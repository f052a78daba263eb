#include <catch2/catch_amalgamated.hpp>

#include "orbitreg/normal_form.hpp"

using namespace orbitreg;

namespace {

BasisPtr make_basis(std::initializer_list<std::pair<const char*, const char*>> consts) {
    auto b = std::make_shared<ConstantBasis>();
    for (const auto& [n, v] : consts) b->add(n, v);
    return b;
}

Mat<SymbolicComplex> smat(const BasisPtr& b, const std::vector<std::vector<std::string>>& rows) {
    Mat<SymbolicComplex> m(rows.size(), rows[0].size(), SymbolicComplex(b));
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = 0; j < rows[i].size(); ++j) m(i, j) = parse_scalar(rows[i][j], b);
    return m;
}

GroupSpec make_spec(const BasisPtr& b, std::vector<Mat<SymbolicComplex>> gens, bool real = false) {
    GroupSpec s;
    s.n = gens[0].rows;
    s.real_field = real;
    s.basis = b;
    s.gens = std::move(gens);
    return s;
}

// The 4x4 unipotent pair: identity plus a single subdiagonal 1.
std::pair<Mat<SymbolicComplex>, Mat<SymbolicComplex>> unipotent_pair(const BasisPtr& b) {
    auto a = smat(b, {{"1", "0", "0", "0"}, {"0", "1", "0", "0"}, {"0", "0", "1", "0"}, {"1", "0", "0", "1"}});
    auto c = smat(b, {{"1", "0", "0", "0"}, {"0", "1", "0", "0"}, {"0", "0", "1", "0"}, {"0", "1", "0", "1"}});
    return {a, c};
}

BigFloat sym_residual(const Mat<SymbolicComplex>& x, const Mat<SymbolicComplex>& y) {
    return max_norm(to_numeric(x - y, 60));
}

}  // namespace

TEST_CASE("validate_spec rejects bad input") {
    auto b = make_basis({});
    auto rot = smat(b, {{"0", "1"}, {"-1", "0"}});
    auto diag23 = smat(b, {{"2", "0"}, {"0", "3"}});

    SECTION("non-commuting pair is named") {
        auto spec = make_spec(b, {diag23, rot});
        try {
            validate_spec(spec);
            FAIL("expected ValidationError");
        } catch (const ValidationError& e) {
            CHECK(std::string(e.what()).find("1 and 2") != std::string::npos);
        }
    }
    SECTION("singular generator") {
        auto spec = make_spec(b, {smat(b, {{"1", "1"}, {"1", "1"}})});
        CHECK_THROWS_AS(validate_spec(spec), ValidationError);
    }
    SECTION("real marker with complex entry") {
        auto spec = make_spec(b, {smat(b, {{"1 + 1i", "0"}, {"0", "1"}})}, true);
        CHECK_THROWS_AS(validate_spec(spec), ValidationError);
    }
    SECTION("valid diagonal spec passes") {
        CHECK_NOTHROW(validate_spec(make_spec(b, {diag23})));
    }
}

TEST_CASE("common generalized eigenspaces: reference decompositions") {
    auto b = make_basis({});

    SECTION("diag(2,3): two lines") {
        auto cs = common_generalized_eigenspaces(make_spec(b, {smat(b, {{"2", "0"}, {"0", "3"}})}));
        REQUIRE(cs.exact);
        REQUIRE(cs.sym.size() == 2);
        CHECK(cs.sym[0].basis.cols == 1);
        CHECK(cs.sym[1].basis.cols == 1);
        std::vector<mpq_class> mus;
        for (const auto& s : cs.sym) mus.push_back(s.mu[0].re.rational_value());
        std::sort(mus.begin(), mus.end());
        CHECK(mus == std::vector<mpq_class>{2, 3});
    }
    SECTION("unipotent pair: one 4-dim space, mu = 1 for both") {
        auto [a, c] = unipotent_pair(b);
        auto cs = common_generalized_eigenspaces(make_spec(b, {a, c}));
        REQUIRE(cs.exact);
        REQUIRE(cs.sym.size() == 1);
        CHECK(cs.sym[0].basis.cols == 4);
        CHECK(cs.sym[0].mu[0].re.rational_value() == 1);
        CHECK(cs.sym[0].mu[1].re.rational_value() == 1);
        CHECK(cs.sym[0].mu[0].im.is_zero());
    }
    SECTION("rotation: eigenlines for -i and i") {
        auto cs = common_generalized_eigenspaces(make_spec(b, {smat(b, {{"0", "1"}, {"-1", "0"}})}));
        REQUIRE(cs.exact);
        REQUIRE(cs.sym.size() == 2);
        for (const auto& s : cs.sym) {
            REQUIRE(s.basis.cols == 1);
            CHECK(s.mu[0].re.is_zero());
            CHECK(abs(s.mu[0].im.rational_value()) == 1);
            // (A - mu I) v = 0
            auto a = smat(b, {{"0", "1"}, {"-1", "0"}});
            SymbolicComplex top = a(0, 0) * s.basis(0, 0) + a(0, 1) * s.basis(1, 0) - s.mu[0] * s.basis(0, 0);
            SymbolicComplex bot = a(1, 0) * s.basis(0, 0) + a(1, 1) * s.basis(1, 0) - s.mu[0] * s.basis(1, 0);
            CHECK(top.is_zero());
            CHECK(bot.is_zero());
        }
    }
}

TEST_CASE("build_normal_form: diagonal group is already normal") {
    auto b = make_basis({});
    auto nf = build_normal_form(make_spec(b, {smat(b, {{"2", "0"}, {"0", "3"}})}));
    REQUIRE(nf.exact);
    CHECK(nf.sym->eta == std::vector<size_t>{1, 1});
    // canonical order puts eigenvalue 2 first; P is the identity
    CHECK(nf.sym->mu[0][0].re.rational_value() == 2);
    CHECK(nf.sym->mu[0][1].re.rational_value() == 3);
    for (size_t i = 0; i < 2; ++i)
        for (size_t j = 0; j < 2; ++j)
            CHECK(nf.sym->P(i, j).re.rational_value() == (i == j ? 1 : 0));
}

TEST_CASE("build_normal_form: unipotent pair lands in one 4-block") {
    auto b = make_basis({});
    auto [a, c] = unipotent_pair(b);
    auto spec = make_spec(b, {a, c});
    auto nf = build_normal_form(spec);
    REQUIRE(nf.exact);
    CHECK(nf.sym->eta == std::vector<size_t>{4});
    SymComplexPolicy sp{b};
    for (const auto& t : nf.sym->transformed) CHECK(verify_K_structure(t, nf.sym->eta, sp, true));
    // conjugation identity, exactly
    CHECK(sym_residual(nf.sym->P * nf.sym->transformed[0] * nf.sym->Pinv, a) == BigFloat(0L, 64));
    CHECK(sym_residual(nf.sym->P * nf.sym->transformed[1] * nf.sym->Pinv, c) == BigFloat(0L, 64));
    // P Pinv = I exactly
    auto pp = nf.sym->P * nf.sym->Pinv;
    for (size_t i = 0; i < 4; ++i)
        for (size_t j = 0; j < 4; ++j)
            CHECK(pp(i, j).re.rational_value() == (i == j ? 1 : 0));
    // commutativity preserved
    CHECK(sym_residual(nf.sym->transformed[0] * nf.sym->transformed[1],
                       nf.sym->transformed[1] * nf.sym->transformed[0]) == BigFloat(0L, 64));

    SECTION("idempotent on the already-normal output") {
        auto spec2 = make_spec(b, nf.sym->transformed);
        auto nf2 = build_normal_form(spec2);
        REQUIRE(nf2.exact);
        CHECK(nf2.sym->eta == nf.sym->eta);
        for (const auto& t : nf2.sym->transformed) CHECK(verify_K_structure(t, nf2.sym->eta, sp, true));
    }
    SECTION("deterministic rebuild") {
        auto nf2 = build_normal_form(spec);
        REQUIRE(nf2.exact);
        CHECK(nf2.sym->eta == nf.sym->eta);
        for (size_t i = 0; i < 16; ++i) CHECK(nf2.sym->P.a[i] == nf.sym->P.a[i]);
    }
}

TEST_CASE("build_normal_form: rotation diagonalizes to diag(-i, i)") {
    auto b = make_basis({});
    auto rot = smat(b, {{"0", "1"}, {"-1", "0"}});
    auto nf = build_normal_form(make_spec(b, {rot}));
    REQUIRE(nf.exact);
    CHECK(nf.sym->eta == std::vector<size_t>{1, 1});
    const auto& t = nf.sym->transformed[0];
    CHECK(t(0, 0).re.is_zero());
    CHECK(t(0, 0).im.rational_value() == -1);
    CHECK(t(1, 1).im.rational_value() == 1);
    CHECK(t(0, 1).is_zero());
    CHECK(t(1, 0).is_zero());
    // columns are eigenvectors: ratio second/first coordinate is -+i
    for (size_t j = 0; j < 2; ++j) {
        auto ratio = nf.sym->P(1, j) / nf.sym->P(0, j);
        CHECK(ratio.re.is_zero());
        CHECK(abs(ratio.im.rational_value()) == 1);
    }
    CHECK(sym_residual(nf.sym->P * t * nf.sym->Pinv, rot) == BigFloat(0L, 64));
}

TEST_CASE("verify_K_structure reference cases") {
    auto b = make_basis({});
    SymComplexPolicy sp{b};
    auto id4 = identity(4, sp);
    CHECK(verify_K_structure(id4, {4}, sp, true));
    auto [a, c] = unipotent_pair(b);
    CHECK(verify_K_structure(a, {4}, sp, true));
    auto d = smat(b, {{"2", "0"}, {"0", "3"}});
    CHECK_FALSE(verify_K_structure(d, {2}, sp));
    CHECK(verify_K_structure(d, {1, 1}, sp, true));
    auto z = smat(b, {{"0", "0"}, {"0", "0"}});
    CHECK(verify_K_structure(z, {2}, sp));
    CHECK_FALSE(verify_K_structure(z, {2}, sp, true));
}

TEST_CASE("numeric fallback for unrecognizable eigenvalues") {
    auto b = make_basis({{"sqrt2", "sqrt(2)"}});
    // eigenvalues (3 +- sqrt5)/2 are outside the declared span
    auto m = smat(b, {{"2", "1"}, {"1", "1"}});
    auto spec = make_spec(b, {m});
    auto nf = build_normal_form(spec);
    REQUIRE_FALSE(nf.exact);
    REQUIRE(nf.num.has_value());
    CHECK_FALSE(nf.notes.empty());
    CHECK(nf.num->eta == std::vector<size_t>{1, 1});
    // conjugation residual at the reported tolerance
    auto mn = to_numeric(m, 120);
    BigFloat resid = max_norm(nf.num->P * nf.num->transformed[0] * nf.num->Pinv - mn);
    CHECK(resid < pow10i(-50, bits_for_digits(60)));

    SECTION("--strict-exact escalates the downgrade") {
        auto strict = spec;
        strict.cfg.strict_exact = true;
        CHECK_THROWS_AS(build_normal_form(strict), TierError);
    }
}

TEST_CASE("ambiguously close eigenvalues abort with a precision demand") {
    auto b = make_basis({{"eps", "1e-40"}});
    auto m = smat(b, {{"1", "0"}, {"0", "1 + eps"}});
    CHECK_THROWS_AS(build_normal_form(make_spec(b, {m})), ClusterError);
}

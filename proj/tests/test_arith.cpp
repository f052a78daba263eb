#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "orbitreg/intlat.hpp"
#include "orbitreg/matrix.hpp"
#include "orbitreg/relations.hpp"
#include "orbitreg/symbolic.hpp"

using namespace orbitreg;

namespace {

BasisPtr make_basis(std::initializer_list<std::pair<const char*, const char*>> consts) {
    auto b = std::make_shared<ConstantBasis>();
    for (const auto& [n, v] : consts) b->add(n, v);
    return b;
}

// Digit strings frozen from an independent 30-digit evaluation.
const char* kPi30 = "3.14159265358979323846264338328";
const char* kOnePlusLog2_30 = "1.69314718055994530941723212146";

}  // namespace

TEST_CASE("evaluate: rational over the unit basis is exact") {
    auto b = std::make_shared<ConstantBasis>();
    SymbolicComplex x(b, mpq_class(1, 2));
    BigComplex v = evaluate(x, 30);
    CHECK(v.re == BigFloat(mpq_class(1, 2), v.re.prec()));
    CHECK(v.im.is_zero());
}

TEST_CASE("evaluate: pi and 1+log2 match frozen 30-digit references") {
    auto b = make_basis({{"pi", "pi"}, {"log2", "log(2)"}});
    mpfr_prec_t bits = bits_for_digits(40);
    BigFloat tol = pow10i(-29, bits);

    SymbolicComplex pi_val(b);
    pi_val.re[*b->index_of("pi")] = 1;
    CHECK(abs(evaluate(pi_val, 30).re - BigFloat(std::string(kPi30), bits)) < tol);

    SymbolicComplex x(b, mpq_class(1));
    x.re[*b->index_of("log2")] = 1;
    CHECK(abs(evaluate(x, 30).re - BigFloat(std::string(kOnePlusLog2_30), bits)) < tol);
}

TEST_CASE("evaluate: refinement stays within 10^(1-q1)") {
    auto b = make_basis({{"pi", "pi"}, {"sqrt2", "sqrt(2)"}});
    SymbolicComplex x(b, mpq_class(7, 3));
    x.re[1] = mpq_class(-2, 5);
    x.im[2] = mpq_class(11, 7);
    for (int q1 : {30, 45, 60}) {
        BigComplex a = evaluate(x, q1);
        BigComplex c = evaluate(x, q1 + 25);
        BigFloat tol = pow10i(1 - q1, bits_for_digits(q1 + 30));
        CHECK(abs(a.re - c.re) < tol);
        CHECK(abs(a.im - c.im) < tol);
    }
}

TEST_CASE("q_decompose: spec literals") {
    auto b = make_basis({{"sqrt2", "sqrt(2)"}, {"pi", "pi"}, {"log2", "log(2)"}});

    SymbolicComplex a = q_decompose("3/2*sqrt2", b);
    CHECK(a.re[0] == 0);
    CHECK(a.re[*b->index_of("sqrt2")] == mpq_class(3, 2));
    CHECK(a.im.is_zero());

    SymbolicComplex c = q_decompose("1 + 2i", b);
    CHECK(c.re[0] == 1);
    CHECK(c.im[0] == 2);

    SymbolicComplex d = q_decompose("pi/2 - 1/3 i", b);
    CHECK(d.re[*b->index_of("pi")] == mpq_class(1, 2));
    CHECK(d.re[0] == 0);
    CHECK(d.im[0] == mpq_class(-1, 3));

    SymbolicComplex e = q_decompose("-3/4*log2 + 1/2 i", b);
    CHECK(e.re[*b->index_of("log2")] == mpq_class(-3, 4));
    CHECK(e.im[0] == mpq_class(1, 2));

    CHECK_THROWS_AS(q_decompose("2*tau", b), ValidationError);
    CHECK_THROWS_AS(q_decompose("1/", b), ValidationError);
}

TEST_CASE("scalar printing round-trips") {
    auto b = make_basis({{"sqrt2", "sqrt(2)"}, {"pi", "pi"}});
    std::mt19937 rng(12345);
    std::uniform_int_distribution<int> num(-8, 8), den(1, 9), idx(0, 2);
    for (int trial = 0; trial < 200; ++trial) {
        SymbolicComplex x(b);
        for (int terms = 0; terms < 3; ++terms) {
            mpq_class q(num(rng), den(rng));
            q.canonicalize();
            if (trial % 2) x.re[idx(rng)] += q;
            else x.im[idx(rng)] += q;
        }
        SymbolicComplex y = q_decompose(print_scalar(x), b);
        CHECK(x == y);
    }
}

TEST_CASE("symbolic products honor declared rules") {
    auto raw = std::make_shared<ConstantBasis>();
    size_t s2 = raw->add("sqrt2", "sqrt(2)");
    std::vector<mpq_class> two{mpq_class(2), mpq_class(0)};
    raw->add("pi", "pi");
    two.resize(3, mpq_class(0));
    raw->set_product(s2, s2, two);
    BasisPtr b = raw;

    SymbolicReal r2(b);
    r2[s2] = 1;
    SymbolicReal prod = r2 * r2;
    CHECK(prod.is_rational());
    CHECK(prod.rational_value() == 2);

    SymbolicReal pi_val(b);
    pi_val[2] = 1;
    CHECK_FALSE(pi_val.try_mul(pi_val).has_value());

    // division in Q(sqrt2): 1 / (1 + sqrt2) = sqrt2 - 1
    SymbolicReal one(b, mpq_class(1));
    auto q = try_div(one, one + r2);
    REQUIRE(q.has_value());
    CHECK((*q)[0] == -1);
    CHECK((*q)[s2] == 1);
}

TEST_CASE("integer_relations exact: spec examples") {
    auto b = make_basis({{"sqrt2", "sqrt(2)"}, {"log2", "log(2)"}, {"log3", "log(3)"}});

    SECTION("1 and 1/2") {
        std::vector<SymbolicReal> v{SymbolicReal(b, mpq_class(1)), SymbolicReal(b, mpq_class(1, 2))};
        auto r = integer_relations_exact(v);
        REQUIRE(r.basis.size() == 1);
        CHECK(r.basis[0] == ZVec{1, -2});
    }
    SECTION("log2 and log3: independent by declaration") {
        SymbolicReal l2(b), l3(b);
        l2[*b->index_of("log2")] = 1;
        l3[*b->index_of("log3")] = 1;
        auto r = integer_relations_exact({l2, l3});
        CHECK(r.basis.empty());
    }
    SECTION("1, sqrt2, 1+sqrt2") {
        SymbolicReal one(b, mpq_class(1)), r2(b);
        r2[*b->index_of("sqrt2")] = 1;
        auto r = integer_relations_exact({one, r2, one + r2});
        REQUIRE(r.basis.size() == 1);
        // brute-force oracle over |s_i| <= 3
        std::vector<SymbolicReal> v{one, r2, one + r2};
        std::vector<ZVec> found;
        for (int a = -3; a <= 3; ++a)
            for (int c = -3; c <= 3; ++c)
                for (int d = -3; d <= 3; ++d) {
                    if (a == 0 && c == 0 && d == 0) continue;
                    SymbolicReal s = mpq_class(a) * v[0] + mpq_class(c) * v[1] + mpq_class(d) * v[2];
                    if (s.is_zero()) found.push_back({a, c, d});
                }
        REQUIRE_FALSE(found.empty());
        // the computed basis vector is among the brute-force hits
        ZVec got = r.basis[0];
        bool hit = false;
        for (const auto& f : found)
            if (f == got) hit = true;
        CHECK(hit);
        CHECK(got == ZVec{1, 1, -1});
    }
}

TEST_CASE("relation basis vectors annihilate the input exactly") {
    auto b = make_basis({{"sqrt2", "sqrt(2)"}, {"pi", "pi"}});
    std::mt19937 rng(99);
    std::uniform_int_distribution<int> coef(-5, 5);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<SymbolicReal> v;
        for (int k = 0; k < 4; ++k) {
            SymbolicReal x(b);
            for (size_t j = 0; j < 3; ++j) x[j] = coef(rng);
            v.push_back(x);
        }
        auto r = integer_relations_exact(v);
        for (const auto& s : r.basis) {
            SymbolicReal acc(b);
            for (size_t k = 0; k < v.size(); ++k) acc = acc + mpq_class(s[k]) * v[k];
            CHECK(acc.is_zero());
        }
    }
}

TEST_CASE("numeric relations reproduce exact answers on small rationals") {
    auto b = std::make_shared<ConstantBasis>();
    std::mt19937 rng(7);
    std::uniform_int_distribution<int> num(-100, 100), den(1, 100);
    const int digits = 60;
    BigFloat tau = default_tau(digits);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<SymbolicReal> sym;
        std::vector<BigFloat> flt;
        for (int k = 0; k < 3; ++k) {
            mpq_class q(num(rng), den(rng));
            q.canonicalize();
            sym.emplace_back(b, q);
            flt.emplace_back(q, bits_for_digits(digits));
        }
        auto ex = integer_relations_exact(sym);
        auto nu = integer_relations_numeric(flt, digits, tau);
        CHECK(nu.heuristic);
        CHECK(ex.basis == nu.basis);
    }
}

TEST_CASE("numeric relations refuse permissive thresholds") {
    std::vector<BigFloat> v{BigFloat(1L, 64)};
    CHECK_THROWS_AS(integer_relations_numeric(v, 60, BigFloat(1e-4, 64)), ValidationError);
}

TEST_CASE("recognize_value identifies declared logarithms") {
    auto b = make_basis({{"log2", "log(2)"}, {"log3", "log(3)"}, {"pi", "pi"}});
    const int digits = 60;
    auto c = recognize_value([&](int d) { return log(BigFloat(2L, bits_for_digits(d))); }, *b, digits);
    REQUIRE(c.has_value());
    CHECK((*c)[0] == 0);
    CHECK((*c)[*b->index_of("log2")] == 1);
    CHECK((*c)[*b->index_of("log3")] == 0);
    CHECK((*c)[*b->index_of("pi")] == 0);

    // log 12 = 2 log2 + log3
    auto c12 = recognize_value([&](int d) { return log(BigFloat(12L, bits_for_digits(d))); }, *b, digits);
    REQUIRE(c12.has_value());
    CHECK((*c12)[*b->index_of("log2")] == 2);
    CHECK((*c12)[*b->index_of("log3")] == 1);

    // log 5 is outside the declared span
    auto c5 = recognize_value([&](int d) { return log(BigFloat(5L, bits_for_digits(d))); }, *b, digits);
    CHECK_FALSE(c5.has_value());
}

TEST_CASE("integer lattice utilities") {
    SECTION("kernel of integer matrix") {
        ZMat a{{1, 2, 3}, {2, 4, 6}};
        auto k = intlat::kernel_int(a);
        REQUIRE(k.size() == 2);
        for (const auto& v : k) {
            mpz_class s = v[0] + 2 * v[1] + 3 * v[2];
            CHECK(s == 0);
        }
    }
    SECTION("hnf_rows canonical form") {
        ZMat b{{2, 4}, {3, 5}};
        auto h = intlat::hnf_rows(b);
        REQUIRE(h.size() == 2);
        CHECK(h[0][0] > 0);
        CHECK(h[1][0] == 0);
    }
    SECTION("complete_saturated extends (2,1)") {
        ZMat s{{2, 1}};
        auto c = intlat::complete_saturated(s, 2);
        REQUIRE(c.size() == 1);
        mpz_class det = mpz_class(2) * c[0][1] - mpz_class(1) * c[0][0];
        CHECK((det == 1 || det == -1));
    }
    SECTION("complete_saturated rejects non-saturated input") {
        ZMat s{{2, 0}};
        CHECK_THROWS_AS(intlat::complete_saturated(s, 2), ValidationError);
    }
    SECTION("LLL finds an obvious short vector") {
        ZMat b{{1, 0, 100000}, {0, 1, 100001}};
        intlat::lll_reduce(b);
        bool has_short = false;
        for (const auto& v : b) {
            mpz_class n2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
            if (n2 <= 10) has_short = true;
        }
        CHECK(has_short);
    }
}

#include <catch2/catch_amalgamated.hpp>

#include <map>

#include "oscbound/chain.hpp"
#include "oscbound/rng.hpp"

using namespace oscbound;

namespace {

// Independent mini differentiator over a plain monomial map, used as the
// oracle for chain entries (kept free of the Polynomial implementation).
using MonoMap = std::map<std::vector<int>, double>;

MonoMap mono_diff(const MonoMap& p, int var) {
    MonoMap out;
    for (const auto& [e, c] : p) {
        if (e[var] == 0) continue;
        std::vector<int> d = e;
        d[var] -= 1;
        out[d] += c * e[var];
    }
    return out;
}

MonoMap to_mono(const Polynomial& p) {
    MonoMap out;
    for (const auto& [e, c] : p.terms()) out[e] = c.to_double();
    return out;
}

bool mono_equal(const MonoMap& a, const MonoMap& b) {
    MonoMap ca, cb;
    for (const auto& [e, c] : a)
        if (c != 0.0) ca[e] = c;
    for (const auto& [e, c] : b)
        if (c != 0.0) cb[e] = c;
    return ca == cb;
}

Polynomial P(const std::string& s, int n) { return parse_polynomial(s, n); }

} // namespace

TEST_CASE("next_matrix of the x0*x1 gradient row is the constant Hessian") {
    PolyMatrix seed(1, 2, {P("x1", 2), P("x0", 2)});
    PolyMatrix h = next_matrix(seed);
    REQUIRE(h.rows() == 2);
    REQUIRE(h.cols() == 2);
    CHECK(h.at(0, 0).is_zero());
    CHECK(h.at(0, 1) == Polynomial::constant(2, Rational(1)));
    CHECK(h.at(1, 0) == Polynomial::constant(2, Rational(1)));
    CHECK(h.at(1, 1).is_zero());
}

TEST_CASE("next_matrix in one variable") {
    PolyMatrix seed(1, 1, {P("3*x0^2", 1)});
    PolyMatrix d = next_matrix(seed);
    REQUIRE(d.rows() == 1);
    REQUIRE(d.cols() == 1);
    CHECK(d.at(0, 0) == P("6*x0", 1));
}

TEST_CASE("next_matrix of a constant matrix is zero") {
    PolyMatrix seed(2, 2,
                    {Polynomial::constant(2, Rational(1)), Polynomial::constant(2, Rational(2)),
                     Polynomial::constant(2, Rational(3)), Polynomial::constant(2, Rational(4))});
    PolyMatrix d = next_matrix(seed);
    REQUIRE(d.rows() == 2);
    REQUIRE(d.cols() == 4);
    for (const auto& e : d.entries()) CHECK(e.is_zero());
}

TEST_CASE("column-major flattening order") {
    // seed [[a, b], [c, d]] must flatten as a, c, b, d
    PolyMatrix seed(2, 2, {P("x0", 2), P("x0^3", 2), P("x0^2", 2), P("x0^4", 2)});
    PolyMatrix d = next_matrix(seed);
    CHECK(d.at(0, 0) == P("1", 2));
    CHECK(d.at(0, 1) == P("2*x0", 2));
    CHECK(d.at(0, 2) == P("3*x0^2", 2));
    CHECK(d.at(0, 3) == P("4*x0^3", 2));
}

TEST_CASE("build_chain in one variable to depth 2") {
    DerivativeChain chain = build_chain(PolyMatrix(1, 1, {P("3*x0^2", 1)}), 2);
    REQUIRE(chain.depth() == 2);
    CHECK(chain.level(0).at(0, 0) == P("3*x0^2", 1));
    CHECK(chain.level(1).at(0, 0) == P("6*x0", 1));
    CHECK(chain.level(2).at(0, 0) == P("6", 1));
}

TEST_CASE("depth zero keeps only the seed") {
    DerivativeChain chain = build_chain(PolyMatrix(1, 2, {P("x1", 2), P("x0", 2)}), 0);
    CHECK(chain.depth() == 0);
    CHECK(chain.matrices().size() == 1);
}

TEST_CASE("chain shape law") {
    const Polynomial F = P("x0^2*x1 + x1^3", 2);
    DerivativeChain chain = build_chain(gradient_row(F), 3);
    const int n = 2, r = 1, m = 2;
    for (int j = 1; j <= 3; ++j) {
        CHECK(chain.level(j).rows() == n);
        int expect = r * m;
        for (int i = 1; i < j; ++i) expect *= n;
        CHECK(chain.level(j).cols() == expect);
    }
}

TEST_CASE("chain against the independent differentiation oracle") {
    const Polynomial F = P("x0^2*x1", 2);
    DerivativeChain chain = build_chain(gradient_row(F), 2);

    // oracle: flatten and differentiate with the local mini differentiator
    std::vector<MonoMap> flat0;
    for (const auto& e : chain.level(0).flatten_columns()) flat0.push_back(to_mono(e));
    // A_1[i][s] = d flat0[s] / d x_i
    for (int i = 0; i < 2; ++i)
        for (int s = 0; s < 2; ++s)
            CHECK(mono_equal(to_mono(chain.level(1).at(i, s)), mono_diff(flat0[s], i)));
    // A_2 columns come from the column-major flattening of A_1
    std::vector<MonoMap> flat1;
    for (int j = 0; j < chain.level(1).cols(); ++j)
        for (int i = 0; i < chain.level(1).rows(); ++i)
            flat1.push_back(to_mono(chain.level(1).at(i, j)));
    for (int i = 0; i < 2; ++i)
        for (int s = 0; s < 4; ++s)
            CHECK(mono_equal(to_mono(chain.level(2).at(i, s)), mono_diff(flat1[s], i)));
}

TEST_CASE("mixed partials appear as equal entries") {
    CounterRng rng(77);
    for (std::uint64_t trial = 0; trial < 10; ++trial) {
        Polynomial F(2);
        for (int t = 0; t < 4; ++t) {
            Polynomial::Exponents e = {static_cast<int>(rng.uniform(trial * 7 + t, 0) * 4),
                                       static_cast<int>(rng.uniform(trial * 7 + t, 1) * 4)};
            F.add_term(e, Rational(static_cast<int>(rng.uniform(trial * 7 + t, 2) * 9) - 4));
        }
        if (F.is_zero()) continue;
        DerivativeChain chain = build_chain(gradient_row(F), 2);
        // A_1 is the Hessian: symmetric
        CHECK(chain.level(1).at(0, 1) == chain.level(1).at(1, 0));
        // A_2: d/dxi of flattened Hessian (H00, H10, H01, H11);
        // equality of mixed third partials makes these entries coincide:
        const PolyMatrix& a2 = chain.level(2);
        CHECK(a2.at(1, 0) == a2.at(0, 1));  // F_001 in two orders
        CHECK(a2.at(1, 1) == a2.at(0, 3));  // F_011 in two orders
        CHECK(a2.at(1, 0) == a2.at(0, 2));  // flattened symmetry H10 vs H01
    }
}

TEST_CASE("degree drops by one per level") {
    const Polynomial F = P("x0^4 + x0*x1^3", 2);
    DerivativeChain chain = build_chain(gradient_row(F), 3);
    int prev = chain.level(0).max_total_degree();
    for (int j = 1; j <= 3; ++j) {
        const int deg = chain.level(j).max_total_degree();
        CHECK(deg == std::max(0, prev - 1));
        prev = deg;
    }
}

TEST_CASE("column cap refuses oversized chains") {
    const Polynomial F = P("x0^5 + x1^5 + x2^5", 3);
    CHECK_THROWS_AS(build_chain(gradient_row(F), 9), ChainTooLarge);
    CHECK_NOTHROW(build_chain(gradient_row(F), 3));
}

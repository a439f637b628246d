#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "oscbound/rational.hpp"

namespace oscbound {

/// Raised by the polynomial text parser; position is a 0-based byte offset
/// into the source string.
struct PolyParseError : std::runtime_error {
    PolyParseError(const std::string& msg, std::size_t pos)
        : std::runtime_error(msg + " at position " + std::to_string(pos)), position(pos) {}
    std::size_t position;
};

/// Exact multivariate polynomial over rationals in variables x0..x{n-1}.
/// Terms are a map from a dense exponent vector (length n) to a nonzero
/// rational coefficient; the zero polynomial has an empty term map.
class Polynomial {
public:
    using Exponents = std::vector<int>;
    using TermMap = std::map<Exponents, Rational>;

    explicit Polynomial(int num_vars) : num_vars_(num_vars) {
        if (num_vars < 1) throw std::invalid_argument("polynomial needs at least one variable");
    }

    [[nodiscard]] int num_vars() const { return num_vars_; }
    [[nodiscard]] const TermMap& terms() const { return terms_; }
    [[nodiscard]] bool is_zero() const { return terms_.empty(); }

    [[nodiscard]] bool is_constant() const {
        if (terms_.empty()) return true;
        return terms_.size() == 1 && total_degree() == 0;
    }

    /// Max over terms of the exponent sum; 0 for the zero polynomial.
    [[nodiscard]] int total_degree() const {
        int deg = 0;
        for (const auto& [e, c] : terms_) {
            int d = 0;
            for (int x : e) d += x;
            deg = std::max(deg, d);
        }
        return deg;
    }

    void add_term(const Exponents& exps, const Rational& coeff) {
        if (static_cast<int>(exps.size()) != num_vars_)
            throw std::invalid_argument("exponent vector length mismatch");
        for (int e : exps)
            if (e < 0) throw std::invalid_argument("negative exponent");
        if (coeff.is_zero()) return;
        auto it = terms_.find(exps);
        if (it == terms_.end()) {
            terms_.emplace(exps, coeff);
        } else {
            it->second += coeff;
            if (it->second.is_zero()) terms_.erase(it);
        }
    }

    static Polynomial zero(int n) { return Polynomial(n); }

    static Polynomial constant(int n, const Rational& c) {
        Polynomial p(n);
        p.add_term(Exponents(n, 0), c);
        return p;
    }

    static Polynomial variable(int n, int i) {
        if (i < 0 || i >= n) throw std::out_of_range("variable index out of range");
        Polynomial p(n);
        Exponents e(n, 0);
        e[i] = 1;
        p.add_term(e, Rational(1));
        return p;
    }

    friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
        check_same_vars(a, b);
        Polynomial r = a;
        for (const auto& [e, c] : b.terms_) r.add_term(e, c);
        return r;
    }
    friend Polynomial operator-(const Polynomial& a, const Polynomial& b) {
        check_same_vars(a, b);
        Polynomial r = a;
        for (const auto& [e, c] : b.terms_) r.add_term(e, -c);
        return r;
    }
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
        check_same_vars(a, b);
        Polynomial r(a.num_vars_);
        for (const auto& [ea, ca] : a.terms_) {
            for (const auto& [eb, cb] : b.terms_) {
                Exponents e(a.num_vars_);
                for (int i = 0; i < a.num_vars_; ++i) e[i] = ea[i] + eb[i];
                r.add_term(e, ca * cb);
            }
        }
        return r;
    }
    friend Polynomial operator*(const Rational& c, const Polynomial& p) {
        Polynomial r(p.num_vars_);
        for (const auto& [e, pc] : p.terms_) r.add_term(e, c * pc);
        return r;
    }

    [[nodiscard]] Polynomial pow(int e) const {
        if (e < 0) throw std::invalid_argument("negative exponent");
        Polynomial r = constant(num_vars_, Rational(1));
        for (int i = 0; i < e; ++i) r = r * (*this);
        return r;
    }

    friend bool operator==(const Polynomial& a, const Polynomial& b) {
        return a.num_vars_ == b.num_vars_ && a.terms_ == b.terms_;
    }

    /// Exact symbolic partial derivative with respect to variable i.
    [[nodiscard]] Polynomial partial_derivative(int i) const {
        if (i < 0 || i >= num_vars_) throw std::out_of_range("derivative index out of range");
        Polynomial r(num_vars_);
        for (const auto& [e, c] : terms_) {
            if (e[i] == 0) continue;
            Exponents d = e;
            d[i] -= 1;
            r.add_term(d, c * Rational(e[i]));
        }
        return r;
    }

    [[nodiscard]] std::vector<Polynomial> gradient() const {
        std::vector<Polynomial> g;
        g.reserve(num_vars_);
        for (int i = 0; i < num_vars_; ++i) g.push_back(partial_derivative(i));
        return g;
    }

    /// Monomials are accumulated in term-map order (sorted exponent vectors)
    /// in extended precision and rounded to double once at the end.
    [[nodiscard]] double evaluate(const std::vector<double>& point) const {
        if (static_cast<int>(point.size()) != num_vars_)
            throw std::invalid_argument("evaluation point dimension mismatch");
        long double acc = 0.0L;
        for (const auto& [e, c] : terms_)
            acc += term_value(c.to_long_double(), e.data(), num_vars_, point.data());
        return static_cast<double>(acc);
    }

    static long double term_value(long double coeff, const int* exps, int n, const double* x) {
        long double m = coeff;
        for (int d = 0; d < n; ++d)
            for (int j = 0; j < exps[d]; ++j) m *= x[d];
        return m;
    }

    /// Canonical text form; parse(print(p)) == p exactly.
    [[nodiscard]] std::string print() const {
        if (terms_.empty()) return "0";
        std::string out;
        // leading term last in map order looks most natural (highest lex first)
        for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
            const auto& [e, c] = *it;
            const bool neg = c.num() < 0;
            if (out.empty()) {
                if (neg) out += "-";
            } else {
                out += neg ? " - " : " + ";
            }
            const Rational a = neg ? -c : c;
            bool has_var = false;
            for (int x : e)
                if (x > 0) has_var = true;
            if (!has_var) {
                out += a.str();
                continue;
            }
            bool need_star = false;
            if (!(a.num() == 1 && a.den() == 1)) {
                out += a.str();
                need_star = true;
            }
            for (int d = 0; d < num_vars_; ++d) {
                if (e[d] == 0) continue;
                if (need_star) out += "*";
                out += "x" + std::to_string(d);
                if (e[d] > 1) out += "^" + std::to_string(e[d]);
                need_star = true;
            }
        }
        return out;
    }

private:
    static void check_same_vars(const Polynomial& a, const Polynomial& b) {
        if (a.num_vars_ != b.num_vars_)
            throw std::invalid_argument("polynomial variable-count mismatch");
    }

    int num_vars_;
    TermMap terms_;
};

namespace detail {

/// Recursive-descent parser for the textual grammar:
///   expr   := ['+'|'-'] term (('+'|'-') term)*
///   term   := factor ('*' factor)*
///   factor := number | var ['^' int] | '(' expr ')'
///   number := int ['/' int]          (rational coefficient)
///   var    := 'x' int                (index < n)
class PolyParser {
public:
    PolyParser(const std::string& src, int n) : src_(src), n_(n) {}

    Polynomial parse() {
        Polynomial p = expr();
        skip_ws();
        if (pos_ != src_.size()) fail("unexpected trailing input");
        return p;
    }

private:
    Polynomial expr() {
        skip_ws();
        bool neg = false;
        while (peek() == '+' || peek() == '-') {
            if (get() == '-') neg = !neg;
            skip_ws();
        }
        Polynomial acc = term();
        if (neg) acc = Rational(-1) * acc;
        for (;;) {
            skip_ws();
            char c = peek();
            if (c != '+' && c != '-') break;
            get();
            Polynomial t = term();
            acc = (c == '+') ? acc + t : acc - t;
        }
        return acc;
    }

    Polynomial term() {
        Polynomial acc = factor();
        for (;;) {
            skip_ws();
            if (peek() != '*') break;
            get();
            acc = acc * factor();
        }
        return acc;
    }

    Polynomial factor() {
        skip_ws();
        char c = peek();
        if (c == '(') {
            get();
            Polynomial p = expr();
            skip_ws();
            if (peek() != ')') fail("expected ')'");
            get();
            return p;
        }
        if (c == '-' || c == '+') {
            bool neg = get() == '-';
            Polynomial p = factor();
            return neg ? Rational(-1) * p : p;
        }
        if (c == 'x') {
            get();
            std::size_t at = pos_;
            long idx = integer("variable index");
            if (idx >= n_) {
                pos_ = at;
                fail("variable index " + std::to_string(idx) + " out of range for n=" +
                     std::to_string(n_));
            }
            int e = 1;
            skip_ws();
            if (peek() == '^') {
                get();
                skip_ws();
                if (peek() == '-') fail("negative exponent");
                e = static_cast<int>(integer("exponent"));
            }
            return Polynomial::variable(n_, static_cast<int>(idx)).pow(e);
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::int64_t num = integer("number");
            std::int64_t den = 1;
            skip_ws();
            if (peek() == '/') {
                get();
                skip_ws();
                std::size_t at = pos_;
                den = integer("denominator");
                if (den == 0) { pos_ = at; fail("zero denominator"); }
            }
            return Polynomial::constant(n_, Rational(num, den));
        }
        fail(c == '\0' ? "unexpected end of input" : std::string("unexpected character '") + c + "'");
    }

    std::int64_t integer(const std::string& what) {
        skip_ws();
        if (!std::isdigit(static_cast<unsigned char>(peek()))) fail("expected " + what);
        std::int64_t v = 0;
        while (std::isdigit(static_cast<unsigned char>(peek()))) {
            v = v * 10 + (get() - '0');
            if (v < 0) fail(what + " overflows");
        }
        return v;
    }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }
    char peek() const { return pos_ < src_.size() ? src_[pos_] : '\0'; }
    char get() { return src_[pos_++]; }
    [[noreturn]] void fail(const std::string& msg) const { throw PolyParseError(msg, pos_); }

    const std::string& src_;
    long n_;
    std::size_t pos_ = 0;
};

} // namespace detail

/// Parse the textual grammar into a canonical polynomial over n variables.
inline Polynomial parse_polynomial(const std::string& doc, int n) {
    return detail::PolyParser(doc, n).parse();
}

/// Flattened, double-coefficient copy of a polynomial for hot loops.
/// Evaluation follows the exact same accumulation order and arithmetic as
/// Polynomial::evaluate, so both paths produce bit-identical results.
class CompiledPoly {
public:
    CompiledPoly() = default;

    explicit CompiledPoly(const Polynomial& p) : n_(p.num_vars()) {
        for (const auto& [e, c] : p.terms()) {
            coeffs_.push_back(c.to_long_double());
            exps_.insert(exps_.end(), e.begin(), e.end());
        }
    }

    [[nodiscard]] int num_vars() const { return n_; }

    [[nodiscard]] double operator()(const double* x) const {
        long double acc = 0.0L;
        const int* e = exps_.data();
        for (std::size_t t = 0; t < coeffs_.size(); ++t, e += n_)
            acc += Polynomial::term_value(coeffs_[t], e, n_, x);
        return static_cast<double>(acc);
    }
    [[nodiscard]] double operator()(const std::vector<double>& x) const { return (*this)(x.data()); }

private:
    int n_ = 0;
    std::vector<long double> coeffs_;
    std::vector<int> exps_;
};

/// Axis-aligned box, optionally cut down by polynomial sign constraints.
struct BoxDomain {
    enum class Relation { le_zero, ge_zero };
    struct Constraint {
        Polynomial poly;
        Relation relation;
    };

    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<Constraint> constraints;

    BoxDomain(std::vector<double> lo, std::vector<double> hi)
        : lower(std::move(lo)), upper(std::move(hi)) {
        if (lower.size() != upper.size() || lower.empty())
            throw std::invalid_argument("box bounds dimension mismatch");
        for (std::size_t i = 0; i < lower.size(); ++i)
            if (!(lower[i] < upper[i]))
                throw std::invalid_argument("box requires lower < upper on every axis");
    }

    [[nodiscard]] int dim() const { return static_cast<int>(lower.size()); }

    [[nodiscard]] double box_volume() const {
        double v = 1.0;
        for (std::size_t i = 0; i < lower.size(); ++i) v *= upper[i] - lower[i];
        return v;
    }

    [[nodiscard]] bool has_constraints() const { return !constraints.empty(); }

    [[nodiscard]] bool satisfies_constraints(const std::vector<double>& x) const {
        for (const auto& c : constraints) {
            const double v = c.poly.evaluate(x);
            if (c.relation == Relation::le_zero ? v > 0.0 : v < 0.0) return false;
        }
        return true;
    }
};

} // namespace oscbound

#pragma once

#include <map>
#include <string>
#include <vector>

#include "obsyn/rational.hpp"

namespace obsyn {

/// Multivariate polynomial with rational coefficients over integer
/// variable ids, kept in expanded canonical form: monomials are sorted
/// id multisets, like terms merged, zero coefficients dropped.
class Poly {
  public:
    using Monomial = std::vector<int>;  // sorted variable ids, with multiplicity

    Poly() = default;

    static Poly constant(Rational c) {
        Poly p;
        if (!c.is_zero()) p.terms_[{}] = std::move(c);
        return p;
    }

    static Poly var(int id) {
        Poly p;
        p.terms_[{id}] = Rational(1);
        return p;
    }

    bool is_zero() const { return terms_.empty(); }

    bool is_constant() const {
        return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.empty());
    }

    Rational constant_value() const {
        if (terms_.empty()) return Rational(0);
        if (!is_constant()) throw std::logic_error("Poly: not a constant");
        return terms_.begin()->second;
    }

    const std::map<Monomial, Rational>& terms() const { return terms_; }

    Poly& operator+=(const Poly& o) {
        for (const auto& [m, c] : o.terms_) add_term(m, c);
        return *this;
    }
    Poly& operator-=(const Poly& o) {
        for (const auto& [m, c] : o.terms_) add_term(m, -c);
        return *this;
    }
    friend Poly operator+(Poly a, const Poly& b) { a += b; return a; }
    friend Poly operator-(Poly a, const Poly& b) { a -= b; return a; }

    friend Poly operator*(const Poly& a, const Poly& b) {
        Poly out;
        for (const auto& [ma, ca] : a.terms_) {
            for (const auto& [mb, cb] : b.terms_) {
                Monomial m;
                m.reserve(ma.size() + mb.size());
                std::merge(ma.begin(), ma.end(), mb.begin(), mb.end(), std::back_inserter(m));
                out.add_term(m, ca * cb);
            }
        }
        return out;
    }

    Poly& operator*=(const Rational& c) {
        if (c.is_zero()) {
            terms_.clear();
            return *this;
        }
        for (auto& [m, coeff] : terms_) coeff *= c;
        return *this;
    }
    friend Poly operator*(Poly a, const Rational& c) { a *= c; return a; }
    friend Poly operator*(const Rational& c, Poly a) { a *= c; return a; }

    friend bool operator==(const Poly& a, const Poly& b) { return a.terms_ == b.terms_; }

    /// Replaces one variable by a polynomial and re-expands.
    Poly substitute(int id, const Poly& replacement) const {
        Poly out;
        for (const auto& [m, c] : terms_) {
            int power = 0;
            Monomial rest;
            for (int v : m) {
                if (v == id)
                    ++power;
                else
                    rest.push_back(v);
            }
            Poly term;
            term.add_term(rest, c);
            for (int i = 0; i < power; ++i) term = term * replacement;
            out += term;
        }
        return out;
    }

    /// Exact evaluation under a full variable assignment.
    Rational eval(const std::vector<Rational>& assignment) const {
        Rational out;
        for (const auto& [m, c] : terms_) {
            Rational t = c;
            for (int v : m) t *= assignment[v];
            out += t;
        }
        return out;
    }

    /// Degree-respecting print: "1/2*x*y + z - 1" with names supplied
    /// per variable id. Deterministic term order.
    std::string str(const std::vector<std::string>& names) const {
        if (terms_.empty()) return "0";
        std::string out;
        for (const auto& [m, c] : terms_) {
            const bool negative = c.sign() < 0;
            const Rational mag = negative ? -c : c;
            if (out.empty())
                out += negative ? "-" : "";
            else
                out += negative ? " - " : " + ";
            const bool unit = mag.is_one() && !m.empty();
            if (!unit) out += mag.str();
            for (size_t i = 0; i < m.size(); ++i) {
                if (!unit || i > 0) out += "*";
                out += names[m[i]];
            }
        }
        return out;
    }

  private:
    void add_term(const Monomial& m, const Rational& c) {
        if (c.is_zero()) return;
        auto it = terms_.find(m);
        if (it == terms_.end()) {
            terms_.emplace(m, c);
            return;
        }
        it->second += c;
        if (it->second.is_zero()) terms_.erase(it);
    }

    std::map<Monomial, Rational> terms_;
};

}  // namespace obsyn

#pragma once

#include <gmpxx.h>

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace obsyn {

/// Error raised when a rational literal cannot be parsed.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Exact arbitrary-precision fraction, always in lowest terms with a
/// positive denominator. All probabilities, rewards, thresholds and
/// values in the toolkit are of this type; no floating point is used
/// anywhere in the analysis pipeline.
class Rational {
  public:
    Rational() : v_(0) {}
    Rational(long n) : v_(n) {}
    Rational(long n, long d) : v_(n, d) {
        if (d == 0) throw std::invalid_argument("Rational: zero denominator");
        v_.canonicalize();
    }
    explicit Rational(mpq_class q) : v_(std::move(q)) { v_.canonicalize(); }

    /// Parses "num/den" or an integer literal (optionally negative).
    static Rational parse(const std::string& text) {
        const auto bad = [&] { return ParseError("not a rational literal: '" + text + "'"); };
        if (text.empty()) throw bad();
        const auto slash = text.find('/');
        const std::string num = text.substr(0, slash);
        if (!is_integer_literal(num)) throw bad();
        mpq_class q;
        if (slash == std::string::npos) {
            q = mpq_class(mpz_class(num, 10));
        } else {
            const std::string den = text.substr(slash + 1);
            if (!is_integer_literal(den) || den[0] == '-') throw bad();
            mpz_class d(den, 10);
            if (d == 0) throw bad();
            q = mpq_class(mpz_class(num, 10), d);
        }
        q.canonicalize();
        return Rational(std::move(q), already_canonical{});
    }

    /// Serializes as "num/den", or just "num" for integers.
    std::string str() const {
        if (v_.get_den() == 1) return v_.get_num().get_str();
        return v_.get_num().get_str() + "/" + v_.get_den().get_str();
    }

    bool is_zero() const { return sgn(v_) == 0; }
    bool is_one() const { return v_ == 1; }
    int sign() const { return sgn(v_); }
    bool is_integer() const { return v_.get_den() == 1; }

    const mpq_class& raw() const { return v_; }
    const mpz_class& num() const { return v_.get_num(); }
    const mpz_class& den() const { return v_.get_den(); }

    Rational& operator+=(const Rational& o) { v_ += o.v_; return *this; }
    Rational& operator-=(const Rational& o) { v_ -= o.v_; return *this; }
    Rational& operator*=(const Rational& o) { v_ *= o.v_; return *this; }
    Rational& operator/=(const Rational& o) {
        if (o.is_zero()) throw std::invalid_argument("Rational: division by zero");
        v_ /= o.v_;
        return *this;
    }

    friend Rational operator+(Rational a, const Rational& b) { a += b; return a; }
    friend Rational operator-(Rational a, const Rational& b) { a -= b; return a; }
    friend Rational operator*(Rational a, const Rational& b) { a *= b; return a; }
    friend Rational operator/(Rational a, const Rational& b) { a /= b; return a; }
    friend Rational operator-(const Rational& a) { return Rational(mpq_class(-a.v_), already_canonical{}); }

    friend bool operator==(const Rational& a, const Rational& b) { return a.v_ == b.v_; }
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
        const int c = cmp(a.v_, b.v_);
        if (c < 0) return std::strong_ordering::less;
        if (c > 0) return std::strong_ordering::greater;
        return std::strong_ordering::equal;
    }

  private:
    struct already_canonical {};
    Rational(mpq_class q, already_canonical) : v_(std::move(q)) {}

    static bool is_integer_literal(const std::string& s) {
        std::size_t i = (!s.empty() && s[0] == '-') ? 1 : 0;
        if (i == s.size()) return false;
        for (; i < s.size(); ++i)
            if (s[i] < '0' || s[i] > '9') return false;
        return true;
    }

    mpq_class v_;
};

/// An exact reward value: either a rational or the distinguished value
/// infinity, which compares greater than every rational.
class Value {
  public:
    Value() : finite_(), infinite_(false) {}
    Value(Rational q) : finite_(std::move(q)), infinite_(false) {}
    static Value infinity() {
        Value v;
        v.infinite_ = true;
        return v;
    }

    bool is_infinite() const { return infinite_; }
    bool is_finite() const { return !infinite_; }

    const Rational& finite() const {
        if (infinite_) throw std::logic_error("Value: infinite has no rational part");
        return finite_;
    }

    std::string str() const { return infinite_ ? "inf" : finite_.str(); }

    static Value parse(const std::string& text) {
        if (text == "inf") return infinity();
        return Rational::parse(text);
    }

    Value& operator+=(const Value& o) {
        if (o.infinite_) infinite_ = true;
        if (!infinite_) finite_ += o.finite_;
        return *this;
    }
    friend Value operator+(Value a, const Value& b) { a += b; return a; }

    friend bool operator==(const Value& a, const Value& b) {
        if (a.infinite_ || b.infinite_) return a.infinite_ && b.infinite_;
        return a.finite_ == b.finite_;
    }
    friend bool operator<(const Value& a, const Value& b) {
        if (b.infinite_) return !a.infinite_;
        if (a.infinite_) return false;
        return a.finite_ < b.finite_;
    }
    friend bool operator<=(const Value& a, const Value& b) { return a == b || a < b; }
    friend bool operator>(const Value& a, const Value& b) { return b < a; }
    friend bool operator>=(const Value& a, const Value& b) { return b <= a; }

  private:
    Rational finite_;
    bool infinite_;
};

}  // namespace obsyn

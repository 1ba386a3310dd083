#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace crkit {

using Rational = boost::multiprecision::cpp_rational;
using Integer = boost::multiprecision::cpp_int;

/// Complex number with exact rational real and imaginary parts.
/// Always canonical (cpp_rational keeps fractions reduced, denominators
/// positive), so operator== is both structural and mathematical equality.
struct GaussianRational {
    Rational re;
    Rational im;

    GaussianRational() = default;
    GaussianRational(Rational r) : re(std::move(r)) {}
    GaussianRational(Rational r, Rational i) : re(std::move(r)), im(std::move(i)) {}
    GaussianRational(long r) : re(r) {}
    GaussianRational(long num, long den) : re(Rational(num, den)) {}

    static GaussianRational i() { return GaussianRational(Rational(0), Rational(1)); }

    bool is_zero() const { return re == 0 && im == 0; }
    bool is_real() const { return im == 0; }

    GaussianRational conj() const { return {re, -im}; }

    /// |z|^2 as a rational.
    Rational norm() const { return re * re + im * im; }

    GaussianRational operator-() const { return {-re, -im}; }

    GaussianRational &operator+=(const GaussianRational &o) {
        re += o.re;
        im += o.im;
        return *this;
    }
    GaussianRational &operator-=(const GaussianRational &o) {
        re -= o.re;
        im -= o.im;
        return *this;
    }
    GaussianRational &operator*=(const GaussianRational &o) {
        Rational r = re * o.re - im * o.im;
        Rational i = re * o.im + im * o.re;
        re = std::move(r);
        im = std::move(i);
        return *this;
    }
    GaussianRational &operator/=(const GaussianRational &o) {
        Rational n = o.norm();
        if (n == 0)
            throw std::domain_error("GaussianRational: division by zero");
        Rational r = (re * o.re + im * o.im) / n;
        Rational i = (im * o.re - re * o.im) / n;
        re = std::move(r);
        im = std::move(i);
        return *this;
    }

    friend GaussianRational operator+(GaussianRational a, const GaussianRational &b) { return a += b; }
    friend GaussianRational operator-(GaussianRational a, const GaussianRational &b) { return a -= b; }
    friend GaussianRational operator*(GaussianRational a, const GaussianRational &b) { return a *= b; }
    friend GaussianRational operator/(GaussianRational a, const GaussianRational &b) { return a /= b; }

    friend bool operator==(const GaussianRational &a, const GaussianRational &b) {
        return a.re == b.re && a.im == b.im;
    }
    friend bool operator!=(const GaussianRational &a, const GaussianRational &b) { return !(a == b); }
};

inline GaussianRational inverse(const GaussianRational &z) {
    return GaussianRational(Rational(1)) / z;
}

inline std::string rational_str(const Rational &r) {
    std::ostringstream os;
    os << numerator(r);
    if (denominator(r) != 1)
        os << '/' << denominator(r);
    return os.str();
}

/// Canonical text form: "a/b", "c/d*i", "i", or "a/b+c/d*i" (no spaces).
inline std::string to_string(const GaussianRational &z) {
    if (z.im == 0)
        return rational_str(z.re);
    std::string imag;
    if (z.im == 1)
        imag = "i";
    else if (z.im == -1)
        imag = "-i";
    else
        imag = rational_str(z.im) + "*i";
    if (z.re == 0)
        return imag;
    if (z.im > 0)
        return rational_str(z.re) + "+" + imag;
    return rational_str(z.re) + imag; // imag already starts with '-'
}

inline std::ostream &operator<<(std::ostream &os, const GaussianRational &z) {
    return os << to_string(z);
}

} // namespace crkit

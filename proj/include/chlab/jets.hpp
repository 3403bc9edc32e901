#ifndef CHLAB_JETS_HPP
#define CHLAB_JETS_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace chlab {

/// Truncated Taylor series a0 + a1 x + ... + aN x^N with arithmetic that
/// propagates all coefficients. Used to push derivative hierarchies through
/// composite nonlinearities (sin, powers, quotients) without hand-written
/// Faa di Bruno formulas.
class Jet {
public:
    Jet() : c_(1, 0.0) {}
    explicit Jet(std::size_t order, double value = 0.0) : c_(order + 1, 0.0) { c_[0] = value; }
    Jet(std::initializer_list<double> coeffs) : c_(coeffs) {
        if (c_.empty()) c_.push_back(0.0);
    }

    static Jet constant(std::size_t order, double value) { return Jet(order, value); }
    /// The jet of the expansion variable itself: x0 + x.
    static Jet variable(std::size_t order, double x0) {
        Jet j(order, x0);
        if (order >= 1) j.c_[1] = 1.0;
        return j;
    }

    std::size_t order() const { return c_.size() - 1; }
    double operator[](std::size_t k) const { return k < c_.size() ? c_[k] : 0.0; }
    double& coeff(std::size_t k) { return c_.at(k); }
    double value() const { return c_[0]; }
    /// k-th derivative value (coefficient times k!).
    double derivative(std::size_t k) const {
        double f = 1.0;
        for (std::size_t i = 2; i <= k; ++i) f *= double(i);
        return (*this)[k] * f;
    }

    /// Jet of the derivative (order drops by one).
    Jet d() const {
        if (order() == 0) return Jet(0, 0.0);
        Jet out(order() - 1);
        for (std::size_t k = 1; k < c_.size(); ++k) out.c_[k - 1] = double(k) * c_[k];
        return out;
    }

    Jet operator-() const {
        Jet out = *this;
        for (auto& x : out.c_) x = -x;
        return out;
    }

    friend Jet operator+(const Jet& a, const Jet& b) {
        Jet out(std::max(a.order(), b.order()));
        for (std::size_t k = 0; k < out.c_.size(); ++k) out.c_[k] = a[k] + b[k];
        return out;
    }
    friend Jet operator-(const Jet& a, const Jet& b) { return a + (-b); }
    friend Jet operator+(const Jet& a, double s) { Jet o = a; o.c_[0] += s; return o; }
    friend Jet operator+(double s, const Jet& a) { return a + s; }
    friend Jet operator-(const Jet& a, double s) { return a + (-s); }
    friend Jet operator-(double s, const Jet& a) { return (-a) + s; }
    friend Jet operator*(const Jet& a, double s) {
        Jet o = a;
        for (auto& x : o.c_) x *= s;
        return o;
    }
    friend Jet operator*(double s, const Jet& a) { return a * s; }
    friend Jet operator/(const Jet& a, double s) { return a * (1.0 / s); }
    friend Jet operator/(double s, const Jet& b) {
        Jet num(b.order(), s);
        return num / b;
    }

    friend Jet operator*(const Jet& a, const Jet& b) {
        Jet out(std::max(a.order(), b.order()));
        for (std::size_t k = 0; k < out.c_.size(); ++k) {
            double s = 0.0;
            for (std::size_t i = 0; i <= k; ++i) s += a[i] * b[k - i];
            out.c_[k] = s;
        }
        return out;
    }

    friend Jet operator/(const Jet& a, const Jet& b) {
        if (b[0] == 0.0) throw std::domain_error("Jet division by series with zero constant term");
        Jet out(std::max(a.order(), b.order()));
        for (std::size_t k = 0; k < out.c_.size(); ++k) {
            double s = a[k];
            for (std::size_t i = 0; i < k; ++i) s -= out.c_[i] * b[k - i];
            out.c_[k] = s / b[0];
        }
        return out;
    }

private:
    std::vector<double> c_;
};

/// sin and cos of a jet via the coupled recursion
/// (sin f)' = f' cos f, (cos f)' = -f' sin f.
inline void sincos(const Jet& f, Jet& s, Jet& c) {
    const std::size_t n = f.order();
    s = Jet(n, std::sin(f.value()));
    c = Jet(n, std::cos(f.value()));
    for (std::size_t k = 1; k <= n; ++k) {
        double ds = 0.0, dc = 0.0;
        for (std::size_t i = 1; i <= k; ++i) {
            ds += double(i) * f[i] * c[k - i];
            dc -= double(i) * f[i] * s[k - i];
        }
        s.coeff(k) = ds / double(k);
        c.coeff(k) = dc / double(k);
    }
}

inline Jet sin(const Jet& f) { Jet s, c; sincos(f, s, c); return s; }
inline Jet cos(const Jet& f) { Jet s, c; sincos(f, s, c); return c; }

inline Jet exp(const Jet& f) {
    const std::size_t n = f.order();
    Jet e(n, std::exp(f.value()));
    for (std::size_t k = 1; k <= n; ++k) {
        double d = 0.0;
        for (std::size_t i = 1; i <= k; ++i) d += double(i) * f[i] * e[k - i];
        e.coeff(k) = d / double(k);
    }
    return e;
}

inline Jet log(const Jet& f) {
    if (f.value() <= 0.0) throw std::domain_error("Jet log of nonpositive value");
    const std::size_t n = f.order();
    Jet l(n, std::log(f.value()));
    // l' = f'/f
    for (std::size_t k = 1; k <= n; ++k) {
        double d = double(k) * f[k];
        for (std::size_t i = 1; i < k; ++i) d -= double(i) * l[i] * f[k - i];
        l.coeff(k) = d / (double(k) * f[0]);
    }
    return l;
}

inline Jet pow(const Jet& f, int p) {
    if (p < 0) return Jet(f.order(), 1.0) / pow(f, -p);
    Jet out(f.order(), 1.0);
    for (int i = 0; i < p; ++i) out = out * f;
    return out;
}

inline Jet pow(const Jet& f, double a) { return exp(a * log(f)); }

inline Jet atan(const Jet& f) {
    const std::size_t n = f.order();
    Jet out(n, std::atan(f.value()));
    if (n == 0) return out;
    // out' = f' / (1 + f^2), integrate the series
    Jet g = f.d() / (1.0 + f * f);
    for (std::size_t k = 1; k <= n; ++k) out.coeff(k) = g[k - 1] / double(k);
    return out;
}

} // namespace chlab

#endif

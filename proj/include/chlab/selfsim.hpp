#ifndef CHLAB_SELFSIM_HPP
#define CHLAB_SELFSIM_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "chlab/jets.hpp"
#include "chlab/models.hpp"

namespace chlab::selfsim {

using models::EquationFamily;
using models::EquationSpec;

struct shooting_error : std::runtime_error {
    double bracket_lo, bracket_hi, defect_lo, defect_hi;
    shooting_error(const std::string& what, double lo, double hi, double flo, double fhi)
        : std::runtime_error(what), bracket_lo(lo), bracket_hi(hi), defect_lo(flo), defect_hi(fhi) {}
};

/// Self-similar ODE obtained by substituting phi0 = T^{-c} Phi(y), T = 2r - t,
/// y = r/T into the radial equation:
///
///   A(y) Phi'' + B(y) Phi' + C(y) Phi + S(y, Phi) = 0
///   A = (1-y)(1-3y)
///   B = 6(c+1)y - 4(c+1) - 2(d-1) + (d-1)/y
///   C = 3c(c+1) - 2c(d-1)/y
///   WMS: c = 0,        S = -lam sin(2 Phi)/(2 y^2),  lam = K(d+K-2)
///   NW:  c = 2/(p-1),  S = +Phi^p
///
/// Sonic points at y = 1/3 (backward cone C) and y = 1 (forward cone / CH);
/// the axis y = 0 is regular singular as well.
struct SelfSimilarODE {
    EquationFamily family;
    int d = 3;
    int p = 3;   // NW
    int K = 1;   // WMS
    double c = 0.0;

    static SelfSimilarODE wms(int d, int K) {
        if (d < 3 || K < 1) throw std::invalid_argument("self-similar WMS profile needs d >= 3, K >= 1");
        return {EquationFamily::WMS, d, 0, K, 0.0};
    }
    static SelfSimilarODE nw(int d, int p) {
        if (d < 3 || p < 2) throw std::invalid_argument("self-similar NW profile needs d >= 3, p >= 2");
        return {EquationFamily::NW, d, p, 1, 2.0 / double(p - 1)};
    }

    double lam() const { return double(K) * double(d + K - 2); }

    double A(double y) const { return (1.0 - y) * (1.0 - 3.0 * y); }
    double Aprime(double y) const { return -(1.0 - 3.0 * y) - 3.0 * (1.0 - y); }
    double B(double y) const {
        return 6.0 * (c + 1.0) * y - 4.0 * (c + 1.0) - 2.0 * double(d - 1) + double(d - 1) / y;
    }
    double C(double y) const { return 3.0 * c * (c + 1.0) - 2.0 * c * double(d - 1) / y; }
    double S(double y, double P) const {
        if (family == EquationFamily::WMS) return -lam() * std::sin(2.0 * P) / (2.0 * y * y);
        return std::pow(P, p);
    }
    Jet S(const Jet& y, const Jet& P) const {
        if (family == EquationFamily::WMS) return -lam() * sin(2.0 * P) / (2.0 * y * y);
        return pow(P, p);
    }

    void rhs(const std::array<double, 2>& z, std::array<double, 2>& dz, double y) const {
        dz[0] = z[1];
        dz[1] = -(B(y) * z[1] + C(y) * z[0] + S(y, z[0])) / A(y);
    }

    /// Two-term axis start: WMS Phi ~ alpha y^K (1 + 2K y), third term for K=1;
    /// NW Phi ~ a0 (1 + 2c y) + a2 y^2.
    std::array<double, 2> axis_start(double param, double y0) const {
        if (family == EquationFamily::WMS) {
            const double al = param;
            if (K == 1) {
                const double a2 = 2.0 * al;
                const double a3 = ((8.0 * d + 24.0) * al - 6.0 * al -
                                   (2.0 / 3.0) * double(d - 1) * al * al * al) /
                                  (2.0 * d + 4.0);
                return {al * y0 + a2 * y0 * y0 + a3 * y0 * y0 * y0,
                        al + 2.0 * a2 * y0 + 3.0 * a3 * y0 * y0};
            }
            const double kk = double(K);
            return {param * std::pow(y0, kk) * (1.0 + 2.0 * kk * y0),
                    param * (kk * std::pow(y0, kk - 1.0) + 2.0 * kk * (kk + 1.0) * std::pow(y0, kk))};
        }
        const double a0 = param;
        const double a1 = 2.0 * c * a0;
        const double a2 = ((4.0 * (c + 1.0) + 2.0 * double(d - 1) + 2.0 * c * double(d - 1)) * a1 -
                           3.0 * c * (c + 1.0) * a0 - std::pow(a0, p)) /
                          (2.0 * double(d));
        return {a0 + a1 * y0 + a2 * y0 * y0, a1 + 2.0 * a2 * y0};
    }
};

/// Local analytic-branch series at a sonic point ys. The coefficient recursion
/// degenerates at the resonance index k* = 1 - B(ys)/A'(ys): there the equation
/// row is a constraint (the smoothness defect) and the coefficient is free.
class SonicSeries {
public:
    SonicSeries() = default;
    SonicSeries(const SelfSimilarODE& ode, double ys, std::size_t order)
        : ode_(ode), ys_(ys), M_(order) {}

    double center() const { return ys_; }

    /// Resonance index (coefficient a_{k+1} with (k+1)(A1 k + B0) = 0), or -1.
    int resonance() const {
        const double A1 = ode_.Aprime(ys_), B0 = ode_.B(ys_);
        const double k = -B0 / A1;
        const double kr = std::round(k);
        if (kr >= 0.0 && std::abs(k - kr) < 1e-9) return int(kr) + 1; // index of free coefficient
        return -1;
    }

    /// Build the series given the center value a0 and (if resonant) the free
    /// coefficient. Returns the defect (constraint residual at the resonant
    /// order; 0 when no resonance).
    double build(double a0, double afree) {
        a_.assign(M_ + 1, 0.0);
        a_[0] = a0;
        double defect = 0.0;
        const double A1 = ode_.Aprime(ys_), B0 = ode_.B(ys_);
        const int res = resonance();
        for (std::size_t k = 0; k + 1 <= M_; ++k) {
            const double mult = double(k + 1) * (A1 * double(k) + B0);
            const double R = equation_coeff(k);
            if (res >= 0 && int(k) + 1 == res) {
                defect = R;
                a_[k + 1] = afree;
            } else {
                a_[k + 1] = -R / mult;
            }
        }
        return defect;
    }

    double value(double y) const { return horner(y - ys_, 0); }
    double deriv(double y) const { return horner(y - ys_, 1); }
    double deriv2(double y) const { return horner(y - ys_, 2); }

    /// Taylor jet at y (inside the series radius), to the stored order.
    Jet jet_at(double y, std::size_t m) const {
        const double w0 = y - ys_;
        Jet out(m, 0.0);
        for (std::size_t k = 0; k <= std::min(m, M_); ++k) {
            // b_k = sum_j C(j,k) a_j w0^{j-k}
            double b = 0.0, binom = 1.0, w = 1.0;
            for (std::size_t j = k; j <= M_; ++j) {
                b += binom * a_[j] * w;
                w *= w0;
                binom *= double(j + 1) / double(j + 1 - k);
            }
            out.coeff(k) = b;
        }
        return out;
    }

    const std::vector<double>& coeffs() const { return a_; }

private:
    /// Coefficient of w^k of A Phi'' + B Phi' + C Phi + S with the current
    /// partial series and a_{k+1} = 0.
    double equation_coeff(std::size_t k) const {
        const std::size_t m = k + 2;
        Jet yj = Jet::variable(m, ys_);
        Jet P(m, 0.0);
        for (std::size_t j = 0; j <= std::min(m, M_); ++j) {
            if (j == k + 1) continue; // placeholder zero
            P.coeff(j) = a_[j];
        }
        Jet Pp = P.d(), Ppp = P.d().d();
        Jet A = (1.0 - yj) * (1.0 - 3.0 * yj);
        Jet B = 6.0 * (ode_.c + 1.0) * yj - 4.0 * (ode_.c + 1.0) - 2.0 * double(ode_.d - 1) +
                double(ode_.d - 1) / yj;
        Jet C = Jet(m, 3.0 * ode_.c * (ode_.c + 1.0)) - 2.0 * ode_.c * double(ode_.d - 1) / yj;
        Jet E = A * Ppp + B * Pp + C * P + ode_.S(yj, P);
        return E[k];
    }

    double horner(double w, int deriv) const {
        double s = 0.0;
        for (std::size_t j = a_.size(); j-- > std::size_t(deriv);) {
            double f = 1.0;
            for (int i = 0; i < deriv; ++i) f *= double(j - i);
            s = s * w + f * a_[j];
        }
        return s;
    }

    SelfSimilarODE ode_;
    double ys_ = 0.0;
    std::size_t M_ = 0;
    std::vector<double> a_;
};

namespace detail {

using state_t = std::array<double, 2>;

struct blowup_flag : std::runtime_error {
    blowup_flag() : std::runtime_error("profile integration left the finite range") {}
};

inline void integrate_leg(const SelfSimilarODE& ode, state_t& z, double y_from, double y_to) {
    namespace odeint = boost::numeric::odeint;
    auto stepper = odeint::make_controlled(1e-13, 1e-13,
                                           odeint::runge_kutta_dopri5<state_t>());
    auto sys = [&ode](const state_t& s, state_t& ds, double y) { ode.rhs(s, ds, y); };
    auto guard = [](const state_t& s, double) {
        if (!std::isfinite(s[0]) || !std::isfinite(s[1]) || std::abs(s[0]) > 1e8) throw blowup_flag();
    };
    odeint::integrate_adaptive(stepper, sys, z, y_from, y_to, (y_to - y_from) * 1e-3, guard);
}

/// Fit the sonic series to the incoming solution at y_at < ys. Integer
/// resonance leaves one coefficient free; with snapping enabled (assembly of a
/// converged profile) a zero-order trigonometric constraint pins the center
/// value to a root of sin(2 Phi0) = 0. The reported defect is the obstruction
/// of the fitted analytic branch (or the derivative mismatch when the
/// recursion has no integer resonance).
inline SonicSeries fit_series(const SelfSimilarODE& ode, double ys, const state_t& z, double y_at,
                              std::size_t order, double* defect_out = nullptr,
                              bool snap_allowed = true) {
    SonicSeries ser(ode, ys, order);
    const int res = ser.resonance();
    double P0 = z[0] + (ys - y_at) * z[1];
    double afree = z[1];
    const bool snap = snap_allowed && (res == 1 && ode.family == EquationFamily::WMS);
    if (snap) {
        const double pi = 3.14159265358979323846;
        P0 = std::round(P0 / (pi / 2.0)) * (pi / 2.0);
    }
    for (int it = 0; it < 30; ++it) {
        const double defect = ser.build(P0, afree);
        if (defect_out) *defect_out = defect;
        const double fv = ser.value(y_at) - z[0];
        const double fd = ser.deriv(y_at) - z[1];
        if (std::abs(fv) < 1e-14 * (1.0 + std::abs(z[0])) &&
            std::abs(fd) < 1e-12 * (1.0 + std::abs(z[1])))
            break;
        const double hP = 1e-7 * (1.0 + std::abs(P0));
        const double hA = 1e-7 * (1.0 + std::abs(afree));
        SonicSeries sP(ode, ys, order), sA(ode, ys, order);
        sP.build(P0 + hP, afree);
        sA.build(P0, afree + hA);
        if (snap) {
            const double j = (sA.deriv(y_at) - ser.deriv(y_at)) / hA;
            if (j == 0.0) break;
            afree -= fd / j;
            continue;
        }
        if (res < 0) {
            const double j = (sP.value(y_at) - ser.value(y_at)) / hP;
            if (j == 0.0) break;
            P0 -= fv / j;
            continue;
        }
        const double j11 = (sP.value(y_at) - ser.value(y_at)) / hP;
        const double j12 = (sA.value(y_at) - ser.value(y_at)) / hA;
        const double j21 = (sP.deriv(y_at) - ser.deriv(y_at)) / hP;
        const double j22 = (sA.deriv(y_at) - ser.deriv(y_at)) / hA;
        const double det = j11 * j22 - j12 * j21;
        if (det == 0.0) break;
        const double dP = (fv * j22 - fd * j12) / det;
        const double dA = (fd * j11 - fv * j21) / det;
        P0 -= dP;
        afree -= dA;
    }
    if (defect_out && res < 0) *defect_out = ser.deriv(y_at) - z[1];
    return ser;
}

/// Smoothness defect used by the shooting: fitted-branch obstruction without
/// any constraint snapping.
inline double shooting_defect(const SelfSimilarODE& ode, double ys, const state_t& z, double y_at,
                              std::size_t order) {
    double defect = 0.0;
    fit_series(ode, ys, z, y_at, order, &defect, /*snap_allowed=*/false);
    return defect;
}

} // namespace detail

/// Tabulated self-similar profile with C2 piecewise-quintic interpolation and
/// stored sonic-point series; implements the Profile derivative interface.
class SelfSimilarProfile final : public models::TypeICore {
public:
    struct Options {
        std::size_t table_size = 3073;
        std::size_t series_order = 14;
        double eps_hop = 1e-3;    // integration hands over to the local series here
        double series_window = 0.02;
        double bracket_lo = 0.05; // shooting parameter scan range
        double bracket_hi = 16.0;
        double y_max = 0.0;       // 0: family default (WMS 1.5, NW 1.0)
    };

    static SelfSimilarProfile solve(const SelfSimilarODE& ode, Options opt);
    static SelfSimilarProfile solve(const SelfSimilarODE& ode) { return solve(ode, Options{}); }

    // TypeICore interface
    double value(double y) const override {
        if (const SonicSeries* s = near_series(y)) return s->value(y);
        return interp(y, 0);
    }
    double deriv(double y) const override {
        if (const SonicSeries* s = near_series(y)) return s->deriv(y);
        return interp(y, 1);
    }
    double deriv2(double y) const {
        if (const SonicSeries* s = near_series(y)) return s->deriv2(y);
        return interp(y, 2);
    }
    Jet jet(double y, std::size_t order) const override {
        if (const SonicSeries* s = near_series(y)) return s->jet_at(y, order);
        return ode_jet(y, value(y), deriv(y), order);
    }
    double shoot_parameter() const override { return shoot_param_; }
    double ode_residual() const override { return tab_residual_; }
    double y_max() const override { return ys_.back(); }

    const SelfSimilarODE& ode() const { return ode_; }
    double sonic_defect_13() const { return defect_13_; }
    double sonic_defect_1() const { return defect_1_; }
    const std::vector<double>& nodes() const { return ys_; }

    /// Taylor coefficients of Phi at a regular y from the ODE recursion,
    /// seeded with (value, derivative).
    Jet ode_jet(double y, double P, double Q, std::size_t m) const {
        Jet out(m, P);
        if (m >= 1) out.coeff(1) = Q;
        for (std::size_t k = 2; k <= m; ++k) {
            Jet yj = Jet::variable(k, y);
            Jet Pj(k, 0.0);
            for (std::size_t j = 0; j < k; ++j) Pj.coeff(j) = out[j];
            Jet A = (1.0 - yj) * (1.0 - 3.0 * yj);
            Jet B = 6.0 * (ode_.c + 1.0) * yj - 4.0 * (ode_.c + 1.0) - 2.0 * double(ode_.d - 1) +
                    double(ode_.d - 1) / yj;
            Jet C = Jet(k, 3.0 * ode_.c * (ode_.c + 1.0)) - 2.0 * ode_.c * double(ode_.d - 1) / yj;
            Jet E = B * Pj.d() + C * Pj + ode_.S(yj, Pj);
            // A Phi'' = -E  =>  coefficient k-2 of Phi'' series
            // Phi''_{k-2} from A-weighted convolution: solve for out[k]
            Jet Ppp = Pj.d().d(); // has zeros at the unknown order
            Jet AP = A * Ppp;
            const double known = AP[k - 2] + E[k - 2];
            const double mult = A.value() * double(k) * double(k - 1);
            out.coeff(k) = -known / mult;
        }
        return out;
    }

    void save_csv(const std::string& path) const;

private:
    const SonicSeries* near_series(double y) const {
        for (const auto& s : series_)
            if (std::abs(y - s.center()) < window_) return &s;
        return nullptr;
    }

    double interp(double y, int deriv) const {
        if (y < ys_.front() - 1e-12 || y > ys_.back() + 1e-12)
            throw std::domain_error("self-similar profile evaluated outside [0, y_max]");
        const double h = ys_[1] - ys_[0];
        std::size_t i = std::min(ys_.size() - 2, std::size_t(std::max(0.0, (y - ys_[0]) / h)));
        const double w = y - ys_[i];
        // two-point quintic Hermite from (f, f', f'') at both ends
        const double f0 = phi_[i], d0 = dphi_[i], s0 = ddphi_[i];
        const double f1 = phi_[i + 1], d1 = dphi_[i + 1], s1 = ddphi_[i + 1];
        const double H = ys_[i + 1] - ys_[i];
        // coefficients of p(w) = sum c_k w^k
        const double c0 = f0, c1 = d0, c2 = 0.5 * s0;
        const double r0 = f1 - (c0 + c1 * H + c2 * H * H);
        const double r1 = d1 - (c1 + 2.0 * c2 * H);
        const double r2 = s1 - 2.0 * c2;
        const double H2 = H * H, H3 = H2 * H;
        const double c3 = (10.0 * r0 - 4.0 * r1 * H + 0.5 * r2 * H2) / H3;
        const double c4 = (-15.0 * r0 + 7.0 * r1 * H - r2 * H2) / (H3 * H);
        const double c5 = (6.0 * r0 - 3.0 * r1 * H + 0.5 * r2 * H2) / (H3 * H2);
        switch (deriv) {
            case 0: return c0 + w * (c1 + w * (c2 + w * (c3 + w * (c4 + w * c5))));
            case 1:
                return c1 + w * (2 * c2 + w * (3 * c3 + w * (4 * c4 + w * 5 * c5)));
            default:
                return 2 * c2 + w * (6 * c3 + w * (12 * c4 + w * 20 * c5));
        }
    }

    SelfSimilarODE ode_;
    double shoot_param_ = 0.0;
    double tab_residual_ = 0.0;
    double defect_13_ = 0.0, defect_1_ = 0.0;
    double window_ = 0.02;
    std::vector<double> ys_, phi_, dphi_, ddphi_;
    std::vector<SonicSeries> series_;
};

inline SelfSimilarProfile SelfSimilarProfile::solve(const SelfSimilarODE& ode, Options opt) {
    SelfSimilarProfile prof;
    prof.ode_ = ode;
    prof.window_ = opt.series_window;
    const double ymax = opt.y_max > 0.0 ? opt.y_max
                        : (ode.family == EquationFamily::WMS ? 1.5 : 1.0);
    const double y0 = 1e-6;
    const double ysonic = 1.0 / 3.0;

    // shooting defect: integrate to just below 1/3 and evaluate the
    // analytic-branch constraint there
    auto defect_of = [&](double param) {
        detail::state_t z = ode.axis_start(param, y0);
        detail::integrate_leg(ode, z, y0, ysonic - opt.eps_hop);
        return detail::shooting_defect(ode, ysonic, z, ysonic - opt.eps_hop, opt.series_order);
    };

    // The defect can vanish on spurious branches that blow up downstream
    // (constant-in-rho solutions have a pole before the forward cone), so a
    // candidate root is accepted only if its continuation stays finite and
    // nearly smooth through all remaining sonic points.
    auto continues_smoothly = [&](double param) {
        try {
            detail::state_t z = ode.axis_start(param, y0);
            detail::integrate_leg(ode, z, y0, ysonic - opt.eps_hop);
            SonicSeries s13 =
                detail::fit_series(ode, ysonic, z, ysonic - opt.eps_hop, opt.series_order);
            double ycur = ysonic + opt.eps_hop;
            z = {s13.value(ycur), s13.deriv(ycur)};
            if (ymax <= 1.0 - opt.eps_hop) {
                detail::integrate_leg(ode, z, ycur, ymax);
                return true;
            }
            detail::integrate_leg(ode, z, ycur, 1.0 - opt.eps_hop);
            const double defect1 =
                detail::shooting_defect(ode, 1.0, z, 1.0 - opt.eps_hop, opt.series_order);
            const double scale = 1.0 + std::abs(z[0]) + std::abs(z[1]);
            if (std::abs(defect1) > 1e-3 * scale) return false;
            if (ymax > 1.0 + opt.eps_hop) {
                SonicSeries s1 =
                    detail::fit_series(ode, 1.0, z, 1.0 - opt.eps_hop, opt.series_order);
                double yc = 1.0 + opt.eps_hop;
                detail::state_t z2{s1.value(yc), s1.deriv(yc)};
                detail::integrate_leg(ode, z2, yc, ymax);
            }
            return true;
        } catch (const detail::blowup_flag&) {
            return false;
        }
    };

    // bracket scan collecting every sign change, first acceptable root wins
    const double lo = opt.bracket_lo, hi = opt.bracket_hi;
    const int nscan = 64;
    double prev_p = lo, prev_f = defect_of(lo);
    double param = 0.0;
    bool accepted = false;
    double last_flo = prev_f, last_fhi = prev_f;
    for (int i = 1; i <= nscan && !accepted; ++i) {
        const double pcur = lo * std::pow(hi / lo, double(i) / nscan);
        double fcur;
        try {
            fcur = defect_of(pcur);
        } catch (const detail::blowup_flag&) {
            prev_p = pcur;
            prev_f = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        if (std::isfinite(fcur) && std::isfinite(prev_f) && prev_f * fcur < 0.0) {
            double blo = prev_p, bhi = pcur, flo = prev_f;
            last_flo = prev_f;
            last_fhi = fcur;
            for (int it = 0; it < 200 && (bhi - blo) > 1e-15 * std::max(1.0, std::abs(bhi)); ++it) {
                const double mid = 0.5 * (blo + bhi);
                const double fm = defect_of(mid);
                if (flo * fm <= 0.0) bhi = mid;
                else { blo = mid; flo = fm; }
            }
            const double root = 0.5 * (blo + bhi);
            if (continues_smoothly(root)) {
                param = root;
                accepted = true;
            }
        }
        prev_p = pcur;
        prev_f = fcur;
    }
    if (!accepted)
        throw shooting_error("self-similar shooting failed to bracket a smooth profile", lo, hi,
                             last_flo, last_fhi);
    prof.shoot_param_ = param;

    // assemble: integrate legs, fit sonic series, fill the uniform table
    std::vector<double> sonics;
    for (double ys : {1.0 / 3.0, 1.0})
        if (ys < ymax + 1e-12) sonics.push_back(ys);

    const std::size_t N = opt.table_size;
    prof.ys_.resize(N);
    prof.phi_.assign(N, 0.0);
    prof.dphi_.assign(N, 0.0);
    prof.ddphi_.assign(N, 0.0);
    const double h = ymax / double(N - 1);
    for (std::size_t i = 0; i < N; ++i) prof.ys_[i] = double(i) * h;

    detail::state_t z = ode.axis_start(param, y0);
    double ycur = y0;
    std::size_t i = 0;
    auto fill_node = [&](std::size_t idx, double yv, const detail::state_t& s) {
        prof.phi_[idx] = s[0];
        prof.dphi_[idx] = s[1];
        prof.ddphi_[idx] =
            yv < 1e-12 ? 0.0 : -(ode.B(yv) * s[1] + ode.C(yv) * s[0] + ode.S(yv, s[0])) / ode.A(yv);
    };
    // axis node from the series start
    if (ode.family == EquationFamily::WMS) {
        prof.phi_[0] = 0.0;
        prof.dphi_[0] = ode.K == 1 ? param : 0.0;
        prof.ddphi_[0] = ode.K == 1 ? 4.0 * param : (ode.K == 2 ? 2.0 * param : 0.0);
    } else {
        const double dd = double(ode.d);
        const double a1 = 2.0 * ode.c * param;
        const double a2 = ((4.0 * (ode.c + 1.0) + 2.0 * (dd - 1.0) + 2.0 * ode.c * (dd - 1.0)) * a1 -
                           3.0 * ode.c * (ode.c + 1.0) * param - std::pow(param, ode.p)) /
                          (2.0 * dd);
        prof.phi_[0] = param;
        prof.dphi_[0] = a1;
        prof.ddphi_[0] = 2.0 * a2;
    }

    std::size_t next_sonic = 0;
    i = 1;
    while (i < N) {
        const double ytarget = prof.ys_[i];
        const bool have_sonic = next_sonic < sonics.size();
        const double ys = have_sonic ? sonics[next_sonic] : 2.0 * ymax;
        if (ytarget < ys - opt.eps_hop) {
            detail::integrate_leg(ode, z, ycur, ytarget);
            ycur = ytarget;
            fill_node(i, ycur, z);
            ++i;
            continue;
        }
        // approach, fit the series, hop, fill covered nodes from the series
        detail::integrate_leg(ode, z, ycur, ys - opt.eps_hop);
        double defect = 0.0;
        SonicSeries ser =
            detail::fit_series(ode, ys, z, ys - opt.eps_hop, opt.series_order, &defect);
        if (std::abs(ys - 1.0 / 3.0) < 1e-9) prof.defect_13_ = defect;
        else prof.defect_1_ = defect;
        prof.series_.push_back(ser);
        while (i < N && prof.ys_[i] <= ys + opt.eps_hop) {
            prof.phi_[i] = ser.value(prof.ys_[i]);
            prof.dphi_[i] = ser.deriv(prof.ys_[i]);
            prof.ddphi_[i] = ser.deriv2(prof.ys_[i]);
            ++i;
        }
        ycur = ys + opt.eps_hop;
        z = {ser.value(ycur), ser.deriv(ycur)};
        ++next_sonic;
    }

    // tabulation residual: max |A Phi'' + B Phi' + C Phi + S| over midpoints
    double res = 0.0;
    for (std::size_t k = 0; k + 1 < N; ++k) {
        const double y = prof.ys_[k] + 0.5 * h;
        if (y < 5e-3) continue;
        bool nearsonic = false;
        for (double ys : sonics)
            if (std::abs(y - ys) < 2.0 * h) nearsonic = true;
        if (nearsonic) continue;
        const double E = ode.A(y) * prof.interp(y, 2) + ode.B(y) * prof.interp(y, 1) +
                         ode.C(y) * prof.interp(y, 0) + ode.S(y, prof.interp(y, 0));
        res = std::max(res, std::abs(E));
    }
    prof.tab_residual_ = res;
    return prof;
}

inline void SelfSimilarProfile::save_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "# {\"family\":\"" << models::to_string(ode_.family) << "\",\"d\":" << ode_.d;
    if (ode_.family == EquationFamily::WMS) out << ",\"K\":" << ode_.K;
    else out << ",\"p\":" << ode_.p;
    out << ",\"shooting_parameter\":" << std::setprecision(17) << shoot_param_
        << ",\"ode_residual\":" << tab_residual_ << "}\n";
    out << "y,phi0,dphi0,ddphi0\n";
    out << std::setprecision(17);
    for (std::size_t i = 0; i < ys_.size(); ++i)
        out << ys_[i] << "," << phi_[i] << "," << dphi_[i] << "," << ddphi_[i] << "\n";
}

/// Solve the corotational self-similar profile (Theorem-style WMS family) and
/// wrap it as a background Profile.
inline models::Profile solve_self_similar_profile(int d, int K,
                                                  SelfSimilarProfile::Options opt = {}) {
    auto core = std::make_shared<SelfSimilarProfile>(
        SelfSimilarProfile::solve(SelfSimilarODE::wms(d, K), opt));
    return models::Profile::type1(core, 0.0);
}

/// NW sibling (c = 2/(p-1)); profile defined on [0, 1].
inline models::Profile solve_self_similar_profile_nw(int d, int p,
                                                     SelfSimilarProfile::Options opt = {}) {
    auto core = std::make_shared<SelfSimilarProfile>(
        SelfSimilarProfile::solve(SelfSimilarODE::nw(d, p), opt));
    return models::Profile::type1(core, 2.0 / double(p - 1));
}

} // namespace chlab::selfsim

#endif

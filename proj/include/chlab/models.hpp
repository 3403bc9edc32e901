#ifndef CHLAB_MODELS_HPP
#define CHLAB_MODELS_HPP

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include "chlab/geometry.hpp"
#include "chlab/jets.hpp"

namespace chlab::models {

using geometry::DoubleNullPoint;
using geometry::WeightVector;

enum class EquationFamily { NW, WMS, Nullform };

inline const char* to_string(EquationFamily f) {
    switch (f) {
        case EquationFamily::NW: return "nw";
        case EquationFamily::WMS: return "wms";
        case EquationFamily::Nullform: return "nullform";
    }
    return "?";
}

inline EquationFamily family_from_string(const std::string& s) {
    if (s == "nw") return EquationFamily::NW;
    if (s == "wms") return EquationFamily::WMS;
    if (s == "nullform") return EquationFamily::Nullform;
    throw std::invalid_argument("unknown equation family: " + s);
}

enum class ProfileKindTag {
    Zero,
    TypeISelfSimilar,
    TypeIITail,
    SupercriticalEquatorial,
    SupercriticalPower,
};

inline const char* to_string(ProfileKindTag k) {
    switch (k) {
        case ProfileKindTag::Zero: return "zero";
        case ProfileKindTag::TypeISelfSimilar: return "typeI";
        case ProfileKindTag::TypeIITail: return "typeII-tail";
        case ProfileKindTag::SupercriticalEquatorial: return "supercritical-equatorial";
        case ProfileKindTag::SupercriticalPower: return "supercritical-power";
    }
    return "?";
}

/// Interface to a tabulated self-similar profile Phi0(y); implemented by the
/// shooting solver. jet() must remain valid at the sonic points y = 1/3, 1
/// (the cone C sits exactly on y = 1/3).
struct TypeICore {
    virtual ~TypeICore() = default;
    virtual double value(double y) const = 0;
    virtual double deriv(double y) const = 0;
    virtual Jet jet(double y, std::size_t order) const = 0;
    virtual double shoot_parameter() const = 0;
    virtual double ode_residual() const = 0;
    virtual double y_max() const = 0;
};

/// Background blow-up solution phi0 with derivative access.
class Profile {
public:
    static Profile zero() { return Profile(ProfileKindTag::Zero); }

    /// Type II tail model 2 arctan(r/|t|^nu); requires nu > 1.
    static Profile type2_tail(double nu) {
        if (!(nu > 1.0)) throw std::invalid_argument("TypeII-tail requires nu > 1");
        Profile p(ProfileKindTag::TypeIITail);
        p.nu_ = nu;
        return p;
    }

    /// The equatorial map phi = pi/2 (WMS energy-supercritical background).
    static Profile supercritical_equatorial() {
        return Profile(ProfileKindTag::SupercriticalEquatorial);
    }

    /// phi0 = c_{p,d} r^{-2/(p-1)}; c_{p,d} solves (p-1)/2 c^{p-1} = d-2-2/(p-1).
    static Profile supercritical_power(int d, int p);

    /// Self-similar ansatz phi0 = T^{-c} Phi0(r/T), T = 2r - t.
    static Profile type1(std::shared_ptr<const TypeICore> core, double c_exp) {
        Profile p(ProfileKindTag::TypeISelfSimilar);
        p.core_ = std::move(core);
        p.c_exp_ = c_exp;
        return p;
    }

    ProfileKindTag kind() const { return kind_; }
    double nu() const { return nu_; }
    double c_pd() const { return c_pd_; }
    double scaling_exponent() const { return c_exp_; }
    const TypeICore* core() const { return core_.get(); }

    /// Constant on the exterior (and the linearization sees only the constant).
    bool is_constant() const {
        return kind_ == ProfileKindTag::Zero || kind_ == ProfileKindTag::SupercriticalEquatorial;
    }

    double value(const DoubleNullPoint& pt) const { return jet_v(pt, 0).value(); }

    /// Taylor jet of phi0 in v at fixed u (order m), around the given point.
    Jet jet_v(const DoubleNullPoint& pt, std::size_t m) const {
        return eval_jet(Jet::constant(m, pt.u), Jet::variable(m, pt.v));
    }

    /// Taylor jet of phi0 in u at fixed v.
    Jet jet_u(const DoubleNullPoint& pt, std::size_t m) const {
        return eval_jet(Jet::variable(m, pt.u), Jet::constant(m, pt.v));
    }

private:
    explicit Profile(ProfileKindTag k) : kind_(k) {}

    Jet eval_jet(const Jet& uj, const Jet& vj) const {
        const std::size_t m = std::max(uj.order(), vj.order());
        const Jet r = vj - uj;
        switch (kind_) {
            case ProfileKindTag::Zero:
                return Jet(m, 0.0);
            case ProfileKindTag::SupercriticalEquatorial:
                return Jet(m, std::atan(1.0) * 2.0); // pi/2
            case ProfileKindTag::TypeIITail: {
                const Jet t = uj + vj;
                if (t.value() >= 0.0)
                    throw std::domain_error("TypeII-tail profile evaluated at t >= 0");
                if (r.value() <= 0.0) throw std::domain_error("profile evaluated at r <= 0");
                return 2.0 * atan(r / pow(-t, nu_));
            }
            case ProfileKindTag::SupercriticalPower: {
                if (r.value() <= 0.0)
                    throw std::domain_error("singular profile evaluated at r <= 0");
                return c_pd_ * pow(r, -2.0 / double(p_ - 1));
            }
            case ProfileKindTag::TypeISelfSimilar: {
                if (!core_) throw std::logic_error("TypeI profile without core");
                const Jet T = 2.0 * r - (uj + vj); // = v - 3u
                if (T.value() <= 0.0) throw std::domain_error("TypeI profile: T <= 0");
                const Jet y = r / T;
                Jet outer = core_->jet(y.value(), m);
                // compose outer(w) with w = y - y0
                Jet w = y - y.value();
                Jet acc(m, 0.0);
                for (std::size_t k = m + 1; k-- > 0;) acc = acc * w + outer[k];
                if (c_exp_ == 0.0) return acc;
                return acc * pow(T, -c_exp_);
            }
        }
        throw std::logic_error("unreachable");
    }

    ProfileKindTag kind_;
    double nu_ = 0.0;
    double c_pd_ = 0.0;
    double c_exp_ = 0.0;
    int p_ = 0;
    std::shared_ptr<const TypeICore> core_;

    friend Profile make_supercritical_power(int d, int p, double c_pd);
};

/// Equation family with dimension, power/corotation index and background.
struct EquationSpec {
    EquationFamily family = EquationFamily::NW;
    int d = 3;
    int p = 5; // NW power
    int K = 1; // WMS corotation index
    ProfileKindTag background = ProfileKindTag::Zero;

    void validate() const {
        switch (family) {
            case EquationFamily::NW:
                if (d < 3) throw std::invalid_argument("NW requires d >= 3");
                if (p < 2) throw std::invalid_argument("NW requires integer p >= 2");
                break;
            case EquationFamily::WMS:
                if (d < 2) throw std::invalid_argument("WMS requires d >= 2");
                if (K < 1) throw std::invalid_argument("WMS requires K >= 1");
                break;
            case EquationFamily::Nullform:
                if (d < 3) throw std::invalid_argument("Nullform model requires d >= 3");
                break;
        }
    }

    double lambda() const { return double(K) * double(d + K - 2); } // WMS coupling
    std::string label() const {
        std::ostringstream os;
        os << to_string(family) << "-d" << d;
        if (family == EquationFamily::NW) os << "-p" << p;
        if (family == EquationFamily::WMS) os << "-K" << K;
        return os.str();
    }
};

/// Linear/nonlinear split of the right-hand side of Box phi = N(phi) + V phi + f
/// for the perturbation around the declared background. Potentials carry the
/// scaling-critical r^-2 explicitly; N(., 0) = 0 pointwise.
struct SplitRHS {
    std::function<double(const DoubleNullPoint&)> V;
    std::function<double(const DoubleNullPoint&, double phi, double dphi_u, double dphi_v)> N;
    std::function<double(const DoubleNullPoint&)> f; // inhomogeneity (0 unless set)
    double delta = 0.0;                              // admissibility gap for the declared weights
    bool needs_gradient = false;                     // N uses dphi (null-form model)

    /// v-jet of N(phi)+V phi at (u, v=0) on C, given the v-jets of phi and of
    /// d_u phi. f is required to vanish near C and contributes nothing here.
    std::function<Jet(double u, const Jet& phi, const Jet& dphi_u)> rhs_jet_on_C;

    double total(const DoubleNullPoint& pt, double phi, double du = 0.0, double dv = 0.0) const {
        return N(pt, phi, du, dv) + V(pt) * phi + (f ? f(pt) : 0.0);
    }
};

namespace detail {
inline Jet r_vjet(double u, std::size_t m) {
    // r = v - u as a v-jet at v = 0
    Jet r(m, -u);
    if (m >= 1) r.coeff(1) = 1.0;
    return r;
}
} // namespace detail

/// Calibration split with no potential and no nonlinearity (free wave).
inline SplitRHS free_split() {
    SplitRHS out;
    out.V = [](const DoubleNullPoint&) { return 0.0; };
    out.N = [](const DoubleNullPoint&, double, double, double) { return 0.0; };
    out.rhs_jet_on_C = [](double, const Jet& phi, const Jet&) { return Jet(phi.order(), 0.0); };
    out.delta = 1.0;
    return out;
}

/// Build the split for a (family, background) pair. The solved field is the
/// perturbation; constant backgrounds (zero, equatorial, the Type II vacuum pi)
/// enter only through cos(2 phi0) factors.
inline SplitRHS nonlinearity_split(const EquationSpec& spec, const Profile& background) {
    spec.validate();
    SplitRHS out;
    out.f = {};
    const int d = spec.d;

    switch (spec.family) {
        case EquationFamily::NW: {
            const int p = spec.p;
            if (background.kind() == ProfileKindTag::Zero) {
                out.V = [](const DoubleNullPoint&) { return 0.0; };
                out.N = [p](const DoubleNullPoint&, double phi, double, double) {
                    return -std::pow(phi, p);
                };
                out.rhs_jet_on_C = [p](double, const Jet& phi, const Jet&) { return -pow(phi, p); };
            } else if (background.kind() == ProfileKindTag::SupercriticalPower ||
                       background.kind() == ProfileKindTag::TypeISelfSimilar) {
                Profile bg = background;
                out.V = [bg, p](const DoubleNullPoint& pt) {
                    const double f0 = bg.value(pt);
                    return -double(p) * std::pow(f0, p - 1);
                };
                out.N = [bg, p](const DoubleNullPoint& pt, double phi, double, double) {
                    const double f0 = bg.value(pt);
                    return -(std::pow(f0 + phi, p) - std::pow(f0, p) -
                             double(p) * std::pow(f0, p - 1) * phi);
                };
                out.rhs_jet_on_C = [bg, p](double u, const Jet& phi, const Jet&) {
                    const Jet f0 = bg.jet_v({u, 0.0}, phi.order());
                    return -(pow(f0 + phi, p) - pow(f0, p));
                };
            } else {
                throw std::invalid_argument("unsupported NW background");
            }
            break;
        }
        case EquationFamily::WMS: {
            const double lam = spec.lambda();
            if (background.is_constant() || background.kind() == ProfileKindTag::TypeIITail) {
                // constant background phi0 with sin(2 phi0) = 0: cos(2 phi0) = +1
                // for 0 and the Type II vacuum pi, -1 for the equatorial map.
                const double c2 =
                    background.kind() == ProfileKindTag::SupercriticalEquatorial ? -1.0 : 1.0;
                out.V = [lam, c2](const DoubleNullPoint& pt) {
                    const double r = pt.r();
                    return lam * c2 / (r * r);
                };
                out.N = [lam, c2](const DoubleNullPoint& pt, double phi, double, double) {
                    const double r = pt.r();
                    return lam * c2 * (std::sin(2.0 * phi) - 2.0 * phi) / (2.0 * r * r);
                };
                out.rhs_jet_on_C = [lam, c2](double u, const Jet& phi, const Jet&) {
                    const Jet r = detail::r_vjet(u, phi.order());
                    return lam * c2 * sin(2.0 * phi) / (2.0 * r * r);
                };
            } else if (background.kind() == ProfileKindTag::TypeISelfSimilar) {
                Profile bg = background;
                out.V = [lam, bg](const DoubleNullPoint& pt) {
                    const double r = pt.r();
                    return lam * std::cos(2.0 * bg.value(pt)) / (r * r);
                };
                out.N = [lam, bg](const DoubleNullPoint& pt, double phi, double, double) {
                    const double r = pt.r();
                    const double f0 = bg.value(pt);
                    return lam *
                           (std::sin(2.0 * (f0 + phi)) - std::sin(2.0 * f0) -
                            2.0 * std::cos(2.0 * f0) * phi) /
                           (2.0 * r * r);
                };
                out.rhs_jet_on_C = [lam, bg](double u, const Jet& phi, const Jet&) {
                    const Jet r = detail::r_vjet(u, phi.order());
                    const Jet f0 = bg.jet_v({u, 0.0}, phi.order());
                    return lam * (sin(2.0 * (f0 + phi)) - sin(2.0 * f0)) / (2.0 * r * r);
                };
            } else {
                throw std::invalid_argument("unsupported WMS background");
            }
            break;
        }
        case EquationFamily::Nullform: {
            if (background.kind() != ProfileKindTag::Zero)
                throw std::invalid_argument("null-form model supports the zero background only");
            out.needs_gradient = true;
            out.V = [](const DoubleNullPoint&) { return 0.0; };
            // phi dphi.dphi with the Minkowski pairing: radial reduction
            // eta^{-1}(dphi,dphi) = -du(phi) dv(phi).
            out.N = [](const DoubleNullPoint&, double phi, double du, double dv) {
                return -phi * du * dv;
            };
            out.rhs_jet_on_C = [](double, const Jet& phi, const Jet& dphi_u) {
                Jet dphi_v(phi.order(), 0.0);
                for (std::size_t k = 0; k + 1 <= phi.order(); ++k)
                    dphi_v.coeff(k) = double(k + 1) * phi[k + 1];
                return -phi * dphi_u * dphi_v;
            };
            break;
        }
    }
    (void)d;
    return out;
}

/// Admissibility verdict: either a positive gap or the first violated
/// printed inequality.
struct Admissibility {
    bool ok = false;
    double delta = 0.0;
    std::string reason;

    static Admissibility admissible(double gap) { return {true, gap, {}}; }
    static Admissibility violation(std::string why) { return {false, 0.0, std::move(why)}; }
};

/// Check the exponent arithmetic for an experiment's declared weights.
/// a_minus is interpreted as the post-peeling decay order toward C and may be
/// +infinity ("peel as needed").
inline Admissibility check_exponents(const EquationSpec& spec, const WeightVector& a) {
    spec.validate();
    const double half = double(spec.d - 1) / 2.0;
    auto num = [](double x) {
        std::ostringstream os;
        os << x;
        return os.str();
    };

    double delta = 1.0;
    switch (spec.family) {
        case EquationFamily::NW: {
            const bool bg = spec.background == ProfileKindTag::SupercriticalPower ||
                            spec.background == ProfileKindTag::TypeISelfSimilar;
            if (bg) {
                const double bound = -2.0 / double(spec.p - 1);
                if (!(a.a_zero > bound))
                    return Admissibility::violation("a0>" + num(bound) +
                                                    " required for the r^-2 background potential");
                delta = std::min(delta, a.a_zero - bound);
            } else {
                // p a0 + 2 > a0, i.e. (p-1) a0 + 2 > 0
                const double margin = double(spec.p - 1) * a.a_zero + 2.0;
                if (!(margin > 0.0)) {
                    std::ostringstream os;
                    os << spec.p << "a0+2>a0 fails at boundary (a0 = " << a.a_zero << ")";
                    return Admissibility::violation(os.str());
                }
                delta = std::min(delta, margin);
            }
            break;
        }
        case EquationFamily::WMS: {
            if (!(a.a_zero > 0.0))
                return Admissibility::violation("a0>0 required for the corotational nonlinearity");
            const bool quad_vanishes =
                spec.background == ProfileKindTag::SupercriticalEquatorial ||
                spec.background == ProfileKindTag::Zero ||
                spec.background == ProfileKindTag::TypeIITail;
            delta = std::min(delta, quad_vanishes ? 2.0 * a.a_zero : a.a_zero);
            break;
        }
        case EquationFamily::Nullform: {
            if (!(a.a_zero > half))
                return Admissibility::violation("a0>(d-1)/2 required for the null-form model");
            delta = std::min(delta, a.a_zero - half);
            break;
        }
    }

    if (!(a.a_plus < 0.0))
        return Admissibility::violation("a+<0 required");
    if (!(a.a_zero + half > a.a_plus))
        return Admissibility::violation("a->a0+(d-1)/2>a+ fails on the right");
    if (!(a.a_minus > a.a_zero + half))
        return Admissibility::violation("a->a0+(d-1)/2>a+ fails on the left (peel order too low)");
    return Admissibility::admissible(delta);
}

/// Constants of the printed algebraic relations.
struct ExponentConstants {
    double c_pd = std::numeric_limits<double>::quiet_NaN();
    double gamma = std::numeric_limits<double>::quiet_NaN();
    double c = std::numeric_limits<double>::quiet_NaN();
};

/// gamma = (d - 2 - sqrt(d^2 - 8d + 8))/2; defined for d >= 7.
inline double gamma_supercritical(int d) {
    if (d < 7) throw std::domain_error("gamma_supercritical: needs d >= 7");
    return 0.5 * (double(d) - 2.0 - std::sqrt(double(d) * d - 8.0 * d + 8.0));
}

inline ExponentConstants exponent_constants(EquationFamily family, int d, int p = 0) {
    ExponentConstants out;
    if (family == EquationFamily::NW) {
        if (d < 3) throw std::domain_error("exponent_constants: NW needs d >= 3");
        if (p < 2) throw std::domain_error("exponent_constants: NW needs p >= 2");
        out.c = 2.0 / double(p - 1);
        const double rhs = double(d) - 2.0 - 2.0 / double(p - 1);
        if (rhs <= 0.0)
            throw std::domain_error("exponent_constants: c_{p,d} undefined (d-2-2/(p-1) <= 0)");
        out.c_pd = std::pow(2.0 * rhs / double(p - 1), 1.0 / double(p - 1));
        if (d >= 7) out.gamma = gamma_supercritical(d);
    } else if (family == EquationFamily::WMS) {
        out.c = 0.0;
        if (d >= 7) out.gamma = gamma_supercritical(d);
    } else {
        throw std::domain_error("exponent_constants: null-form model has no printed constants");
    }
    return out;
}

inline Profile make_supercritical_power(int d, int p, double c_pd) {
    Profile prof(ProfileKindTag::SupercriticalPower);
    prof.c_pd_ = c_pd;
    prof.p_ = p;
    prof.c_exp_ = 2.0 / double(p - 1);
    (void)d;
    return prof;
}

inline Profile Profile::supercritical_power(int d, int p) {
    const auto ec = exponent_constants(EquationFamily::NW, d, p);
    return make_supercritical_power(d, p, ec.c_pd);
}

/// Evaluate phi0 and its derivatives up to order m at a point; returns the
/// v-direction Taylor jet. Kept as a free function to mirror the operation
/// catalog; Profile methods do the work.
inline Jet profile_eval(const Profile& prof, const DoubleNullPoint& pt, std::size_t m) {
    return prof.jet_v(pt, m);
}

} // namespace chlab::models

#endif

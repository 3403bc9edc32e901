#ifndef CHLAB_CHARDATA_HPP
#define CHLAB_CHARDATA_HPP

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "chlab/geometry.hpp"
#include "chlab/jets.hpp"
#include "chlab/models.hpp"

namespace chlab::chardata {

using geometry::DoubleNullPoint;
using models::EquationSpec;
using models::Profile;
using models::SplitRHS;

struct transport_error : std::runtime_error {
    int level;
    double exponent;
    transport_error(const std::string& what, int lvl, double expnt)
        : std::runtime_error(what), level(lvl), exponent(expnt) {}
};

/// Analytic curve with derivative access through jets.
class Curve {
public:
    using Fn = std::function<Jet(const Jet&)>;

    Curve() : fn_([](const Jet& x) { return Jet(x.order(), 0.0); }) {}
    explicit Curve(Fn fn) : fn_(std::move(fn)) {}

    double value(double x) const { return fn_(Jet::constant(0, x)).value(); }
    double derivative(double x, std::size_t k) const { return jet(x, k).derivative(k); }
    Jet jet(double x, std::size_t order) const { return fn_(Jet::variable(order, x)); }

    Curve operator+(const Curve& o) const {
        Fn a = fn_, b = o.fn_;
        return Curve([a, b](const Jet& x) { return a(x) + b(x); });
    }
    Curve scaled(double s) const {
        Fn a = fn_;
        return Curve([a, s](const Jet& x) { return a(x) * s; });
    }

    static Curve zero() { return Curve(); }
    /// amp * r^a as a function of u on C (r = -u).
    static Curve power_of_r(double a, double amp = 1.0) {
        return Curve([a, amp](const Jet& u) { return amp * pow(-u, a); });
    }
    static Curve polynomial(std::vector<double> coeffs) {
        return Curve([c = std::move(coeffs)](const Jet& x) {
            Jet acc(x.order(), 0.0);
            for (std::size_t k = c.size(); k-- > 0;) acc = acc * x + c[k];
            return acc;
        });
    }
};

/// C-infinity cutoff in s, equal to 1 for s <= lo and 0 for s >= hi.
class Cutoff {
public:
    Cutoff(double lo = 0.25, double hi = 0.5) : lo_(lo), hi_(hi) {}
    double lo() const { return lo_; }
    double hi() const { return hi_; }

    double value(double s) const { return jet(Jet::constant(0, s)).value(); }

    Jet jet(const Jet& s) const {
        const double sv = s.value();
        if (sv <= lo_) return Jet(s.order(), 1.0);
        if (sv >= hi_) return Jet(s.order(), 0.0);
        // f(t) = exp(-1/t); chi = f(b)/(f(b)+f(a)), a = (s-lo)/w, b = (hi-s)/w
        const double w = hi_ - lo_;
        Jet a = (s - lo_) / w;
        Jet b = (hi_ - s) / w;
        Jet fa = exp(-1.0 / a);
        Jet fb = exp(-1.0 / b);
        return fb / (fa + fb);
    }

private:
    double lo_, hi_;
};

/// Dense tabulation of one transversal-jet level c_k(u) (Taylor coefficient of
/// phi in v on C) with its u-derivative, cubic-Hermite interpolated.
struct JetLevel {
    std::vector<double> u;  // increasing (u_left .. -u_end)
    std::vector<double> c;
    std::vector<double> cp; // dc/du at nodes

    double eval(double x, int deriv = 0) const {
        if (u.empty()) throw std::logic_error("empty jet level");
        auto it = std::upper_bound(u.begin(), u.end(), x);
        std::size_t i = it == u.begin() ? 0 : std::size_t(it - u.begin()) - 1;
        i = std::min(i, u.size() - 2);
        const double h = u[i + 1] - u[i];
        const double t = (x - u[i]) / h;
        const double f0 = c[i], f1 = c[i + 1], d0 = cp[i] * h, d1 = cp[i + 1] * h;
        const double t2 = t * t, t3 = t2 * t;
        if (deriv == 0)
            return (2 * t3 - 3 * t2 + 1) * f0 + (t3 - 2 * t2 + t) * d0 +
                   (-2 * t3 + 3 * t2) * f1 + (t3 - t2) * d1;
        // first derivative in x
        return ((6 * t2 - 6 * t) * f0 + (3 * t2 - 4 * t + 1) * d0 + (-6 * t2 + 6 * t) * f1 +
                (3 * t2 - 2 * t) * d1) /
               h;
    }
};

/// Compatible characteristic data: traces of the evolved (perturbation) field
/// on C and Cbar plus transversal-derivative jets along C. Traces are stored
/// in the perturbation normalization; the background enters through the split.
struct CharacteristicData {
    Curve trace_C;     // function of u on C (v = 0), r = -u
    Curve trace_Cbar;  // function of v on Cbar (u = u_left)
    double u_left = -1.0;
    int jet_order = 0;              // m
    std::vector<JetLevel> jets;     // levels 1..m (Taylor coefficients c_k)
    double a_zero = 0.0;            // decay tag
    int regularity_k = 32;          // regularity tag
    bool conormal = false;          // finite transversal regularity across C
    int jet_cap = -1;               // recorded cap for conormal cases
    std::string case_id;
    models::ProfileKindTag background = models::ProfileKindTag::Zero;

    /// phi-jet in v at (u, 0) built from trace + stored jet levels.
    Jet phi_vjet_on_C(double u, std::size_t m) const {
        Jet out(m, trace_C.value(u));
        for (std::size_t k = 1; k <= m; ++k) {
            if (k - 1 >= jets.size()) throw std::out_of_range("jet order exceeds stored levels");
            out.coeff(k) = jets[k - 1].eval(u);
        }
        return out;
    }

    double corner_value() const { return trace_C.value(u_left); }
    double corner_mismatch() const { return trace_C.value(u_left) - trace_Cbar.value(0.0); }
};

namespace detail {

/// Evaluate du-derivatives of the jet hierarchy at u, given trace h and the
/// current Taylor coefficients cs[0..m] (cs[0] = h(u)). Returns cp[k] = dc_k/du
/// for k = 1..m; the hierarchy is triangular: level k uses cp[<k].
///
/// From the radial equation Box phi = RHS with
/// Box = -du dv + (d-1)/(2r)(dv - du), restricted to C by v-Taylor expansion:
///   d/du c_k = ( [a (dv phi - du phi)]_{k-1} - [RHS]_{k-1} ) / k
/// with a = (d-1)/(2r), all brackets v-Taylor coefficients at v = 0.
inline std::vector<double> hierarchy_rhs(const SplitRHS& split, int d, double u,
                                         const Curve& trace, const std::vector<double>& cs,
                                         std::size_t m) {
    Jet r = Jet::variable(m, 0.0) + (-u); // r = v - u at v=0: value -u, slope 1
    Jet a = double(d - 1) / (2.0 * r);
    Jet phi(m, cs[0]);
    for (std::size_t k = 1; k <= m; ++k) phi.coeff(k) = cs[k];
    Jet dvphi(m, 0.0);
    for (std::size_t k = 0; k + 1 <= m; ++k) dvphi.coeff(k) = double(k + 1) * phi[k + 1];

    std::vector<double> cp(m + 1, 0.0);
    cp[0] = trace.derivative(u, 1);
    Jet duphi(m, 0.0);
    for (std::size_t k = 1; k <= m; ++k) {
        for (std::size_t j = 0; j < k; ++j) duphi.coeff(j) = cp[j];
        Jet transport = a * (dvphi - duphi);
        Jet rhs = split.rhs_jet_on_C ? split.rhs_jet_on_C(u, phi, duphi) : Jet(m, 0.0);
        cp[k] = (transport[k - 1] - rhs[k - 1]) / double(k);
    }
    cp.erase(cp.begin()); // return levels 1..m
    return cp;
}

} // namespace detail

struct TransportOptions {
    double u_end = -1e-6;      // integrate the hierarchy down to this u
    std::size_t nodes_per_decade = 96;
    bool regular_branch = false; // kill the r^{-(d-1)/2} homogeneous mode
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
};

/// Fill transversal-derivative jets up to order m by integrating the transport
/// hierarchy along C from the corner. Corner seeds are the v-derivatives of
/// trace_Cbar; in regular-branch mode each level's homogeneous mode
/// (r^{-(d-1)/2}, the same at every level) is removed instead, which realizes
/// the conjectured decaying jets for power-law traces.
inline CharacteristicData build_transversal_jet(CharacteristicData data, const EquationSpec& spec,
                                                const SplitRHS& split, int m,
                                                TransportOptions opt = {}) {
    spec.validate();
    if (m < 0) throw std::invalid_argument("jet order must be >= 0");
    if (data.conormal && data.jet_cap >= 0 && m > data.jet_cap) {
        std::ostringstream os;
        os << "requested jet order " << m << " exceeds the conormal cap " << data.jet_cap;
        throw std::invalid_argument(os.str());
    }
    data.jet_order = m;
    data.jets.clear();
    if (m == 0) return data;

    const int d = spec.d;
    const double uL = data.u_left;
    const double uE = opt.u_end;
    if (!(uE > uL && uE < 0.0)) throw std::invalid_argument("transport: need u_left < u_end < 0");

    // geometric output nodes in |u|
    const double decades = std::log10(std::abs(uL) / std::abs(uE));
    const std::size_t n = std::max<std::size_t>(8, std::size_t(decades * opt.nodes_per_decade));
    std::vector<double> us(n + 1);
    for (std::size_t i = 0; i <= n; ++i)
        us[i] = -std::exp(std::log(std::abs(uL)) +
                          (std::log(std::abs(uE)) - std::log(std::abs(uL))) * double(i) / double(n));

    namespace odeint = boost::numeric::odeint;
    using state_t = std::vector<double>;

    std::vector<JetLevel> levels(m);
    for (auto& L : levels) {
        L.u = us;
        L.c.assign(us.size(), 0.0);
        L.cp.assign(us.size(), 0.0);
    }

    auto check_finite = [&](double x, int lvl, double u) {
        if (!std::isfinite(x)) {
            // report the locally fitted growth exponent of the level below
            double expnt = 0.0;
            if (lvl >= 2) {
                const auto& L = levels[std::size_t(lvl) - 2];
                expnt = std::log(std::abs(L.c[L.c.size() / 2] / (L.c[L.c.size() / 4] + 1e-300))) /
                        std::log(std::abs(L.u[L.u.size() / 2] / L.u[L.u.size() / 4]));
            }
            std::ostringstream os;
            os << "non-integrable transport source at level " << lvl << " near u = " << u;
            throw transport_error(os.str(), lvl, expnt);
        }
    };

    if (!opt.regular_branch) {
        // corner-seeded: integrate the coupled hierarchy simultaneously
        Jet corner = data.trace_Cbar.jet(0.0, std::size_t(m));
        state_t z(std::size_t(m));
        for (int k = 1; k <= m; ++k) z[std::size_t(k) - 1] = corner[std::size_t(k)];
        auto sys = [&](const state_t& s, state_t& ds, double u) {
            std::vector<double> cs(std::size_t(m) + 1);
            cs[0] = data.trace_C.value(u);
            for (int j = 1; j <= m; ++j) cs[std::size_t(j)] = s[std::size_t(j) - 1];
            ds = detail::hierarchy_rhs(split, d, u, data.trace_C, cs, std::size_t(m));
        };
        auto stepper = odeint::make_controlled(opt.abs_tol, opt.rel_tol,
                                               odeint::runge_kutta_dopri5<state_t>());
        auto record = [&](std::size_t i, const state_t& s) {
            state_t ds(std::size_t(m));
            sys(s, ds, us[i]);
            for (int k = 1; k <= m; ++k) {
                check_finite(s[std::size_t(k) - 1], k, us[i]);
                levels[std::size_t(k) - 1].c[i] = s[std::size_t(k) - 1];
                levels[std::size_t(k) - 1].cp[i] = ds[std::size_t(k) - 1];
            }
        };
        record(0, z);
        for (std::size_t i = 1; i < us.size(); ++i) {
            odeint::integrate_adaptive(stepper, sys, z, us[i - 1], us[i],
                                       (us[i] - us[i - 1]) * 0.1);
            record(i, z);
        }
    } else {
        // regular branch: level-by-level with the exact homogeneous correction
        // H(u) = (|u|/|u_left|)^{-(d-1)/2} (identical at every level) removed
        // by matching at the small-|u| end.
        const double halfd = double(d - 1) / 2.0;
        for (int k = 1; k <= m; ++k) {
            auto& L = levels[std::size_t(k) - 1];
            state_t z{0.0};
            auto sys = [&](const state_t& s, state_t& ds, double u) {
                std::vector<double> cs(std::size_t(k) + 1);
                cs[0] = data.trace_C.value(u);
                for (int j = 1; j < k; ++j) cs[std::size_t(j)] = levels[std::size_t(j) - 1].eval(u);
                cs[std::size_t(k)] = s[0];
                auto cp = detail::hierarchy_rhs(split, d, u, data.trace_C, cs, std::size_t(k));
                ds[0] = cp[std::size_t(k) - 1];
            };
            auto stepper = odeint::make_controlled(opt.abs_tol, opt.rel_tol,
                                                   odeint::runge_kutta_dopri5<state_t>());
            L.c[0] = 0.0;
            {
                state_t ds(1);
                sys(z, ds, us[0]);
                L.cp[0] = ds[0];
            }
            for (std::size_t i = 1; i < us.size(); ++i) {
                odeint::integrate_adaptive(stepper, sys, z, us[i - 1], us[i],
                                           (us[i] - us[i - 1]) * 0.1);
                check_finite(z[0], k, us[i]);
                L.c[i] = z[0];
                state_t ds(1);
                sys(z, ds, us[i]);
                L.cp[i] = ds[0];
            }
            auto H = [&](double u) { return std::pow(std::abs(u) / std::abs(uL), -halfd); };
            const double beta = -L.c.back() / H(us.back());
            for (std::size_t i = 0; i < us.size(); ++i) {
                L.c[i] += beta * H(us[i]);
                L.cp[i] += beta * (-halfd) * H(us[i]) / us[i];
            }
        }
    }

    data.jets = std::move(levels);

    if (opt.regular_branch) {
        // rebuild the Cbar trace as the polynomial jet extension with cutoff so
        // the corner stays compatible with the selected branch
        std::vector<double> coeffs(std::size_t(m) + 1);
        coeffs[0] = data.trace_C.value(uL);
        for (int k = 1; k <= m; ++k) coeffs[std::size_t(k)] = data.jets[std::size_t(k) - 1].c[0];
        Cutoff cut(0.25, 0.5);
        const double vscale = std::abs(uL);
        data.trace_Cbar = Curve([coeffs, cut, vscale](const Jet& v) {
            Jet acc(v.order(), 0.0);
            for (std::size_t k = coeffs.size(); k-- > 0;) acc = acc * v + coeffs[k];
            return acc * cut.jet(v / vscale);
        });
    }
    return data;
}

/// Peeling approximant phi1(u,v) = chi(v/|u|) sum_k c_k(u) v^k with smooth
/// cutoff supported in {v <= |u|/2}. Exact on C; residual decays like
/// rho_-^l toward C.
class Approximant {
public:
    Approximant(const CharacteristicData& data, int l, Cutoff cut = Cutoff(0.25, 0.5))
        : data_(&data), l_(l), cut_(cut) {
        if (l < 0 || l > data.jet_order)
            throw std::invalid_argument("peel order exceeds available jet order");
    }

    int order() const { return l_; }

    double value(double u, double v) const { return eval(u, v).val; }
    double du(double u, double v) const { return eval(u, v).du; }
    double dv(double u, double v) const { return eval(u, v).dv; }
    double dudv(double u, double v) const { return eval(u, v).dudv; }

    /// Equation residual Box phi1 - N(phi1) - V phi1 at (u,v), all terms
    /// evaluated analytically from the stored jets.
    double residual(double u, double v, const SplitRHS& split, int d) const {
        auto e = eval(u, v);
        const double r = v - u;
        const double a = double(d - 1) / (2.0 * r);
        const double box = -e.dudv + a * (e.dv - e.du);
        return box - split.total({u, v}, e.val, e.du, e.dv);
    }

private:
    struct EvalOut {
        double val, du, dv, dudv;
    };

    EvalOut eval(double u, double v) const {
        // p(u,v) = sum c_k(u) v^k; chi(s), s = -v/u
        double p = 0, pu = 0, pv = 0, puv = 0;
        double vk = 1.0, vkm1 = 0.0;
        for (int k = 0; k <= l_; ++k) {
            const double c = k == 0 ? data_->trace_C.value(u) : data_->jets[std::size_t(k) - 1].eval(u);
            const double cp =
                k == 0 ? data_->trace_C.derivative(u, 1) : data_->jets[std::size_t(k) - 1].eval(u, 1);
            p += c * vk;
            pu += cp * vk;
            if (k >= 1) {
                pv += double(k) * c * vkm1;
                puv += double(k) * cp * vkm1;
            }
            vkm1 = vk;
            vk *= v;
        }
        const double s = -v / u;
        Jet chi_j = cut_.jet(Jet::variable(2, s));
        const double chi = chi_j.value();
        const double chip = chi_j.derivative(1);
        const double chipp = chi_j.derivative(2);
        const double su = v / (u * u);
        const double sv = -1.0 / u;
        const double suv = 1.0 / (u * u);
        EvalOut out;
        out.val = chi * p;
        out.du = chip * su * p + chi * pu;
        out.dv = chip * sv * p + chi * pv;
        out.dudv = chipp * su * sv * p + chip * (suv * p + su * pv + sv * pu) + chi * puv;
        return out;
    }

    const CharacteristicData* data_;
    int l_;
    Cutoff cut_;
};

inline Approximant peel(const CharacteristicData& data, int l) { return Approximant(data, l); }

/// Data construction kinds for perturb_trace.
struct PowerTail {
    double a0 = 0.25;
    double amplitude = 1.0;
    double tail_delta = 0.0;     // optional subleading tail a0 + delta
    double tail_amplitude = 0.0;
};

/// trace = background trace + prescribed tail; the Cbar side is a smooth
/// corner-matching extension. For power tails the jets are the decaying
/// branch; for the Type II arctan model they follow the profile itself and
/// the jet order is capped at floor(a0 + (d-1)/2) (conormal bookkeeping).
inline CharacteristicData perturb_trace(const Profile& base, const PowerTail& kind,
                                        const EquationSpec& spec, const SplitRHS& split, int m,
                                        double u_left = -1.0, TransportOptions topt = {}) {
    CharacteristicData data;
    data.u_left = u_left;
    data.a_zero = kind.a0;
    data.background = base.kind();

    switch (base.kind()) {
        case models::ProfileKindTag::Zero:
        case models::ProfileKindTag::SupercriticalEquatorial:
        case models::ProfileKindTag::SupercriticalPower:
        case models::ProfileKindTag::TypeISelfSimilar: {
            // perturbation tail around the background
            Curve t = Curve::power_of_r(kind.a0, kind.amplitude);
            if (kind.tail_amplitude != 0.0)
                t = t + Curve::power_of_r(kind.a0 + kind.tail_delta, kind.tail_amplitude);
            data.trace_C = t;
            data.trace_Cbar = Curve(); // rebuilt by the regular-branch transport
            topt.regular_branch = true;
            data.case_id = "power-tail";
            return build_transversal_jet(std::move(data), spec, split, m, topt);
        }
        case models::ProfileKindTag::TypeIITail: {
            // perturbation measured from the vacuum pi: trace = phi0|_C - pi
            constexpr double pi = 3.14159265358979323846;
            Profile prof = base;
            data.trace_C = Curve([prof](const Jet& u) {
                Jet phi0 = prof.jet_u({u.value(), 0.0}, u.order());
                return phi0 - pi;
            });
            data.trace_Cbar = Curve([prof, u_left](const Jet& v) {
                Jet phi0 = prof.jet_v({u_left, v.value()}, v.order());
                return phi0 - pi;
            });
            data.a_zero = prof.nu() - 1.0;
            data.conormal = true;
            data.jet_cap = int(std::floor(data.a_zero + double(spec.d - 1) / 2.0));
            data.case_id = "type2-tail";
            const int mm = std::min(m, data.jet_cap);
            return build_transversal_jet(std::move(data), spec, split, mm, topt);
        }
    }
    throw std::invalid_argument("perturb_trace: unsupported (profile, case) pair");
}

/// Serialization: JSON header plus CSV tables (u, trace, jet_1..jet_m) and
/// (v, trace).
inline void save_chardata(const CharacteristicData& data, const std::string& basename,
                          std::size_t n_samples = 257, double v_max = 1.0) {
    {
        std::ofstream js(basename + ".json");
        js << "{\"case_id\":\"" << data.case_id << "\",\"a_zero\":" << data.a_zero
           << ",\"jet_order\":" << data.jet_order << ",\"u_left\":" << data.u_left
           << ",\"corner_value\":" << std::setprecision(17) << data.corner_value()
           << ",\"corner_mismatch\":" << data.corner_mismatch()
           << ",\"conormal\":" << (data.conormal ? "true" : "false") << "}\n";
    }
    {
        std::ofstream cs(basename + "_C.csv");
        cs << "u,trace";
        for (int k = 1; k <= data.jet_order; ++k) cs << ",jet_" << k;
        cs << "\n" << std::setprecision(17);
        for (std::size_t i = 0; i < n_samples; ++i) {
            const double u = data.u_left * std::pow(1e-4, double(i) / double(n_samples - 1));
            cs << u << "," << data.trace_C.value(u);
            for (int k = 1; k <= data.jet_order; ++k)
                cs << "," << data.jets[std::size_t(k) - 1].eval(u);
            cs << "\n";
        }
    }
    {
        std::ofstream cb(basename + "_Cbar.csv");
        cb << "v,trace\n" << std::setprecision(17);
        for (std::size_t i = 0; i < n_samples; ++i) {
            const double v = v_max * double(i) / double(n_samples - 1);
            cb << v << "," << data.trace_Cbar.value(v) << "\n";
        }
    }
}

} // namespace chlab::chardata

#endif

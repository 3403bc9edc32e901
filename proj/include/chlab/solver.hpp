#ifndef CHLAB_SOLVER_HPP
#define CHLAB_SOLVER_HPP

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "chlab/chardata.hpp"
#include "chlab/geometry.hpp"
#include "chlab/models.hpp"

namespace chlab::solver {

using chardata::Approximant;
using chardata::CharacteristicData;
using geometry::DomainSpec;
using geometry::DoubleNullPoint;
using geometry::Grid;
using models::EquationSpec;
using models::SplitRHS;

struct blowup_error : std::runtime_error {
    std::size_t i, j;
    double u, v;
    std::vector<double> last_slice; // last fully finite v-row
    blowup_error(std::size_t i_, std::size_t j_, double u_, double v_, std::vector<double> slice)
        : std::runtime_error("field blow-up detected during characteristic marching"),
          i(i_), j(j_), u(u_), v(v_), last_slice(std::move(slice)) {}
};

struct step_error : std::runtime_error {
    std::size_t i, j;
    double u, v;
    step_error(std::size_t i_, std::size_t j_, double u_, double v_)
        : std::runtime_error("nonlinear corner iteration failed to contract"),
          i(i_), j(j_), u(u_), v(v_) {}
};

/// Evolved rescaled field psi = r^{(d-1)/2} phi on the double-null grid.
class FieldGrid {
public:
    FieldGrid() = default;
    FieldGrid(Grid grid, int d)
        : grid_(std::move(grid)), d_(d), m_(double(d - 1) / 2.0),
          psi_(grid_.nu() * grid_.nv(), 0.0) {}

    const Grid& grid() const { return grid_; }
    int d() const { return d_; }
    double twist_exponent() const { return m_; }

    double& psi(std::size_t i, std::size_t j) { return psi_[i * grid_.nv() + j]; }
    double psi(std::size_t i, std::size_t j) const { return psi_[i * grid_.nv() + j]; }
    double beta(std::size_t i, std::size_t j) const {
        return std::pow(grid_.v(j) - grid_.u(i), m_);
    }
    double phi(std::size_t i, std::size_t j) const { return psi(i, j) / beta(i, j); }

    const std::vector<double>& raw() const { return psi_; }
    std::vector<double>& raw() { return psi_; }

    std::string equation_label;
    std::string data_case;

private:
    Grid grid_;
    int d_ = 3;
    double m_ = 1.0;
    std::vector<double> psi_;
};

struct SolveReport {
    double max_interior_residual = 0.0;
    std::string boundary_bottom;
    std::string boundary_left;
    double wall_seconds = 0.0;
    std::size_t max_fixed_point_iters = 0;
    std::size_t stiff_cells = 0;
    bool residual_checked = false;
};

struct EvolveOptions {
    int peel_order = 1;
    std::size_t max_iters = 20;
    double contraction_tol = 1e-12;
    double blowup_cap = 1e10;
    bool check_residual = true;
    double stiff_factor = 10.0; // halve the u-step where rho0 < stiff_factor * spacing
};

namespace detail {

/// One diamond cell: given psi at S=(i-1,j-1), E=(i-1,j), W=(i,j-1), solve for
/// N=(i,j) from the cell-centered second-order recurrence
///   psi_N = psi_W + psi_E - psi_S - du dv F(center),
/// F = c_d psi/r^2 + beta (N(phi)+V phi+f), fixed-point in the corner value.
template <class RHS>
double solve_cell(const RHS& F, double uS, double uN, double vS, double vN, double psiS,
                  double psiE, double psiW, const EvolveOptions& opt, double psiN_guess,
                  std::size_t& iters_out) {
    const double du = uN - uS, dv = vN - vS;
    const double uc = 0.5 * (uS + uN), vc = 0.5 * (vS + vN);
    const double base = psiW + psiE - psiS;
    const double quarter = 0.25 * (psiW + psiE + psiS);
    double x = psiN_guess;
    std::size_t it = 0;
    for (; it < opt.max_iters; ++it) {
        const double psic = quarter + 0.25 * x;
        const double dupsi = ((x + psiW) - (psiE + psiS)) / (2.0 * du);
        const double dvpsi = ((x + psiE) - (psiW + psiS)) / (2.0 * dv);
        const double xn = base - du * dv * F(uc, vc, psic, dupsi, dvpsi);
        const double diff = std::abs(xn - x);
        x = xn;
        if (diff < opt.contraction_tol * (1.0 + std::abs(x))) break;
    }
    iters_out = std::max(iters_out, it + 1);
    return x;
}

} // namespace detail

/// March the diamond recurrence over the grid. `rhs` returns
/// c_d psi/r^2 + beta*(N+V phi+f) given (u, v, psi, du psi, dv psi) at the
/// cell center. Data rows: bottom(u) on v = v_min, left(v) on u = u_left
/// (the corner node comes from `bottom`).
template <class RHS>
FieldGrid evolve_raw(const Grid& grid, int d, const RHS& rhs,
                     const std::function<double(double)>& bottom,
                     const std::function<double(double)>& left, const EvolveOptions& opt,
                     SolveReport* report = nullptr) {
    FieldGrid f(grid, d);
    const std::size_t Nu = grid.nu(), Nv = grid.nv();
    for (std::size_t i = 0; i < Nu; ++i) f.psi(i, 0) = bottom(grid.u(i));
    for (std::size_t j = 1; j < Nv; ++j) f.psi(0, j) = left(grid.v(j));

    std::size_t max_iters = 0, stiff_cells = 0;
    for (std::size_t j = 1; j < Nv; ++j) {
        for (std::size_t i = 1; i < Nu; ++i) {
            const double uS = grid.u(i - 1), uN = grid.u(i);
            const double vS = grid.v(j - 1), vN = grid.v(j);
            const double psiS = f.psi(i - 1, j - 1), psiE = f.psi(i - 1, j),
                         psiW = f.psi(i, j - 1);
            double out;
            const double rc = 0.5 * (vS + vN) - 0.5 * (uS + uN);
            const double hmax = std::max(uN - uS, vN - vS);
            if (rc < opt.stiff_factor * hmax && i >= 2) {
                // stiff 1/r^2 zone: halve the step in u inside this cell
                ++stiff_cells;
                const double um = 0.5 * (uS + uN);
                // psi at (um, vS-line) by quadratic interpolation along row j-1
                const double u0 = grid.u(i - 2), u1 = uS, u2 = uN;
                const double y0 = f.psi(i - 2, j - 1), y1 = psiS, y2 = psiW;
                const double l0 = (um - u1) * (um - u2) / ((u0 - u1) * (u0 - u2));
                const double l1 = (um - u0) * (um - u2) / ((u1 - u0) * (u1 - u2));
                const double l2 = (um - u0) * (um - u1) / ((u2 - u0) * (u2 - u1));
                const double psi_mS = l0 * y0 + l1 * y1 + l2 * y2;
                const double psi_mN =
                    detail::solve_cell(rhs, uS, um, vS, vN, psiS, psiE, psi_mS, opt,
                                       psiE + psi_mS - psiS, max_iters);
                out = detail::solve_cell(rhs, um, uN, vS, vN, psi_mS, psi_mN, psiW, opt,
                                         psi_mN + psiW - psi_mS, max_iters);
            } else {
                out = detail::solve_cell(rhs, uS, uN, vS, vN, psiS, psiE, psiW, opt,
                                         psiW + psiE - psiS, max_iters);
            }
            if (!std::isfinite(out) || std::abs(out) > opt.blowup_cap) {
                std::vector<double> slice(Nu, 0.0);
                for (std::size_t ii = 0; ii < Nu; ++ii) slice[ii] = f.psi(ii, j - 1);
                throw blowup_error(i, j, grid.u(i), grid.v(j), std::move(slice));
            }
            f.psi(i, j) = out;
        }
    }
    if (report) {
        report->max_fixed_point_iters = max_iters;
        report->stiff_cells = stiff_cells;
    }
    return f;
}

/// Interior equation residual on a strictly finer stencil family than the
/// marching stencil: node-centered nonuniform differences.
template <class RHS>
double interior_residual(const FieldGrid& f, const RHS& rhs, std::size_t stride = 1) {
    const Grid& g = f.grid();
    double worst = 0.0;
    auto psi = [&](std::size_t i, std::size_t j) { return f.psi(i, j); };
    for (std::size_t i = 1; i + 1 < g.nu(); i += stride) {
        auto wu = Grid::d1_weights(g.ulines(), i);
        for (std::size_t j = 1; j + 1 < g.nv(); j += stride) {
            auto wv = Grid::d1_weights(g.vlines(), j);
            double dudv = 0.0;
            const double us[3] = {wu[0], wu[1], wu[2]};
            const double vs[3] = {wv[0], wv[1], wv[2]};
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b)
                    dudv += us[a] * vs[b] * psi(i - 1 + std::size_t(a), j - 1 + std::size_t(b));
            double dup = 0.0, dvp = 0.0;
            for (int a = 0; a < 3; ++a) {
                dup += us[a] * psi(i - 1 + std::size_t(a), j);
                dvp += vs[a] * psi(i, j - 1 + std::size_t(a));
            }
            const double E =
                -dudv - rhs(g.u(i), g.v(j), psi(i, j), dup, dvp);
            worst = std::max(worst, std::abs(E));
        }
    }
    return worst;
}

/// Build the standard RHS callable for a split: F = c_d psi/r^2 + beta*(N+V phi+f).
inline auto make_rhs(const SplitRHS& split, int d) {
    const double cd = double(d - 1) * double(d - 3) / 4.0;
    const double m = double(d - 1) / 2.0;
    return [split, cd, m, d](double u, double v, double psi, double dupsi, double dvpsi) {
        const double r = v - u;
        const double beta = std::pow(r, m);
        const double phi = psi / beta;
        double duphi = 0.0, dvphi = 0.0;
        if (split.needs_gradient) {
            duphi = dupsi / beta + m * phi / r;
            dvphi = dvpsi / beta - m * phi / r;
        }
        const DoubleNullPoint pt{u, v};
        const double N = split.N(pt, phi, duphi, dvphi);
        const double V = split.V(pt);
        const double fterm = split.f ? split.f(pt) : 0.0;
        (void)d;
        return cd * psi / (r * r) + beta * (N + V * phi + fterm);
    };
}

/// Full characteristic evolution: the peeling approximant supplies the v_min
/// row, the Cbar trace the left column, both in psi units.
inline FieldGrid evolve(const CharacteristicData& data, const EquationSpec& spec,
                        const SplitRHS& split, const DomainSpec& dom, EvolveOptions opt = {},
                        SolveReport* report = nullptr) {
    const auto t0 = std::chrono::steady_clock::now();
    Grid grid(dom);
    const double m = double(dom.d - 1) / 2.0;
    Approximant approx = chardata::peel(data, opt.peel_order);
    auto bottom = [&](double u) {
        const double r = dom.v_min - u;
        return std::pow(r, m) * approx.value(u, dom.v_min);
    };
    auto left = [&](double v) {
        const double r = v - dom.u_left;
        return std::pow(r, m) * data.trace_Cbar.value(v);
    };
    auto rhs = make_rhs(split, dom.d);
    FieldGrid f = evolve_raw(grid, dom.d, rhs, bottom, left, opt, report);
    f.equation_label = spec.label();
    f.data_case = data.case_id;
    if (report) {
        if (opt.check_residual) {
            report->max_interior_residual = interior_residual(f, rhs, 4);
            report->residual_checked = true;
        }
        report->boundary_bottom = "peel(l=" + std::to_string(opt.peel_order) + ") on v=v_min";
        report->boundary_left = "trace_Cbar on u=u_left";
        report->wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    return f;
}

/// Richardson-style order estimate from errors or successive differences.
struct OrderEstimate {
    double order = 0.0;
    bool conclusive = false;
    std::vector<double> errors;
};

/// Orders from a sequence of errors at dyadic resolutions (finest last).
inline OrderEstimate order_from_errors(const std::vector<double>& errors) {
    OrderEstimate out;
    out.errors = errors;
    if (errors.size() < 2) return out;
    // exact-zero errors: report "exact"
    bool allzero = true;
    for (double e : errors) allzero &= (e == 0.0);
    if (allzero) {
        out.order = std::numeric_limits<double>::infinity();
        out.conclusive = true;
        return out;
    }
    std::vector<double> ps;
    for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
        if (!(errors[i] > 0.0) || !(errors[i + 1] > 0.0) || errors[i + 1] >= errors[i]) {
            out.conclusive = false;
            return out;
        }
        ps.push_back(std::log2(errors[i] / errors[i + 1]));
    }
    out.order = ps.back();
    double mean = 0.0;
    for (double p : ps) mean += p;
    out.order = mean / double(ps.size());
    out.conclusive = true;
    return out;
}

/// Order from values of an observable at three (or more) dyadic resolutions
/// without an exact reference.
inline OrderEstimate order_from_values(const std::vector<double>& vals) {
    OrderEstimate out;
    if (vals.size() < 3) return out;
    std::vector<double> diffs;
    for (std::size_t i = 0; i + 1 < vals.size(); ++i)
        diffs.push_back(std::abs(vals[i + 1] - vals[i]));
    return order_from_errors(diffs);
}

/// Convergence study: run a configurable experiment at several dyadic
/// resolutions and estimate the order of each named observable.
inline std::map<std::string, OrderEstimate> convergence_study(
    const std::function<std::map<std::string, double>(std::size_t)>& run,
    const std::vector<std::size_t>& resolutions, bool values_are_errors) {
    if (resolutions.size() < 3)
        throw std::invalid_argument("convergence_study needs >= 3 dyadic resolutions");
    std::vector<std::map<std::string, double>> rows;
    rows.reserve(resolutions.size());
    for (std::size_t n : resolutions) rows.push_back(run(n));
    std::map<std::string, OrderEstimate> out;
    for (const auto& [key, v0] : rows.front()) {
        (void)v0;
        std::vector<double> seq;
        for (const auto& row : rows) seq.push_back(row.at(key));
        out[key] = values_are_errors ? order_from_errors(seq) : order_from_values(seq);
    }
    return out;
}

/// CSV slice exporter: emits (u, v, psi, phi) along u-, v- or t-constant lines.
inline void export_slice(const FieldGrid& f, const std::string& path, char axis, double value) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "u,v,psi,phi\n" << std::setprecision(17);
    const Grid& g = f.grid();
    auto emit = [&](std::size_t i, std::size_t j) {
        out << g.u(i) << "," << g.v(j) << "," << f.psi(i, j) << "," << f.phi(i, j) << "\n";
    };
    if (axis == 'u') {
        std::size_t ibest = 0;
        for (std::size_t i = 1; i < g.nu(); ++i)
            if (std::abs(g.u(i) - value) < std::abs(g.u(ibest) - value)) ibest = i;
        for (std::size_t j = 0; j < g.nv(); ++j) emit(ibest, j);
    } else if (axis == 'v') {
        std::size_t jbest = 0;
        for (std::size_t j = 1; j < g.nv(); ++j)
            if (std::abs(g.v(j) - value) < std::abs(g.v(jbest) - value)) jbest = j;
        for (std::size_t i = 0; i < g.nu(); ++i) emit(i, jbest);
    } else if (axis == 't') {
        // t = u + v = value: pick, per u-line, the closest v-line
        for (std::size_t i = 0; i < g.nu(); ++i) {
            const double vt = value - g.u(i);
            if (vt < g.v(0) || vt > g.v(g.nv() - 1)) continue;
            std::size_t jbest = 0;
            for (std::size_t j = 1; j < g.nv(); ++j)
                if (std::abs(g.v(j) - vt) < std::abs(g.v(jbest) - vt)) jbest = j;
            emit(i, jbest);
        }
    } else {
        throw std::invalid_argument("slice axis must be one of u, v, t");
    }
}

/// Binary block + JSON metadata serialization of a FieldGrid.
inline void save_field(const FieldGrid& f, const std::string& basename) {
    {
        std::ofstream js(basename + ".json");
        const Grid& g = f.grid();
        js << "{\"d\":" << f.d() << ",\"Nu\":" << g.nu() << ",\"Nv\":" << g.nv()
           << ",\"u_left\":" << std::setprecision(17) << g.u(0) << ",\"u_last\":" << g.u(g.nu() - 1)
           << ",\"v_min\":" << g.v(0) << ",\"v_max\":" << g.v(g.nv() - 1) << ",\"equation\":\""
           << f.equation_label << "\",\"data_case\":\"" << f.data_case << "\"}\n";
    }
    std::ofstream bin(basename + ".bin", std::ios::binary);
    const Grid& g = f.grid();
    auto put = [&](const std::vector<double>& x) {
        bin.write(reinterpret_cast<const char*>(x.data()),
                  std::streamsize(x.size() * sizeof(double)));
    };
    put(g.ulines());
    put(g.vlines());
    put(f.raw());
}

inline FieldGrid load_field(const std::string& basename) {
    std::ifstream js(basename + ".json");
    if (!js) throw std::runtime_error("cannot open " + basename + ".json");
    std::string meta((std::istreambuf_iterator<char>(js)), std::istreambuf_iterator<char>());
    auto grab = [&](const std::string& key) {
        auto pos = meta.find("\"" + key + "\":");
        if (pos == std::string::npos) throw std::runtime_error("field metadata missing " + key);
        return std::stod(meta.substr(pos + key.size() + 3));
    };
    const int d = int(grab("d"));
    const std::size_t Nu = std::size_t(grab("Nu")), Nv = std::size_t(grab("Nv"));
    std::ifstream bin(basename + ".bin", std::ios::binary);
    if (!bin) throw std::runtime_error("cannot open " + basename + ".bin");
    std::vector<double> us(Nu), vs(Nv);
    bin.read(reinterpret_cast<char*>(us.data()), std::streamsize(Nu * sizeof(double)));
    bin.read(reinterpret_cast<char*>(vs.data()), std::streamsize(Nv * sizeof(double)));
    FieldGrid f(Grid::from_lines(d, us, vs), d);
    bin.read(reinterpret_cast<char*>(f.raw().data()),
             std::streamsize(Nu * Nv * sizeof(double)));
    return f;
}

} // namespace chlab::solver

#endif

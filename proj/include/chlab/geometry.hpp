#ifndef CHLAB_GEOMETRY_HPP
#define CHLAB_GEOMETRY_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace chlab::geometry {

/// Double-null point, u = (t-r)/2, v = (t+r)/2. Exterior region has
/// u < 0 < v and r = v - u > 0.
struct DoubleNullPoint {
    double u = 0.0;
    double v = 0.0;
    double r() const { return v - u; }
    double t() const { return v + u; }
};

/// Boundary-defining weights: rho_- -> 0 at the backward cone C = {v=0},
/// rho_0 = r -> 0 at the axis/corner, rho_+ -> 0 at the Cauchy horizon {u=0}.
struct RhoTriple {
    double minus, zero, plus;
};

inline RhoTriple rho_eval(const DoubleNullPoint& p) {
    const double r = p.r();
    if (!(r > 0.0)) throw std::domain_error("rho_eval: degenerate point, r = v - u <= 0");
    return {p.v / r, r, -p.u / r};
}

/// Global-chart variant of the corner weight, rho0 = -r/(uv). Away from the
/// corner the local rho0 = r is the default; both are exposed and callers pick.
inline double rho_zero_global(const DoubleNullPoint& p) {
    if (p.u == 0.0 || p.v == 0.0) throw std::domain_error("rho_zero_global: on a null boundary");
    return -p.r() / (p.u * p.v);
}

/// Compactifying chart (u,v) -> (-1/v, -1/u). An involution on the exterior;
/// it maps C to past null infinity and CH to future null infinity.
inline DoubleNullPoint compactify(const DoubleNullPoint& p) {
    if (p.u == 0.0 || p.v == 0.0)
        throw std::domain_error("compactify: image at infinity (u=0 or v=0)");
    return {-1.0 / p.v, -1.0 / p.u};
}

inline DoubleNullPoint decompactify(const DoubleNullPoint& p) { return compactify(p); }

enum class Stretching { Uniform, Geometric };

inline const char* to_string(Stretching s) {
    return s == Stretching::Uniform ? "uniform" : "geometric";
}

inline Stretching stretching_from_string(const std::string& s) {
    if (s == "uniform") return Stretching::Uniform;
    if (s == "geometric") return Stretching::Geometric;
    throw std::invalid_argument("unknown stretching law: " + s);
}

/// Exterior rectangle [u_left, -u_eps] x [v_min, v_max] plus grid layout.
/// Geometric stretching is log-uniform in the coordinate, clustering lines
/// toward u = 0 and v = v_min; at desk resolutions the spacing ratio comes
/// out near 1.05.
struct DomainSpec {
    int d = 3;
    double u_left = -1.0;
    double u_eps = 1e-4;     // last evolved u-line is -u_eps
    double v_min = 1e-4;
    double v_max = 1.0;
    std::size_t Nu = 257;
    std::size_t Nv = 257;
    Stretching stretch_u = Stretching::Geometric;
    Stretching stretch_v = Stretching::Geometric;

    void validate() const {
        if (d < 2) throw std::invalid_argument("DomainSpec: d >= 2 required");
        if (!(u_left < 0.0)) throw std::invalid_argument("DomainSpec: u_left < 0 required");
        if (!(u_eps > 0.0 && u_eps < -u_left))
            throw std::invalid_argument("DomainSpec: 0 < u_eps < |u_left| required");
        if (!(0.0 < v_min && v_min < v_max))
            throw std::invalid_argument("DomainSpec: 0 < v_min < v_max required");
        if (Nu < 2 || Nv < 2) throw std::invalid_argument("DomainSpec: Nu, Nv >= 2 required");
    }
};

/// One of the b-calculus vector fields {u du, v dv, rotation, 1} plus the
/// edge-angular field rho+^(1/2) rho-^(1/2) rot. In the radial reduction the
/// rotation and edge-angular fields act as zero.
enum class VectorFieldTag { UDu, VDv, Rotation, Identity, EdgeAngular };

/// Weight exponents (a_-, a_0, a_+) toward C, the axis and CH. a_minus may be
/// +infinity, meaning "peel as many orders as needed".
struct WeightVector {
    double a_minus = 0.0;
    double a_zero = 0.0;
    double a_plus = 0.0;
};

namespace detail {
inline std::vector<double> lines(double lo, double hi, std::size_t n, Stretching s) {
    std::vector<double> out(n);
    if (s == Stretching::Uniform) {
        for (std::size_t i = 0; i < n; ++i)
            out[i] = lo + (hi - lo) * double(i) / double(n - 1);
    } else {
        // log-uniform in |coordinate|; endpoints must share a sign
        if (lo * hi <= 0.0) throw std::invalid_argument("geometric lines need same-sign endpoints");
        const double sgn = lo > 0 ? 1.0 : -1.0;
        const double la = std::log(std::abs(lo)), lb = std::log(std::abs(hi));
        for (std::size_t i = 0; i < n; ++i)
            out[i] = sgn * std::exp(la + (lb - la) * double(i) / double(n - 1));
    }
    out.front() = lo;
    out.back() = hi;
    return out;
}
} // namespace detail

/// Static double-null grid: monotone u-lines (increasing toward 0) and
/// v-lines. The singular corner and the cone C itself are excluded; data on C
/// enters only through the peeling approximant evaluated on v = v_min.
class Grid {
public:
    Grid() = default;
    explicit Grid(const DomainSpec& spec) : spec_(spec) {
        spec.validate();
        u_ = detail::lines(spec.u_left, -spec.u_eps, spec.Nu, spec.stretch_u);
        v_ = detail::lines(spec.v_min, spec.v_max, spec.Nv, spec.stretch_v);
    }

    static Grid from_lines(int d, std::vector<double> ulines, std::vector<double> vlines) {
        if (ulines.size() < 2 || vlines.size() < 2)
            throw std::invalid_argument("Grid::from_lines: need at least 2 lines per direction");
        Grid g;
        g.spec_.d = d;
        g.spec_.u_left = ulines.front();
        g.spec_.u_eps = -ulines.back();
        g.spec_.v_min = vlines.front();
        g.spec_.v_max = vlines.back();
        g.spec_.Nu = ulines.size();
        g.spec_.Nv = vlines.size();
        g.u_ = std::move(ulines);
        g.v_ = std::move(vlines);
        for (std::size_t i = 0; i + 1 < g.u_.size(); ++i)
            if (!(g.u_[i] < g.u_[i + 1])) throw std::invalid_argument("u-lines not increasing");
        for (std::size_t j = 0; j + 1 < g.v_.size(); ++j)
            if (!(g.v_[j] < g.v_[j + 1])) throw std::invalid_argument("v-lines not increasing");
        return g;
    }

    const DomainSpec& spec() const { return spec_; }
    const std::vector<double>& ulines() const { return u_; }
    const std::vector<double>& vlines() const { return v_; }
    std::size_t nu() const { return u_.size(); }
    std::size_t nv() const { return v_.size(); }
    double u(std::size_t i) const { return u_[i]; }
    double v(std::size_t j) const { return v_[j]; }
    DoubleNullPoint point(std::size_t i, std::size_t j) const { return {u_[i], v_[j]}; }

    /// Plain coordinate area du*dv of cell (i,j), corners (i,j)..(i+1,j+1).
    double cell_area(std::size_t i, std::size_t j) const {
        return (u_[i + 1] - u_[i]) * (v_[j + 1] - v_[j]);
    }

    /// b-measure mu_b = du dv/(|u| v) of cell (i,j); exact per-cell integral.
    double cell_mu_b(std::size_t i, std::size_t j) const {
        const double mu_u = std::log(std::abs(u_[i]) / std::abs(u_[i + 1]));
        const double mu_v = std::log(v_[j + 1] / v_[j]);
        return mu_u * mu_v;
    }

    double total_mu_b() const {
        double s = 0.0;
        for (std::size_t i = 0; i + 1 < u_.size(); ++i)
            for (std::size_t j = 0; j + 1 < v_.size(); ++j) s += cell_mu_b(i, j);
        return s;
    }

    /// Centered nonuniform first-derivative weights at interior index k of a
    /// line array: f'(x_k) to second order on arbitrary spacing.
    static std::array<double, 3> d1_weights(const std::vector<double>& x, std::size_t k) {
        const double hl = x[k] - x[k - 1];
        const double hr = x[k + 1] - x[k];
        const double denom = hl * hr * (hl + hr);
        return {-hr * hr / denom, (hr * hr - hl * hl) / denom, hl * hl / denom};
    }

    Grid refined(std::size_t factor = 2) const {
        DomainSpec s = spec_;
        s.Nu = (s.Nu - 1) * factor + 1;
        s.Nv = (s.Nv - 1) * factor + 1;
        return Grid(s);
    }

private:
    DomainSpec spec_;
    std::vector<double> u_, v_;
};

inline Grid build_grid(const DomainSpec& spec) { return Grid(spec); }

/// Apply a tagged vector field to a node field by finite differences in the
/// stretched index space. Second-order accurate; throws if the stencil exits
/// the grid.
template <class FieldAt>
double apply_vf(VectorFieldTag tag, const Grid& g, const FieldAt& f, std::size_t i, std::size_t j) {
    switch (tag) {
        case VectorFieldTag::Identity:
            return f(i, j);
        case VectorFieldTag::Rotation:
        case VectorFieldTag::EdgeAngular:
            return 0.0; // radial reduction
        case VectorFieldTag::UDu: {
            if (i == 0 || i + 1 >= g.nu()) throw std::out_of_range("apply_vf: u-stencil exits grid");
            auto w = Grid::d1_weights(g.ulines(), i);
            return g.u(i) * (w[0] * f(i - 1, j) + w[1] * f(i, j) + w[2] * f(i + 1, j));
        }
        case VectorFieldTag::VDv: {
            if (j == 0 || j + 1 >= g.nv()) throw std::out_of_range("apply_vf: v-stencil exits grid");
            auto w = Grid::d1_weights(g.vlines(), j);
            return g.v(j) * (w[0] * f(i, j - 1) + w[1] * f(i, j) + w[2] * f(i, j + 1));
        }
    }
    throw std::logic_error("apply_vf: unreachable");
}

/// Grid serialization: CSV with header rows "u-lines" and "v-lines".
inline void save_grid_csv(const Grid& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out.precision(17);
    out << "u-lines";
    for (double u : g.ulines()) out << "," << u;
    out << "\nv-lines";
    for (double v : g.vlines()) out << "," << v;
    out << "\n";
}

inline Grid load_grid_csv(const std::string& path, int d = 3) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    auto parse_row = [](const std::string& line, const std::string& key) {
        std::vector<double> vals;
        std::stringstream ss(line);
        std::string tok;
        std::getline(ss, tok, ',');
        if (tok != key) throw std::runtime_error("grid csv: expected header " + key);
        while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
        return vals;
    };
    std::string line;
    std::getline(in, line);
    auto us = parse_row(line, "u-lines");
    std::getline(in, line);
    auto vs = parse_row(line, "v-lines");
    return Grid::from_lines(d, std::move(us), std::move(vs));
}

} // namespace chlab::geometry

#endif

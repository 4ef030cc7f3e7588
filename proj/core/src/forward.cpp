#include "varorder/forward.hpp"

#include <cmath>
#include <limits>

#include "varorder/csv.hpp"
#include "varorder/errors.hpp"
#include "varorder/parallel.hpp"

namespace varorder {

namespace {

double factorial(int k)
{
    return std::tgamma(static_cast<double>(k) + 1.0);
}

void require_positive_p(double p)
{
    if (!(p > 0.0) || !std::isfinite(p)) {
        throw InvalidInput("frequency p must be positive and finite");
    }
}

BoundaryValues combine(const Excitation& excitation, const std::function<double(int)>& weight)
{
    BoundaryValues g;
    for (const auto& term : excitation.terms()) {
        if (g.empty()) {
            g.assign(term.phi.size(), 0.0);
        }
        const double w = weight(term.k);
        for (std::size_t i = 0; i < g.size(); ++i) {
            g[i] += w * term.phi[i];
        }
    }
    return g;
}

AssembledSystem transformed_system(const CoefficientSet& cfg, double p)
{
    return {cfg.mesh, cfg.sigma, resolvent_reaction(cfg, p)};
}

}  // namespace

BoundaryValues ghat(const Excitation& excitation, double p)
{
    require_positive_p(p);
    return combine(excitation, [p](int k) { return factorial(k) * std::pow(p, -k - 1); });
}

BoundaryValues ghat_scaled(const Excitation& excitation, double p)
{
    require_positive_p(p);
    const int M = excitation.leading_power();
    return combine(excitation, [p, M](int k) { return factorial(k) * std::pow(p, M - k); });
}

Eigen::VectorXd solve_uhat_direct(const CoefficientSet& cfg, const Excitation& excitation, double p)
{
    const AssembledSystem sys = transformed_system(cfg, p);
    return sys.solve(Eigen::VectorXd::Zero(cfg.mesh->vertex_count()), to_vector(ghat(excitation, p)));
}

Eigen::VectorXd solve_uhat_repr(const CoefficientSet& cfg, const Excitation& excitation, double p)
{
    const Eigen::VectorXd s = solve_S(cfg.mesh, cfg.sigma, cfg.q, ghat(excitation, p));
    // p^alpha S[ghat] weighted by rho, integrated with the same vertex rule as the operator.
    const Eigen::VectorXd load = lumped_mass(*cfg.mesh, cfg.rho, cfg.alpha.power_of(p)).cwiseProduct(s);
    return s - apply_resolvent_to_load(cfg, p, load);
}

Eigen::VectorXd boundary_flux(const CoefficientSet& cfg, const Excitation& excitation, double p, bool scaled)
{
    const AssembledSystem sys = transformed_system(cfg, p);
    const BoundaryValues g = scaled ? ghat_scaled(excitation, p) : ghat(excitation, p);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(cfg.mesh->vertex_count());
    const Eigen::VectorXd u = sys.solve(zero, to_vector(g));
    return sys.flux(u, zero);
}

std::vector<double> FluxCurve::scaled(int M) const
{
    std::vector<double> out(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        out[i] = std::pow(p[i], M + 1) * F[i] / sigma_x0;
    }
    return out;
}

void FluxCurve::validate() const
{
    if (p.size() != F.size()) {
        throw InvalidInput("flux curve: p and F lengths differ");
    }
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (!(p[i] > 0.0) || !std::isfinite(F[i])) {
            throw InvalidInput("flux curve: entries must be finite with p > 0");
        }
        if (i > 0 && !(p[i] > p[i - 1])) {
            throw InvalidInput("flux curve: p values must be strictly increasing");
        }
    }
}

std::vector<double> log_grid(double a, double b, int n)
{
    if (!(a > 0.0) || !(b > a) || n < 2) {
        throw InvalidInput("log_grid: need 0 < a < b and n >= 2");
    }
    std::vector<double> g(static_cast<std::size_t>(n));
    const double la = std::log(a);
    const double lb = std::log(b);
    for (int i = 0; i < n; ++i) {
        g[static_cast<std::size_t>(i)] = std::exp(la + (lb - la) * i / (n - 1));
    }
    g.front() = a;
    g.back() = b;
    return g;
}

Eigen::VectorXd boundary_sigma(const CoefficientSet& cfg)
{
    const Mesh& m = *cfg.mesh;
    Eigen::VectorXd s(m.boundary_vertex_count());
    if (cfg.sigma.placement() == Placement::vertex) {
        for (int i = 0; i < s.size(); ++i) {
            s[i] = cfg.sigma[m.boundary_vertices()[static_cast<std::size_t>(i)]];
        }
        return s;
    }
    // Triangle-placed sigma: area-weighted mean over the triangles at the vertex.
    Eigen::VectorXd num = Eigen::VectorXd::Zero(m.vertex_count());
    Eigen::VectorXd den = Eigen::VectorXd::Zero(m.vertex_count());
    for (int t = 0; t < m.triangle_count(); ++t) {
        for (int v : m.triangles()[static_cast<std::size_t>(t)]) {
            num[v] += m.area(t) * cfg.sigma[t];
            den[v] += m.area(t);
        }
    }
    for (int i = 0; i < s.size(); ++i) {
        const int v = m.boundary_vertices()[static_cast<std::size_t>(i)];
        s[i] = num[v] / den[v];
    }
    return s;
}

FluxCurve flux_curve(const CoefficientSet& cfg, const Excitation& excitation, int x0, const std::vector<double>& p_grid,
                     Provenance provenance)
{
    cfg.validate();
    const Mesh& m = *cfg.mesh;
    if (x0 < 0 || x0 >= m.vertex_count() || !m.is_boundary(x0)) {
        throw InvalidInput("flux_curve: x0 must be a boundary vertex");
    }
    FluxCurve curve;
    curve.x0 = x0;
    curve.sigma_x0 = boundary_sigma(cfg)[m.boundary_slot(x0)];
    curve.leading_power = excitation.leading_power();
    curve.provenance = provenance;
    curve.p = p_grid;
    for (std::size_t i = 0; i < p_grid.size(); ++i) {
        require_positive_p(p_grid[i]);
        if (i > 0 && !(p_grid[i] > p_grid[i - 1])) {
            throw InvalidInput("flux_curve: p grid must be strictly increasing");
        }
    }
    const int slot = m.boundary_slot(x0);
    curve.F = parallel_map<double>(p_grid.size(), [&](std::size_t i) {
        const double p = p_grid[i];
        if (provenance == Provenance::direct) {
            // Solve with scaled data and undo the scaling: identical up to rounding
            // and keeps intermediate values moderate at tiny p.
            return boundary_flux(cfg, excitation, p, true)[slot] * std::pow(p, -excitation.leading_power() - 1);
        }
        const Eigen::VectorXd u = solve_uhat_repr(cfg, excitation, p);
        const AssembledSystem sys = transformed_system(cfg, p);
        return sys.flux(u, Eigen::VectorXd::Zero(m.vertex_count()))[slot];
    });
    return curve;
}

WeightedData weighted_data(const CoefficientSet& cfg, const Excitation& excitation)
{
    cfg.validate();
    const Mesh& m = *cfg.mesh;
    const AssembledSystem sys = transformed_system(cfg, 1.0);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(m.vertex_count());
    const Eigen::VectorXd u1 = sys.solve(zero, to_vector(ghat(excitation, 1.0)));

    // d/dp of the transformed problem at p = 1: reaction derivative rho alpha p^{alpha-1} = rho alpha,
    // boundary derivative d/dp k! p^{-k-1} = -(k+1)!.
    const Eigen::VectorXd load = -lumped_mass(m, cfg.rho, cfg.alpha.field().values()).cwiseProduct(u1);
    const BoundaryValues dg = combine(excitation, [](int k) { return -factorial(k + 1); });
    const Eigen::VectorXd w = sys.solve(load, to_vector(dg));
    const Eigen::VectorXd dflux = sys.flux(w, load);
    return {-dflux.cwiseQuotient(boundary_sigma(cfg))};
}

WeightedData weighted_data_fd(const CoefficientSet& cfg, const Excitation& excitation, double delta)
{
    if (!(delta > 0.0 && delta < 1.0)) {
        throw InvalidInput("weighted_data_fd: delta must lie in (0, 1)");
    }
    const Eigen::VectorXd plus = boundary_flux(cfg, excitation, 1.0 + delta);
    const Eigen::VectorXd minus = boundary_flux(cfg, excitation, 1.0 - delta);
    return {(-(plus - minus) / (2.0 * delta)).cwiseQuotient(boundary_sigma(cfg))};
}

void write_flux_curve_csv(const FluxCurve& curve, const std::string& path)
{
    CsvWriter csv(path, {"p", "F"});
    for (std::size_t i = 0; i < curve.p.size(); ++i) {
        csv.row({curve.p[i], curve.F[i]});
    }
}

void write_weighted_data_csv(const Mesh& mesh, const WeightedData& data, const std::string& path)
{
    CsvWriter csv(path, {"vertex", "x", "y", "D"});
    for (int s = 0; s < mesh.boundary_vertex_count(); ++s) {
        const int v = mesh.boundary_vertices()[static_cast<std::size_t>(s)];
        const Point pt = mesh.vertices()[static_cast<std::size_t>(v)];
        csv.row({std::to_string(v), format_number(pt.x), format_number(pt.y), format_number(data.D[s])});
    }
}

}  // namespace varorder

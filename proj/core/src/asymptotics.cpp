#include "varorder/asymptotics.hpp"

#include <cmath>
#include <limits>
#include <random>

#include <Eigen/QR>

#include "varorder/csv.hpp"
#include "varorder/errors.hpp"
#include "varorder/parallel.hpp"

namespace varorder {

namespace {

double factorial(int k)
{
    return std::tgamma(static_cast<double>(k) + 1.0);
}

BoundaryValues scaled_term_data(const Excitation& excitation, const Excitation::Term& term, double p)
{
    const double w = factorial(term.k) * std::pow(p, excitation.leading_power() - term.k);
    BoundaryValues g = term.phi;
    for (double& v : g) {
        v *= w;
    }
    return g;
}

// Shared recursion: term (k,0) solves with boundary data, term (k,l) with
// load = source_weight .* term(k,l-1).
ExpansionCascade run_cascade(const CoefficientSet& cfg, const Excitation& excitation, double p, int depth, int x0,
                             Regime regime, const AssembledSystem& sys, const Eigen::VectorXd& source_weight)
{
    cfg.validate();
    const Mesh& m = *cfg.mesh;
    if (depth < 1) {
        throw InvalidInput("cascade depth N must be >= 1");
    }
    if (x0 < 0 || x0 >= m.vertex_count() || !m.is_boundary(x0)) {
        throw InvalidInput("cascade: x0 must be a boundary vertex");
    }
    const int slot = m.boundary_slot(x0);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(m.vertex_count());

    ExpansionCascade out;
    out.regime = regime;
    out.p = p;
    out.depth = depth;
    out.x0 = x0;
    for (const auto& term : excitation.terms()) {
        Eigen::VectorXd prev;
        for (int l = 0; l < depth; ++l) {
            CascadeTerm ct;
            ct.k = term.k;
            ct.l = l;
            if (l == 0) {
                ct.field = sys.solve(zero, to_vector(scaled_term_data(excitation, term, p)));
                ct.flux_x0 = sys.flux(ct.field, zero)[slot];
            } else {
                const Eigen::VectorXd load = source_weight.cwiseProduct(prev);
                ct.field = sys.solve(load);
                ct.flux_x0 = sys.flux(ct.field, load)[slot];
            }
            prev = ct.field;
            out.terms.push_back(std::move(ct));
        }
    }
    return out;
}

}  // namespace

const CascadeTerm& ExpansionCascade::term(int k, int l) const
{
    for (const auto& t : terms) {
        if (t.k == k && t.l == l) {
            return t;
        }
    }
    throw InvalidInput("cascade has no term (" + std::to_string(k) + ", " + std::to_string(l) + ")");
}

double ExpansionCascade::flux_sum() const
{
    double s = 0.0;
    for (const auto& t : terms) {
        s += t.flux_x0;
    }
    return s;
}

ExpansionCascade cascade_zero(const CoefficientSet& cfg, const Excitation& excitation, double p, int depth, int x0)
{
    if (!(p > 0.0)) {
        throw InvalidInput("cascade_zero: p must be positive");
    }
    const AssembledSystem sys(cfg.mesh, cfg.sigma, lumped_mass(*cfg.mesh, cfg.q));
    const Eigen::VectorXd weight = -lumped_mass(*cfg.mesh, cfg.rho, cfg.alpha.power_of(p));
    return run_cascade(cfg, excitation, p, depth, x0, Regime::zero, sys, weight);
}

ExpansionCascade cascade_one(const CoefficientSet& cfg, const Excitation& excitation, double p, int depth, int x0)
{
    if (!(p > 0.0)) {
        throw InvalidInput("cascade_one: p must be positive");
    }
    const AssembledSystem sys(cfg.mesh, cfg.sigma, lumped_mass(*cfg.mesh, cfg.q) + lumped_mass(*cfg.mesh, cfg.rho));
    const Eigen::VectorXd one_minus = (1.0 - cfg.alpha.power_of(p).array()).matrix();
    const Eigen::VectorXd weight = lumped_mass(*cfg.mesh, cfg.rho, one_minus);
    return run_cascade(cfg, excitation, p, depth, x0, Regime::one, sys, weight);
}

bool RemainderProbe::has_slope() const
{
    return std::isfinite(slope);
}

SlopeFit fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y, double floor,
                          std::size_t min_points)
{
    if (x.size() != y.size()) {
        throw InvalidInput("fit_loglog_slope: length mismatch");
    }
    SlopeFit fit;
    fit.slope = std::numeric_limits<double>::quiet_NaN();
    fit.intercept = std::numeric_limits<double>::quiet_NaN();
    std::size_t best_begin = 0;
    std::size_t best_len = 0;
    for (std::size_t i = 0; i < y.size();) {
        if (!(y[i] > floor) || !(x[i] > 0.0)) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < y.size() && y[j] > floor && x[j] > 0.0) {
            ++j;
        }
        if (j - i > best_len) {
            best_len = j - i;
            best_begin = i;
        }
        i = j;
    }
    fit.begin = best_begin;
    fit.end = best_begin + best_len;
    if (best_len < std::max<std::size_t>(min_points, 2)) {
        return fit;
    }
    Eigen::MatrixXd a(static_cast<Eigen::Index>(best_len), 2);
    Eigen::VectorXd b(static_cast<Eigen::Index>(best_len));
    for (std::size_t i = 0; i < best_len; ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        a(r, 0) = std::log(x[best_begin + i]);
        a(r, 1) = 1.0;
        b[r] = std::log(y[best_begin + i]);
    }
    const Eigen::Vector2d sol = a.colPivHouseholderQr().solve(b);
    fit.slope = sol[0];
    fit.intercept = sol[1];
    return fit;
}

namespace {

RemainderProbe finish_probe(RemainderProbe probe, double scale)
{
    // Values within 100x of double-precision solver noise relative to the
    // size of the expanded quantity are excluded from the fit.
    probe.floor = 100.0 * 1e-13 * scale;
    const SlopeFit fit = fit_loglog_slope(probe.abscissa, probe.abs_r, probe.floor);
    probe.slope = fit.slope;
    probe.fit_begin = fit.begin;
    probe.fit_end = fit.end;
    return probe;
}

}  // namespace

RemainderProbe remainder_probe_zero(const CoefficientSet& cfg, const Excitation& excitation, int x0, int depth,
                                    const std::vector<double>& p_grid)
{
    const int slot = cfg.mesh->boundary_slot(x0);
    struct Point2 {
        double r;
        double scale;
    };
    const auto vals = parallel_map<Point2>(p_grid.size(), [&](std::size_t i) {
        const double p = p_grid[i];
        const double full = boundary_flux(cfg, excitation, p, true)[slot];
        const ExpansionCascade c = cascade_zero(cfg, excitation, p, depth, x0);
        double scale = std::abs(full);
        for (const auto& t : c.terms) {
            scale = std::max(scale, std::abs(t.flux_x0));
        }
        return Point2{full - c.flux_sum(), scale};
    });
    RemainderProbe probe;
    probe.regime = Regime::zero;
    probe.depth = depth;
    probe.theoretical = depth * cfg.alpha.alpha_min();
    probe.abscissa = p_grid;
    double scale = 0.0;
    for (const auto& v : vals) {
        probe.abs_r.push_back(std::abs(v.r));
        scale = std::max(scale, v.scale);
    }
    return finish_probe(std::move(probe), scale);
}

RemainderProbe remainder_probe_one(const CoefficientSet& cfg, const Excitation& excitation, int x0, int depth,
                                   const std::vector<double>& delta_grid, double sign)
{
    const int slot = cfg.mesh->boundary_slot(x0);
    struct Point2 {
        double r;
        double scale;
    };
    const auto vals = parallel_map<Point2>(delta_grid.size(), [&](std::size_t i) {
        const double p = 1.0 + sign * delta_grid[i];
        const double full = boundary_flux(cfg, excitation, p, true)[slot];
        const ExpansionCascade c = cascade_one(cfg, excitation, p, depth, x0);
        double scale = std::abs(full);
        for (const auto& t : c.terms) {
            scale = std::max(scale, std::abs(t.flux_x0));
        }
        return Point2{full - c.flux_sum(), scale};
    });
    RemainderProbe probe;
    probe.regime = Regime::one;
    probe.depth = depth;
    probe.theoretical = depth;
    probe.abscissa = delta_grid;
    double scale = 0.0;
    for (const auto& v : vals) {
        probe.abs_r.push_back(std::abs(v.r));
        scale = std::max(scale, v.scale);
    }
    return finish_probe(std::move(probe), scale);
}

namespace {

NeumannResidual norms(const Mesh& mesh, const Eigen::VectorXd& e)
{
    const Eigen::VectorXd w = lumped_mass(mesh, ScalarField::constant(mesh, Placement::vertex, 1.0));
    return {e.cwiseAbs().maxCoeff(), std::sqrt(w.dot(e.cwiseAbs2()))};
}

}  // namespace

NeumannResidual neumann_truncation_residual(const CoefficientSet& cfg, const Eigen::VectorXd& f, double p, int depth)
{
    if (!(p > 0.0 && p < 1.0)) {
        throw InvalidInput("neumann_truncation_residual: p must lie in (0, 1)");
    }
    if (depth < 1) {
        throw InvalidInput("neumann_truncation_residual: N must be >= 1");
    }
    const Mesh& m = *cfg.mesh;
    const AssembledSystem a0(cfg.mesh, cfg.sigma, lumped_mass(m, cfg.q));
    const Eigen::VectorXd rho_w = lumped_mass(m, cfg.rho);
    const Eigen::VectorXd pa_w = lumped_mass(m, cfg.rho, cfg.alpha.power_of(p));

    const Eigen::VectorXd exact = apply_resolvent(cfg, p, f);
    Eigen::VectorXd z = a0.solve(rho_w.cwiseProduct(f));
    Eigen::VectorXd sum = z;
    for (int i = 1; i < depth; ++i) {
        z = a0.solve(-pa_w.cwiseProduct(z));
        sum += z;
    }
    return norms(m, exact - sum);
}

NeumannResidual neumann_first_order_identity(const CoefficientSet& cfg, const Eigen::VectorXd& f, double p)
{
    const Mesh& m = *cfg.mesh;
    const AssembledSystem a0(cfg.mesh, cfg.sigma, lumped_mass(m, cfg.q));
    const Eigen::VectorXd u = apply_resolvent(cfg, p, f);
    const Eigen::VectorXd pa_w = lumped_mass(m, cfg.rho, cfg.alpha.power_of(p));
    return norms(m, a0.solve(pa_w.cwiseProduct(u)));
}

double taylor_order_bound(const OrderField& alpha, double p)
{
    if (!(p > 0.0)) {
        throw InvalidInput("taylor_order_bound: p must be positive");
    }
    double worst = 0.0;
    for (double a : alpha.distinct_values()) {
        worst = std::max(worst, std::abs(std::pow(p, a) - 1.0 - (p - 1.0) * a));
    }
    return worst;
}

double estimate_inverse_norm(const CoefficientSet& cfg, int probes, std::uint64_t seed)
{
    const Mesh& m = *cfg.mesh;
    const AssembledSystem a0(cfg.mesh, cfg.sigma, lumped_mass(m, cfg.q));
    const Eigen::VectorXd w = lumped_mass(m, ScalarField::constant(m, Placement::vertex, 1.0));
    const Eigen::VectorXd rho_w = lumped_mass(m, cfg.rho);
    auto l2 = [&](const Eigen::VectorXd& v) { return std::sqrt(w.dot(v.cwiseAbs2())); };

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    double best = 0.0;
    for (int probe = 0; probe < probes; ++probe) {
        Eigen::VectorXd v(m.vertex_count());
        for (int i = 0; i < v.size(); ++i) {
            v[i] = m.is_boundary(i) ? 0.0 : normal(rng);
        }
        for (int it = 0; it < 4; ++it) {
            const double nv = l2(v);
            if (nv == 0.0) {
                break;
            }
            const Eigen::VectorXd av = a0.solve(rho_w.cwiseProduct(v));
            best = std::max(best, l2(av) / nv);
            v = av;
        }
    }
    return best;
}

double select_p0(const CoefficientSet& cfg, std::uint64_t seed)
{
    const double ca = estimate_inverse_norm(cfg, 20, seed);
    return std::min(0.1, std::pow(2.0 * ca, -1.0 / cfg.alpha.alpha_min()));
}

void write_remainder_csv(const RemainderProbe& probe, const std::string& path)
{
    // The bound column is C x^theoretical with C fitted as the largest observed ratio.
    double c = 0.0;
    for (std::size_t i = 0; i < probe.abscissa.size(); ++i) {
        c = std::max(c, probe.abs_r[i] / std::pow(probe.abscissa[i], probe.theoretical));
    }
    CsvWriter csv(path, {"p", "absR", "bound"});
    for (std::size_t i = 0; i < probe.abscissa.size(); ++i) {
        const double p = probe.regime == Regime::zero ? probe.abscissa[i] : 1.0 + probe.abscissa[i];
        csv.row({p, probe.abs_r[i], c * std::pow(probe.abscissa[i], probe.theoretical)});
    }
}

void write_cascade_csv(const std::vector<ExpansionCascade>& cascades, const std::string& path)
{
    CsvWriter csv(path, {"k", "l", "p", "flux"});
    for (const auto& c : cascades) {
        for (const auto& t : c.terms) {
            csv.row({static_cast<double>(t.k), static_cast<double>(t.l), c.p, t.flux_x0});
        }
    }
}

}  // namespace varorder

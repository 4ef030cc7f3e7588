#include "varorder/elliptic.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include "varorder/errors.hpp"

namespace varorder {

struct AssembledSystem::Factor {
    std::optional<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>> direct;
    std::optional<Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper>> cg;
    Eigen::SparseMatrix<double> interior_matrix;
};

Eigen::VectorXd lumped_mass(const Mesh& mesh, const ScalarField& weight)
{
    weight.check_against(mesh, "lumped_mass");
    Eigen::VectorXd d = Eigen::VectorXd::Zero(mesh.vertex_count());
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const double third = mesh.area(t) / 3.0;
        const auto& tri = mesh.triangles()[static_cast<std::size_t>(t)];
        for (int c = 0; c < 3; ++c) {
            d[tri[c]] += third * weight.at_corner(mesh, t, c);
        }
    }
    return d;
}

Eigen::VectorXd lumped_mass(const Mesh& mesh, const ScalarField& weight, const Eigen::VectorXd& factor)
{
    weight.check_against(mesh, "lumped_mass");
    if (factor.size() != mesh.triangle_count()) {
        throw InvalidInput("lumped_mass: triangle factor length mismatch");
    }
    Eigen::VectorXd d = Eigen::VectorXd::Zero(mesh.vertex_count());
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const double third = mesh.area(t) / 3.0 * factor[t];
        const auto& tri = mesh.triangles()[static_cast<std::size_t>(t)];
        for (int c = 0; c < 3; ++c) {
            d[tri[c]] += third * weight.at_corner(mesh, t, c);
        }
    }
    return d;
}

Eigen::VectorXd to_vector(const BoundaryValues& values)
{
    return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

AssembledSystem::AssembledSystem(MeshPtr mesh, const ScalarField& sigma, Eigen::VectorXd reaction,
                                 SolverOptions options)
    : mesh_(std::move(mesh)), reaction_(std::move(reaction))
{
    const Mesh& m = *mesh_;
    sigma.check_against(m, "sigma");
    if (!(sigma.min() > 0.0)) {
        throw InvalidInput("assemble: sigma must be positive everywhere");
    }
    if (reaction_.size() != m.vertex_count()) {
        throw InvalidInput("assemble: reaction diagonal length mismatch");
    }
    if (reaction_.minCoeff() < 0.0) {
        throw InvalidInput("assemble: reaction coefficient must be nonnegative");
    }

    const int nv = m.vertex_count();
    const Eigen::VectorXd sigma_t = sigma.per_triangle(m);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(m.triangle_count()) * 9 + static_cast<std::size_t>(nv));
    for (int t = 0; t < m.triangle_count(); ++t) {
        const auto g = m.hat_gradients(t);
        const auto& tri = m.triangles()[static_cast<std::size_t>(t)];
        const double w = sigma_t[t] * m.area(t);
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                trip.emplace_back(tri[i], tri[j], w * (g[i].x * g[j].x + g[i].y * g[j].y));
            }
        }
    }
    for (int v = 0; v < nv; ++v) {
        trip.emplace_back(v, v, reaction_[v]);
    }
    matrix_.resize(nv, nv);
    matrix_.setFromTriplets(trip.begin(), trip.end());
    matrix_.makeCompressed();

    interior_index_.assign(static_cast<std::size_t>(nv), -1);
    for (int v = 0; v < nv; ++v) {
        if (!m.is_boundary(v)) {
            interior_index_[static_cast<std::size_t>(v)] = static_cast<int>(interior_.size());
            interior_.push_back(v);
        }
    }
    const auto ni = static_cast<Eigen::Index>(interior_.size());
    std::vector<Eigen::Triplet<double>> ii;
    std::vector<Eigen::Triplet<double>> ib;
    for (int col = 0; col < matrix_.outerSize(); ++col) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(matrix_, col); it; ++it) {
            const int r = interior_index_[static_cast<std::size_t>(it.row())];
            if (r < 0) {
                continue;
            }
            const int c = interior_index_[static_cast<std::size_t>(col)];
            if (c >= 0) {
                ii.emplace_back(r, c, it.value());
            } else {
                ib.emplace_back(r, m.boundary_slot(col), it.value());
            }
        }
    }
    coupling_.resize(ni, m.boundary_vertex_count());
    coupling_.setFromTriplets(ib.begin(), ib.end());

    auto factor = std::make_shared<Factor>();
    factor->interior_matrix.resize(ni, ni);
    factor->interior_matrix.setFromTriplets(ii.begin(), ii.end());
    if (ni > 0) {
        if (ni < options.direct_limit) {
            factor->direct.emplace(factor->interior_matrix);
            if (factor->direct->info() != Eigen::Success) {
                throw SolverError("assemble: sparse factorization failed (matrix not positive definite)");
            }
        } else {
            factor->cg.emplace();
            factor->cg->setTolerance(options.cg_tolerance);
            factor->cg->setMaxIterations(
                static_cast<Eigen::Index>(std::ceil(options.cg_cap_factor * std::sqrt(static_cast<double>(ni)))));
            factor->cg->compute(factor->interior_matrix);
        }
    }
    factor_ = std::move(factor);
}

bool AssembledSystem::uses_direct_solver() const noexcept
{
    return factor_->direct.has_value();
}

Eigen::VectorXd AssembledSystem::solve(const Eigen::VectorXd& load, const Eigen::VectorXd& boundary_values) const
{
    const Mesh& m = *mesh_;
    if (load.size() != m.vertex_count()) {
        throw InvalidInput("solve: load vector length mismatch");
    }
    if (boundary_values.size() != m.boundary_vertex_count()) {
        throw InvalidInput("solve: boundary data length mismatch");
    }
    Eigen::VectorXd u(m.vertex_count());
    for (int s = 0; s < m.boundary_vertex_count(); ++s) {
        u[m.boundary_vertices()[static_cast<std::size_t>(s)]] = boundary_values[s];
    }
    if (interior_.empty()) {
        return u;
    }
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(interior_.size()));
    for (std::size_t i = 0; i < interior_.size(); ++i) {
        rhs[static_cast<Eigen::Index>(i)] = load[interior_[i]];
    }
    rhs -= coupling_ * boundary_values;

    Eigen::VectorXd x;
    if (factor_->direct) {
        x = factor_->direct->solve(rhs);
    } else {
        x = factor_->cg->solve(rhs);
        if (factor_->cg->info() != Eigen::Success) {
            std::ostringstream os;
            os << "conjugate gradients stopped after " << factor_->cg->iterations()
               << " iterations with relative residual " << factor_->cg->error();
            throw SolverError(os.str());
        }
    }
    for (std::size_t i = 0; i < interior_.size(); ++i) {
        u[interior_[i]] = x[static_cast<Eigen::Index>(i)];
    }
    return u;
}

Eigen::VectorXd AssembledSystem::solve(const Eigen::VectorXd& load) const
{
    return solve(load, Eigen::VectorXd::Zero(mesh_->boundary_vertex_count()));
}

Eigen::VectorXd AssembledSystem::residual(const Eigen::VectorXd& u, const Eigen::VectorXd& load) const
{
    if (u.size() != mesh_->vertex_count() || load.size() != mesh_->vertex_count()) {
        throw InvalidInput("residual: vector length mismatch");
    }
    return matrix_ * u - load;
}

Eigen::VectorXd AssembledSystem::flux(const Eigen::VectorXd& u, const Eigen::VectorXd& load) const
{
    const Eigen::VectorXd r = residual(u, load);
    Eigen::VectorXd rb(mesh_->boundary_vertex_count());
    for (int s = 0; s < rb.size(); ++s) {
        rb[s] = r[mesh_->boundary_vertices()[static_cast<std::size_t>(s)]];
    }
    return mesh_->solve_boundary_mass(rb);
}

double AssembledSystem::relative_residual(const Eigen::VectorXd& u, const Eigen::VectorXd& load) const
{
    const Eigen::VectorXd r = residual(u, load);
    const Eigen::VectorXd ku = matrix_ * u;
    double num = 0.0;
    double den = 0.0;
    for (int v : interior_) {
        num = std::max(num, std::abs(r[v]));
        den = std::max({den, std::abs(load[v]), std::abs(ku[v])});
    }
    return den > 0.0 ? num / den : num;
}

AssembledSystem assemble(MeshPtr mesh, const ScalarField& sigma, const ScalarField& c, SolverOptions options)
{
    c.check_against(*mesh, "reaction coefficient");
    if (c.min() < 0.0) {
        throw InvalidInput("assemble: reaction coefficient must be nonnegative");
    }
    Eigen::VectorXd reaction = lumped_mass(*mesh, c);
    return {std::move(mesh), sigma, std::move(reaction), options};
}

Eigen::VectorXd solve_dirichlet(const AssembledSystem& system, const ScalarField& f, const BoundaryValues& bdata)
{
    const Eigen::VectorXd load = lumped_mass(system.mesh(), f);
    return system.solve(load, to_vector(bdata));
}

Eigen::VectorXd solve_S(MeshPtr mesh, const ScalarField& sigma, const ScalarField& q, const BoundaryValues& phi)
{
    const AssembledSystem sys = assemble(mesh, sigma, q);
    return sys.solve(Eigen::VectorXd::Zero(mesh->vertex_count()), to_vector(phi));
}

Eigen::VectorXd resolvent_reaction(const CoefficientSet& cfg, double p)
{
    if (p < 0.0) {
        throw InvalidInput("frequency p must be nonnegative");
    }
    Eigen::VectorXd d = lumped_mass(*cfg.mesh, cfg.q);
    if (p > 0.0) {
        d += lumped_mass(*cfg.mesh, cfg.rho, cfg.alpha.power_of(p));
    }
    return d;
}

Eigen::VectorXd apply_resolvent(const CoefficientSet& cfg, double p, const Eigen::VectorXd& f)
{
    const AssembledSystem sys(cfg.mesh, cfg.sigma, resolvent_reaction(cfg, p));
    const Eigen::VectorXd load = lumped_mass(*cfg.mesh, cfg.rho).cwiseProduct(f);
    return sys.solve(load);
}

Eigen::VectorXd apply_resolvent_to_load(const CoefficientSet& cfg, double p, const Eigen::VectorXd& load)
{
    const AssembledSystem sys(cfg.mesh, cfg.sigma, resolvent_reaction(cfg, p));
    return sys.solve(load);
}

Eigen::VectorXd variational_flux(const AssembledSystem& system, const Eigen::VectorXd& u, const ScalarField& f)
{
    return system.flux(u, lumped_mass(system.mesh(), f));
}

}  // namespace varorder

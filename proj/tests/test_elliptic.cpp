#include <cmath>

#include <gtest/gtest.h>

#include <varorder/elliptic.hpp>
#include <varorder/errors.hpp>

using namespace varorder;

namespace {

MeshPtr disk(int rings) { return std::make_shared<const Mesh>(build_disk_mesh_rings(rings)); }

BoundaryValues boundary_of(const Mesh& m, double (*fn)(Point))
{
    BoundaryValues b;
    for (int v : m.boundary_vertices()) {
        b.push_back(fn(m.vertices()[static_cast<std::size_t>(v)]));
    }
    return b;
}

}  // namespace

TEST(LumpedMass, SumsToArea)
{
    const auto m = disk(6);
    const Eigen::VectorXd d = lumped_mass(*m, ScalarField::constant(*m, Placement::vertex, 1.0));
    EXPECT_NEAR(d.sum(), m->total_area(), 1e-12);
}

TEST(Elliptic, ReproducesLinearHarmonicFunctions)
{
    const auto m = disk(8);
    const auto sys = assemble(m, ScalarField::constant(*m, Placement::vertex, 1.0),
                              ScalarField::constant(*m, Placement::vertex, 0.0));
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(m->vertex_count());
    const Eigen::VectorXd u = sys.solve(zero, to_vector(boundary_of(*m, [](Point p) { return 2.0 * p.x - p.y; })));
    for (int v = 0; v < m->vertex_count(); ++v) {
        const Point p = m->vertices()[static_cast<std::size_t>(v)];
        EXPECT_NEAR(u[v], 2.0 * p.x - p.y, 1e-10);
    }
}

TEST(Elliptic, ConstantDataGivesZeroFlux)
{
    const auto m = disk(8);
    const auto sys = assemble(m, ScalarField::on_vertices(*m, [](Point p) { return 1.0 + p.x * p.x; }),
                              ScalarField::constant(*m, Placement::vertex, 0.0));
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(m->vertex_count());
    const Eigen::VectorXd u = sys.solve(zero, Eigen::VectorXd::Ones(m->boundary_vertex_count()));
    EXPECT_LT((u.array() - 1.0).abs().maxCoeff(), 1e-12);
    EXPECT_LT(sys.flux(u, zero).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Elliptic, FluxSatisfiesDivergenceIdentity)
{
    // int_boundary sigma d_nu u = int c u for -div(sigma grad u) + c u = 0.
    const auto m = disk(10);
    const auto c = ScalarField::constant(*m, Placement::vertex, 3.0);
    const auto sys = assemble(m, ScalarField::constant(*m, Placement::vertex, 1.0), c);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(m->vertex_count());
    const Eigen::VectorXd u = sys.solve(zero, to_vector(boundary_of(*m, [](Point p) { return 1.0 + p.x; })));
    const Eigen::VectorXd g = sys.flux(u, zero);
    const double lhs = m->boundary_integral(std::span<const double>(g.data(), static_cast<std::size_t>(g.size())));
    const double rhs = lumped_mass(*m, c).dot(u);
    EXPECT_NEAR(lhs, rhs, 1e-10 * std::abs(rhs));
}

TEST(Elliptic, IterativeSolverAgreesWithDirect)
{
    const auto m = disk(12);
    const auto sigma = ScalarField::on_vertices(*m, [](Point p) { return 1.0 + 0.5 * p.y; });
    const Eigen::VectorXd reaction = lumped_mass(*m, ScalarField::constant(*m, Placement::vertex, 2.0));
    const AssembledSystem direct(m, sigma, reaction);
    SolverOptions cg;
    cg.direct_limit = 0;
    const AssembledSystem iterative(m, sigma, reaction, cg);
    ASSERT_TRUE(direct.uses_direct_solver());
    ASSERT_FALSE(iterative.uses_direct_solver());
    const Eigen::VectorXd load = lumped_mass(*m, ScalarField::constant(*m, Placement::vertex, 1.0));
    const Eigen::VectorXd a = direct.solve(load);
    const Eigen::VectorXd b = iterative.solve(load);
    EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-8 * a.cwiseAbs().maxCoeff());
}

TEST(Elliptic, ResolventIsPositiveForPositiveSource)
{
    const auto m = disk(8);
    const auto cfg = CoefficientSet::unit_medium(m, OrderField::constant(*m, 0.5));
    const Eigen::VectorXd u = apply_resolvent(cfg, 0.1, Eigen::VectorXd::Ones(m->vertex_count()));
    EXPECT_GE(u.minCoeff(), 0.0);
    EXPECT_GT(u.maxCoeff(), 0.0);
}

TEST(Elliptic, RejectsNegativeReaction)
{
    const auto m = disk(4);
    EXPECT_THROW(assemble(m, ScalarField::constant(*m, Placement::vertex, 1.0),
                          ScalarField::constant(*m, Placement::vertex, -1.0)),
                 InvalidInput);
}

#include <cmath>

#include <gtest/gtest.h>

#include <varorder/errors.hpp>
#include <varorder/forward.hpp>

using namespace varorder;

namespace {

struct DiskCase {
    MeshPtr mesh;
    CoefficientSet cfg;
    Excitation ex;
    int x0;

    explicit DiskCase(int rings, double alpha = 0.5)
        : mesh(std::make_shared<const Mesh>(build_disk_mesh_rings(rings))),
          cfg(CoefficientSet::unit_medium(mesh, OrderField::constant(*mesh, alpha))),
          ex(Excitation::constant(*mesh, {{2, 1.0}})),
          x0(boundary_point_index(*mesh, {1.0, 0.0}).vertex)
    {
    }
};

double bessel_flux(double p, double alpha)
{
    const double s = std::pow(p, 0.5 * alpha);
    return 2.0 * std::pow(p, -3.0) * s * std::cyl_bessel_i(1.0, s) / std::cyl_bessel_i(0.0, s);
}

}  // namespace

TEST(Ghat, MatchesFactorialFormula)
{
    const Mesh m = build_disk_mesh_rings(4);
    const Excitation e = Excitation::constant(m, {{2, 1.0}, {3, 0.5}});
    const double p = 0.3;
    EXPECT_NEAR(ghat(e, p).front(), 2.0 / std::pow(p, 3) + 0.5 * 6.0 / std::pow(p, 4), 1e-9);
    EXPECT_NEAR(ghat_scaled(e, p).front(), 2.0 * p + 0.5 * 6.0, 1e-12);
}

TEST(Forward, BesselFluxOnModerateMesh)
{
    const DiskCase c(12);
    for (double p : {1e-4, 1e-2, 1.0}) {
        const FluxCurve curve = flux_curve(c.cfg, c.ex, c.x0, {p});
        EXPECT_NEAR(curve.F[0] / bessel_flux(p, 0.5), 1.0, 0.02) << "p=" << p;
    }
}

TEST(Forward, RepresentationAgreesWithDirectSolve)
{
    const DiskCase c(8, 0.6);
    for (double p : {1e-3, 0.5, 5.0}) {
        const Eigen::VectorXd a = solve_uhat_direct(c.cfg, c.ex, p);
        const Eigen::VectorXd b = solve_uhat_repr(c.cfg, c.ex, p);
        EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-10 * a.cwiseAbs().maxCoeff());
    }
}

TEST(Forward, FluxCurveGridIsOrderedAndScaled)
{
    const DiskCase c(6);
    const auto grid = log_grid(1e-4, 1.0, 5);
    EXPECT_NEAR(grid[2], 1e-2, 1e-15);
    const FluxCurve curve = flux_curve(c.cfg, c.ex, c.x0, grid);
    EXPECT_EQ(curve.leading_power, 2);
    const auto s = curve.scaled(2);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        EXPECT_NEAR(s[i], std::pow(grid[i], 3) * curve.F[i], 1e-12 * std::abs(s[i]));
    }
    EXPECT_NO_THROW(curve.validate());
}

TEST(Forward, FluxCurveRejectsInteriorObservationPoint)
{
    const DiskCase c(6);
    int interior = 0;
    while (c.mesh->is_boundary(interior)) {
        ++interior;
    }
    EXPECT_THROW(flux_curve(c.cfg, c.ex, interior, {1.0}), InvalidInput);
}

TEST(WeightedData, SecondOrderAgreementWithFiniteDifferences)
{
    const DiskCase c(10);
    const WeightedData d = weighted_data(c.cfg, c.ex);
    const double e1 = (d.D - weighted_data_fd(c.cfg, c.ex, 2e-2).D).cwiseAbs().maxCoeff();
    const double e2 = (d.D - weighted_data_fd(c.cfg, c.ex, 1e-2).D).cwiseAbs().maxCoeff();
    EXPECT_NEAR(e1 / e2, 4.0, 0.5);
}

TEST(WeightedData, ScalesLinearlyWithExcitation)
{
    const DiskCase c(6);
    const WeightedData a = weighted_data(c.cfg, c.ex);
    const WeightedData b = weighted_data(c.cfg, c.ex.scaled(3.0));
    EXPECT_LT((3.0 * a.D - b.D).cwiseAbs().maxCoeff(), 1e-10 * b.D.cwiseAbs().maxCoeff());
}

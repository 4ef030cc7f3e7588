#include <cmath>

#include <gtest/gtest.h>

#include <varorder/asymptotics.hpp>
#include <varorder/errors.hpp>

using namespace varorder;

namespace {

struct TwoZone {
    MeshPtr mesh;
    CoefficientSet cfg;
    Excitation ex;
    int x0;

    TwoZone()
        : mesh(std::make_shared<const Mesh>(
              build_disk_mesh_rings(10).retagged([](Point c, int) { return std::hypot(c.x, c.y) < 0.5 ? 1 : 0; }))),
          cfg(CoefficientSet::unit_medium(mesh, build_partition_order(*mesh, Partition({{0, 0.4}, {1, 0.7}})))),
          ex(Excitation::constant(*mesh, {{2, 1.0}})),
          x0(boundary_point_index(*mesh, {1.0, 0.0}).vertex)
    {
    }
};

}  // namespace

TEST(LogLogSlope, RecoversExactPowerLaw)
{
    std::vector<double> x;
    std::vector<double> y;
    for (double v : log_grid(1e-5, 1e-1, 12)) {
        x.push_back(v);
        y.push_back(3.0 * std::pow(v, 0.8));
    }
    const SlopeFit f = fit_loglog_slope(x, y, 0.0);
    EXPECT_NEAR(f.slope, 0.8, 1e-12);
    EXPECT_NEAR(std::exp(f.intercept), 3.0, 1e-10);
}

TEST(LogLogSlope, TooFewPointsAboveFloorGivesNaN)
{
    const SlopeFit f = fit_loglog_slope({1, 2, 3}, {1e-20, 1e-20, 1.0}, 1e-15);
    EXPECT_TRUE(std::isnan(f.slope));
}

TEST(Cascade, ZeroRegimeSumApproachesScaledFlux)
{
    const TwoZone c;
    const double p = 1e-4;
    const double target = boundary_flux(c.cfg, c.ex, p, true)[c.mesh->boundary_slot(c.x0)];
    double prev = std::numeric_limits<double>::infinity();
    for (int N : {1, 2, 3}) {
        const double err = std::abs(cascade_zero(c.cfg, c.ex, p, N, c.x0).flux_sum() - target);
        EXPECT_LT(err, prev);
        prev = err;
    }
}

TEST(Cascade, OneRegimeIsExactAtPEqualsOne)
{
    const TwoZone c;
    const double target = boundary_flux(c.cfg, c.ex, 1.0, true)[c.mesh->boundary_slot(c.x0)];
    const ExpansionCascade k = cascade_one(c.cfg, c.ex, 1.0, 1, c.x0);
    EXPECT_NEAR(k.flux_sum(), target, 1e-10 * std::abs(target));
    EXPECT_EQ(k.term(2, 0).k, 2);
}

TEST(Remainder, ZeroRegimeSlopeMatchesSmallestOrder)
{
    const TwoZone c;
    const RemainderProbe r = remainder_probe_zero(c.cfg, c.ex, c.x0, 1, log_grid(1e-6, 1e-2, 16));
    ASSERT_TRUE(r.has_slope());
    EXPECT_NEAR(r.slope, 0.4, 0.05);
    EXPECT_DOUBLE_EQ(r.theoretical, 0.4);
}

TEST(Remainder, OneRegimeSlopeIsDepth)
{
    const TwoZone c;
    const RemainderProbe r = remainder_probe_one(c.cfg, c.ex, c.x0, 2, log_grid(1e-3, 0.3, 10), -1.0);
    ASSERT_TRUE(r.has_slope());
    EXPECT_GE(r.slope, 1.9);
}

TEST(Neumann, FirstOrderResidualMatchesClosedForm)
{
    const TwoZone c;
    const Eigen::VectorXd f = Eigen::VectorXd::Ones(c.mesh->vertex_count());
    for (double p : {1e-4, 1e-2}) {
        const NeumannResidual a = neumann_truncation_residual(c.cfg, f, p, 1);
        const NeumannResidual b = neumann_first_order_identity(c.cfg, f, p);
        EXPECT_NEAR(a.max_norm, b.max_norm, 1e-9 * b.max_norm);
    }
}

TEST(Neumann, ResidualShrinksWithDepth)
{
    const TwoZone c;
    const Eigen::VectorXd f = Eigen::VectorXd::Ones(c.mesh->vertex_count());
    const double p = 1e-3;
    double prev = std::numeric_limits<double>::infinity();
    for (int N : {1, 2, 3, 4}) {
        const double r = neumann_truncation_residual(c.cfg, f, p, N).l2_norm;
        EXPECT_LT(r, prev);
        prev = r;
    }
}

TEST(Taylor, BoundIsQuadraticNearOne)
{
    const TwoZone c;
    for (double p : {0.9, 0.99, 1.01, 1.2}) {
        EXPECT_LE(taylor_order_bound(c.cfg.alpha, p), (p - 1.0) * (p - 1.0));
    }
    EXPECT_DOUBLE_EQ(taylor_order_bound(c.cfg.alpha, 1.0), 0.0);
}

TEST(P0, IsAtMostOneTenthAndDeterministic)
{
    const TwoZone c;
    const double a = select_p0(c.cfg, 7);
    EXPECT_LE(a, 0.1);
    EXPECT_GT(a, 0.0);
    EXPECT_EQ(a, select_p0(c.cfg, 7));
    const double ca = estimate_inverse_norm(c.cfg);
    EXPECT_GT(ca, 0.0);
    // The first Dirichlet eigenvalue of the unit disk is about 5.78.
    EXPECT_NEAR(ca, 1.0 / 5.783, 0.02);
}

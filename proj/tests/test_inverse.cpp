#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include <varorder/errors.hpp>
#include <varorder/inverse.hpp>

using namespace varorder;

namespace {

MeshPtr quadrant_disk(int rings)
{
    return std::make_shared<const Mesh>(build_disk_mesh_rings(rings).retagged(
        [](Point c, int) { return (c.x >= 0.0 ? 0 : 1) + (c.y >= 0.0 ? 0 : 2); }));
}

}  // namespace

TEST(HopfProbe, NegativeAndMonotoneUnderInclusion)
{
    const auto mesh = quadrant_disk(10);
    const auto cfg = CoefficientSet::unit_medium(mesh, OrderField::constant(*mesh, 0.5));
    const auto ex = Excitation::constant(*mesh, {{2, 1.0}});
    const int x0 = boundary_point_index(*mesh, {1.0, 0.0}).vertex;
    const double a = hopf_probe(cfg, ex, {3}, x0);
    const double b = hopf_probe(cfg, ex, {3, 1}, x0);
    const double c = hopf_probe(cfg, ex, {3, 1, 0, 2}, x0);
    EXPECT_LT(a, 0.0);
    EXPECT_LT(b, a);
    EXPECT_LT(c, b);
}

TEST(HopfProbe, IsAdditiveOverDisjointSets)
{
    const auto mesh = quadrant_disk(8);
    const auto cfg = CoefficientSet::unit_medium(mesh, OrderField::constant(*mesh, 0.5));
    const auto ex = Excitation::constant(*mesh, {{2, 1.0}});
    const int x0 = boundary_point_index(*mesh, {1.0, 0.0}).vertex;
    const double sum = hopf_probe(cfg, ex, {0}, x0) + hopf_probe(cfg, ex, {2}, x0);
    EXPECT_NEAR(hopf_probe(cfg, ex, {0, 2}, x0), sum, 1e-10 * std::abs(sum));
}

TEST(Baseline, MatchesScaledFluxAtSmallP)
{
    const auto mesh = quadrant_disk(8);
    const auto cfg = CoefficientSet::unit_medium(mesh, OrderField::constant(*mesh, 0.5));
    const auto ex = Excitation::constant(*mesh, {{2, 1.0}});
    const int x0 = boundary_point_index(*mesh, {1.0, 0.0}).vertex;
    const double b = baseline_flux(cfg, ex, x0);
    const double s = boundary_flux(cfg, ex, 1e-14, true)[mesh->boundary_slot(x0)];
    EXPECT_NEAR(s, b, 1e-5);
}

TEST(Reciprocity, HoldsForRandomDraws)
{
    const auto mesh = quadrant_disk(8);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.35, 0.65);
    for (int i = 0; i < 3; ++i) {
        const auto a1 = build_partition_order(*mesh, Partition({{0, 0.3}, {1, 0.4}, {2, 0.5}, {3, u(rng)}}));
        const auto a2 = OrderField::constant(*mesh, u(rng));
        auto cfg = CoefficientSet::unit_medium(mesh, a2);
        cfg.sigma = ScalarField::on_vertices(*mesh, [](Point x) { return 1.0 + 0.3 * x.x; });
        cfg.q = ScalarField::on_vertices(*mesh, [](Point x) { return x.y * x.y; });
        const auto ex = Excitation::constant(*mesh, {{2, 1.0}});
        EXPECT_LT(reciprocity_check(a1, a2, cfg, ex).residual, 1e-9);
    }
}

TEST(LinearizedRecovery, RecoversQuadrantPerturbation)
{
    const auto mesh = quadrant_disk(12);
    const auto cfg = CoefficientSet::unit_medium(mesh, OrderField::constant(*mesh, 0.5));
    const auto ex = Excitation::constant(*mesh, {{2, 1.0}});
    const Partition part({{0, 0.55}, {1, 0.52}, {2, 0.535}, {3, 0.545}});
    const WeightedData d1 = weighted_data(cfg.with_order(build_partition_order(*mesh, part)), ex);
    const WeightedData d2 = weighted_data(cfg, ex);
    const RecoveryResult r = linearized_recovery(WeightedData{d1.D - d2.D}, part, cfg, ex);
    ASSERT_EQ(r.tags.size(), 4U);
    EXPECT_FALSE(r.rank_deficient);
    for (std::size_t j = 0; j < r.tags.size(); ++j) {
        EXPECT_NEAR(r.dalpha[static_cast<Eigen::Index>(j)], part.alpha_of(r.tags[j]) - 0.5, 1e-6);
    }
}

TEST(LinearizedRecovery, NonnegativityProjection)
{
    const auto mesh = quadrant_disk(8);
    const auto cfg = CoefficientSet::unit_medium(mesh, OrderField::constant(*mesh, 0.5));
    const auto ex = Excitation::constant(*mesh, {{2, 1.0}});
    const Partition part({{0, 0.45}, {1, 0.52}, {2, 0.53}, {3, 0.54}});
    const WeightedData d1 = weighted_data(cfg.with_order(build_partition_order(*mesh, part)), ex);
    const WeightedData d2 = weighted_data(cfg, ex);
    const RecoveryResult r = linearized_recovery(WeightedData{d1.D - d2.D}, part, cfg, ex, std::nullopt, true);
    EXPECT_GE(r.dalpha.minCoeff(), 0.0);
}

TEST(Stability, EqualOrdersLeaveRatioUndefined)
{
    const auto mesh = quadrant_disk(6);
    const auto a = OrderField::constant(*mesh, 0.5);
    const auto cfg = CoefficientSet::unit_medium(mesh, a);
    const auto ex = Excitation::constant(*mesh, {{2, 1.0}});
    const StabilityReport r = stability_report(a, a, cfg, ex);
    EXPECT_FALSE(r.defined());
    EXPECT_EQ(r.l1_dalpha, 0.0);
}

TEST(Stability, MonotonePairHasFiniteRatio)
{
    const auto mesh = quadrant_disk(8);
    const auto a2 = OrderField::constant(*mesh, 0.5);
    const auto a1 = build_partition_order(*mesh, Partition({{0, 0.5 + 1e-9}, {1, 0.52}, {2, 0.53}, {3, 0.55}}));
    const auto cfg = CoefficientSet::unit_medium(mesh, a2);
    const auto ex = Excitation::constant(*mesh, {{2, 1.0}});
    const StabilityReport r = stability_report(a1, a2, cfg, ex);
    EXPECT_TRUE(r.monotone);
    EXPECT_TRUE(r.defined());
    EXPECT_GT(r.ratio, 0.0);
    EXPECT_FALSE(r.ghat_sign_change);
}

TEST(Figure1, OrdersSatisfyBoundsAndAreDistinguishable)
{
    const auto mesh = std::make_shared<const Mesh>(build_disk_mesh_rings(8));
    const auto orders = figure1_orders(*mesh);
    ASSERT_EQ(orders.size(), 4U);
    for (std::size_t i = 0; i < orders.size(); ++i) {
        EXPECT_LT(orders[i].alpha_max(), 2.0 * orders[i].alpha_min());
        for (std::size_t j = i + 1; j < orders.size(); ++j) {
            EXPECT_TRUE(predicted_distinguishable(orders[i], orders[j]));
        }
    }
    EXPECT_FALSE(predicted_distinguishable(orders[0], orders[0]));
    const auto cfg = CoefficientSet::unit_medium(mesh, orders[0]);
    const auto ex = Excitation::constant(*mesh, {{2, 1.0}});
    const Eigen::MatrixXd d =
        distinguishability_experiment(orders, cfg, ex, boundary_point_index(*mesh, {1, 0}).vertex, log_grid(1e-6, 1, 5));
    EXPECT_EQ(d.diagonal().cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ((d - d.transpose()).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_GT(d(0, 3), 1e-9);
}

#include <cmath>

#include <gtest/gtest.h>

#include <varorder/errors.hpp>
#include <varorder/exponent_fit.hpp>
#include <varorder/inverse.hpp>

using namespace varorder;

namespace {

std::vector<double> power_sum(const std::vector<double>& p, const std::vector<std::pair<double, double>>& terms,
                              double constant = 0.0)
{
    std::vector<double> g(p.size(), constant);
    for (std::size_t i = 0; i < p.size(); ++i) {
        for (const auto& [c, a] : terms) {
            g[i] += c * std::pow(p[i], a);
        }
    }
    return g;
}

}  // namespace

TEST(FitPowerSum, TwoTerms)
{
    const auto p = log_grid(1e-6, 1e-2, 30);
    const ExponentModel m = fit_power_sum(p, power_sum(p, {{3.0, 0.4}, {1.5, 0.7}}), false);
    ASSERT_EQ(m.terms.size(), 2U);
    EXPECT_NEAR(m.terms[0].alpha, 0.4, 1e-6);
    EXPECT_NEAR(m.terms[1].alpha, 0.7, 1e-6);
    EXPECT_NEAR(m.terms[0].c, 3.0, 1e-5);
    EXPECT_NEAR(m.terms[1].c, 1.5, 1e-5);
    EXPECT_FALSE(m.stagnated);
}

TEST(FitPowerSum, SingleTerm)
{
    const auto p = log_grid(1e-6, 1e-2, 20);
    const ExponentModel m = fit_power_sum(p, power_sum(p, {{2.0, 0.5}}), false);
    ASSERT_EQ(m.terms.size(), 1U);
    EXPECT_NEAR(m.terms[0].alpha, 0.5, 1e-8);
    EXPECT_NEAR(m.terms[0].c, 2.0, 1e-7);
}

TEST(FitPowerSum, ZeroSignalGivesEmptyModel)
{
    const auto p = log_grid(1e-6, 1e-2, 10);
    const ExponentModel m = fit_power_sum(p, std::vector<double>(p.size(), 0.0), false);
    EXPECT_TRUE(m.terms.empty());
}

TEST(FitPowerSum, CloseExponentsAreMerged)
{
    const auto p = log_grid(1e-6, 1e-2, 30);
    FitOptions o;
    o.max_terms = 2;
    const ExponentModel m = fit_power_sum(p, power_sum(p, {{1.0, 0.40}, {1.0, 0.42}}), false, o);
    ASSERT_EQ(m.terms.size(), 1U);
    EXPECT_TRUE(m.collision);
    EXPECT_TRUE(m.terms[0].merged);
    EXPECT_NEAR(m.terms[0].alpha, 0.41, 0.02);
}

TEST(FitPowerSum, ConstantColumnForUnknownBaseline)
{
    const auto p = log_grid(1e-8, 1e-3, 30);
    const ExponentModel m = fit_power_sum(p, power_sum(p, {{-0.8, 0.45}}, 0.3), true);
    ASSERT_GE(m.terms.size(), 1U);
    EXPECT_NEAR(m.terms[0].alpha, 0.45, 1e-4);
    EXPECT_NEAR(m.baseline, 0.3, 1e-6);
}

TEST(FitPowerSum, RejectsUnsortedGrid)
{
    EXPECT_THROW(fit_power_sum({1e-3, 1e-4, 1e-2}, {1, 1, 1}, false), InvalidInput);
}

TEST(DetectLeadingM, IntegerSlope)
{
    const auto p = log_grid(1e-8, 1e-2, 25);
    std::vector<double> F;
    for (double v : p) {
        F.push_back(std::pow(v, -3.0) * (1.0 - 0.5 * std::pow(v, 0.5)));
    }
    EXPECT_EQ(detect_leading_M(p, F), 2);
}

TEST(DetectLeadingM, VanishingBaselineUsesFloor)
{
    const auto p = log_grid(1e-8, 1e-2, 25);
    std::vector<double> F;
    for (double v : p) {
        F.push_back(std::pow(v, -3.0) * std::pow(v, 0.5));
    }
    // Slope -2.5 = -(M+1) + 1/2 is far from an integer, so the floor rule applies.
    EXPECT_EQ(detect_leading_M(p, F), 2);
}

TEST(DetectLeadingM, AmbiguousSlopeThrows)
{
    const auto p = log_grid(1e-8, 1e-2, 25);
    std::vector<double> F;
    for (double v : p) {
        F.push_back(std::pow(v, -2.85));
    }
    EXPECT_THROW(detect_leading_M(p, F), AnalysisError);
}

TEST(RecoverExponents, GenuineTwoSubdomainData)
{
    const auto mesh = std::make_shared<const Mesh>(
        build_disk_mesh_rings(12).retagged([](Point c, int) { return std::hypot(c.x, c.y) < 0.5 ? 1 : 0; }));
    const auto cfg = CoefficientSet::unit_medium(mesh, build_partition_order(*mesh, Partition({{0, 0.4}, {1, 0.7}})));
    const auto ex = Excitation::constant(*mesh, {{2, 1.0}});
    const int x0 = boundary_point_index(*mesh, {1.0, 0.0}).vertex;
    const FluxCurve curve = flux_curve(cfg, ex, x0, log_grid(1e-12, 1e-4, 30));
    const ExponentModel m = recover_exponents(curve, baseline_flux(cfg, ex, x0));
    EXPECT_EQ(m.M, 2);
    const auto primary = m.primary_exponents();
    ASSERT_EQ(primary.size(), 2U);
    EXPECT_NEAR(primary[0], 0.4, 0.02);
    EXPECT_NEAR(primary[1], 0.7, 0.02);
    // Known medium: the leading coefficient is the probe of the outer subdomain.
    EXPECT_NEAR(m.terms[0].c, hopf_probe(cfg, ex, {0}, x0), 1e-3);
}

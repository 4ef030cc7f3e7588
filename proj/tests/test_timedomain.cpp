#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include <varorder/errors.hpp>
#include <varorder/inverse.hpp>
#include <varorder/timedomain.hpp>

using namespace varorder;

TEST(L1Weights, PositiveDecreasingAndNormalized)
{
    const L1Weights w(0.6, 0.01, 200);
    EXPECT_NEAR(w.scale(), std::pow(0.01, -0.6), 1e-12 * w.scale());
    EXPECT_NEAR(w[0], 1.0 / std::tgamma(1.4), 1e-14);
    for (std::size_t m = 1; m < w.table().size(); ++m) {
        EXPECT_GT(w[m], 0.0);
        EXPECT_LT(w[m], w[m - 1]);
    }
}

TEST(L1Weights, CaputoOfLinearFunctionIsExact)
{
    // For u(t) = t the L1 scheme is exact: D^a t = t^{1-a} / Gamma(2-a).
    const double alpha = 0.35;
    const double tau = 0.05;
    const int n = 40;
    const L1Weights w(alpha, tau, n);
    double sum = 0.0;
    for (int m = 0; m < n; ++m) {
        sum += w[static_cast<std::size_t>(m)] * tau;  // increments u^{n-m} - u^{n-m-1} = tau
    }
    const double t = n * tau;
    EXPECT_NEAR(w.scale() * sum, std::pow(t, 1.0 - alpha) / std::tgamma(2.0 - alpha), 1e-12);
}

class OnlineConvolutionTest : public ::testing::TestWithParam<int> {};

TEST_P(OnlineConvolutionTest, MatchesDirectHistorySum)
{
    const int direct_limit = GetParam();
    const int sources = 300;
    const int channels = 3;
    std::mt19937_64 rng(11);
    std::normal_distribution<double> nd;
    std::vector<std::vector<double>> kernels(2, std::vector<double>(OnlineConvolution::kernel_length(sources)));
    for (auto& k : kernels) {
        for (std::size_t m = 0; m < k.size(); ++m) {
            k[m] = 1.0 / (1.0 + static_cast<double>(m)) + 0.1 * nd(rng);
        }
    }
    std::vector<std::vector<double>> x(static_cast<std::size_t>(sources), std::vector<double>(channels));
    OnlineConvolution conv(kernels, channels, sources, direct_limit);
    double worst = 0.0;
    for (int i = 0; i < sources; ++i) {
        for (auto& v : x[static_cast<std::size_t>(i)]) {
            v = nd(rng);
        }
        conv.push(x[static_cast<std::size_t>(i)].data());
        const int s = i + 1;
        for (int k = 0; k < 2; ++k) {
            const double* h = conv.target(k, s);
            for (int c = 0; c < channels; ++c) {
                double ref = 0.0;
                for (int j = 0; j < s; ++j) {
                    ref += kernels[static_cast<std::size_t>(k)][static_cast<std::size_t>(s - j)] *
                           x[static_cast<std::size_t>(j)][static_cast<std::size_t>(c)];
                }
                worst = std::max(worst, std::abs(h[c] - ref));
            }
        }
    }
    EXPECT_EQ(conv.pushed(), sources);
    EXPECT_LT(worst, 1e-11);
}

INSTANTIATE_TEST_SUITE_P(DirectAndFft, OnlineConvolutionTest, ::testing::Values(1, 4, 32, 1 << 20));

namespace {

struct SmallDisk {
    MeshPtr mesh;
    CoefficientSet cfg;
    Excitation ex;
    int x0;

    SmallDisk()
        : mesh(std::make_shared<const Mesh>(build_disk_mesh_rings(6))),
          cfg(CoefficientSet::unit_medium(mesh, OrderField::constant(*mesh, 0.5))),
          ex(Excitation::constant(*mesh, {{2, 1.0}})),
          x0(boundary_point_index(*mesh, {1.0, 0.0}).vertex)
    {
    }
};

}  // namespace

TEST(WeightedTimeIntegral, ConstantFluxIntegratesToOne)
{
    FluxSeries s;
    s.tau = 1e-2;
    s.T = 40.0;
    s.vertices = {0};
    s.sigma = Eigen::VectorXd::Ones(1);
    s.flux = Eigen::MatrixXd::Ones(4001, 1);
    const TimeIntegral r = weighted_time_integral(s);
    EXPECT_NEAR(r.value[0], 1.0, 1e-3);
    EXPECT_GE(r.tail[0], 0.0);
    EXPECT_LT(r.tail[0], 1e-12);
}

TEST(L1Solve, RejectsShortHorizon)
{
    const SmallDisk c;
    EXPECT_THROW(l1_step_solve(c.cfg, c.ex, 0.1, 5.0), InvalidInput);
}

TEST(L1Solve, CoarseCrossCheckAgainstWeightedData)
{
    const SmallDisk c;
    const FluxSeries s = l1_step_solve(c.cfg, c.ex, 1e-2, 40.0, {c.x0});
    EXPECT_GE(s.u_min, -1e-10 * s.u_max);
    const double d = weighted_data(c.cfg, c.ex).D[c.mesh->boundary_slot(c.x0)];
    const double v = weighted_time_integral(s).value[0];
    EXPECT_NEAR(v / d, 1.0, 0.01);
}

TEST(L1Solve, ErrorShrinksWhenStepHalves)
{
    const SmallDisk c;
    const double d = weighted_data(c.cfg, c.ex).D[c.mesh->boundary_slot(c.x0)];
    const double e1 = std::abs(weighted_time_integral(l1_step_solve(c.cfg, c.ex, 4e-2, 40.0, {c.x0})).value[0] - d);
    const double e2 = std::abs(weighted_time_integral(l1_step_solve(c.cfg, c.ex, 2e-2, 40.0, {c.x0})).value[0] - d);
    EXPECT_LT(e2, e1);
}

#pragma once

// Time stepping for rho d_t^alpha(x) U - div(sigma grad U) + q U = 0 with
// U = g(t) on the boundary and U(0) = 0, using the L1 approximation of the
// Caputo derivative. The history sum is evaluated exactly by an online blocked
// convolution (FFT for long blocks), so a step costs O(log^2 n) per vertex
// amortized instead of O(n).

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "varorder/geometry.hpp"

namespace varorder {

/// w_m = ((m+1)^{1-alpha} - m^{1-alpha}) / Gamma(2-alpha), m = 0..size-1.
class L1Weights {
public:
    L1Weights(double alpha, double tau, std::size_t size);

    [[nodiscard]] double alpha() const noexcept { return alpha_; }
    [[nodiscard]] double tau() const noexcept { return tau_; }
    /// tau^{-alpha}, the factor in front of the weighted sum.
    [[nodiscard]] double scale() const noexcept { return scale_; }
    [[nodiscard]] const std::vector<double>& table() const noexcept { return w_; }
    [[nodiscard]] double operator[](std::size_t m) const { return w_[m]; }

private:
    double alpha_;
    double tau_;
    double scale_;
    std::vector<double> w_;
};

/// H_k[s] = sum_{j<s} kernel_k[s - j] x_j for vector-valued sources pushed one at a
/// time. After push number i (source x_i) the target s = i + 1 is complete.
/// Source block [e-B, e-1] with B the lowest set bit of e feeds targets
/// [e, e+B-1] right after x_{e-1} arrives; every (source, target) pair is
/// covered by exactly one block.
class OnlineConvolution {
public:
    /// Each kernel needs at least 2 * bit_ceil(sources) + 1 entries (entry 0 is unused).
    OnlineConvolution(std::vector<std::vector<double>> kernels, int channels, int sources, int direct_limit = 32);
    ~OnlineConvolution();
    OnlineConvolution(const OnlineConvolution&) = delete;
    OnlineConvolution& operator=(const OnlineConvolution&) = delete;

    void push(const double* x);
    /// Complete history sum for target s (s <= pushed count), `channels` values.
    [[nodiscard]] const double* target(int kernel, int s) const;
    [[nodiscard]] int pushed() const noexcept { return pushed_; }

    /// Entries needed per kernel for `sources` pushes.
    static std::size_t kernel_length(int sources);

private:
    struct Fft;

    void direct_block(int e, int B);
    void fft_block(int e, int B);

    std::vector<std::vector<double>> kernels_;
    int channels_;
    int sources_;
    int direct_limit_;
    int pushed_ = 0;
    std::vector<double> x_;                // sources x channels
    std::vector<std::vector<double>> h_;   // per kernel, (sources + 1) x channels
    std::unique_ptr<Fft> fft_;
};

struct FluxSeries {
    double tau = 0.0;
    double T = 0.0;
    std::vector<int> vertices;  ///< tracked boundary vertices
    Eigen::VectorXd sigma;      ///< sigma at the tracked vertices
    Eigen::MatrixXd flux;       ///< (steps + 1) x tracked, sigma d_nu U(t_n); row 0 is t = 0
    int degree = 0;             ///< largest power of t in g, used for the tail bound
    double u_min = 0.0;         ///< extreme nodal values over all steps
    double u_max = 0.0;

    [[nodiscard]] int steps() const noexcept { return static_cast<int>(flux.rows()) - 1; }
    [[nodiscard]] double time(int n) const noexcept { return n * tau; }
};

/// Implicit L1 stepping from U = 0 with steps of size tau up to T. One factorization of
/// K + M_q + sum_a tau^{-a} w_0^{(a)} M_{rho chi_a} serves every step. `tracked` lists boundary
/// vertices to record (all boundary vertices when empty).
FluxSeries l1_step_solve(const CoefficientSet& cfg, const Excitation& excitation, double tau, double T,
                         const std::vector<int>& tracked = {});

struct TimeIntegral {
    Eigen::VectorXd value;  ///< one entry per tracked vertex
    Eigen::VectorXd tail;   ///< estimate of the part beyond T
};

/// Trapezoidal int_0^T d_nu U(t) t e^{-t} dt per tracked vertex (the flux is divided by sigma),
/// which approximates the weighted data D. The tail assumes growth like t^degree past T.
TimeIntegral weighted_time_integral(const FluxSeries& series);

/// Trapezoidal int_0^T e^{-pt} sigma d_nu U(t) dt, comparable to the Laplace-domain flux F(p).
TimeIntegral laplace_transform(const FluxSeries& series, double p);

/// CSV with columns t,vertex,flux; every `stride`-th step.
void write_flux_series_csv(const FluxSeries& series, const std::string& path, int stride = 1);

}  // namespace varorder

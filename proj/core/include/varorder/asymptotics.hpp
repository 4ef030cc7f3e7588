#pragma once

// Expansion cascades of the boundary flux at p -> 0 and p -> 1, their
// remainders, and the Neumann-series truncation bound.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "varorder/forward.hpp"

namespace varorder {

enum class Regime { zero, one };

struct CascadeTerm {
    int k = 0;
    int l = 0;
    Eigen::VectorXd field;
    double flux_x0 = 0.0;  ///< sigma d_nu of the term at x0
};

struct ExpansionCascade {
    Regime regime = Regime::zero;
    double p = 0.0;
    int depth = 0;  ///< N: terms l = 0..N-1 for every excitation power k
    int x0 = -1;
    std::vector<CascadeTerm> terms;  ///< ordered by k, then l

    [[nodiscard]] const CascadeTerm& term(int k, int l) const;
    /// Sum of the term fluxes at x0.
    [[nodiscard]] double flux_sum() const;
};

/// u_{k,0}: reaction q, boundary data k! p^{M-k} phi_k;
/// u_{k,l}: reaction q, source -p^alpha rho u_{k,l-1}, zero boundary data.
ExpansionCascade cascade_zero(const CoefficientSet& cfg, const Excitation& excitation, double p, int depth, int x0);
/// v_{k,0}: reaction q + rho, boundary data k! p^{M-k} phi_k;
/// v_{k,l}: reaction q + rho, source (1 - p^alpha) rho v_{k,l-1}, zero boundary data.
ExpansionCascade cascade_one(const CoefficientSet& cfg, const Excitation& excitation, double p, int depth, int x0);

struct RemainderProbe {
    Regime regime = Regime::zero;
    int depth = 0;
    std::vector<double> abscissa;  ///< p (regime zero) or |p - 1| (regime one)
    std::vector<double> abs_r;     ///< |R|
    double floor = 0.0;            ///< values at or below are treated as noise
    std::size_t fit_begin = 0;     ///< fitted sub-grid [fit_begin, fit_end)
    std::size_t fit_end = 0;
    double slope = 0.0;            ///< NaN when fewer than 6 points clear the floor
    double theoretical = 0.0;      ///< N alpha_min (zero) or N (one)

    [[nodiscard]] bool has_slope() const;
};

/// R(p) = p^{M+1} F(p) - sum_{k, l<N} sigma d_nu u_{k,l}(p, x0) over the grid, with its log-log slope.
RemainderProbe remainder_probe_zero(const CoefficientSet& cfg, const Excitation& excitation, int x0, int depth,
                                    const std::vector<double>& p_grid);
/// Same with the p -> 1 cascade; `delta_grid` lists |p - 1| and p = 1 + sign * delta.
RemainderProbe remainder_probe_one(const CoefficientSet& cfg, const Excitation& excitation, int x0, int depth,
                                   const std::vector<double>& delta_grid, double sign = 1.0);

/// Least-squares slope of log y against log x over the largest contiguous run of
/// points with y > floor. Returns NaN slope if the run has fewer than `min_points`.
struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    std::size_t begin = 0;
    std::size_t end = 0;
};
SlopeFit fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y, double floor,
                          std::size_t min_points = 6);

struct NeumannResidual {
    double max_norm = 0.0;
    double l2_norm = 0.0;  ///< lumped-mass weighted
};

/// || (A + p^alpha)^{-1} f - sum_{i<N} (-A^{-1} p^alpha)^i A^{-1} f ||.
NeumannResidual neumann_truncation_residual(const CoefficientSet& cfg, const Eigen::VectorXd& f, double p, int depth);
/// The N = 1 residual evaluated through A^{-1} p^alpha (A + p^alpha)^{-1} f.
NeumannResidual neumann_first_order_identity(const CoefficientSet& cfg, const Eigen::VectorXd& f, double p);

/// max over triangles of |p^alpha - 1 - (p - 1) alpha|.
double taylor_order_bound(const OrderField& alpha, double p);

/// Estimate of the L2 operator norm of A^{-1} from random probes, each refined
/// by a few power iterations.
double estimate_inverse_norm(const CoefficientSet& cfg, int probes = 20, std::uint64_t seed = 42);
/// p0 = min(0.1, (2 C_A)^{-1/alpha_min}).
double select_p0(const CoefficientSet& cfg, std::uint64_t seed = 42);

void write_remainder_csv(const RemainderProbe& probe, const std::string& path);
void write_cascade_csv(const std::vector<ExpansionCascade>& cascades, const std::string& path);

}  // namespace varorder

#pragma once

// Power-sum models for one-point flux curves at small p:
//   p^{M+1} F(p) / sigma(x0) = b - sum_j c_j p^{alpha_j} + ...
// with the leading integer M read off the log-log slope, and the exponents
// found by peeling followed by variable projection.

#include <optional>
#include <string>
#include <vector>

#include "varorder/forward.hpp"

namespace varorder {

/// The unique M with p^{M+1} F bounded and p^M F unbounded as p -> 0, from the
/// log-log slope s of |F| over the two smallest decades of the grid:
/// M = -round(s) - 1 when s is within 0.1 of an integer, M = -floor(s) - 1 when
/// it is at least 0.2 away (vanishing baseline, s = -(M+1) + alpha_min), and
/// AnalysisError in between.
int detect_leading_M(const FluxCurve& curve);
int detect_leading_M(const std::vector<double>& p, const std::vector<double>& F);

struct ExponentTerm {
    double alpha = 0.0;
    double c = 0.0;
    bool primary = true;  ///< false for higher-order cross terms (alpha_i + alpha_j, 1 + alpha_j, ...)
    bool merged = false;  ///< produced by merging terms closer than the gap
};

struct FitOptions {
    int max_terms = 3;
    double gap = 0.05;
    /// Stop adding terms once the relative RMS residual drops below this.
    double tolerance = 1e-9;
    /// Exponent search interval.
    double alpha_lo = 0.02;
    double alpha_hi = 2.5;
};

struct ExponentModel {
    int M = 0;
    bool baseline_known = false;
    double baseline = 0.0;            ///< b (given, or fitted as a constant term)
    std::vector<ExponentTerm> terms;  ///< sorted by alpha; G(p) = sum_j c_j p^{alpha_j}
    double residual = 0.0;            ///< relative RMS residual of the fit
    int evaluations = 0;              ///< objective evaluations over all stages
    bool stagnated = false;           ///< residual stopped improving before reaching the tolerance
    bool collision = false;           ///< some exponents were merged

    [[nodiscard]] std::vector<double> primary_exponents() const;
    /// sum_j c_j p^{alpha_j}
    [[nodiscard]] double evaluate(double p) const;
};

/// Fits G(p) = [const +] sum_j c_j p^{alpha_j} by relative-weighted least squares.
ExponentModel fit_power_sum(const std::vector<double>& p, const std::vector<double>& G, bool with_constant,
                            const FitOptions& options = {});

/// Builds G(p) = b - p^{M+1} F(p) / sigma(x0) from the curve (b fitted when not known)
/// and classifies exponents below min(1, 2 alpha_first) - gap/2 as primary.
ExponentModel recover_exponents(const FluxCurve& curve, std::optional<double> known_baseline, int max_terms = 3,
                                double gap = 0.05);

void write_exponents_csv(const ExponentModel& model, const std::string& path);

}  // namespace varorder

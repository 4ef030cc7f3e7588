#pragma once

// Order recovery and the experiments that quantify uniqueness and stability:
// Hopf probes, linearized full-boundary recovery, the stability functional,
// the reciprocity identity and the one-point distinguishability scenario.

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "varorder/forward.hpp"

namespace varorder {

/// b = d_nu u_{M,0}(x0): the p^0 coefficient of p^{M+1} F(p) / sigma(x0).
double baseline_flux(const CoefficientSet& cfg, const Excitation& excitation, int x0);

/// d_nu A^{-1}[u_{M,0} chi_A](x0) where A is the union of triangles with a tag in `subset_tags`.
double hopf_probe(const CoefficientSet& cfg, const Excitation& excitation, const std::vector<int>& subset_tags, int x0);
/// Same for an explicit triangle set (one flag per triangle).
double hopf_probe_mask(const CoefficientSet& cfg, const Excitation& excitation, const std::vector<bool>& in_set, int x0);

struct RecoveryResult {
    std::vector<int> tags;
    Eigen::VectorXd dalpha;       ///< per-subdomain order difference, same order as `tags`
    double residual_norm = 0.0;   ///< || columns * dalpha - data ||_2 over boundary vertices
    double condition = 0.0;       ///< singular-value ratio of the column matrix
    double tikhonov = 0.0;        ///< regularization weight actually used
    int iterations = 0;           ///< projected-gradient iterations (0 without the sign constraint)
    bool rank_deficient = false;
};

/// Boundary response d_nu vtilde_j (one column per partition entry) to a unit
/// order change on subdomain j, with vtilde_j solving
/// -div(sigma grad vtilde) + (q + rho) vtilde = rho v chi_j, vtilde = 0 on the boundary,
/// and v = Uhat(1) the p = 1 background field.
Eigen::MatrixXd linearized_columns(const Partition& partition, const CoefficientSet& cfg, const Excitation& excitation);

/// Regularized least squares for per-subdomain order differences from D1 - D2.
/// `tikhonov` defaults to 1e-10 * (largest column norm)^2. With `nonnegative`
/// the solution is projected onto dalpha >= 0.
RecoveryResult linearized_recovery(const WeightedData& d_diff, const Partition& partition, const CoefficientSet& cfg,
                                   const Excitation& excitation, std::optional<double> tikhonov = std::nullopt,
                                   bool nonnegative = false);

struct StabilityReport {
    double l1_dalpha = 0.0;           ///< int |alpha1 - alpha2| dx
    double boundary_functional = 0.0; ///< int |D1 - D2| ds
    double ratio = 0.0;               ///< l1 / boundary functional, NaN when undefined
    bool monotone = true;             ///< alpha1 >= alpha2 on every triangle
    double ghat_min_abs = 0.0;        ///< min |ghat(1, x)| over the boundary
    bool ghat_sign_change = false;    ///< ghat(1, .) changes sign (lower bound g0 > 0 fails)

    [[nodiscard]] bool defined() const;
};

StabilityReport stability_report(const OrderField& alpha1, const OrderField& alpha2, const CoefficientSet& cfg,
                                 const Excitation& excitation);

struct ReciprocityResult {
    double volume_term = 0.0;    ///< int (alpha1 - alpha2) rho v w dx
    double boundary_term = 0.0;  ///< int sigma d_nu vtilde ds
    double residual = 0.0;       ///< |volume + boundary| / (|volume| + |boundary|), 0 if both vanish
};

ReciprocityResult reciprocity_check(const OrderField& alpha1, const OrderField& alpha2, const CoefficientSet& cfg,
                                    const Excitation& excitation);

/// Symmetric matrix of max over the grid of |p^{M+1} (F_i(p) - F_j(p))|.
Eigen::MatrixXd distinguishability_experiment(const std::vector<OrderField>& orders, const CoefficientSet& cfg,
                                              const Excitation& excitation, int x0, const std::vector<double>& p_grid);

/// Whether the uniqueness results separate two order maps from one-point flux curves:
/// their minima differ, or one dominates the other and they are not identical.
bool predicted_distinguishable(const OrderField& a, const OrderField& b);

/// The four order maps of the disk scenario: nested alpha1 >= alpha2 >= alpha3
/// plus a non-nested alpha4.
std::vector<OrderField> figure1_orders(const Mesh& disk);

void write_recovery_csv(const RecoveryResult& result, const std::string& path);
void write_stability_csv(const std::vector<StabilityReport>& reports, const std::string& path);
void write_matrix_csv(const Eigen::MatrixXd& m, const std::vector<std::string>& labels, const std::string& path);

}  // namespace varorder

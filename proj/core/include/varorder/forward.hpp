#pragma once

// Laplace-domain forward map: boundary data, transformed solutions, flux
// curves at one boundary vertex and the te^{-t}-weighted boundary data.

#include <string>
#include <vector>

#include <Eigen/Core>

#include "varorder/elliptic.hpp"
#include "varorder/geometry.hpp"

namespace varorder {

/// ghat(p) = sum_k k! p^{-k-1} phi_k at the boundary vertices.
BoundaryValues ghat(const Excitation& excitation, double p);
/// p^{M+1} ghat(p) = sum_k k! p^{M-k} phi_k, free of the p^{-M-1} blow-up.
BoundaryValues ghat_scaled(const Excitation& excitation, double p);

/// Solution of the transformed problem with reaction q + rho p^alpha and data ghat(p).
Eigen::VectorXd solve_uhat_direct(const CoefficientSet& cfg, const Excitation& excitation, double p);
/// The same field through Uhat = S[ghat] - (A + p^alpha)^{-1}[p^alpha S[ghat]].
Eigen::VectorXd solve_uhat_repr(const CoefficientSet& cfg, const Excitation& excitation, double p);

/// sigma d_nu Uhat(p) at every boundary vertex (slot order), multiplied by
/// p^{M+1} when `scaled` is set.
Eigen::VectorXd boundary_flux(const CoefficientSet& cfg, const Excitation& excitation, double p, bool scaled = false);

enum class Provenance { direct, representation };

struct FluxCurve {
    int x0 = -1;           ///< observation vertex
    double sigma_x0 = 1.0; ///< sigma at the observation vertex
    int leading_power = 0; ///< M of the excitation that produced the curve (0 if unknown)
    std::vector<double> p;
    std::vector<double> F; ///< sigma(x0) d_nu Uhat(p, x0)
    Provenance provenance = Provenance::direct;

    /// p^{M+1} F(p) / sigma(x0), the quantity the exponent model describes.
    [[nodiscard]] std::vector<double> scaled(int M) const;
    void validate() const;
};

/// Log-spaced grid with n points from a to b inclusive.
std::vector<double> log_grid(double a, double b, int n);

/// F(p) = sigma(x0) d_nu Uhat(p, x0) on the grid; grid points are solved concurrently.
FluxCurve flux_curve(const CoefficientSet& cfg, const Excitation& excitation, int x0, const std::vector<double>& p_grid,
                     Provenance provenance = Provenance::direct);

/// D(x) = int_0^inf d_nu U(t, x) t e^{-t} dt per boundary vertex (slot order).
struct WeightedData {
    Eigen::VectorXd D;
};

/// D through the exact p-derivative (sensitivity) problem at p = 1.
WeightedData weighted_data(const CoefficientSet& cfg, const Excitation& excitation);
/// Central difference -(d_nu Uhat(1+delta) - d_nu Uhat(1-delta)) / (2 delta).
WeightedData weighted_data_fd(const CoefficientSet& cfg, const Excitation& excitation, double delta);

/// sigma at the boundary vertices, slot order.
Eigen::VectorXd boundary_sigma(const CoefficientSet& cfg);

void write_flux_curve_csv(const FluxCurve& curve, const std::string& path);
void write_weighted_data_csv(const Mesh& mesh, const WeightedData& data, const std::string& path);

}  // namespace varorder

#pragma once

// P1 finite elements for -div(sigma grad u) + c u = load with Dirichlet data.
//
// Stiffness is integrated exactly (sigma averaged per triangle, which is exact
// for linear sigma). Reaction and load terms use the vertex quadrature rule,
// so every weighted mass matrix is diagonal. The weight at a triangle corner
// may differ between triangles that share the vertex, which is how a
// triangle-placed order enters through p^alpha.

#include <memory>
#include <optional>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "varorder/geometry.hpp"

namespace varorder {

struct SolverOptions {
    /// Systems with at least this many unknowns use preconditioned CG.
    int direct_limit = 200000;
    double cg_tolerance = 1e-10;
    /// CG iteration cap is cg_cap_factor * sqrt(unknowns).
    double cg_cap_factor = 20.0;
};

/// Diagonal of the lumped mass matrix for the weight w (vertex or triangle placed):
/// entry v is sum over triangles t containing v of |t|/3 * w(t, corner of v).
Eigen::VectorXd lumped_mass(const Mesh& mesh, const ScalarField& weight);
/// Same with corner weight w(v) * factor[t]; `factor` has one value per triangle.
Eigen::VectorXd lumped_mass(const Mesh& mesh, const ScalarField& weight, const Eigen::VectorXd& factor);

/// Boundary values in slot order as an Eigen vector.
Eigen::VectorXd to_vector(const BoundaryValues& values);

class AssembledSystem {
public:
    /// `reaction` is the lumped reaction diagonal (one entry per vertex).
    AssembledSystem(MeshPtr mesh, const ScalarField& sigma, Eigen::VectorXd reaction, SolverOptions options = {});

    [[nodiscard]] const Mesh& mesh() const noexcept { return *mesh_; }
    [[nodiscard]] const MeshPtr& mesh_ptr() const noexcept { return mesh_; }
    /// Full (unconstrained) matrix K + diag(reaction), all vertices.
    [[nodiscard]] const Eigen::SparseMatrix<double>& matrix() const noexcept { return matrix_; }
    [[nodiscard]] const Eigen::VectorXd& reaction() const noexcept { return reaction_; }
    [[nodiscard]] int unknown_count() const noexcept { return static_cast<int>(interior_.size()); }
    [[nodiscard]] bool uses_direct_solver() const noexcept;

    /// Solves for u with u = boundary_values on the boundary (slot order) and
    /// the assembled `load` vector (one entry per vertex; boundary entries ignored).
    [[nodiscard]] Eigen::VectorXd solve(const Eigen::VectorXd& load, const Eigen::VectorXd& boundary_values) const;
    /// Homogeneous Dirichlet data.
    [[nodiscard]] Eigen::VectorXd solve(const Eigen::VectorXd& load) const;

    /// Variational flux sigma * d_nu u at the boundary vertices (slot order):
    /// the boundary density g with  int g phi_i = a(u, phi_i) - load_i  for every
    /// boundary hat function phi_i.
    [[nodiscard]] Eigen::VectorXd flux(const Eigen::VectorXd& u, const Eigen::VectorXd& load) const;
    /// Residual a(u, phi_i) - load_i at every vertex.
    [[nodiscard]] Eigen::VectorXd residual(const Eigen::VectorXd& u, const Eigen::VectorXd& load) const;

    /// max |residual_interior| / max(|load_interior|, |(K u)_interior|); a solve diagnostic.
    [[nodiscard]] double relative_residual(const Eigen::VectorXd& u, const Eigen::VectorXd& load) const;

private:
    struct Factor;

    MeshPtr mesh_;
    Eigen::SparseMatrix<double> matrix_;
    Eigen::VectorXd reaction_;
    std::vector<int> interior_;        // vertex ids of the unknowns
    std::vector<int> interior_index_;  // vertex id -> unknown index or -1
    Eigen::SparseMatrix<double> coupling_;  // interior rows x boundary slots
    std::shared_ptr<const Factor> factor_;
};

/// Assembles the form a(u,v) = int sigma grad u . grad v + int c u v.
/// Throws InvalidInput unless sigma > 0 and c >= 0.
AssembledSystem assemble(MeshPtr mesh, const ScalarField& sigma, const ScalarField& c, SolverOptions options = {});

/// u with a(u, v) = int f v for interior test functions and u = bdata on the boundary.
Eigen::VectorXd solve_dirichlet(const AssembledSystem& system, const ScalarField& f, const BoundaryValues& bdata);

/// The lifting S[phi]: -div(sigma grad v) + q v = 0, v = phi on the boundary.
Eigen::VectorXd solve_S(MeshPtr mesh, const ScalarField& sigma, const ScalarField& q, const BoundaryValues& phi);

/// Reaction diagonal of q + rho p^alpha (p = 0 gives q alone).
Eigen::VectorXd resolvent_reaction(const CoefficientSet& cfg, double p);

/// (A + p^alpha)^{-1} f: -div(sigma grad u) + (q + rho p^alpha) u = rho f, u = 0 on the boundary.
Eigen::VectorXd apply_resolvent(const CoefficientSet& cfg, double p, const Eigen::VectorXd& f);

/// Same operator with an already assembled load vector (entries on boundary vertices ignored).
Eigen::VectorXd apply_resolvent_to_load(const CoefficientSet& cfg, double p, const Eigen::VectorXd& load);

/// Variational flux of the solution of `system` with load int f v.
Eigen::VectorXd variational_flux(const AssembledSystem& system, const Eigen::VectorXd& u, const ScalarField& f);

}  // namespace varorder

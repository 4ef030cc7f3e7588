#pragma once

// Triangulated 2D domains, coefficient fields, piecewise-constant order maps
// and the polynomial-in-time boundary excitation.

#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace varorder {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline double distance(Point a, Point b)
{
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    return std::sqrt(dx * dx + dy * dy);
}

struct BoundaryEdge {
    int a = 0;  ///< first vertex in loop order (domain lies to the left of a->b)
    int b = 0;
    Point normal;  ///< outward unit normal
    double length = 0.0;
};

using Triangle = std::array<int, 3>;

/// Values on the boundary vertices, indexed in Mesh::boundary_vertices() order.
using BoundaryValues = std::vector<double>;

class Mesh {
public:
    /// Triangles with negative signed area are reoriented; degenerate
    /// triangles, non-manifold edges and open boundary chains are rejected.
    Mesh(std::vector<Point> vertices, std::vector<Triangle> triangles, std::vector<int> tags);

    [[nodiscard]] int vertex_count() const noexcept { return static_cast<int>(vertices_.size()); }
    [[nodiscard]] int triangle_count() const noexcept { return static_cast<int>(triangles_.size()); }

    [[nodiscard]] const std::vector<Point>& vertices() const noexcept { return vertices_; }
    [[nodiscard]] const std::vector<Triangle>& triangles() const noexcept { return triangles_; }
    [[nodiscard]] const std::vector<int>& tags() const noexcept { return tags_; }

    [[nodiscard]] double area(int triangle) const { return areas_[static_cast<std::size_t>(triangle)]; }
    [[nodiscard]] const std::vector<double>& areas() const noexcept { return areas_; }
    [[nodiscard]] double total_area() const noexcept { return total_area_; }
    [[nodiscard]] Point centroid(int triangle) const;

    /// Gradients of the three P1 hat functions on a triangle (constant per element).
    [[nodiscard]] std::array<Point, 3> hat_gradients(int triangle) const;

    /// Boundary edges, grouped by loop and ordered along each loop.
    [[nodiscard]] const std::vector<BoundaryEdge>& boundary_edges() const noexcept { return boundary_edges_; }
    [[nodiscard]] const std::vector<int>& boundary_vertices() const noexcept { return boundary_vertices_; }
    [[nodiscard]] int boundary_vertex_count() const noexcept { return static_cast<int>(boundary_vertices_.size()); }
    [[nodiscard]] int loop_count() const noexcept { return loop_count_; }

    /// Position of vertex v in boundary_vertices(), or -1 for interior vertices.
    [[nodiscard]] int boundary_slot(int v) const { return boundary_slot_[static_cast<std::size_t>(v)]; }
    [[nodiscard]] bool is_boundary(int v) const { return boundary_slot(v) >= 0; }

    /// Sorted distinct subdomain tags and the area each one covers.
    [[nodiscard]] const std::vector<int>& distinct_tags() const noexcept { return distinct_tags_; }
    [[nodiscard]] double tag_area(int tag) const;

    /// Largest edge length.
    [[nodiscard]] double max_edge_length() const noexcept { return max_edge_; }
    [[nodiscard]] double min_edge_length() const noexcept { return min_edge_; }
    /// Largest interior angle over all triangles, in radians.
    [[nodiscard]] double max_angle() const;

    /// Solve the consistent boundary mass system M_b g = rhs (both in boundary-slot order).
    [[nodiscard]] Eigen::VectorXd solve_boundary_mass(const Eigen::VectorXd& rhs) const;
    /// Integral over the boundary of a P1 boundary function (edge trapezoid, exact for P1).
    [[nodiscard]] double boundary_integral(std::span<const double> values) const;

    /// Same geometry with every triangle relabelled by `tagger(centroid, old_tag)`.
    [[nodiscard]] Mesh retagged(const std::function<int(Point, int)>& tagger) const;

private:
    struct BoundaryMassFactor;

    std::vector<Point> vertices_;
    std::vector<Triangle> triangles_;
    std::vector<int> tags_;
    std::vector<double> areas_;
    double total_area_ = 0.0;
    std::vector<BoundaryEdge> boundary_edges_;
    std::vector<int> boundary_vertices_;
    std::vector<int> boundary_slot_;
    int loop_count_ = 0;
    std::vector<int> distinct_tags_;
    std::map<int, double> tag_area_;
    double max_edge_ = 0.0;
    double min_edge_ = 0.0;
    std::shared_ptr<const BoundaryMassFactor> boundary_mass_;
};

using MeshPtr = std::shared_ptr<const Mesh>;

/// Quasi-uniform, non-obtuse triangulation of the unit disk with `rings`
/// concentric vertex rings (radial spacing 1/rings). Ring sizes are planned
/// from the boundary inward: the outer ring has about 2 pi rings vertices and
/// a ring halves its count once the tangential spacing stays below 1.3/rings.
Mesh build_disk_mesh_rings(int rings);
/// Disk mesh with mesh size h ~ 2^-level (rings = max(2, 2^level)).
Mesh build_disk_mesh(int refinement_level);
/// Unit square [0,1]^2, n x n cells, each split into two right triangles.
Mesh build_square_mesh(int n);

/// Reads `<stem>.node` / `<stem>.ele`.
Mesh read_mesh(const std::string& stem);
/// Writes `<stem>.node` / `<stem>.ele`.
void write_mesh(const Mesh& mesh, const std::string& stem);

struct BoundarySnap {
    int vertex = -1;
    double distance = 0.0;
};

/// Nearest boundary vertex to x0; ties go to the lowest vertex index.
BoundarySnap boundary_point_index(const Mesh& mesh, Point x0);

enum class Placement { vertex, triangle };

class ScalarField {
public:
    ScalarField() = default;
    ScalarField(Placement placement, Eigen::VectorXd values);

    static ScalarField constant(const Mesh& mesh, Placement placement, double value);
    static ScalarField on_vertices(const Mesh& mesh, const std::function<double(Point)>& fn);
    static ScalarField on_triangles(const Mesh& mesh, const std::function<double(Point, int)>& fn);

    [[nodiscard]] Placement placement() const noexcept { return placement_; }
    [[nodiscard]] const Eigen::VectorXd& values() const noexcept { return values_; }
    [[nodiscard]] Eigen::VectorXd& values() noexcept { return values_; }
    [[nodiscard]] double operator[](int i) const { return values_[i]; }
    [[nodiscard]] Eigen::Index size() const noexcept { return values_.size(); }

    /// Throws InvalidInput unless the length matches the mesh entity count.
    void check_against(const Mesh& mesh, const char* what) const;

    /// Per-triangle values (vertex fields are averaged over each triangle).
    [[nodiscard]] Eigen::VectorXd per_triangle(const Mesh& mesh) const;
    /// Value of corner `c` of triangle `t` (linear interpolation for vertex fields).
    [[nodiscard]] double at_corner(const Mesh& mesh, int t, int c) const;

    [[nodiscard]] double min() const { return values_.minCoeff(); }
    [[nodiscard]] double max() const { return values_.maxCoeff(); }

private:
    Placement placement_ = Placement::vertex;
    Eigen::VectorXd values_;
};

/// Triangle-placed order map with 0 < alpha_min <= alpha_max < 1 and
/// alpha_max < 2 alpha_min.
class OrderField {
public:
    OrderField() = default;
    /// Vertex-placed input is averaged per triangle first.
    OrderField(const Mesh& mesh, const ScalarField& field);

    static OrderField constant(const Mesh& mesh, double alpha);
    static OrderField from_function(const Mesh& mesh, const std::function<double(Point, int)>& fn);

    [[nodiscard]] const ScalarField& field() const noexcept { return field_; }
    [[nodiscard]] double operator[](int triangle) const { return field_[triangle]; }
    [[nodiscard]] double alpha_min() const noexcept { return alpha_min_; }
    [[nodiscard]] double alpha_max() const noexcept { return alpha_max_; }
    [[nodiscard]] int triangle_count() const noexcept { return static_cast<int>(field_.size()); }

    /// p^alpha per triangle.
    [[nodiscard]] Eigen::VectorXd power_of(double p) const;
    /// Sorted distinct order values.
    [[nodiscard]] std::vector<double> distinct_values() const;

private:
    ScalarField field_;
    double alpha_min_ = 0.0;
    double alpha_max_ = 0.0;
};

/// Checks the order-field bounds; throws AssumptionViolation with a message
/// naming the violated bound.
void validate_order_bounds(double alpha_min, double alpha_max);

/// (tag, alpha) pairs, sorted so that alpha is strictly increasing.
class Partition {
public:
    struct Entry {
        int tag = 0;
        double alpha = 0.0;
    };

    Partition() = default;
    explicit Partition(std::vector<Entry> entries);

    [[nodiscard]] const std::vector<Entry>& entries() const noexcept { return entries_; }
    [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
    [[nodiscard]] double alpha_of(int tag) const;

private:
    std::vector<Entry> entries_;
};

OrderField build_partition_order(const Mesh& mesh, const Partition& partition);

/// g(t, x) = sum_k t^k phi_k(x) on the boundary.
class Excitation {
public:
    struct Term {
        int k = 2;
        BoundaryValues phi;
    };

    Excitation() = default;
    Excitation(const Mesh& mesh, std::vector<Term> terms);

    /// phi_k(x) = fn_k(x) for every listed (k, fn_k).
    static Excitation from_functions(const Mesh& mesh,
                                     const std::vector<std::pair<int, std::function<double(Point)>>>& terms);
    /// phi_k == c_k constants.
    static Excitation constant(const Mesh& mesh, const std::vector<std::pair<int, double>>& terms);

    [[nodiscard]] const std::vector<Term>& terms() const noexcept { return terms_; }
    [[nodiscard]] int leading_power() const noexcept { return leading_; }

    /// g(t, .) at the boundary vertices.
    [[nodiscard]] BoundaryValues at_time(double t) const;
    [[nodiscard]] Excitation scaled(double factor) const;

private:
    std::vector<Term> terms_;
    int leading_ = 0;
    std::size_t boundary_size_ = 0;
};

/// sigma, rho, q (vertex-placed) and the order field on a shared mesh.
struct CoefficientSet {
    MeshPtr mesh;
    ScalarField sigma;
    ScalarField rho;
    ScalarField q;
    OrderField alpha;

    /// Throws unless sigma, rho > 0, q >= 0 and every field matches the mesh.
    void validate() const;
    [[nodiscard]] CoefficientSet with_order(OrderField order) const;

    /// sigma = rho = 1, q = 0 with the given order.
    static CoefficientSet unit_medium(MeshPtr mesh, OrderField order);
};

}  // namespace varorder

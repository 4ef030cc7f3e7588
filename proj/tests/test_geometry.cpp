#include <cmath>
#include <filesystem>
#include <numbers>

#include <gtest/gtest.h>

#include <varorder/errors.hpp>
#include <varorder/geometry.hpp>

using namespace varorder;

TEST(DiskMesh, AreaAndBoundaryConvergeToUnitDisk)
{
    const Mesh m = build_disk_mesh_rings(16);
    EXPECT_NEAR(m.total_area(), M_PI, 0.01 * M_PI);
    EXPECT_EQ(m.loop_count(), 1);
    for (int v : m.boundary_vertices()) {
        const Point p = m.vertices()[static_cast<std::size_t>(v)];
        EXPECT_NEAR(std::hypot(p.x, p.y), 1.0, 1e-12);
    }
}

TEST(DiskMesh, IsNonObtuse)
{
    for (int rings : {2, 5, 20}) {
        const Mesh m = build_disk_mesh_rings(rings);
        EXPECT_LE(m.max_angle(), M_PI / 2 + 1e-9) << "rings=" << rings;
    }
}

TEST(DiskMesh, MeshSizeShrinksWithRings)
{
    const Mesh a = build_disk_mesh_rings(10);
    const Mesh b = build_disk_mesh_rings(20);
    EXPECT_LT(b.max_edge_length(), 0.6 * a.max_edge_length());
    EXPECT_LT(b.max_edge_length(), 0.07);
}

TEST(DiskMesh, LevelMapsToRings)
{
    EXPECT_EQ(build_disk_mesh(3).vertex_count(), build_disk_mesh_rings(8).vertex_count());
    EXPECT_EQ(build_disk_mesh(0).vertex_count(), build_disk_mesh_rings(2).vertex_count());
}

TEST(SquareMesh, CountsAndArea)
{
    const Mesh m = build_square_mesh(4);
    EXPECT_EQ(m.vertex_count(), 25);
    EXPECT_EQ(m.triangle_count(), 32);
    EXPECT_NEAR(m.total_area(), 1.0, 1e-14);
    EXPECT_EQ(m.boundary_vertex_count(), 16);
}

TEST(Mesh, RejectsDegenerateTriangle)
{
    std::vector<Point> v{{0, 0}, {1, 0}, {2, 0}};
    EXPECT_THROW(Mesh(v, {{0, 1, 2}}, {0}), InvalidInput);
}

TEST(MeshIo, RoundTripPreservesGeometryAndTags)
{
    const Mesh m = build_disk_mesh_rings(4).retagged([](Point c, int) { return c.x > 0 ? 3 : 1; });
    const auto stem = (std::filesystem::temp_directory_path() / "varorder_io_test").string();
    write_mesh(m, stem);
    const Mesh r = read_mesh(stem);
    ASSERT_EQ(r.vertex_count(), m.vertex_count());
    ASSERT_EQ(r.triangle_count(), m.triangle_count());
    EXPECT_EQ(r.tags(), m.tags());
    EXPECT_NEAR(r.total_area(), m.total_area(), 1e-12);
    std::filesystem::remove(stem + ".node");
    std::filesystem::remove(stem + ".ele");
}

TEST(BoundarySnap, PicksNearestBoundaryVertex)
{
    const Mesh m = build_disk_mesh_rings(8);
    const auto s = boundary_point_index(m, {1.0, 0.0});
    ASSERT_TRUE(m.is_boundary(s.vertex));
    // Rings are staggered, so (1, 0) need not be a vertex; the snap is the closest one.
    for (int v : m.boundary_vertices()) {
        const Point q = m.vertices()[static_cast<std::size_t>(v)];
        EXPECT_GE(std::hypot(q.x - 1.0, q.y), s.distance - 1e-15);
    }
    EXPECT_LT(s.distance, 0.5 * 2.0 * std::numbers::pi / m.boundary_vertex_count() + 1e-12);
}

TEST(OrderField, BoundsAreEnforced)
{
    const Mesh m = build_disk_mesh_rings(4).retagged([](Point c, int) { return c.x > 0 ? 1 : 0; });
    EXPECT_THROW(build_partition_order(m, Partition({{0, 0.4}, {1, 0.9}})), AssumptionViolation);
    EXPECT_THROW(OrderField::constant(m, 1.0), AssumptionViolation);
    EXPECT_THROW(OrderField::constant(m, 0.0), AssumptionViolation);
    EXPECT_NO_THROW(build_partition_order(m, Partition({{0, 0.4}, {1, 0.7}})));
}

TEST(OrderField, ViolationMessageNamesTheBound)
{
    try {
        validate_order_bounds(0.4, 0.9);
        FAIL() << "expected a violation";
    } catch (const AssumptionViolation& e) {
        EXPECT_NE(std::string(e.what()).find("2 * alpha_min"), std::string::npos);
    }
}

TEST(OrderField, DistinctValuesAndPowers)
{
    const Mesh m = build_disk_mesh_rings(4).retagged([](Point c, int) { return c.x > 0 ? 1 : 0; });
    const OrderField a = build_partition_order(m, Partition({{1, 0.7}, {0, 0.4}}));
    EXPECT_EQ(a.distinct_values(), (std::vector<double>{0.4, 0.7}));
    const Eigen::VectorXd pw = a.power_of(0.25);
    for (int t = 0; t < m.triangle_count(); ++t) {
        EXPECT_DOUBLE_EQ(pw[t], std::pow(0.25, a[t]));
    }
}

TEST(Partition, SortsByOrderAndRejectsDuplicates)
{
    const Partition p({{5, 0.6}, {2, 0.3}});
    EXPECT_EQ(p.entries().front().tag, 2);
    EXPECT_THROW(Partition({{1, 0.3}, {1, 0.5}}), InvalidInput);
    EXPECT_THROW(Partition({{1, 0.3}, {2, 0.3}}), InvalidInput);
}

TEST(Excitation, RequiresPowersAtLeastTwoAndNonzeroLeadingTerm)
{
    const Mesh m = build_disk_mesh_rings(4);
    EXPECT_THROW(Excitation::constant(m, {{1, 1.0}}), AssumptionViolation);
    EXPECT_THROW(Excitation::constant(m, {{2, 0.0}}), AssumptionViolation);
    const Excitation e = Excitation::constant(m, {{3, 2.0}, {2, 1.0}});
    // The largest power dominates as p -> 0.
    EXPECT_EQ(e.leading_power(), 3);
    const BoundaryValues g = e.at_time(2.0);
    EXPECT_DOUBLE_EQ(g.front(), 2.0 * 8.0 + 4.0);
}

TEST(CoefficientSet, ValidatesSigns)
{
    const auto m = std::make_shared<const Mesh>(build_disk_mesh_rings(4));
    CoefficientSet c = CoefficientSet::unit_medium(m, OrderField::constant(*m, 0.5));
    EXPECT_NO_THROW(c.validate());
    c.q = ScalarField::constant(*m, Placement::vertex, -1.0);
    EXPECT_THROW(c.validate(), InvalidInput);
}

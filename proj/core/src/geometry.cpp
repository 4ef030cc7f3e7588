#include "varorder/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>
#include <unordered_map>

#include <Eigen/SparseCholesky>

#include "varorder/errors.hpp"

namespace varorder {

struct Mesh::BoundaryMassFactor {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
};

namespace {

double signed_area(Point a, Point b, Point c)
{
    return 0.5 * ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x));
}

std::uint64_t edge_key(int a, int b)
{
    const auto lo = static_cast<std::uint64_t>(std::min(a, b));
    const auto hi = static_cast<std::uint64_t>(std::max(a, b));
    return (hi << 32U) | lo;
}

}  // namespace

Mesh::Mesh(std::vector<Point> vertices, std::vector<Triangle> triangles, std::vector<int> tags)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)), tags_(std::move(tags))
{
    const auto nv = static_cast<int>(vertices_.size());
    if (triangles_.empty()) {
        throw InvalidInput("mesh: no triangles");
    }
    if (tags_.size() != triangles_.size()) {
        throw InvalidInput("mesh: one subdomain tag per triangle is required");
    }

    double scale = 0.0;
    for (const auto& v : vertices_) {
        scale = std::max({scale, std::abs(v.x), std::abs(v.y)});
    }
    const double area_floor = 1e-14 * std::max(scale * scale, 1e-300);

    areas_.resize(triangles_.size());
    for (std::size_t t = 0; t < triangles_.size(); ++t) {
        auto& tri = triangles_[t];
        for (int v : tri) {
            if (v < 0 || v >= nv) {
                throw InvalidInput("mesh: triangle " + std::to_string(t) + " references vertex " +
                                   std::to_string(v) + " out of range");
            }
        }
        if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2]) {
            throw InvalidInput("mesh: triangle " + std::to_string(t) + " repeats a vertex");
        }
        double a = signed_area(vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]);
        if (a < 0.0) {
            std::swap(tri[1], tri[2]);
            a = -a;
        }
        if (a <= area_floor) {
            throw InvalidInput("mesh: triangle " + std::to_string(t) + " is degenerate");
        }
        areas_[t] = a;
        total_area_ += a;
        tag_area_[tags_[t]] += a;
    }
    for (const auto& [tag, area] : tag_area_) {
        distinct_tags_.push_back(tag);
    }

    // Edge -> (use count, directed copy from the owning triangle).
    struct EdgeUse {
        int count = 0;
        int from = 0;
        int to = 0;
    };
    std::unordered_map<std::uint64_t, EdgeUse> edges;
    edges.reserve(triangles_.size() * 3);
    max_edge_ = 0.0;
    min_edge_ = std::numeric_limits<double>::infinity();
    for (const auto& tri : triangles_) {
        for (int c = 0; c < 3; ++c) {
            const int a = tri[c];
            const int b = tri[(c + 1) % 3];
            auto& use = edges[edge_key(a, b)];
            if (use.count == 0) {
                const double len = distance(vertices_[a], vertices_[b]);
                max_edge_ = std::max(max_edge_, len);
                min_edge_ = std::min(min_edge_, len);
            }
            ++use.count;
            use.from = a;
            use.to = b;
        }
    }

    std::unordered_map<int, int> next;
    for (const auto& [key, use] : edges) {
        if (use.count > 2) {
            throw InvalidInput("mesh: edge shared by more than two triangles");
        }
        if (use.count == 1) {
            if (!next.emplace(use.from, use.to).second) {
                throw InvalidInput("mesh: boundary vertex " + std::to_string(use.from) +
                                   " starts two boundary edges");
            }
        }
    }
    if (next.empty()) {
        throw InvalidInput("mesh: no boundary edges");
    }

    // Walk loops, starting each loop from its lowest unvisited vertex.
    std::vector<int> starts;
    starts.reserve(next.size());
    for (const auto& [from, to] : next) {
        starts.push_back(from);
    }
    std::sort(starts.begin(), starts.end());
    boundary_slot_.assign(static_cast<std::size_t>(nv), -1);
    std::set<int> visited;
    for (int start : starts) {
        if (visited.contains(start)) {
            continue;
        }
        int cur = start;
        do {
            if (!visited.insert(cur).second) {
                throw InvalidInput("mesh: boundary loops intersect");
            }
            const auto it = next.find(cur);
            if (it == next.end()) {
                throw InvalidInput("mesh: boundary chain is not closed");
            }
            const int nxt = it->second;
            const Point pa = vertices_[cur];
            const Point pb = vertices_[nxt];
            const double len = distance(pa, pb);
            BoundaryEdge e;
            e.a = cur;
            e.b = nxt;
            e.length = len;
            e.normal = {(pb.y - pa.y) / len, -(pb.x - pa.x) / len};
            boundary_slot_[static_cast<std::size_t>(cur)] = static_cast<int>(boundary_vertices_.size());
            boundary_vertices_.push_back(cur);
            boundary_edges_.push_back(e);
            cur = nxt;
        } while (cur != start);
        ++loop_count_;
    }
    if (visited.size() != next.size()) {
        throw InvalidInput("mesh: boundary chain is not closed");
    }

    // Consistent P1 mass matrix on the boundary loops.
    const auto nb = static_cast<Eigen::Index>(boundary_vertices_.size());
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(boundary_edges_.size() * 4);
    for (const auto& e : boundary_edges_) {
        const int i = boundary_slot_[static_cast<std::size_t>(e.a)];
        const int j = boundary_slot_[static_cast<std::size_t>(e.b)];
        trip.emplace_back(i, i, e.length / 3.0);
        trip.emplace_back(j, j, e.length / 3.0);
        trip.emplace_back(i, j, e.length / 6.0);
        trip.emplace_back(j, i, e.length / 6.0);
    }
    Eigen::SparseMatrix<double> mb(nb, nb);
    mb.setFromTriplets(trip.begin(), trip.end());
    auto factor = std::make_shared<BoundaryMassFactor>();
    factor->ldlt.compute(mb);
    if (factor->ldlt.info() != Eigen::Success) {
        throw SolverError("mesh: boundary mass matrix is singular");
    }
    boundary_mass_ = std::move(factor);
}

Point Mesh::centroid(int triangle) const
{
    const auto& t = triangles_[static_cast<std::size_t>(triangle)];
    const Point a = vertices_[t[0]];
    const Point b = vertices_[t[1]];
    const Point c = vertices_[t[2]];
    return {(a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0};
}

std::array<Point, 3> Mesh::hat_gradients(int triangle) const
{
    const auto& t = triangles_[static_cast<std::size_t>(triangle)];
    const double twice_area = 2.0 * areas_[static_cast<std::size_t>(triangle)];
    std::array<Point, 3> g{};
    for (int c = 0; c < 3; ++c) {
        const Point pj = vertices_[t[(c + 1) % 3]];
        const Point pk = vertices_[t[(c + 2) % 3]];
        g[c] = {(pj.y - pk.y) / twice_area, (pk.x - pj.x) / twice_area};
    }
    return g;
}

double Mesh::tag_area(int tag) const
{
    const auto it = tag_area_.find(tag);
    return it == tag_area_.end() ? 0.0 : it->second;
}

double Mesh::max_angle() const
{
    double worst = 0.0;
    for (const auto& t : triangles_) {
        for (int c = 0; c < 3; ++c) {
            const Point p = vertices_[t[c]];
            const Point u = vertices_[t[(c + 1) % 3]];
            const Point w = vertices_[t[(c + 2) % 3]];
            const double ux = u.x - p.x;
            const double uy = u.y - p.y;
            const double wx = w.x - p.x;
            const double wy = w.y - p.y;
            const double cosang = (ux * wx + uy * wy) / (std::hypot(ux, uy) * std::hypot(wx, wy));
            worst = std::max(worst, std::acos(std::clamp(cosang, -1.0, 1.0)));
        }
    }
    return worst;
}

Eigen::VectorXd Mesh::solve_boundary_mass(const Eigen::VectorXd& rhs) const
{
    if (rhs.size() != boundary_vertex_count()) {
        throw InvalidInput("boundary mass solve: length mismatch");
    }
    return boundary_mass_->ldlt.solve(rhs);
}

double Mesh::boundary_integral(std::span<const double> values) const
{
    if (static_cast<int>(values.size()) != boundary_vertex_count()) {
        throw InvalidInput("boundary integral: length mismatch");
    }
    double sum = 0.0;
    for (const auto& e : boundary_edges_) {
        sum += 0.5 * e.length *
               (values[static_cast<std::size_t>(boundary_slot(e.a))] +
                values[static_cast<std::size_t>(boundary_slot(e.b))]);
    }
    return sum;
}

Mesh Mesh::retagged(const std::function<int(Point, int)>& tagger) const
{
    std::vector<int> tags(triangles_.size());
    for (int t = 0; t < triangle_count(); ++t) {
        tags[static_cast<std::size_t>(t)] = tagger(centroid(t), tags_[static_cast<std::size_t>(t)]);
    }
    return {vertices_, triangles_, std::move(tags)};
}

Mesh build_disk_mesh_rings(int rings)
{
    if (rings < 1) {
        throw InvalidInput("disk mesh: at least one ring is required");
    }
    constexpr double two_pi = 2.0 * std::numbers::pi;
    constexpr double max_spacing = 1.3;
    const double h = 1.0 / rings;

    // Vertex counts are planned from the boundary inwards: the outer ring gets
    // tangential spacing close to h, and a ring halves its count (going inwards)
    // only while the halved spacing stays below 1.3 h. The rings next to the
    // boundary therefore share one count and are merely staggered, which keeps
    // every boundary vertex in the same local configuration.
    const double target = two_pi * rings;
    int outer = 12;
    double best = std::numeric_limits<double>::infinity();
    for (int base = 6; base <= 11; ++base) {
        for (long n = base; n <= 4 * static_cast<long>(target) + 12; n *= 2) {
            if (const double miss = std::abs(static_cast<double>(n) - target); miss < best) {
                best = miss;
                outer = static_cast<int>(n);
            }
        }
    }
    if (rings == 1) {
        outer = 12;
    }
    std::vector<int> counts(static_cast<std::size_t>(rings));
    counts.back() = outer;
    for (int k = rings - 1; k >= 1; --k) {
        const int n = counts[static_cast<std::size_t>(k)];
        const double r = static_cast<double>(k) * h;
        const bool halve = n % 2 == 0 && n >= 12 && two_pi * r / (n / 2) <= max_spacing * h;
        counts[static_cast<std::size_t>(k - 1)] = halve ? n / 2 : n;
    }

    std::vector<Point> pts{{0.0, 0.0}};
    std::vector<std::vector<int>> ring_ids;
    double offset = 0.0;
    for (int k = 1; k <= rings; ++k) {
        const double r = static_cast<double>(k) * h;
        const int count = counts[static_cast<std::size_t>(k - 1)];
        if (k > 1 && count == counts[static_cast<std::size_t>(k - 2)]) {
            offset += std::numbers::pi / count;  // stagger by half a step
        }
        std::vector<int> ids;
        ids.reserve(static_cast<std::size_t>(count));
        for (int i = 0; i < count; ++i) {
            const double th = offset + two_pi * i / count;
            ids.push_back(static_cast<int>(pts.size()));
            pts.push_back({r * std::cos(th), r * std::sin(th)});
        }
        ring_ids.push_back(std::move(ids));
    }

    std::vector<Triangle> tris;
    const auto& first = ring_ids.front();
    const auto n1 = static_cast<int>(first.size());
    for (int i = 0; i < n1; ++i) {
        tris.push_back({0, first[i], first[(i + 1) % n1]});
    }
    for (std::size_t k = 1; k < ring_ids.size(); ++k) {
        const auto& a = ring_ids[k - 1];
        const auto& b = ring_ids[k];
        const auto na = static_cast<int>(a.size());
        const auto nb = static_cast<int>(b.size());
        if (nb == 2 * na) {
            for (int i = 0; i < na; ++i) {
                const int i1 = (i + 1) % na;
                tris.push_back({a[i], b[2 * i], b[2 * i + 1]});
                tris.push_back({a[i], b[2 * i + 1], a[i1]});
                tris.push_back({a[i1], b[2 * i + 1], b[(2 * i + 2) % nb]});
            }
        } else {
            for (int i = 0; i < na; ++i) {
                const int i1 = (i + 1) % na;
                tris.push_back({a[i], b[i], a[i1]});
                tris.push_back({a[i1], b[i], b[(i + 1) % nb]});
            }
        }
    }
    std::vector<int> tags(tris.size(), 0);
    return {std::move(pts), std::move(tris), std::move(tags)};
}

Mesh build_disk_mesh(int refinement_level)
{
    if (refinement_level < 0) {
        throw InvalidInput("disk mesh: refinement level must be >= 0");
    }
    if (refinement_level > 12) {
        throw InvalidInput("disk mesh: refinement level too large");
    }
    return build_disk_mesh_rings(std::max(2, 1 << refinement_level));
}

Mesh build_square_mesh(int n)
{
    if (n < 1) {
        throw InvalidInput("square mesh: n must be >= 1");
    }
    std::vector<Point> pts;
    pts.reserve(static_cast<std::size_t>((n + 1) * (n + 1)));
    for (int j = 0; j <= n; ++j) {
        for (int i = 0; i <= n; ++i) {
            pts.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n});
        }
    }
    auto id = [n](int i, int j) { return i + (n + 1) * j; };
    std::vector<Triangle> tris;
    tris.reserve(static_cast<std::size_t>(2 * n * n));
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            tris.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            tris.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    }
    std::vector<int> tags(tris.size(), 0);
    return {std::move(pts), std::move(tris), std::move(tags)};
}

BoundarySnap boundary_point_index(const Mesh& mesh, Point x0)
{
    BoundarySnap best;
    best.distance = std::numeric_limits<double>::infinity();
    for (int v : mesh.boundary_vertices()) {
        const double d = distance(mesh.vertices()[static_cast<std::size_t>(v)], x0);
        if (d < best.distance || (d == best.distance && v < best.vertex)) {
            best.vertex = v;
            best.distance = d;
        }
    }
    if (best.vertex < 0) {
        throw InvalidInput("boundary_point_index: mesh has no boundary vertices");
    }
    return best;
}

// ---------------------------------------------------------------------------
// Fields

ScalarField::ScalarField(Placement placement, Eigen::VectorXd values)
    : placement_(placement), values_(std::move(values))
{
}

ScalarField ScalarField::constant(const Mesh& mesh, Placement placement, double value)
{
    const int n = placement == Placement::vertex ? mesh.vertex_count() : mesh.triangle_count();
    return {placement, Eigen::VectorXd::Constant(n, value)};
}

ScalarField ScalarField::on_vertices(const Mesh& mesh, const std::function<double(Point)>& fn)
{
    Eigen::VectorXd v(mesh.vertex_count());
    for (int i = 0; i < mesh.vertex_count(); ++i) {
        v[i] = fn(mesh.vertices()[static_cast<std::size_t>(i)]);
    }
    return {Placement::vertex, std::move(v)};
}

ScalarField ScalarField::on_triangles(const Mesh& mesh, const std::function<double(Point, int)>& fn)
{
    Eigen::VectorXd v(mesh.triangle_count());
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        v[t] = fn(mesh.centroid(t), mesh.tags()[static_cast<std::size_t>(t)]);
    }
    return {Placement::triangle, std::move(v)};
}

void ScalarField::check_against(const Mesh& mesh, const char* what) const
{
    const int expected = placement_ == Placement::vertex ? mesh.vertex_count() : mesh.triangle_count();
    if (values_.size() != expected) {
        std::ostringstream os;
        os << what << ": field has " << values_.size() << " values, mesh expects " << expected;
        throw InvalidInput(os.str());
    }
}

Eigen::VectorXd ScalarField::per_triangle(const Mesh& mesh) const
{
    check_against(mesh, "per_triangle");
    if (placement_ == Placement::triangle) {
        return values_;
    }
    Eigen::VectorXd out(mesh.triangle_count());
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tri = mesh.triangles()[static_cast<std::size_t>(t)];
        out[t] = (values_[tri[0]] + values_[tri[1]] + values_[tri[2]]) / 3.0;
    }
    return out;
}

double ScalarField::at_corner(const Mesh& mesh, int t, int c) const
{
    if (placement_ == Placement::triangle) {
        return values_[t];
    }
    return values_[mesh.triangles()[static_cast<std::size_t>(t)][static_cast<std::size_t>(c)]];
}

void validate_order_bounds(double alpha_min, double alpha_max)
{
    if (!(alpha_min > 0.0) || !(alpha_max < 1.0)) {
        std::ostringstream os;
        os << "order bounds violated: order values must lie in (0,1), got range [" << alpha_min << ", "
           << alpha_max << "]";
        throw AssumptionViolation(os.str());
    }
    if (!(alpha_max < 2.0 * alpha_min)) {
        std::ostringstream os;
        os << "order bounds violated: alpha_max = " << alpha_max << " must be < 2 * alpha_min = "
           << 2.0 * alpha_min;
        throw AssumptionViolation(os.str());
    }
}

OrderField::OrderField(const Mesh& mesh, const ScalarField& field)
    : field_(Placement::triangle, field.per_triangle(mesh))
{
    alpha_min_ = field_.min();
    alpha_max_ = field_.max();
    validate_order_bounds(alpha_min_, alpha_max_);
}

OrderField OrderField::constant(const Mesh& mesh, double alpha)
{
    return {mesh, ScalarField::constant(mesh, Placement::triangle, alpha)};
}

OrderField OrderField::from_function(const Mesh& mesh, const std::function<double(Point, int)>& fn)
{
    return {mesh, ScalarField::on_triangles(mesh, fn)};
}

Eigen::VectorXd OrderField::power_of(double p) const
{
    if (p == 0.0) {
        return Eigen::VectorXd::Zero(field_.size());
    }
    const double logp = std::log(p);
    return (field_.values().array() * logp).exp().matrix();
}

std::vector<double> OrderField::distinct_values() const
{
    std::vector<double> v(field_.values().data(), field_.values().data() + field_.size());
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

Partition::Partition(std::vector<Entry> entries) : entries_(std::move(entries))
{
    if (entries_.empty()) {
        throw InvalidInput("partition: at least one subdomain is required");
    }
    std::sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) { return a.alpha < b.alpha; });
    std::set<int> seen;
    for (std::size_t j = 0; j < entries_.size(); ++j) {
        if (!seen.insert(entries_[j].tag).second) {
            throw InvalidInput("partition: tag " + std::to_string(entries_[j].tag) + " listed twice");
        }
        if (j > 0 && !(entries_[j].alpha > entries_[j - 1].alpha)) {
            throw InvalidInput("partition: order values must be strictly increasing; merge subdomains with equal order");
        }
    }
}

double Partition::alpha_of(int tag) const
{
    for (const auto& e : entries_) {
        if (e.tag == tag) {
            return e.alpha;
        }
    }
    throw InvalidInput("partition: tag " + std::to_string(tag) + " not present");
}

OrderField build_partition_order(const Mesh& mesh, const Partition& partition)
{
    for (const auto& e : partition.entries()) {
        if (!(mesh.tag_area(e.tag) > 0.0)) {
            throw InvalidInput("partition: tag " + std::to_string(e.tag) + " covers no area of the mesh");
        }
    }
    Eigen::VectorXd v(mesh.triangle_count());
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        v[t] = partition.alpha_of(mesh.tags()[static_cast<std::size_t>(t)]);
    }
    return {mesh, ScalarField(Placement::triangle, std::move(v))};
}

// ---------------------------------------------------------------------------
// Excitation

Excitation::Excitation(const Mesh& mesh, std::vector<Term> terms)
    : terms_(std::move(terms)), boundary_size_(static_cast<std::size_t>(mesh.boundary_vertex_count()))
{
    if (terms_.empty()) {
        throw AssumptionViolation("excitation requirements violated: excitation needs at least one term");
    }
    std::sort(terms_.begin(), terms_.end(), [](const Term& a, const Term& b) { return a.k < b.k; });
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        if (terms_[i].k < 2) {
            throw AssumptionViolation("excitation requirements violated: powers k must be >= 2");
        }
        if (i > 0 && terms_[i].k == terms_[i - 1].k) {
            throw InvalidInput("excitation: power k=" + std::to_string(terms_[i].k) + " listed twice");
        }
        if (terms_[i].phi.size() != boundary_size_) {
            throw InvalidInput("excitation: phi_k must have one value per boundary vertex");
        }
    }
    leading_ = terms_.back().k;
    const auto& lead = terms_.back().phi;
    if (std::all_of(lead.begin(), lead.end(), [](double x) { return x == 0.0; })) {
        throw AssumptionViolation("excitation requirements violated: leading term phi_M vanishes identically");
    }
}

Excitation Excitation::from_functions(const Mesh& mesh,
                                      const std::vector<std::pair<int, std::function<double(Point)>>>& terms)
{
    std::vector<Term> out;
    for (const auto& [k, fn] : terms) {
        Term term;
        term.k = k;
        for (int v : mesh.boundary_vertices()) {
            term.phi.push_back(fn(mesh.vertices()[static_cast<std::size_t>(v)]));
        }
        out.push_back(std::move(term));
    }
    return {mesh, std::move(out)};
}

Excitation Excitation::constant(const Mesh& mesh, const std::vector<std::pair<int, double>>& terms)
{
    std::vector<Term> out;
    for (const auto& [k, c] : terms) {
        out.push_back({k, BoundaryValues(static_cast<std::size_t>(mesh.boundary_vertex_count()), c)});
    }
    return {mesh, std::move(out)};
}

BoundaryValues Excitation::at_time(double t) const
{
    BoundaryValues g(boundary_size_, 0.0);
    for (const auto& term : terms_) {
        const double tk = std::pow(t, term.k);
        for (std::size_t i = 0; i < boundary_size_; ++i) {
            g[i] += tk * term.phi[i];
        }
    }
    return g;
}

Excitation Excitation::scaled(double factor) const
{
    Excitation out = *this;
    for (auto& term : out.terms_) {
        for (double& v : term.phi) {
            v *= factor;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

void CoefficientSet::validate() const
{
    if (!mesh) {
        throw InvalidInput("coefficient set: mesh is missing");
    }
    sigma.check_against(*mesh, "sigma");
    rho.check_against(*mesh, "rho");
    q.check_against(*mesh, "q");
    if (alpha.triangle_count() != mesh->triangle_count()) {
        throw InvalidInput("coefficient set: order field does not match the mesh");
    }
    if (!(sigma.min() > 0.0)) {
        throw InvalidInput("coefficient set: sigma must be positive");
    }
    if (!(rho.min() > 0.0)) {
        throw InvalidInput("coefficient set: rho must be positive");
    }
    if (q.min() < 0.0) {
        throw InvalidInput("coefficient set: q must be nonnegative");
    }
}

CoefficientSet CoefficientSet::with_order(OrderField order) const
{
    CoefficientSet out = *this;
    out.alpha = std::move(order);
    return out;
}

CoefficientSet CoefficientSet::unit_medium(MeshPtr mesh, OrderField order)
{
    CoefficientSet cfg;
    cfg.sigma = ScalarField::constant(*mesh, Placement::vertex, 1.0);
    cfg.rho = ScalarField::constant(*mesh, Placement::vertex, 1.0);
    cfg.q = ScalarField::constant(*mesh, Placement::vertex, 0.0);
    cfg.alpha = std::move(order);
    cfg.mesh = std::move(mesh);
    return cfg;
}

}  // namespace varorder

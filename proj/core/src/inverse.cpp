#include "varorder/inverse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "varorder/csv.hpp"
#include "varorder/errors.hpp"
#include "varorder/parallel.hpp"

namespace varorder {

namespace {

double factorial(int k)
{
    return std::tgamma(static_cast<double>(k) + 1.0);
}

void require_boundary_vertex(const Mesh& m, int x0)
{
    if (x0 < 0 || x0 >= m.vertex_count() || !m.is_boundary(x0)) {
        throw InvalidInput("x0 must be a boundary vertex");
    }
}

// u_{M,0}: the q-harmonic extension of M! phi_M.
Eigen::VectorXd leading_lift(const CoefficientSet& cfg, const Excitation& excitation, const AssembledSystem& a0)
{
    const auto& lead = excitation.terms().back();
    Eigen::VectorXd g = to_vector(lead.phi) * factorial(lead.k);
    return a0.solve(Eigen::VectorXd::Zero(cfg.mesh->vertex_count()), g);
}

AssembledSystem operator_at_zero(const CoefficientSet& cfg)
{
    return {cfg.mesh, cfg.sigma, lumped_mass(*cfg.mesh, cfg.q)};
}

AssembledSystem operator_at_one(const CoefficientSet& cfg)
{
    return {cfg.mesh, cfg.sigma, lumped_mass(*cfg.mesh, cfg.q) + lumped_mass(*cfg.mesh, cfg.rho)};
}

Eigen::VectorXd background_at_one(const CoefficientSet& cfg, const Excitation& excitation, const AssembledSystem& a1)
{
    return a1.solve(Eigen::VectorXd::Zero(cfg.mesh->vertex_count()), to_vector(ghat(excitation, 1.0)));
}

Eigen::VectorXd indicator(const Mesh& m, const std::vector<int>& tags)
{
    Eigen::VectorXd chi = Eigen::VectorXd::Zero(m.triangle_count());
    for (int t = 0; t < m.triangle_count(); ++t) {
        if (std::find(tags.begin(), tags.end(), m.tags()[static_cast<std::size_t>(t)]) != tags.end()) {
            chi[t] = 1.0;
        }
    }
    return chi;
}

}  // namespace

double baseline_flux(const CoefficientSet& cfg, const Excitation& excitation, int x0)
{
    cfg.validate();
    require_boundary_vertex(*cfg.mesh, x0);
    const AssembledSystem a0 = operator_at_zero(cfg);
    const Eigen::VectorXd u = leading_lift(cfg, excitation, a0);
    const int slot = cfg.mesh->boundary_slot(x0);
    return a0.flux(u, Eigen::VectorXd::Zero(cfg.mesh->vertex_count()))[slot] / boundary_sigma(cfg)[slot];
}

double hopf_probe_mask(const CoefficientSet& cfg, const Excitation& excitation, const std::vector<bool>& in_set, int x0)
{
    cfg.validate();
    const Mesh& m = *cfg.mesh;
    require_boundary_vertex(m, x0);
    if (static_cast<int>(in_set.size()) != m.triangle_count()) {
        throw InvalidInput("hopf_probe: one flag per triangle is required");
    }
    Eigen::VectorXd chi(m.triangle_count());
    for (int t = 0; t < m.triangle_count(); ++t) {
        chi[t] = in_set[static_cast<std::size_t>(t)] ? 1.0 : 0.0;
    }
    if (chi.sum() == 0.0) {
        return 0.0;
    }
    const AssembledSystem a0 = operator_at_zero(cfg);
    const Eigen::VectorXd u = leading_lift(cfg, excitation, a0);
    const Eigen::VectorXd load = lumped_mass(m, cfg.rho, chi).cwiseProduct(u);
    const Eigen::VectorXd z = a0.solve(load);
    const int slot = m.boundary_slot(x0);
    return a0.flux(z, load)[slot] / boundary_sigma(cfg)[slot];
}

double hopf_probe(const CoefficientSet& cfg, const Excitation& excitation, const std::vector<int>& subset_tags, int x0)
{
    const Mesh& m = *cfg.mesh;
    for (int tag : subset_tags) {
        if (!(m.tag_area(tag) > 0.0)) {
            throw InvalidInput("hopf_probe: tag " + std::to_string(tag) + " is not present in the mesh");
        }
    }
    std::vector<bool> in_set(static_cast<std::size_t>(m.triangle_count()));
    for (int t = 0; t < m.triangle_count(); ++t) {
        in_set[static_cast<std::size_t>(t)] =
            std::find(subset_tags.begin(), subset_tags.end(), m.tags()[static_cast<std::size_t>(t)]) !=
            subset_tags.end();
    }
    return hopf_probe_mask(cfg, excitation, in_set, x0);
}

Eigen::MatrixXd linearized_columns(const Partition& partition, const CoefficientSet& cfg, const Excitation& excitation)
{
    cfg.validate();
    const Mesh& m = *cfg.mesh;
    const AssembledSystem a1 = operator_at_one(cfg);
    const Eigen::VectorXd v = background_at_one(cfg, excitation, a1);
    const Eigen::VectorXd sigma_b = boundary_sigma(cfg);
    const auto& entries = partition.entries();
    const auto cols = parallel_map<Eigen::VectorXd>(entries.size(), [&](std::size_t j) {
        const Eigen::VectorXd chi = indicator(m, {entries[j].tag});
        const Eigen::VectorXd load = lumped_mass(m, cfg.rho, chi).cwiseProduct(v);
        const Eigen::VectorXd vt = a1.solve(load);
        return Eigen::VectorXd(a1.flux(vt, load).cwiseQuotient(sigma_b));
    });
    Eigen::MatrixXd c(m.boundary_vertex_count(), static_cast<Eigen::Index>(entries.size()));
    for (std::size_t j = 0; j < entries.size(); ++j) {
        c.col(static_cast<Eigen::Index>(j)) = cols[j];
    }
    return c;
}

RecoveryResult linearized_recovery(const WeightedData& d_diff, const Partition& partition, const CoefficientSet& cfg,
                                   const Excitation& excitation, std::optional<double> tikhonov, bool nonnegative)
{
    const Eigen::MatrixXd c = linearized_columns(partition, cfg, excitation);
    if (d_diff.D.size() != c.rows()) {
        throw InvalidInput("linearized_recovery: data must have one value per boundary vertex");
    }
    const auto n = c.cols();
    RecoveryResult out;
    for (const auto& e : partition.entries()) {
        out.tags.push_back(e.tag);
    }
    const double colmax = c.colwise().norm().maxCoeff();
    out.tikhonov = tikhonov.value_or(1e-10 * colmax * colmax);
    if (out.tikhonov < 0.0) {
        throw InvalidInput("linearized_recovery: tikhonov weight must be nonnegative");
    }

    const Eigen::JacobiSVD<Eigen::MatrixXd> svd_c(c);
    const auto& sv = svd_c.singularValues();
    out.condition = sv[n - 1] > 0.0 ? sv[0] / sv[n - 1] : std::numeric_limits<double>::infinity();
    out.rank_deficient = !(sv[n - 1] > 1e-12 * sv[0]);

    // Augmented system [C; sqrt(lambda) I] x = [d; 0]; SVD gives the minimum-norm solution if singular.
    Eigen::MatrixXd aug(c.rows() + n, n);
    aug << c, std::sqrt(out.tikhonov) * Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(c.rows() + n);
    rhs.head(c.rows()) = d_diff.D;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(aug, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-14);
    Eigen::VectorXd x = svd.solve(rhs);

    if (nonnegative && x.minCoeff() < 0.0) {
        // Projected gradient on 0.5 ||C x - d||^2 + 0.5 lambda ||x||^2 over x >= 0.
        const Eigen::MatrixXd h = c.transpose() * c + out.tikhonov * Eigen::MatrixXd::Identity(n, n);
        const Eigen::VectorXd ctd = c.transpose() * d_diff.D;
        const double lipschitz = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(h).eigenvalues().maxCoeff();
        x = x.cwiseMax(0.0);
        for (out.iterations = 1; out.iterations <= 20000; ++out.iterations) {
            const Eigen::VectorXd next = (x - (h * x - ctd) / lipschitz).cwiseMax(0.0);
            const double step = (next - x).norm();
            x = next;
            if (step <= 1e-15 * std::max(1.0, x.norm())) {
                break;
            }
        }
    }
    out.dalpha = x;
    out.residual_norm = (c * x - d_diff.D).norm();
    return out;
}

bool StabilityReport::defined() const
{
    return std::isfinite(ratio);
}

StabilityReport stability_report(const OrderField& alpha1, const OrderField& alpha2, const CoefficientSet& cfg,
                                 const Excitation& excitation)
{
    const Mesh& m = *cfg.mesh;
    StabilityReport rep;
    const Eigen::VectorXd diff = alpha1.field().values() - alpha2.field().values();
    for (int t = 0; t < m.triangle_count(); ++t) {
        rep.l1_dalpha += m.area(t) * std::abs(diff[t]);
        if (diff[t] < 0.0) {
            rep.monotone = false;
        }
    }
    const WeightedData d1 = weighted_data(cfg.with_order(alpha1), excitation);
    const WeightedData d2 = weighted_data(cfg.with_order(alpha2), excitation);
    const Eigen::VectorXd gap = (d1.D - d2.D).cwiseAbs();
    rep.boundary_functional = m.boundary_integral(std::span<const double>(gap.data(), static_cast<std::size_t>(gap.size())));
    rep.ratio = rep.boundary_functional > 0.0 ? rep.l1_dalpha / rep.boundary_functional
                                              : std::numeric_limits<double>::quiet_NaN();

    const BoundaryValues g1 = ghat(excitation, 1.0);
    const auto [lo, hi] = std::minmax_element(g1.begin(), g1.end());
    rep.ghat_sign_change = (*lo) * (*hi) <= 0.0;
    rep.ghat_min_abs = std::numeric_limits<double>::infinity();
    for (double g : g1) {
        rep.ghat_min_abs = std::min(rep.ghat_min_abs, std::abs(g));
    }
    return rep;
}

ReciprocityResult reciprocity_check(const OrderField& alpha1, const OrderField& alpha2, const CoefficientSet& cfg,
                                    const Excitation& excitation)
{
    cfg.validate();
    const Mesh& m = *cfg.mesh;
    const AssembledSystem a1 = operator_at_one(cfg);
    const Eigen::VectorXd v = background_at_one(cfg, excitation, a1);
    const Eigen::VectorXd dalpha = alpha1.field().values() - alpha2.field().values();
    const Eigen::VectorXd weight = lumped_mass(m, cfg.rho, dalpha);

    const Eigen::VectorXd load = weight.cwiseProduct(v);
    const Eigen::VectorXd vt = a1.solve(load);
    const Eigen::VectorXd flux = a1.flux(vt, load);
    const Eigen::VectorXd w =
        a1.solve(Eigen::VectorXd::Zero(m.vertex_count()), Eigen::VectorXd::Ones(m.boundary_vertex_count()));

    ReciprocityResult out;
    out.volume_term = weight.dot(v.cwiseProduct(w));
    out.boundary_term = m.boundary_integral(std::span<const double>(flux.data(), static_cast<std::size_t>(flux.size())));
    const double scale = std::abs(out.volume_term) + std::abs(out.boundary_term);
    out.residual = scale > 0.0 ? std::abs(out.volume_term + out.boundary_term) / scale : 0.0;
    return out;
}

Eigen::MatrixXd distinguishability_experiment(const std::vector<OrderField>& orders, const CoefficientSet& cfg,
                                              const Excitation& excitation, int x0, const std::vector<double>& p_grid)
{
    require_boundary_vertex(*cfg.mesh, x0);
    const int slot = cfg.mesh->boundary_slot(x0);
    const std::size_t n = orders.size();
    const std::size_t np = p_grid.size();
    // One task per (order, p); each value is p^{M+1} F(p).
    const auto vals = parallel_map<double>(n * np, [&](std::size_t i) {
        const CoefficientSet c = cfg.with_order(orders[i / np]);
        return boundary_flux(c, excitation, p_grid[i % np], true)[slot];
    });
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            double worst = 0.0;
            for (std::size_t k = 0; k < np; ++k) {
                worst = std::max(worst, std::abs(vals[a * np + k] - vals[b * np + k]));
            }
            d(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = worst;
            d(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = worst;
        }
    }
    return d;
}

bool predicted_distinguishable(const OrderField& a, const OrderField& b)
{
    if (a.triangle_count() != b.triangle_count()) {
        throw InvalidInput("predicted_distinguishable: order maps live on different meshes");
    }
    if (a.alpha_min() != b.alpha_min()) {
        return true;
    }
    const Eigen::VectorXd d = a.field().values() - b.field().values();
    const bool ge = d.minCoeff() >= 0.0;
    const bool le = d.maxCoeff() <= 0.0;
    return (ge || le) && d.cwiseAbs().maxCoeff() > 0.0;
}

std::vector<OrderField> figure1_orders(const Mesh& disk)
{
    auto radius = [](Point c) { return std::hypot(c.x, c.y); };
    std::vector<OrderField> out;
    out.push_back(OrderField::from_function(disk, [&](Point c, int) { return radius(c) < 0.6 ? 0.7 : 0.5; }));
    out.push_back(OrderField::from_function(
        disk, [&](Point c, int) { return 0.5 + 0.2 * std::max(0.0, 1.0 - radius(c) / 0.6); }));
    out.push_back(OrderField::from_function(disk, [&](Point c, int) { return radius(c) < 0.3 ? 0.6 : 0.45; }));
    out.push_back(OrderField::from_function(disk, [&](Point c, int) {
        if (c.x < 0.0) {
            return 0.4;
        }
        return radius(c) < 0.5 ? 0.75 : 0.6;
    }));
    return out;
}

void write_recovery_csv(const RecoveryResult& result, const std::string& path)
{
    CsvWriter csv(path, {"tag", "dalpha"});
    for (std::size_t j = 0; j < result.tags.size(); ++j) {
        csv.row({std::to_string(result.tags[j]), format_number(result.dalpha[static_cast<Eigen::Index>(j)])});
    }
}

void write_stability_csv(const std::vector<StabilityReport>& reports, const std::string& path)
{
    CsvWriter csv(path, {"l1_dalpha", "boundary_functional", "ratio"});
    for (const auto& r : reports) {
        csv.row({r.l1_dalpha, r.boundary_functional, r.ratio});
    }
}

void write_matrix_csv(const Eigen::MatrixXd& m, const std::vector<std::string>& labels, const std::string& path)
{
    std::vector<std::string> header{"order"};
    header.insert(header.end(), labels.begin(), labels.end());
    CsvWriter csv(path, header);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        std::vector<std::string> row{labels[static_cast<std::size_t>(i)]};
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            row.push_back(format_number(m(i, j)));
        }
        csv.row(row);
    }
}

}  // namespace varorder

#include "commands.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>

#include <varorder/asymptotics.hpp>
#include <varorder/csv.hpp>
#include <varorder/elliptic.hpp>
#include <varorder/exponent_fit.hpp>
#include <varorder/forward.hpp>
#include <varorder/inverse.hpp>
#include <varorder/timedomain.hpp>

#include "acceptance.hpp"

namespace varorder::cli {

using nlohmann::json;

namespace {

std::string path_in(const std::filesystem::path& dir, const std::string& name) { return (dir / name).string(); }

std::vector<double> grid_param(const json& params, const char* key, std::vector<double> fallback)
{
    if (!params.contains(key)) {
        return fallback;
    }
    const json& g = params.at(key);
    std::vector<std::string> errors;
    std::vector<double> out;
    if (g.contains("values")) {
        for (const auto& v : g.at("values")) {
            out.push_back(v.get<double>());
        }
    } else if (g.contains("from") && g.contains("to") && g.contains("points")) {
        out = log_grid(g.at("from").get<double>(), g.at("to").get<double>(), g.at("points").get<int>());
    } else {
        throw ConfigError({std::string(key) + ": expected {values} or {from, to, points}"});
    }
    return out;
}

template <class T>
T param(const json& params, const char* key, T fallback)
{
    if (!params.contains(key)) {
        return fallback;
    }
    try {
        return params.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError({std::string(key) + ": " + e.what()});
    }
}

OrderField required_order(const ExperimentConfig& c, const json& params, const std::string& command, const char* key)
{
    if (!params.contains(key)) {
        throw ConfigError({command + "." + key + ": required"});
    }
    std::vector<std::string> errors;
    auto order = parse_order(params.at(key), *c.mesh, command + "." + key, c.base_dir, errors);
    if (!order) {
        throw ConfigError(errors);
    }
    return *order;
}

int cmd_forward(const ExperimentConfig& c, const std::filesystem::path& out, std::ostream& log)
{
    const json p = c.params("forward");
    const auto mode = param<std::string>(p, "mode", "direct");
    if (mode != "direct" && mode != "representation") {
        throw ConfigError({"forward.mode: expected direct or representation"});
    }
    const Provenance prov = mode == "direct" ? Provenance::direct : Provenance::representation;
    for (int x0 : c.observation) {
        const FluxCurve curve = flux_curve(c.cfg, c.excitation, x0, c.p_grid, prov);
        const std::string name =
            c.observation.size() == 1 ? "flux_curve.csv" : "flux_curve_v" + std::to_string(x0) + ".csv";
        write_flux_curve_csv(curve, path_in(out, name));
        log << "flux curve at vertex " << x0 << ": " << curve.p.size() << " frequencies -> " << name << '\n';
    }
    if (param<bool>(p, "weighted_data", true)) {
        const WeightedData wd = weighted_data(c.cfg, c.excitation);
        write_weighted_data_csv(*c.mesh, wd, path_in(out, "weighted_data.csv"));
        log << "weighted data on " << wd.D.size() << " boundary vertices -> weighted_data.csv\n";
    }
    return kSuccess;
}

int cmd_asympt(const ExperimentConfig& c, const std::filesystem::path& out, std::ostream& log)
{
    const json p = c.params("asympt");
    const auto depths = param<std::vector<int>>(p, "depths", {1, 2, 3});
    const auto zero_grid = grid_param(p, "zero_grid", log_grid(1e-6, 1e-2, 24));
    const auto delta_grid = grid_param(p, "delta_grid", log_grid(1e-3, 0.3, 12));
    const int x0 = c.observation.front();
    const double amin = c.cfg.alpha.alpha_min();
    log << "p0 = " << select_p0(c.cfg, c.seed) << " (inverse-norm estimate " << estimate_inverse_norm(c.cfg, 20, c.seed)
        << ")\n";
    int deepest = 1;
    for (int N : depths) {
        if (N < 1) {
            throw ConfigError({"asympt.depths: entries must be >= 1"});
        }
        deepest = std::max(deepest, N);
        const RemainderProbe z = remainder_probe_zero(c.cfg, c.excitation, x0, N, zero_grid);
        write_remainder_csv(z, path_in(out, "remainder_zero_N" + std::to_string(N) + ".csv"));
        const RemainderProbe o = remainder_probe_one(c.cfg, c.excitation, x0, N, delta_grid);
        write_remainder_csv(o, path_in(out, "remainder_one_N" + std::to_string(N) + ".csv"));
        log << "N=" << N << ": slope p->0 " << z.slope << " (N alpha_min = " << N * amin << "), slope p->1 " << o.slope
            << " (N = " << N << ")\n";
    }
    std::vector<ExpansionCascade> cascades;
    for (double pz : zero_grid) {
        cascades.push_back(cascade_zero(c.cfg, c.excitation, pz, deepest, x0));
    }
    write_cascade_csv(cascades, path_in(out, "cascade.csv"));
    return kSuccess;
}

int cmd_invert_exponents(const ExperimentConfig& c, const std::filesystem::path& out, std::ostream& log)
{
    const json p = c.params("invert-exponents");
    const bool known = param<bool>(p, "known_baseline", true);
    const int max_terms = param<int>(p, "max_terms", 3);
    const double gap = param<double>(p, "gap", 0.05);
    const double noise = param<double>(p, "noise", 0.0);
    const auto grid = grid_param(p, "p_grid", log_grid(1e-12, 1e-4, 30));
    const int x0 = c.observation.front();

    FluxCurve curve = flux_curve(c.cfg, c.excitation, x0, grid);
    if (noise > 0.0) {
        std::mt19937_64 rng(c.seed);
        std::normal_distribution<double> n(0.0, 1.0);
        for (double& f : curve.F) {
            f *= 1.0 + noise * n(rng);
        }
    }
    std::optional<double> b;
    if (known) {
        b = baseline_flux(c.cfg, c.excitation, x0);
    }
    const ExponentModel model = recover_exponents(curve, b, max_terms, gap);
    write_exponents_csv(model, path_in(out, "exponents.csv"));
    log << "M = " << model.M << ", baseline " << model.baseline << (model.baseline_known ? " (known)" : " (fitted)")
        << ", relative residual " << model.residual << '\n';
    for (const auto& t : model.terms) {
        log << "  alpha = " << t.alpha << "  c = " << t.c << (t.primary ? "  primary" : "  cross term")
            << (t.merged ? " (merged)" : "") << '\n';
    }
    if (model.stagnated) {
        log << "  residual stagnated before the tolerance; model is partial\n";
    }
    if (known) {
        for (int tag : c.mesh->distinct_tags()) {
            log << "  probe for tag " << tag << ": " << hopf_probe(c.cfg, c.excitation, {tag}, x0) << '\n';
        }
    }
    return kSuccess;
}

int cmd_invert_linearized(const ExperimentConfig& c, const std::filesystem::path& out, std::ostream& log)
{
    const json p = c.params("invert-linearized");
    if (!p.contains("partition") || !p.at("partition").is_array()) {
        throw ConfigError({"invert-linearized.partition: required array of {tag, alpha} (the perturbed order)"});
    }
    std::vector<Partition::Entry> entries;
    for (const auto& e : p.at("partition")) {
        entries.push_back({e.at("tag").get<int>(), e.at("alpha").get<double>()});
    }
    const Partition part(entries);
    const OrderField alpha1 = build_partition_order(*c.mesh, part);
    const double noise = param<double>(p, "noise", 0.0);
    std::optional<double> tikhonov;
    if (p.contains("tikhonov")) {
        tikhonov = p.at("tikhonov").get<double>();
    }
    const bool nonneg = param<bool>(p, "nonnegative", false);

    const WeightedData d1 = weighted_data(c.cfg.with_order(alpha1), c.excitation);
    const WeightedData d2 = weighted_data(c.cfg, c.excitation);
    Eigen::VectorXd diff = d1.D - d2.D;
    if (noise > 0.0) {
        std::mt19937_64 rng(c.seed);
        std::normal_distribution<double> n(0.0, 1.0);
        const double scale = diff.cwiseAbs().maxCoeff();
        for (Eigen::Index i = 0; i < diff.size(); ++i) {
            diff[i] += noise * scale * n(rng);
        }
    }
    const RecoveryResult rec = linearized_recovery(WeightedData{diff}, part, c.cfg, c.excitation, tikhonov, nonneg);
    write_recovery_csv(rec, path_in(out, "recovery.csv"));
    log << "condition " << rec.condition << ", residual " << rec.residual_norm << ", tikhonov " << rec.tikhonov << '\n';
    if (rec.rank_deficient) {
        log << "warning: the columns are numerically dependent, so the data cannot separate these subdomains"
               " (rotationally symmetric data with a radial split is the usual cause)\n";
    }
    for (std::size_t j = 0; j < rec.tags.size(); ++j) {
        // The background order is averaged over the tag so non-constant backgrounds still report something sensible.
        double area = 0.0;
        double mean = 0.0;
        for (int t = 0; t < c.mesh->triangle_count(); ++t) {
            if (c.mesh->tags()[static_cast<std::size_t>(t)] == rec.tags[j]) {
                area += c.mesh->area(t);
                mean += c.mesh->area(t) * (alpha1[t] - c.cfg.alpha[t]);
            }
        }
        log << "  tag " << rec.tags[j] << ": dalpha " << rec.dalpha[static_cast<Eigen::Index>(j)] << " (true "
            << mean / area << ")\n";
    }
    return kSuccess;
}

int cmd_stability(const ExperimentConfig& c, const std::filesystem::path& out, std::ostream& log)
{
    const json p = c.params("stability");
    const OrderField a1 = required_order(c, p, "stability", "alpha1");
    const OrderField a2 = p.contains("alpha2") ? required_order(c, p, "stability", "alpha2") : c.cfg.alpha;
    const StabilityReport rep = stability_report(a1, a2, c.cfg, c.excitation);
    write_stability_csv({rep}, path_in(out, "stability.csv"));
    log << "L1(dalpha) " << rep.l1_dalpha << ", boundary functional " << rep.boundary_functional << ", ratio "
        << rep.ratio << (rep.monotone ? "" : " (orders not monotone)")
        << (rep.ghat_sign_change ? " (boundary data changes sign)" : "") << '\n';
    return kSuccess;
}

int cmd_crosscheck(const ExperimentConfig& c, const std::filesystem::path& out, std::ostream& log)
{
    const json p = c.params("crosscheck");
    const double tau = param<double>(p, "tau", 1e-3);
    const double T = param<double>(p, "T", 40.0);
    const int stride = param<int>(p, "stride", 100);
    const FluxSeries series = l1_step_solve(c.cfg, c.excitation, tau, T, c.observation);
    write_flux_series_csv(series, path_in(out, "flux_series.csv"), stride);
    const TimeIntegral lt = laplace_transform(series, 1.0);
    const TimeIntegral wt = weighted_time_integral(series);
    const Eigen::VectorXd f1 = boundary_flux(c.cfg, c.excitation, 1.0);
    const WeightedData wd = weighted_data(c.cfg, c.excitation);
    CsvWriter csv(path_in(out, "crosscheck.csv"),
                  {"vertex", "laplace_time", "laplace_freq", "weighted_time", "weighted_freq", "tail"});
    for (std::size_t i = 0; i < series.vertices.size(); ++i) {
        const int slot = c.mesh->boundary_slot(series.vertices[i]);
        const auto k = static_cast<Eigen::Index>(i);
        csv.row({static_cast<double>(series.vertices[i]), lt.value[k], f1[slot], wt.value[k], wd.D[slot], wt.tail[k]});
        log << "vertex " << series.vertices[i] << ": F(1) rel diff " << lt.value[k] / f1[slot] - 1.0
            << ", D rel diff " << wt.value[k] / wd.D[slot] - 1.0 << '\n';
    }
    return kSuccess;
}

int cmd_figure1(const ExperimentConfig& c, const std::filesystem::path& out, std::ostream& log)
{
    const std::vector<OrderField> orders = figure1_orders(*c.mesh);
    const Eigen::MatrixXd d =
        distinguishability_experiment(orders, c.cfg.with_order(orders.front()), c.excitation, c.observation.front(), c.p_grid);
    const std::vector<std::string> labels = {"alpha1", "alpha2", "alpha3", "alpha4"};
    write_matrix_csv(d, labels, path_in(out, "figure1_distances.csv"));
    const double threshold = 10.0 * SolverOptions{}.cg_tolerance;
    for (std::size_t i = 0; i < orders.size(); ++i) {
        for (std::size_t j = i + 1; j < orders.size(); ++j) {
            const double v = d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            log << labels[i] << " vs " << labels[j] << ": " << v
                << (predicted_distinguishable(orders[i], orders[j]) ? " predicted distinguishable" : "")
                << (v > threshold ? "" : " (below threshold)") << '\n';
        }
    }
    return kSuccess;
}

int cmd_verify(const ExperimentConfig& c, const std::filesystem::path& out, std::ostream& log)
{
    const json p = c.params("verify");
    acceptance::Options o;
    o.seed = c.seed;
    o.disk_rings = param<int>(p, "rings", 20);
    o.out_dir = out.string();
    const auto ids = param<std::vector<int>>(p, "criteria", {});
    bool all = true;
    for (int id : ids) {
        if (id < 1 || id > acceptance::kCriterionCount) {
            throw ConfigError({"verify.criteria: ids must be in 1.." + std::to_string(acceptance::kCriterionCount)});
        }
    }
    std::vector<int> list = ids;
    if (list.empty()) {
        for (int i = 1; i <= acceptance::kCriterionCount; ++i) {
            list.push_back(i);
        }
    }
    for (int id : list) {
        const acceptance::Result r = acceptance::run(id, o);
        log << acceptance::format(r) << std::endl;
        all = all && r.pass;
    }
    return all ? kSuccess : kAcceptance;
}

}  // namespace

const std::vector<std::string>& command_names()
{
    static const std::vector<std::string> names = {"forward",   "asympt",     "invert-exponents", "invert-linearized",
                                                   "stability", "crosscheck", "figure1",          "verify"};
    return names;
}

int run_command(const std::string& command, const ExperimentConfig& config, const std::filesystem::path& out_dir,
                std::ostream& log)
{
    std::filesystem::create_directories(out_dir);
    log << std::setprecision(6);
    if (command == "forward") {
        return cmd_forward(config, out_dir, log);
    }
    if (command == "asympt") {
        return cmd_asympt(config, out_dir, log);
    }
    if (command == "invert-exponents") {
        return cmd_invert_exponents(config, out_dir, log);
    }
    if (command == "invert-linearized") {
        return cmd_invert_linearized(config, out_dir, log);
    }
    if (command == "stability") {
        return cmd_stability(config, out_dir, log);
    }
    if (command == "crosscheck") {
        return cmd_crosscheck(config, out_dir, log);
    }
    if (command == "figure1") {
        return cmd_figure1(config, out_dir, log);
    }
    if (command == "verify") {
        return cmd_verify(config, out_dir, log);
    }
    throw ConfigError({"command: unknown command '" + command + "'"});
}

}  // namespace varorder::cli

#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <varorder/errors.hpp>
#include <varorder/forward.hpp>

namespace varorder::cli {

using nlohmann::json;

namespace {

std::string join(const std::vector<std::string>& lines)
{
    std::string out = "invalid configuration:";
    for (const auto& l : lines) {
        out += "\n  " + l;
    }
    return out;
}

double radius(Point c) { return std::hypot(c.x, c.y); }

bool is_number(const json& j) { return j.is_number(); }

std::optional<double> number_at(const json& j, const char* key, const std::string& field,
                                std::vector<std::string>& errors)
{
    if (!j.contains(key)) {
        errors.push_back(field + "." + key + ": required");
        return std::nullopt;
    }
    if (!j.at(key).is_number()) {
        errors.push_back(field + "." + key + ": must be a number");
        return std::nullopt;
    }
    return j.at(key).get<double>();
}

std::optional<int> int_at(const json& j, const char* key, const std::string& field, std::vector<std::string>& errors)
{
    if (!j.contains(key)) {
        errors.push_back(field + "." + key + ": required");
        return std::nullopt;
    }
    if (!j.at(key).is_number_integer()) {
        errors.push_back(field + "." + key + ": must be an integer");
        return std::nullopt;
    }
    return j.at(key).get<int>();
}

MeshPtr parse_domain(const json& j, const std::filesystem::path& base, std::vector<std::string>& errors)
{
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
        errors.emplace_back("domain.kind: required, one of disk, square, mesh");
        return nullptr;
    }
    const auto kind = j.at("kind").get<std::string>();
    try {
        if (kind == "disk") {
            if (j.contains("rings")) {
                const auto r = int_at(j, "rings", "domain", errors);
                if (r && (*r < 1 || *r > 400)) {
                    errors.emplace_back("domain.rings: must be in [1, 400]");
                    return nullptr;
                }
                return r ? std::make_shared<const Mesh>(build_disk_mesh_rings(*r)) : nullptr;
            }
            const auto level = int_at(j, "level", "domain", errors);
            return level ? std::make_shared<const Mesh>(build_disk_mesh(*level)) : nullptr;
        }
        if (kind == "square") {
            const auto n = int_at(j, "n", "domain", errors);
            return n ? std::make_shared<const Mesh>(build_square_mesh(*n)) : nullptr;
        }
        if (kind == "mesh") {
            if (!j.contains("path") || !j.at("path").is_string()) {
                errors.emplace_back("domain.path: required string (mesh file stem)");
                return nullptr;
            }
            std::filesystem::path p = j.at("path").get<std::string>();
            if (p.is_relative()) {
                p = base / p;
            }
            return std::make_shared<const Mesh>(read_mesh(p.string()));
        }
    } catch (const std::exception& e) {
        errors.push_back(std::string("domain: ") + e.what());
        return nullptr;
    }
    errors.push_back("domain.kind: unknown kind '" + kind + "'");
    return nullptr;
}

MeshPtr apply_tags(const MeshPtr& mesh, const json& j, std::vector<std::string>& errors)
{
    if (j.contains("radial")) {
        const json& r = j.at("radial");
        if (!r.is_array() || r.empty()) {
            errors.emplace_back("tags.radial: must be a nonempty array of radii");
            return mesh;
        }
        std::vector<double> splits;
        for (const auto& v : r) {
            if (!v.is_number()) {
                errors.emplace_back("tags.radial: entries must be numbers");
                return mesh;
            }
            splits.push_back(v.get<double>());
        }
        // Tag 0 is the outermost band, so tag increases towards the centre.
        return std::make_shared<const Mesh>(mesh->retagged([splits](Point c, int) {
            int tag = 0;
            for (double s : splits) {
                tag += radius(c) < s ? 1 : 0;
            }
            return tag;
        }));
    }
    if (j.contains("sectors")) {
        if (!j.at("sectors").is_number_integer() || j.at("sectors").get<int>() < 1) {
            errors.emplace_back("tags.sectors: must be a positive integer");
            return mesh;
        }
        const int n = j.at("sectors").get<int>();
        return std::make_shared<const Mesh>(mesh->retagged([n](Point c, int) {
            double theta = std::atan2(c.y, c.x);
            if (theta < 0.0) {
                theta += 2.0 * M_PI;
            }
            return std::min(n - 1, static_cast<int>(theta / (2.0 * M_PI / n)));
        }));
    }
    errors.emplace_back("tags: expected 'radial' or 'sectors'");
    return mesh;
}

std::optional<ScalarField> parse_scalar(const json& spec, const Mesh& mesh, const std::string& field,
                                        std::vector<std::string>& errors)
{
    if (is_number(spec)) {
        return ScalarField::constant(mesh, Placement::vertex, spec.get<double>());
    }
    if (spec.is_object() && spec.contains("constant")) {
        if (auto c = number_at(spec, "constant", field, errors)) {
            return ScalarField::constant(mesh, Placement::vertex, *c);
        }
        return std::nullopt;
    }
    if (spec.is_object() && spec.contains("radial")) {
        const json& c = spec.at("radial");
        if (!c.is_array() || c.empty() || c.size() > 3 || !std::all_of(c.begin(), c.end(), is_number)) {
            errors.push_back(field + ".radial: expected [c0], [c0, c1] or [c0, c1, c2]");
            return std::nullopt;
        }
        std::vector<double> k;
        for (const auto& v : c) {
            k.push_back(v.get<double>());
        }
        k.resize(3, 0.0);
        return ScalarField::on_vertices(mesh, [k](Point x) {
            const double r = radius(x);
            return k[0] + k[1] * r + k[2] * r * r;
        });
    }
    if (spec.is_object() && spec.contains("per_tag")) {
        const json& t = spec.at("per_tag");
        if (!t.is_object()) {
            errors.push_back(field + ".per_tag: expected an object mapping tag to value");
            return std::nullopt;
        }
        std::map<int, double> table;
        for (const auto& [key, value] : t.items()) {
            try {
                if (!value.is_number()) {
                    throw std::invalid_argument("value");
                }
                table[std::stoi(key)] = value.get<double>();
            } catch (const std::exception&) {
                errors.push_back(field + ".per_tag." + key + ": expected integer tag and numeric value");
                return std::nullopt;
            }
        }
        for (int tag : mesh.distinct_tags()) {
            if (!table.contains(tag)) {
                errors.push_back(field + ".per_tag: no value for mesh tag " + std::to_string(tag));
                return std::nullopt;
            }
        }
        return ScalarField::on_triangles(mesh, [table](Point, int tag) { return table.at(tag); });
    }
    errors.push_back(field + ": expected a number or an object with constant, radial or per_tag");
    return std::nullopt;
}

std::optional<BoundaryValues> parse_phi(const json& spec, const Mesh& mesh, const std::string& field,
                                        std::vector<std::string>& errors)
{
    double c = 0.0;
    std::vector<std::pair<double, double>> modes;
    if (is_number(spec)) {
        c = spec.get<double>();
    } else if (spec.is_object()) {
        if (spec.contains("constant")) {
            const auto v = number_at(spec, "constant", field, errors);
            if (!v) {
                return std::nullopt;
            }
            c = *v;
        }
        if (spec.contains("cos")) {
            for (const auto& m : spec.at("cos")) {
                if (!m.is_array() || m.size() != 2 || !m[0].is_number() || !m[1].is_number()) {
                    errors.push_back(field + ".cos: entries must be [m, amplitude]");
                    return std::nullopt;
                }
                modes.emplace_back(m[0].get<double>(), m[1].get<double>());
            }
        }
    } else {
        errors.push_back(field + ": expected a number or {constant, cos}");
        return std::nullopt;
    }
    BoundaryValues out;
    for (int v : mesh.boundary_vertices()) {
        const Point x = mesh.vertices()[static_cast<std::size_t>(v)];
        const double theta = std::atan2(x.y, x.x);
        double s = c;
        for (const auto& [m, a] : modes) {
            s += a * std::cos(m * theta);
        }
        out.push_back(s);
    }
    return out;
}

std::vector<double> parse_grid(const json& j, const std::string& field, std::vector<std::string>& errors)
{
    if (j.contains("values")) {
        std::vector<double> v;
        for (const auto& x : j.at("values")) {
            if (!x.is_number() || !(x.get<double>() > 0.0)) {
                errors.push_back(field + ".values: entries must be positive numbers");
                return {};
            }
            v.push_back(x.get<double>());
        }
        if (v.empty() || !std::is_sorted(v.begin(), v.end()) ||
            std::adjacent_find(v.begin(), v.end()) != v.end()) {
            errors.push_back(field + ".values: must be nonempty and strictly increasing");
            return {};
        }
        return v;
    }
    const auto a = number_at(j, "from", field, errors);
    const auto b = number_at(j, "to", field, errors);
    const auto n = int_at(j, "points", field, errors);
    if (!a || !b || !n) {
        return {};
    }
    if (!(*a > 0.0) || !(*b > *a) || *n < 2) {
        errors.push_back(field + ": need 0 < from < to and points >= 2");
        return {};
    }
    return log_grid(*a, *b, *n);
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errors) : std::runtime_error(join(errors)), errors_(std::move(errors))
{
}

json ExperimentConfig::params(const std::string& command) const
{
    if (raw.contains(command) && raw.at(command).is_object()) {
        return raw.at(command);
    }
    return json::object();
}

json default_config()
{
    return json{{"schema", kSchema},
                {"domain", {{"kind", "disk"}, {"rings", 20}}},
                {"coefficients", {{"sigma", 1.0}, {"rho", 1.0}, {"q", 0.0}}},
                {"order", 0.5},
                {"excitation", json::array({{{"k", 2}, {"phi", 1.0}}})},
                {"observation", json::array({json::array({1.0, 0.0})})},
                {"p_grid", {{"from", 1e-8}, {"to", 1.0}, {"points", 17}}},
                {"seed", 42}};
}

std::optional<OrderField> parse_order(const json& spec, const Mesh& mesh, const std::string& field,
                                      const std::filesystem::path& base_dir, std::vector<std::string>& errors)
{
    try {
        if (is_number(spec)) {
            return OrderField::constant(mesh, spec.get<double>());
        }
        if (spec.is_object() && spec.contains("constant")) {
            const auto a = number_at(spec, "constant", field, errors);
            return a ? std::optional<OrderField>(OrderField::constant(mesh, *a)) : std::nullopt;
        }
        if (spec.is_object() && spec.contains("partition")) {
            std::vector<Partition::Entry> entries;
            for (const auto& e : spec.at("partition")) {
                const auto tag = int_at(e, "tag", field + ".partition[]", errors);
                const auto alpha = number_at(e, "alpha", field + ".partition[]", errors);
                if (!tag || !alpha) {
                    return std::nullopt;
                }
                entries.push_back({*tag, *alpha});
            }
            const Partition part(entries);
            for (int tag : mesh.distinct_tags()) {
                bool found = false;
                for (const auto& e : part.entries()) {
                    found = found || e.tag == tag;
                }
                if (!found) {
                    errors.push_back(field + ".partition: no order for mesh tag " + std::to_string(tag));
                    return std::nullopt;
                }
            }
            return build_partition_order(mesh, part);
        }
        if (spec.is_object() && spec.contains("nodal_file")) {
            std::filesystem::path p = spec.at("nodal_file").get<std::string>();
            if (p.is_relative()) {
                p = base_dir / p;
            }
            std::ifstream in(p);
            if (!in) {
                errors.push_back(field + ".nodal_file: cannot open " + p.string());
                return std::nullopt;
            }
            std::vector<double> values;
            std::string line;
            while (std::getline(in, line)) {
                line = line.substr(0, line.find('#'));
                std::istringstream ls(line);
                double v = 0.0;
                while (ls >> v) {
                    values.push_back(v);
                }
            }
            if (static_cast<int>(values.size()) != mesh.vertex_count()) {
                errors.push_back(field + ".nodal_file: expected " + std::to_string(mesh.vertex_count()) +
                                 " values, found " + std::to_string(values.size()));
                return std::nullopt;
            }
            return OrderField(mesh, ScalarField(Placement::vertex,
                                                Eigen::Map<const Eigen::VectorXd>(values.data(),
                                                                                  static_cast<Eigen::Index>(values.size()))));
        }
    } catch (const std::exception& e) {
        errors.push_back(field + ": " + e.what());
        return std::nullopt;
    }
    errors.push_back(field + ": expected a number or an object with constant, partition or nodal_file");
    return std::nullopt;
}

ExperimentConfig parse_config(const json& j, const std::filesystem::path& base_dir)
{
    std::vector<std::string> errors;
    if (!j.is_object()) {
        throw ConfigError({"<root>: expected a JSON object"});
    }
    if (!j.contains("schema") || !j.at("schema").is_string()) {
        errors.emplace_back(std::string("schema: required, use \"") + kSchema + "\"");
    } else if (j.at("schema").get<std::string>() != kSchema) {
        errors.push_back("schema: unsupported version '" + j.at("schema").get<std::string>() + "', expected " + kSchema);
    }

    ExperimentConfig out;
    out.raw = j;
    out.base_dir = base_dir;
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_integer() || j.at("seed").get<std::int64_t>() < 0) {
            errors.emplace_back("seed: must be a nonnegative integer");
        } else {
            out.seed = j.at("seed").get<std::uint64_t>();
        }
    }
    if (!j.contains("domain")) {
        errors.emplace_back("domain: required");
        throw ConfigError(errors);
    }
    MeshPtr mesh = parse_domain(j.at("domain"), base_dir, errors);
    if (!mesh) {
        throw ConfigError(errors);
    }
    if (j.contains("tags")) {
        mesh = apply_tags(mesh, j.at("tags"), errors);
    }
    out.mesh = mesh;

    const json coeffs = j.value("coefficients", json::object());
    auto field = [&](const char* name, double fallback) {
        const json spec = coeffs.contains(name) ? coeffs.at(name) : json(fallback);
        return parse_scalar(spec, *mesh, std::string("coefficients.") + name, errors);
    };
    const auto sigma = field("sigma", 1.0);
    const auto rho = field("rho", 1.0);
    const auto q = field("q", 0.0);
    std::optional<OrderField> order;
    if (!j.contains("order")) {
        errors.emplace_back("order: required");
    } else {
        order = parse_order(j.at("order"), *mesh, "order", base_dir, errors);
    }
    if (sigma && rho && q && order) {
        out.cfg = CoefficientSet{mesh, *sigma, *rho, *q, *order};
        try {
            out.cfg.validate();
        } catch (const std::exception& e) {
            errors.push_back(std::string("coefficients: ") + e.what());
        }
    }

    if (!j.contains("excitation") || !j.at("excitation").is_array() || j.at("excitation").empty()) {
        errors.emplace_back("excitation: required nonempty array of {k, phi}");
    } else {
        std::vector<Excitation::Term> terms;
        bool good = true;
        for (std::size_t i = 0; i < j.at("excitation").size(); ++i) {
            const json& t = j.at("excitation")[i];
            const std::string f = "excitation[" + std::to_string(i) + "]";
            const auto k = int_at(t, "k", f, errors);
            auto phi = t.contains("phi") ? parse_phi(t.at("phi"), *mesh, f + ".phi", errors) : std::nullopt;
            if (!t.contains("phi")) {
                errors.push_back(f + ".phi: required");
            }
            if (!k || !phi) {
                good = false;
                continue;
            }
            terms.push_back({*k, std::move(*phi)});
        }
        if (good) {
            try {
                out.excitation = Excitation(*mesh, std::move(terms));
            } catch (const std::exception& e) {
                errors.push_back(std::string("excitation: ") + e.what());
            }
        }
    }

    const json obs = j.value("observation", json::array({json::array({1.0, 0.0})}));
    if (!obs.is_array() || obs.empty()) {
        errors.emplace_back("observation: expected a nonempty array of [x, y] points");
    } else {
        for (const auto& pt : obs) {
            if (!pt.is_array() || pt.size() != 2 || !pt[0].is_number() || !pt[1].is_number()) {
                errors.emplace_back("observation: every point must be [x, y]");
                break;
            }
            const auto snap = boundary_point_index(*mesh, {pt[0].get<double>(), pt[1].get<double>()});
            out.observation.push_back(snap.vertex);
        }
    }

    if (j.contains("p_grid")) {
        out.p_grid = parse_grid(j.at("p_grid"), "p_grid", errors);
    } else {
        out.p_grid = log_grid(1e-8, 1.0, 17);
    }

    if (!errors.empty()) {
        throw ConfigError(errors);
    }
    return out;
}

ExperimentConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError({"config: cannot open " + path.string()});
    }
    json j;
    try {
        j = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError({std::string("config: ") + e.what()});
    }
    return parse_config(j, path.parent_path());
}

}  // namespace varorder::cli

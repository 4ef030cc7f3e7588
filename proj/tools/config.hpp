#pragma once

// JSON experiment configuration for the command-line runner.
//
//   {
//     "schema": "varorder-config/1",
//     "domain": {"kind": "disk", "rings": 20} | {"kind": "disk", "level": 4}
//             | {"kind": "square", "n": 16} | {"kind": "mesh", "path": "stem"},
//     "tags": {"radial": [0.5]} | {"sectors": 4},          (optional retagging)
//     "coefficients": {"sigma": S, "rho": S, "q": S},       (defaults 1, 1, 0)
//     "order": O,
//     "excitation": [{"k": 2, "phi": P}, ...],
//     "observation": [[1, 0], ...],
//     "p_grid": {"from": 1e-8, "to": 1, "points": 17} | {"values": [...]},
//     "<command>": {...}                                    (per-command parameters)
//   }
//
// S: number | {"constant": c} | {"radial": [c0, c1, c2]} (c0 + c1 r + c2 r^2)
//    | {"per_tag": {"0": c, ...}} (triangle placed)
// O: number | {"constant": a} | {"partition": [{"tag": 0, "alpha": 0.4}, ...]}
//    | {"nodal_file": "path"} (one value per vertex, '#' comments)
// P: number | {"constant": c, "cos": [[m, a_m], ...]} for c + sum a_m cos(m theta)

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include <varorder/geometry.hpp>

namespace varorder::cli {

inline constexpr const char* kSchema = "varorder-config/1";

/// Every problem found while reading a configuration, one "field: message" per entry.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> errors);
    [[nodiscard]] const std::vector<std::string>& errors() const noexcept { return errors_; }

private:
    std::vector<std::string> errors_;
};

struct ExperimentConfig {
    nlohmann::json raw;
    std::filesystem::path base_dir;
    MeshPtr mesh;
    CoefficientSet cfg;
    Excitation excitation;
    std::vector<int> observation;  ///< boundary vertex ids
    std::vector<double> p_grid;
    std::uint64_t seed = 42;

    /// The object stored under `command` (empty object when absent).
    [[nodiscard]] nlohmann::json params(const std::string& command) const;
};

/// The default disk scenario: 20 rings, unit medium, alpha = 0.5, g = t^2, x0 = (1, 0).
nlohmann::json default_config();

/// Validates and builds the configuration; throws ConfigError listing every problem.
ExperimentConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Order specification relative to an already built mesh; problems are appended to `errors`.
std::optional<OrderField> parse_order(const nlohmann::json& spec, const Mesh& mesh, const std::string& field,
                                      const std::filesystem::path& base_dir, std::vector<std::string>& errors);

}  // namespace varorder::cli

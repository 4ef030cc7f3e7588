#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "commands.hpp"
#include "config.hpp"

using namespace varorder::cli;
using nlohmann::json;

namespace {

std::filesystem::path scratch_dir(const std::string& name)
{
    auto dir = std::filesystem::temp_directory_path() / ("varorder_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

json small_config()
{
    json j = default_config();
    j["domain"]["rings"] = 6;
    j["p_grid"] = {{"from", 1e-6}, {"to", 1.0}, {"points", 7}};
    return j;
}

std::string joined_errors(const json& j)
{
    try {
        (void)parse_config(j);
    } catch (const ConfigError& e) {
        std::string all;
        for (const auto& s : e.errors()) {
            all += s + "\n";
        }
        return all;
    }
    return {};
}

}  // namespace

TEST(Config, DefaultParses)
{
    const ExperimentConfig c = parse_config(default_config());
    ASSERT_TRUE(c.mesh);
    EXPECT_EQ(c.observation.size(), 1U);
    EXPECT_EQ(c.p_grid.size(), 17U);
    EXPECT_EQ(c.seed, 42U);
}

TEST(Config, OrderBoundViolationIsReported)
{
    json j = small_config();
    j["tags"] = {{"radial", {0.5}}};
    j["order"] = {{"partition", {{{"tag", 0}, {"alpha", 0.9}}, {{"tag", 1}, {"alpha", 0.4}}}}};
    EXPECT_NE(joined_errors(j).find("order bounds"), std::string::npos) << joined_errors(j);
}

TEST(Config, SchemaIsRequired)
{
    json j = small_config();
    j.erase("schema");
    EXPECT_NE(joined_errors(j).find("schema"), std::string::npos);
    j["schema"] = "something-else/2";
    EXPECT_NE(joined_errors(j).find("schema"), std::string::npos);
}

TEST(Config, NegativeSeedRejected)
{
    json j = small_config();
    j["seed"] = -3;
    EXPECT_NE(joined_errors(j).find("seed"), std::string::npos);
}

TEST(Commands, Figure1WritesSymmetricMatrix)
{
    const auto dir = scratch_dir("figure1");
    std::ostringstream log;
    ASSERT_EQ(run_command("figure1", parse_config(small_config()), dir, log), kSuccess);
    std::ifstream in(dir / "figure1_distances.csv");
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line.rfind("order,", 0), 0U);
    int rows = 0;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) {
            cells.push_back(cell);
        }
        ASSERT_EQ(cells.size(), 5U);
        EXPECT_EQ(std::stod(cells[static_cast<std::size_t>(rows) + 1]), 0.0);
        ++rows;
    }
    EXPECT_EQ(rows, 4);
}

TEST(Commands, ForwardIsDeterministic)
{
    const auto a = scratch_dir("forward_a");
    const auto b = scratch_dir("forward_b");
    std::ostringstream log;
    const ExperimentConfig c = parse_config(small_config());
    ASSERT_EQ(run_command("forward", c, a, log), kSuccess);
    ASSERT_EQ(run_command("forward", c, b, log), kSuccess);
    for (const char* f : {"flux_curve.csv", "weighted_data.csv"}) {
        const std::string sa = slurp(a / f);
        EXPECT_FALSE(sa.empty()) << f;
        EXPECT_EQ(sa, slurp(b / f)) << f;
    }
}

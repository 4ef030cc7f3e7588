#pragma once

// The acceptance suite: one self-contained check per numbered criterion,
// shared by `varorder verify` and the acceptance test binary.

#include <cstdint>
#include <string>
#include <vector>

namespace varorder::acceptance {

struct Options {
    std::uint64_t seed = 42;
    /// Rings of the reference disk mesh (20 rings gives h close to 0.05).
    int disk_rings = 20;
    /// Artifacts (CSV) are written here when non-empty.
    std::string out_dir;
};

struct Result {
    int id = 0;
    std::string name;
    bool pass = false;
    double seconds = 0.0;
    double budget = 0.0;  ///< runtime budget in seconds (exceeding it fails the criterion)
    std::string detail;   ///< measured quantities, one "key=value" list
};

constexpr int kCriterionCount = 12;

/// Runs criterion `id` (1-based). Exceptions are caught and reported as FAIL.
Result run(int id, const Options& options);

/// Runs the listed criteria (all of them when empty) in order.
std::vector<Result> run_all(const Options& options, const std::vector<int>& ids = {});

/// "PASS  3  Neumann-series bound  (12.1 s / 60 s)  key=value ..."
std::string format(const Result& r);

}  // namespace varorder::acceptance

// Runs the acceptance suite and prints one PASS/FAIL line per criterion.
// Usage: acceptance [--rings N] [--seed S] [--out DIR] [--expect-fail ID]... [ID...]
// Exit status is 0 when every criterion not listed with --expect-fail passes.

#include <algorithm>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "acceptance.hpp"

int main(int argc, char** argv)
{
    namespace acc = varorder::acceptance;
    CLI::App app{"varorder acceptance suite"};
    acc::Options opts;
    std::vector<int> ids;
    std::vector<int> expected_failures;
    app.add_option("--rings", opts.disk_rings, "rings of the reference disk mesh");
    app.add_option("--seed", opts.seed, "random seed");
    app.add_option("--out", opts.out_dir, "directory for CSV artifacts");
    app.add_option("--expect-fail", expected_failures, "criteria known to fail; reported but not fatal");
    app.add_option("ids", ids, "criteria to run (all when omitted)")->check(CLI::Range(1, acc::kCriterionCount));
    CLI11_PARSE(app, argc, argv);

    int fatal = 0;
    for (const acc::Result& r : acc::run_all(opts, ids)) {
        std::cout << acc::format(r) << std::endl;
        const bool allowed = std::find(expected_failures.begin(), expected_failures.end(), r.id) != expected_failures.end();
        if (!r.pass && !allowed) {
            ++fatal;
        }
        if (!r.pass && allowed) {
            std::cout << "      criterion " << r.id << " failure is expected (see README)" << std::endl;
        }
    }
    return fatal == 0 ? 0 : 1;
}

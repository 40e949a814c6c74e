#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ufe/report.hpp"

namespace ufe::cli {

// One reproducibility case: an embedded dataset plus the values its analysis
// is expected to reproduce.
struct NumExpect {
    std::string field;
    double expected;
};

struct DecisionExpect {
    std::string test;  // test name, or "normality"/"sigma_homogeneity"/"sigma_common"
    bool reject;
};

struct ViolationExpect {
    std::string test;
    std::size_t sample, reference;       // 1-based
    std::vector<std::size_t> indices;    // 1-based; empty = must be clean
};

struct GoldenResult {
    std::string name;
    bool pass = false;
    std::vector<std::string> diffs;  // "field: expected E got G" lines
    AnalysisReport report;
};

const std::vector<std::string>& golden_names();
std::string golden_csv(const std::string& name);
RunConfig golden_config(const std::string& name);

// Number of embedded numeric expectations (the corruptible values).
std::size_t golden_numeric_count(const std::string& name);

// Runs the named case and compares every reported number against the
// embedded expected values at tolerance tol (absolute). corrupt_index, when
// in range, perturbs that embedded expected value by +0.01 first; the
// comparison must then fail, which is how the comparator checks itself.
GoldenResult run_golden(const std::string& name, double tol, int corrupt_index = -1);

// UFE_TOL environment override of the default 1e-3.
double golden_tolerance();

// Flat numeric view of a completed report, in a fixed documented order.
std::vector<std::pair<std::string, double>> flatten_numbers(const AnalysisReport& report);

}  // namespace ufe::cli

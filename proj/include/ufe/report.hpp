#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ufe/design_data.hpp"
#include "ufe/estimators.hpp"
#include "ufe/udist.hpp"
#include "ufe/uhtest.hpp"

namespace ufe::cli {

enum class Objective { None, Larger, Smaller };
enum class Format { Text, Json };

struct RunConfig {
    std::string input_path;
    design::DesignKind design = design::DesignKind::Single;
    bool interaction = false;
    double alpha = 0.05;
    Objective objective = Objective::None;
    Format format = Format::Text;
    std::string output_path;  // empty = stdout
};

struct DatasetSummary {
    std::string design;  // "single" | "two"
    std::vector<std::string> levels_a;
    std::vector<std::string> levels_b;                 // empty for single
    std::vector<std::vector<std::size_t>> replicates;  // [r][1] or [r][s]
    std::size_t total = 0;
    bool balanced = false;

    bool operator==(const DatasetSummary&) const = default;
};

struct CheckReport {
    std::size_t sample = 0;     // 1-based
    std::size_t reference = 0;  // 1-based
    udist::Interval ai;
    std::vector<std::size_t> violations;  // 1-based replicate indices
    int threshold = 1;

    bool operator==(const CheckReport&) const = default;
};

struct TestReport {
    std::string name;
    bool reject = false;
    std::vector<CheckReport> checks;
    std::vector<std::vector<udist::Interval>> ai_table;  // [reference][sample]

    bool operator==(const TestReport&) const = default;
};

struct GroupDiagnostic {
    std::string label;
    double sigma = 0.0;
    CheckReport check;  // own-AI normality check; violations = singular points
    bool reject = false;

    bool operator==(const GroupDiagnostic&) const = default;
};

struct DiagnosticsReport {
    std::vector<GroupDiagnostic> groups;
    std::optional<TestReport> homogeneity;
    std::optional<TestReport> common;
    std::optional<double> sigma0;

    bool operator==(const DiagnosticsReport&) const = default;
};

struct EstimateReport {
    double estimate = 0.0;
    double scale = 0.0;
    udist::Interval ci;

    double ci_half_width() const { return ci.half_width(); }
    bool operator==(const EstimateReport&) const = default;
};

struct FitReport {
    std::string model;  // "single" | "two-no-interaction" | "two-interaction"
    double sigma0 = 0.0;
    double alpha = 0.05;  // confidence level of the intervals below
    EstimateReport mu;
    std::vector<EstimateReport> a;
    std::vector<EstimateReport> b;
    std::vector<std::vector<EstimateReport>> ab;
    std::vector<double> q_row_abs_sums;              // matrix path only
    std::vector<double> level_means;                 // single factor
    std::vector<std::vector<double>> cell_expected;  // two factor

    bool operator==(const FitReport&) const = default;
};

struct Recommendation {
    std::string objective;  // "larger" | "smaller"
    std::size_t level_a = 0, level_b = 0;  // 1-based
    std::string label;                     // e.g. "A1B2"
    double expected = 0.0;

    bool operator==(const Recommendation&) const = default;
};

struct Provenance {
    std::string input_digest;  // fnv1a-64 of the input bytes, hex
    std::string config;        // canonical flag echo

    bool operator==(const Provenance&) const = default;
};

struct AnalysisReport {
    std::string status;        // "complete" | "halted"
    std::string failed_stage;  // stage name when halted
    std::string message;       // reason when halted
    DatasetSummary dataset;
    DiagnosticsReport diagnostics;
    std::optional<FitReport> fit;
    std::vector<TestReport> tests;
    std::optional<Recommendation> recommendation;
    Provenance provenance;

    bool operator==(const AnalysisReport&) const = default;
};

nlohmann::json to_json(const AnalysisReport& report);
AnalysisReport report_from_json(const nlohmann::json& j);
std::string to_text(const AnalysisReport& report);

struct RunOutcome {
    AnalysisReport report;
    int exit_code = 0;  // 0 complete, 2 validation halt (1 = input error, thrown)
};

// Full diagnostic -> estimation -> testing pipeline on an input stream.
// Parse/IO failures throw (the CLI maps them to exit 1); every later
// rejection or module error is reported in-band with exit code 2.
RunOutcome run_pipeline(std::istream& input, const RunConfig& config);

// Opens config.input_path and delegates to run_pipeline.
RunOutcome run_file(const RunConfig& config);

// Picks the best cell by modeled expected response (row-major first on ties).
Recommendation choose_recommendation(const FitReport& fit, Objective objective,
                                     const DatasetSummary& dataset);

}  // namespace ufe::cli

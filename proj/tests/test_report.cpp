#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <sstream>

#include <nlohmann/json.hpp>

#include "test_util.hpp"
#include "ufe/golden.hpp"
#include "ufe/report.hpp"

using namespace ufe;
using testutil::near_abs;

namespace {

cli::RunOutcome run_example(const char* name) {
    std::istringstream in(cli::golden_csv(name));
    return cli::run_pipeline(in, cli::golden_config(name));
}

const cli::TestReport& find_test(const cli::AnalysisReport& rep, const std::string& name) {
    for (const auto& t : rep.tests)
        if (t.name == name) return t;
    throw std::runtime_error("test not found: " + name);
}

}  // namespace

TEST_CASE("single-factor pipeline") {
    const auto out = run_example("example1");
    CHECK(out.exit_code == 0);
    const auto& rep = out.report;
    CHECK(rep.status == "complete");
    CHECK(rep.dataset.design == "single");
    CHECK(rep.dataset.total == 15);
    REQUIRE(rep.diagnostics.sigma0.has_value());
    CHECK(near_abs(*rep.diagnostics.sigma0, 1.165, 1e-3));
    REQUIRE(rep.fit.has_value());
    CHECK(near_abs(rep.fit->mu.estimate, 3.674, 1e-9));
    CHECK(rep.fit->level_means.size() == 3);
    CHECK(find_test(rep, "means_homogeneity").reject);
    CHECK(find_test(rep, "effects_homogeneity").reject);
    CHECK_FALSE(rep.recommendation.has_value());
}

TEST_CASE("two-factor pipelines") {
    const auto out2 = run_example("example2");
    CHECK(out2.exit_code == 0);
    CHECK(out2.report.dataset.balanced);
    CHECK(find_test(out2.report, "main_effect_A").reject);
    CHECK_FALSE(find_test(out2.report, "main_effect_B").reject);
    CHECK_FALSE(find_test(out2.report, "interaction").reject);
    REQUIRE(out2.report.fit.has_value());
    const auto& f2 = *out2.report.fit;
    CHECK(f2.model == "two-interaction");
    const double h = f2.mu.ci.half_width();
    for (const auto& e : f2.a) CHECK(near_abs(e.ci.half_width(), h, 1e-12));
    for (const auto& row : f2.ab)
        for (const auto& e : row) CHECK(near_abs(e.ci.half_width(), h, 1e-12));

    const auto out3 = run_example("example3");
    CHECK(out3.exit_code == 0);
    CHECK_FALSE(out3.report.dataset.balanced);
    CHECK(find_test(out3.report, "main_effect_A").reject);
    CHECK_FALSE(find_test(out3.report, "main_effect_B").reject);
    CHECK(find_test(out3.report, "interaction").reject);
    REQUIRE(out3.report.recommendation.has_value());
    CHECK(out3.report.recommendation->label == "A1B2");
    CHECK(near_abs(out3.report.recommendation->expected, 75.0, 1e-9));
    CHECK(out3.report.fit->q_row_abs_sums.size() == 9);

    const auto smaller = cli::choose_recommendation(*out3.report.fit, cli::Objective::Smaller,
                                                    out3.report.dataset);
    CHECK(smaller.label == "A2B2");
    CHECK(near_abs(smaller.expected, 119.0 / 3.0, 1e-9));
}

TEST_CASE("recommendation invariants") {
    // No objective, no recommendation; ties resolve to the first cell.
    cli::FitReport fit;
    fit.cell_expected = {{1.0, 1.0}, {1.0, 1.0}};
    cli::DatasetSummary ds;
    ds.levels_a = {"1", "2"};
    ds.levels_b = {"1", "2"};
    const auto rec = cli::choose_recommendation(fit, cli::Objective::Larger, ds);
    CHECK(rec.level_a == 1);
    CHECK(rec.level_b == 1);
    CHECK_THROWS_AS(cli::choose_recommendation(fit, cli::Objective::None, ds),
                    InvalidInputError);
}

TEST_CASE("halts carry stage names and exit code 2") {
    // Scale mismatch between levels: sigma homogeneity rejects.
    cli::RunConfig cfg;
    cfg.design = design::DesignKind::Single;
    std::istringstream in(
        "level_a,value\n1,10\n1,10.001\n1,9.999\n2,0\n2,100\n2,-100\n");
    const auto out = cli::run_pipeline(in, cfg);
    CHECK(out.exit_code == 2);
    CHECK(out.report.status == "halted");
    CHECK(out.report.failed_stage == "sigma-homogeneity");
    CHECK(out.report.diagnostics.homogeneity.has_value());
    CHECK_FALSE(out.report.diagnostics.common.has_value());
    CHECK_FALSE(out.report.fit.has_value());
    CHECK(out.report.tests.empty());

    // A single far-out replicate rejects its own group's normality check.
    std::istringstream in2("level_a,value\n1,0\n1,0\n1,0\n1,0\n1,0\n1,1\n2,5\n2,6\n2,7\n");
    const auto out2 = cli::run_pipeline(in2, cfg);
    CHECK(out2.exit_code == 2);
    CHECK(out2.report.failed_stage == "normality");
    CHECK_FALSE(out2.report.diagnostics.homogeneity.has_value());

    // Interaction requested with a single-replicate cell: degenerate-cell halt.
    cli::RunConfig cfg2;
    cfg2.design = design::DesignKind::Two;
    cfg2.interaction = true;
    std::istringstream in3(
        "level_a,level_b,value\n1,1,1\n1,2,2\n1,2,2.5\n2,1,3\n2,1,3.5\n2,2,4\n2,2,4.5\n");
    const auto out3 = cli::run_pipeline(in3, cfg2);
    CHECK(out3.exit_code == 2);
    CHECK(out3.report.status == "halted");

    cli::RunConfig missing;
    missing.input_path = "/nonexistent/file.csv";
    CHECK_THROWS_AS(cli::run_file(missing), SchemaError);

    std::istringstream bad("level_a,value\n1,abc\n");
    CHECK_THROWS_AS(cli::run_pipeline(bad, cfg), SchemaError);
}

TEST_CASE("JSON round trip") {
    for (const char* name : {"example1", "example2", "example3"}) {
        const auto out = run_example(name);
        const auto j = cli::to_json(out.report);
        const auto back = cli::report_from_json(j);
        CHECK(back == out.report);
        CHECK(cli::to_json(back).dump() == j.dump());
    }

    // Halted report round-trips too (null fit / recommendation).
    cli::RunConfig cfg;
    cfg.design = design::DesignKind::Single;
    std::istringstream in("level_a,value\n1,10\n1,10.001\n1,9.999\n2,0\n2,100\n2,-100\n");
    const auto halted = cli::run_pipeline(in, cfg);
    CHECK(cli::report_from_json(cli::to_json(halted.report)) == halted.report);
}

TEST_CASE("reports are deterministic") {
    const auto a = run_example("example3");
    const auto b = run_example("example3");
    CHECK(cli::to_json(a.report).dump(2) == cli::to_json(b.report).dump(2));
    CHECK(cli::to_text(a.report) == cli::to_text(b.report));
}

TEST_CASE("text mirrors the JSON numbers at three decimals") {
    const auto out = run_example("example1");
    const auto text = cli::to_text(out.report);
    CHECK(text.find("sigma0=1.165") != std::string::npos);
    CHECK(text.find("mu = 3.674 +- 2.353") != std::string::npos);
    CHECK(text.find("a1 = 0.628 +- 3.137") != std::string::npos);
    CHECK(text.find("test means_homogeneity: reject") != std::string::npos);
    CHECK(text.find("fail-to-reject") != std::string::npos);  // sigma tests

    const auto out3 = run_example("example3");
    const auto text3 = cli::to_text(out3.report);
    CHECK(text3.find("recommendation (larger-the-better): A1B2 expected response 75.000") !=
          std::string::npos);
    CHECK(text3.find("unbalanced") != std::string::npos);
}

TEST_CASE("golden cases pass at the default tolerance") {
    for (const auto& name : cli::golden_names()) {
        const auto res = cli::run_golden(name, 1e-3);
        for (const auto& d : res.diffs) MESSAGE(name, ": ", d);
        CHECK(res.pass);
    }
}

TEST_CASE("corrupting an embedded expected value trips the comparator") {
    CHECK_FALSE(cli::run_golden("example1", 1e-3, 0).pass);
    CHECK_FALSE(cli::run_golden("example2", 1e-3, 5).pass);
    const auto res = cli::run_golden("example3", 1e-3, 2).pass;
    CHECK_FALSE(res);
}

TEST_CASE("UFE_TOL overrides the golden tolerance") {
    CHECK(cli::golden_tolerance() == 1e-3);
    setenv("UFE_TOL", "0.25", 1);
    CHECK(cli::golden_tolerance() == 0.25);
    setenv("UFE_TOL", "garbage", 1);
    CHECK(cli::golden_tolerance() == 1e-3);
    unsetenv("UFE_TOL");
    CHECK(cli::golden_tolerance() == 1e-3);
}

#include "ufe/golden.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <sstream>

namespace ufe::cli {

namespace {

struct GoldenCase {
    std::string name;
    std::string csv;
    RunConfig config;
    std::vector<NumExpect> numbers;
    std::vector<DecisionExpect> decisions;
    std::vector<ViolationExpect> violations;
    // label + expected response per objective; checked via choose_recommendation
    std::optional<std::pair<std::string, double>> best_larger;
    std::optional<std::pair<std::string, double>> best_smaller;
};

const char* kExample1Csv =
    "level_a,value\n"
    "1,2.91\n1,4.14\n1,6.29\n1,4.40\n1,3.77\n"
    "2,5.80\n2,5.84\n2,3.18\n2,3.18\n"
    "3,3.05\n3,1.94\n3,1.23\n3,3.45\n3,1.61\n3,4.32\n";

const char* kExample2Csv =
    "level_a,level_b,value\n"
    "1,1,40.9\n1,1,42.8\n1,1,45.4\n"
    "1,2,41.9\n1,2,43.9\n1,2,46.0\n"
    "2,1,44.4\n2,1,48.2\n2,1,49.9\n"
    "2,2,46.2\n2,2,48.6\n2,2,50.8\n";

const char* kExample3Csv =
    "level_a,level_b,value\n"
    "1,1,61\n1,1,73\n1,1,52\n"
    "1,2,79\n1,2,65\n1,2,81\n"
    "2,1,42\n2,1,53\n"
    "2,2,37\n2,2,32\n2,2,50\n";

std::string ai_field(const std::string& test, const char* bound, std::size_t ref,
                     std::size_t sample) {
    return test + ".ai_" + bound + "." + std::to_string(ref) + "." + std::to_string(sample);
}

void push_ai(std::vector<NumExpect>& out, const std::string& test, std::size_t ref,
             std::size_t sample, double lo, double hi) {
    out.push_back({ai_field(test, "lo", ref, sample), lo});
    out.push_back({ai_field(test, "hi", ref, sample), hi});
}

GoldenCase make_example1() {
    GoldenCase c;
    c.name = "example1";
    c.csv = kExample1Csv;
    c.config.design = design::DesignKind::Single;

    auto& n = c.numbers;
    n.push_back({"sigma0", 1.165});
    const double gs[3] = {1.114, 1.320, 1.094};
    const double gai[3] = {2.251, 2.666, 2.209};
    for (int g = 0; g < 3; ++g) {
        n.push_back({"group_sigma." + std::to_string(g + 1), gs[g]});
        n.push_back({"group_ai_lo." + std::to_string(g + 1), -gai[g]});
        n.push_back({"group_ai_hi." + std::to_string(g + 1), gai[g]});
    }
    n.push_back({"common_ai_lo", -2.353});
    n.push_back({"common_ai_hi", 2.353});
    n.push_back({"mu", 3.674});
    n.push_back({"mu_ci_half", 2.353});
    const double a[3] = {0.628, 0.826, -1.074};
    const double ah[3] = {3.137, 3.451, 2.824};
    const double lm[3] = {4.302, 4.5, 2.6};
    for (int i = 0; i < 3; ++i) {
        n.push_back({"a." + std::to_string(i + 1), a[i]});
        n.push_back({"a_ci_half." + std::to_string(i + 1), ah[i]});
        n.push_back({"level_mean." + std::to_string(i + 1), lm[i]});
    }
    // Means-form cross AI table, rows = reference level, columns = sample.
    const double means_tbl[3][3][2] = {
        {{2.051, 6.553}, {1.636, 6.968}, {2.093, 6.511}},
        {{2.249, 6.751}, {1.834, 7.166}, {2.291, 6.709}},
        {{0.349, 4.851}, {-0.066, 5.266}, {0.391, 4.809}},
    };
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t s = 0; s < 3; ++s)
            push_ai(n, "means_homogeneity", r + 1, s + 1, means_tbl[r][s][0], means_tbl[r][s][1]);
    // Effects-form table: the means-form table shifted by -mu-hat.
    const double effects_tbl[3][3][2] = {
        {{-1.6227585, 2.8787585}, {-2.0383252, 3.2943252}, {-1.5809193, 2.8369193}},
        {{-1.4247585, 3.0767585}, {-1.8403252, 3.4923252}, {-1.3829193, 3.0349193}},
        {{-3.3247585, 1.1767585}, {-3.7403252, 1.5923252}, {-3.2829193, 1.1349193}},
    };
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t s = 0; s < 3; ++s)
            push_ai(n, "effects_homogeneity", r + 1, s + 1, effects_tbl[r][s][0],
                    effects_tbl[r][s][1]);

    c.decisions = {{"normality", false},
                   {"sigma_homogeneity", false},
                   {"sigma_common", false},
                   {"means_homogeneity", true},
                   {"effects_homogeneity", true}};
    for (const char* test : {"means_homogeneity", "effects_homogeneity"}) {
        c.violations.push_back({test, 1, 2, {}});
        c.violations.push_back({test, 1, 3, {3}});
        c.violations.push_back({test, 2, 1, {}});
        c.violations.push_back({test, 2, 3, {1, 2}});
        c.violations.push_back({test, 3, 1, {2, 3, 5}});
        c.violations.push_back({test, 3, 2, {2, 3, 5}});
    }
    return c;
}

GoldenCase make_example2() {
    GoldenCase c;
    c.name = "example2";
    c.csv = kExample2Csv;
    c.config.design = design::DesignKind::Two;
    c.config.interaction = true;

    auto& n = c.numbers;
    n.push_back({"sigma0", 1.938});
    const double gs[4] = {1.845, 1.674, 2.299, 1.879};
    const double gai[4] = {3.725, 3.381, 4.644, 3.794};
    for (int g = 0; g < 4; ++g) {
        n.push_back({"group_sigma." + std::to_string(g + 1), gs[g]});
        n.push_back({"group_ai_lo." + std::to_string(g + 1), -gai[g]});
        n.push_back({"group_ai_hi." + std::to_string(g + 1), gai[g]});
    }
    n.push_back({"common_ai_lo", -3.914});
    n.push_back({"common_ai_hi", 3.914});
    n.push_back({"mu", 45.75});
    n.push_back({"mu_ci_half", 3.914});
    const double a[2] = {-2.267, 2.267}, b[2] = {-0.483, 0.483};
    const double ab[2][2] = {{0.033, -0.033}, {-0.033, 0.033}};
    const double cell[2][2] = {{43.033, 43.933}, {47.5, 48.533}};
    for (int i = 0; i < 2; ++i) {
        n.push_back({"a." + std::to_string(i + 1), a[i]});
        n.push_back({"a_ci_half." + std::to_string(i + 1), 3.914});
        n.push_back({"b." + std::to_string(i + 1), b[i]});
        n.push_back({"b_ci_half." + std::to_string(i + 1), 3.914});
    }
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            const std::string ij = std::to_string(i + 1) + "." + std::to_string(j + 1);
            n.push_back({"ab." + ij, ab[i][j]});
            n.push_back({"ab_ci_half." + ij, 3.914});
            n.push_back({"cell_expected." + ij, cell[i][j]});
        }
    const double a_tbl[2][2][2] = {
        {{-5.939, 1.405}, {-6.634, 2.100}},
        {{-1.405, 5.939}, {-2.100, 6.634}},
    };
    for (std::size_t r = 0; r < 2; ++r)
        for (std::size_t s = 0; s < 2; ++s)
            push_ai(n, "main_effect_A", r + 1, s + 1, a_tbl[r][s][0], a_tbl[r][s][1]);
    const double b_tbl[2][2][2] = {
        {{-6.6536406, 5.6869740}, {-6.3566759, 5.3900092}},
        {{-5.6869740, 6.6536406}, {-5.3900092, 6.3566759}},
    };
    for (std::size_t r = 0; r < 2; ++r)
        for (std::size_t s = 0; s < 2; ++s)
            push_ai(n, "main_effect_B", r + 1, s + 1, b_tbl[r][s][0], b_tbl[r][s][1]);

    c.decisions = {{"normality", false},   {"sigma_homogeneity", false},
                   {"sigma_common", false}, {"main_effect_A", true},
                   {"main_effect_B", false}, {"interaction", false}};
    c.violations = {{"main_effect_A", 1, 2, {1, 2, 4, 5}},
                    {"main_effect_A", 2, 1, {2, 3, 5, 6}},
                    {"main_effect_B", 1, 2, {}},
                    {"main_effect_B", 2, 1, {}},
                    {"interaction", 1, 1, {}},
                    {"interaction", 2, 2, {}},
                    {"interaction", 3, 3, {}},
                    {"interaction", 4, 4, {}}};
    return c;
}

GoldenCase make_example3() {
    GoldenCase c;
    c.name = "example3";
    c.csv = kExample3Csv;
    c.config.design = design::DesignKind::Two;
    c.config.interaction = true;
    c.config.objective = Objective::Larger;

    auto& n = c.numbers;
    n.push_back({"sigma0", 7.429});
    const double gs[4] = {8.602, 7.118, 5.500, 7.587};
    const double gai[4] = {17.375, 14.377, 11.109, 15.323};
    for (int g = 0; g < 4; ++g) {
        n.push_back({"group_sigma." + std::to_string(g + 1), gs[g]});
        n.push_back({"group_ai_lo." + std::to_string(g + 1), -gai[g]});
        n.push_back({"group_ai_hi." + std::to_string(g + 1), gai[g]});
    }
    n.push_back({"common_ai_lo", -15.0062396});
    n.push_back({"common_ai_hi", 15.0062396});
    n.push_back({"mu", 56.818});
    n.push_back({"mu_ci_half", 6.669});
    const double a[2] = {11.852, -14.222}, b[2] = {-2.040, 1.700};
    const double ab[2][2] = {{-4.630, 4.630}, {6.944, -4.630}};
    const double cell[2][2] = {{62.0, 75.0}, {47.5, 39.666}};
    for (int i = 0; i < 2; ++i) {
        n.push_back({"a." + std::to_string(i + 1), a[i]});
        n.push_back({"a_ci_half." + std::to_string(i + 1), 10.0041597});
        n.push_back({"b." + std::to_string(i + 1), b[i]});
        n.push_back({"b_ci_half." + std::to_string(i + 1), 10.0041597});
    }
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            const std::string ij = std::to_string(i + 1) + "." + std::to_string(j + 1);
            n.push_back({"ab." + ij, ab[i][j]});
            n.push_back({"ab_ci_half." + ij, 15.0062396});
            n.push_back({"cell_expected." + ij, cell[i][j]});
        }
    const double qsums[9] = {4.0 / 9.0, 2.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0,
                             1.0,       1.0,       1.0,       1.0};
    for (int k = 0; k < 9; ++k)
        n.push_back({"q_abs_row_sum." + std::to_string(k + 1), qsums[k]});
    const double a_tbl[2][2][2] = {
        {{-8.804, 32.508}, {-3.9699862, 27.673}},
        {{-34.878, 6.434}, {-30.0440602, 1.599}},
    };
    for (std::size_t r = 0; r < 2; ++r)
        for (std::size_t s = 0; s < 2; ++s)
            push_ai(n, "main_effect_A", r + 1, s + 1, a_tbl[r][s][0], a_tbl[r][s][1]);
    const double b_tbl[2][2][2] = {
        {{-22.929, 18.849}, {-40.693, 36.613}},
        {{-19.189, 22.589}, {-36.953, 40.353}},
    };
    for (std::size_t r = 0; r < 2; ++r)
        for (std::size_t s = 0; s < 2; ++s)
            push_ai(n, "main_effect_B", r + 1, s + 1, b_tbl[r][s][0], b_tbl[r][s][1]);
    n.push_back({"recommendation.expected", 75.000});

    c.decisions = {{"normality", false},   {"sigma_homogeneity", false},
                   {"sigma_common", false}, {"main_effect_A", true},
                   {"main_effect_B", false}, {"interaction", true}};
    c.violations = {{"main_effect_A", 1, 2, {2, 4, 5, 6}},
                    {"main_effect_A", 2, 1, {1, 3, 4, 5}},
                    {"main_effect_B", 1, 2, {}},
                    {"main_effect_B", 2, 1, {}},
                    {"interaction", 1, 1, {}},
                    {"interaction", 2, 2, {}},
                    {"interaction", 3, 3, {2}},
                    {"interaction", 4, 4, {}}};
    c.best_larger = {{"A1B2"}, 75.000};
    c.best_smaller = {{"A2B2"}, 39.666};
    return c;
}

const std::vector<GoldenCase>& cases() {
    static const std::vector<GoldenCase> all = {make_example1(), make_example2(),
                                                make_example3()};
    return all;
}

const GoldenCase& find_case(const std::string& name) {
    for (const auto& c : cases())
        if (c.name == name) return c;
    throw InvalidInputError("unknown golden case '" + name + "'");
}

}  // namespace

const std::vector<std::string>& golden_names() {
    static const std::vector<std::string> names = {"example1", "example2", "example3"};
    return names;
}

std::string golden_csv(const std::string& name) { return find_case(name).csv; }

RunConfig golden_config(const std::string& name) { return find_case(name).config; }

std::size_t golden_numeric_count(const std::string& name) {
    return find_case(name).numbers.size();
}

double golden_tolerance() {
    if (const char* env = std::getenv("UFE_TOL")) {
        char* end = nullptr;
        const double t = std::strtod(env, &end);
        if (end != env && t > 0.0) return t;
    }
    return 1e-3;
}

std::vector<std::pair<std::string, double>> flatten_numbers(const AnalysisReport& rep) {
    std::vector<std::pair<std::string, double>> out;
    if (rep.diagnostics.sigma0) out.emplace_back("sigma0", *rep.diagnostics.sigma0);
    for (std::size_t g = 0; g < rep.diagnostics.groups.size(); ++g) {
        const auto& gd = rep.diagnostics.groups[g];
        const std::string id = std::to_string(g + 1);
        out.emplace_back("group_sigma." + id, gd.sigma);
        out.emplace_back("group_ai_lo." + id, gd.check.ai.lo);
        out.emplace_back("group_ai_hi." + id, gd.check.ai.hi);
    }
    if (rep.diagnostics.common && !rep.diagnostics.common->checks.empty()) {
        out.emplace_back("common_ai_lo", rep.diagnostics.common->checks[0].ai.lo);
        out.emplace_back("common_ai_hi", rep.diagnostics.common->checks[0].ai.hi);
    }
    if (rep.fit) {
        const auto& f = *rep.fit;
        out.emplace_back("mu", f.mu.estimate);
        out.emplace_back("mu_ci_half", f.mu.ci.half_width());
        for (std::size_t i = 0; i < f.a.size(); ++i) {
            out.emplace_back("a." + std::to_string(i + 1), f.a[i].estimate);
            out.emplace_back("a_ci_half." + std::to_string(i + 1), f.a[i].ci.half_width());
        }
        for (std::size_t j = 0; j < f.b.size(); ++j) {
            out.emplace_back("b." + std::to_string(j + 1), f.b[j].estimate);
            out.emplace_back("b_ci_half." + std::to_string(j + 1), f.b[j].ci.half_width());
        }
        for (std::size_t i = 0; i < f.ab.size(); ++i)
            for (std::size_t j = 0; j < f.ab[i].size(); ++j) {
                const std::string ij = std::to_string(i + 1) + "." + std::to_string(j + 1);
                out.emplace_back("ab." + ij, f.ab[i][j].estimate);
                out.emplace_back("ab_ci_half." + ij, f.ab[i][j].ci.half_width());
            }
        for (std::size_t i = 0; i < f.level_means.size(); ++i)
            out.emplace_back("level_mean." + std::to_string(i + 1), f.level_means[i]);
        for (std::size_t i = 0; i < f.cell_expected.size(); ++i)
            for (std::size_t j = 0; j < f.cell_expected[i].size(); ++j)
                out.emplace_back(
                    "cell_expected." + std::to_string(i + 1) + "." + std::to_string(j + 1),
                    f.cell_expected[i][j]);
        for (std::size_t k = 0; k < f.q_row_abs_sums.size(); ++k)
            out.emplace_back("q_abs_row_sum." + std::to_string(k + 1), f.q_row_abs_sums[k]);
    }
    for (const auto& t : rep.tests)
        for (std::size_t r = 0; r < t.ai_table.size(); ++r)
            for (std::size_t s = 0; s < t.ai_table[r].size(); ++s) {
                out.emplace_back(ai_field(t.name, "lo", r + 1, s + 1), t.ai_table[r][s].lo);
                out.emplace_back(ai_field(t.name, "hi", r + 1, s + 1), t.ai_table[r][s].hi);
            }
    if (rep.recommendation)
        out.emplace_back("recommendation.expected", rep.recommendation->expected);
    return out;
}

namespace {

std::string num_to_string(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

bool test_reject(const AnalysisReport& rep, const std::string& name, bool& found) {
    found = true;
    if (name == "normality") {
        for (const auto& g : rep.diagnostics.groups)
            if (g.reject) return true;
        return false;
    }
    if (name == "sigma_homogeneity")
        return rep.diagnostics.homogeneity && rep.diagnostics.homogeneity->reject;
    if (name == "sigma_common") return rep.diagnostics.common && rep.diagnostics.common->reject;
    for (const auto& t : rep.tests)
        if (t.name == name) return t.reject;
    found = false;
    return false;
}

}  // namespace

GoldenResult run_golden(const std::string& name, double tol, int corrupt_index) {
    const GoldenCase& c = find_case(name);
    GoldenResult res;
    res.name = name;

    std::istringstream in(c.csv);
    const RunOutcome out = run_pipeline(in, c.config);
    res.report = out.report;
    if (out.exit_code != 0) {
        res.diffs.push_back("pipeline halted at stage " + out.report.failed_stage + ": " +
                            out.report.message);
        res.pass = false;
        return res;
    }

    std::map<std::string, double> actual;
    for (const auto& [field, value] : flatten_numbers(out.report)) actual[field] = value;

    for (std::size_t k = 0; k < c.numbers.size(); ++k) {
        const auto& ne = c.numbers[k];
        const double expected =
            ne.expected + (static_cast<int>(k) == corrupt_index ? 0.01 : 0.0);
        auto it = actual.find(ne.field);
        if (it == actual.end()) {
            res.diffs.push_back(ne.field + ": missing from report");
            continue;
        }
        if (!(std::abs(it->second - expected) <= tol))
            res.diffs.push_back(ne.field + ": expected " + num_to_string(expected) + " got " +
                                num_to_string(it->second));
    }

    for (const auto& de : c.decisions) {
        bool found = false;
        const bool reject = test_reject(out.report, de.test, found);
        if (!found)
            res.diffs.push_back(de.test + ": decision missing from report");
        else if (reject != de.reject)
            res.diffs.push_back(de.test + ": expected " + (de.reject ? "reject" : "fail-to-reject") +
                                " got " + (reject ? "reject" : "fail-to-reject"));
    }

    for (const auto& ve : c.violations) {
        const TestReport* test = nullptr;
        for (const auto& t : res.report.tests)
            if (t.name == ve.test) test = &t;
        if (!test) {
            res.diffs.push_back(ve.test + ": test missing from report");
            continue;
        }
        const CheckReport* check = nullptr;
        for (const auto& ch : test->checks)
            if (ch.sample == ve.sample && ch.reference == ve.reference) check = &ch;
        if (!check) {
            res.diffs.push_back(ve.test + ": check (" + std::to_string(ve.sample) + "," +
                                std::to_string(ve.reference) + ") missing");
            continue;
        }
        if (check->violations != ve.indices) {
            std::string got;
            for (auto v : check->violations) got += " " + std::to_string(v);
            std::string want;
            for (auto v : ve.indices) want += " " + std::to_string(v);
            res.diffs.push_back(ve.test + " (" + std::to_string(ve.sample) + "," +
                                std::to_string(ve.reference) + "): expected indices{" + want +
                                " } got{" + got + " }");
        }
    }

    const auto check_best = [&](Objective obj,
                                const std::optional<std::pair<std::string, double>>& want) {
        if (!want || !res.report.fit) return;
        const auto rec = choose_recommendation(*res.report.fit, obj, res.report.dataset);
        if (rec.label != want->first)
            res.diffs.push_back("recommendation(" + rec.objective + "): expected " + want->first +
                                " got " + rec.label);
        if (!(std::abs(rec.expected - want->second) <= tol))
            res.diffs.push_back("recommendation(" + rec.objective + ").expected: expected " +
                                num_to_string(want->second) + " got " +
                                num_to_string(rec.expected));
    };
    check_best(Objective::Larger, c.best_larger);
    check_best(Objective::Smaller, c.best_smaller);

    res.pass = res.diffs.empty();
    return res;
}

}  // namespace ufe::cli

#include "ufe/report.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <variant>

#include <nlohmann/json.hpp>

namespace ufe::cli {

using nlohmann::json;

namespace {

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string objective_name(Objective o) {
    switch (o) {
        case Objective::Larger: return "larger";
        case Objective::Smaller: return "smaller";
        default: return "none";
    }
}

std::string canonical_config(const RunConfig& cfg) {
    std::ostringstream os;
    os << "design=" << (cfg.design == design::DesignKind::Single ? "single" : "two")
       << " interaction=" << (cfg.interaction ? "true" : "false") << " alpha=" << cfg.alpha
       << " objective=" << objective_name(cfg.objective);
    return os.str();
}

std::string fmt3(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

std::string fmt_interval(const udist::Interval& iv) {
    return "[" + fmt3(iv.lo) + ", " + fmt3(iv.hi) + "]";
}

// ---- JSON encoding ----

json interval_to_json(const udist::Interval& iv) { return json::array({iv.lo, iv.hi}); }

udist::Interval interval_from_json(const json& j) { return {j.at(0), j.at(1)}; }

json check_to_json(const CheckReport& c) {
    return {{"sample", c.sample},
            {"reference", c.reference},
            {"ai", interval_to_json(c.ai)},
            {"violations", c.violations},
            {"threshold", c.threshold}};
}

CheckReport check_from_json(const json& j) {
    CheckReport c;
    c.sample = j.at("sample");
    c.reference = j.at("reference");
    c.ai = interval_from_json(j.at("ai"));
    c.violations = j.at("violations").get<std::vector<std::size_t>>();
    c.threshold = j.at("threshold");
    return c;
}

json test_to_json(const TestReport& t) {
    json checks = json::array();
    for (const auto& c : t.checks) checks.push_back(check_to_json(c));
    json table = json::array();
    for (const auto& row : t.ai_table) {
        json r = json::array();
        for (const auto& iv : row) r.push_back(interval_to_json(iv));
        table.push_back(r);
    }
    return {{"name", t.name}, {"reject", t.reject}, {"checks", checks}, {"ai_table", table}};
}

TestReport test_from_json(const json& j) {
    TestReport t;
    t.name = j.at("name");
    t.reject = j.at("reject");
    for (const auto& c : j.at("checks")) t.checks.push_back(check_from_json(c));
    for (const auto& row : j.at("ai_table")) {
        std::vector<udist::Interval> r;
        for (const auto& iv : row) r.push_back(interval_from_json(iv));
        t.ai_table.push_back(std::move(r));
    }
    return t;
}

json estimate_to_json(const EstimateReport& e) {
    return {{"estimate", e.estimate}, {"scale", e.scale}, {"ci", interval_to_json(e.ci)}};
}

EstimateReport estimate_from_json(const json& j) {
    return {j.at("estimate"), j.at("scale"), interval_from_json(j.at("ci"))};
}

}  // namespace

json to_json(const AnalysisReport& rep) {
    json j;
    j["status"] = {{"state", rep.status},
                   {"failed_stage", rep.failed_stage},
                   {"message", rep.message}};
    j["dataset"] = {{"design", rep.dataset.design},
                    {"levels_a", rep.dataset.levels_a},
                    {"levels_b", rep.dataset.levels_b},
                    {"replicates", rep.dataset.replicates},
                    {"total", rep.dataset.total},
                    {"balanced", rep.dataset.balanced}};

    json groups = json::array();
    for (const auto& g : rep.diagnostics.groups)
        groups.push_back({{"label", g.label},
                          {"sigma", g.sigma},
                          {"check", check_to_json(g.check)},
                          {"reject", g.reject}});
    json diag;
    diag["groups"] = groups;
    diag["homogeneity"] =
        rep.diagnostics.homogeneity ? test_to_json(*rep.diagnostics.homogeneity) : json();
    diag["common"] = rep.diagnostics.common ? test_to_json(*rep.diagnostics.common) : json();
    diag["sigma0"] = rep.diagnostics.sigma0 ? json(*rep.diagnostics.sigma0) : json();
    j["diagnostics"] = diag;

    if (rep.fit) {
        const auto& f = *rep.fit;
        json a = json::array(), b = json::array(), ab = json::array();
        for (const auto& e : f.a) a.push_back(estimate_to_json(e));
        for (const auto& e : f.b) b.push_back(estimate_to_json(e));
        for (const auto& row : f.ab) {
            json r = json::array();
            for (const auto& e : row) r.push_back(estimate_to_json(e));
            ab.push_back(r);
        }
        j["fit"] = {{"model", f.model},
                    {"sigma0", f.sigma0},
                    {"alpha", f.alpha},
                    {"mu", estimate_to_json(f.mu)},
                    {"a", a},
                    {"b", b},
                    {"ab", ab},
                    {"q_row_abs_sums", f.q_row_abs_sums},
                    {"level_means", f.level_means},
                    {"cell_expected", f.cell_expected}};
    } else {
        j["fit"] = json();
    }

    json tests = json::array();
    for (const auto& t : rep.tests) tests.push_back(test_to_json(t));
    j["tests"] = tests;

    j["recommendation"] = rep.recommendation
                              ? json{{"objective", rep.recommendation->objective},
                                     {"level_a", rep.recommendation->level_a},
                                     {"level_b", rep.recommendation->level_b},
                                     {"label", rep.recommendation->label},
                                     {"expected", rep.recommendation->expected}}
                              : json();
    j["provenance"] = {{"input_digest", rep.provenance.input_digest},
                       {"config", rep.provenance.config}};
    return j;
}

AnalysisReport report_from_json(const json& j) {
    AnalysisReport rep;
    rep.status = j.at("status").at("state");
    rep.failed_stage = j.at("status").at("failed_stage");
    rep.message = j.at("status").at("message");

    const auto& ds = j.at("dataset");
    rep.dataset.design = ds.at("design");
    rep.dataset.levels_a = ds.at("levels_a").get<std::vector<std::string>>();
    rep.dataset.levels_b = ds.at("levels_b").get<std::vector<std::string>>();
    rep.dataset.replicates = ds.at("replicates").get<std::vector<std::vector<std::size_t>>>();
    rep.dataset.total = ds.at("total");
    rep.dataset.balanced = ds.at("balanced");

    const auto& diag = j.at("diagnostics");
    for (const auto& g : diag.at("groups")) {
        GroupDiagnostic gd;
        gd.label = g.at("label");
        gd.sigma = g.at("sigma");
        gd.check = check_from_json(g.at("check"));
        gd.reject = g.at("reject");
        rep.diagnostics.groups.push_back(std::move(gd));
    }
    if (!diag.at("homogeneity").is_null())
        rep.diagnostics.homogeneity = test_from_json(diag.at("homogeneity"));
    if (!diag.at("common").is_null()) rep.diagnostics.common = test_from_json(diag.at("common"));
    if (!diag.at("sigma0").is_null()) rep.diagnostics.sigma0 = diag.at("sigma0").get<double>();

    if (!j.at("fit").is_null()) {
        const auto& f = j.at("fit");
        FitReport fr;
        fr.model = f.at("model");
        fr.sigma0 = f.at("sigma0");
        fr.alpha = f.at("alpha");
        fr.mu = estimate_from_json(f.at("mu"));
        for (const auto& e : f.at("a")) fr.a.push_back(estimate_from_json(e));
        for (const auto& e : f.at("b")) fr.b.push_back(estimate_from_json(e));
        for (const auto& row : f.at("ab")) {
            std::vector<EstimateReport> r;
            for (const auto& e : row) r.push_back(estimate_from_json(e));
            fr.ab.push_back(std::move(r));
        }
        fr.q_row_abs_sums = f.at("q_row_abs_sums").get<std::vector<double>>();
        fr.level_means = f.at("level_means").get<std::vector<double>>();
        fr.cell_expected = f.at("cell_expected").get<std::vector<std::vector<double>>>();
        rep.fit = std::move(fr);
    }

    for (const auto& t : j.at("tests")) rep.tests.push_back(test_from_json(t));

    if (!j.at("recommendation").is_null()) {
        const auto& r = j.at("recommendation");
        rep.recommendation = Recommendation{r.at("objective"), r.at("level_a"), r.at("level_b"),
                                            r.at("label"), r.at("expected")};
    }
    rep.provenance.input_digest = j.at("provenance").at("input_digest");
    rep.provenance.config = j.at("provenance").at("config");
    return rep;
}

std::string to_text(const AnalysisReport& rep) {
    std::ostringstream os;
    os << "dataset: " << rep.dataset.design << " design, N=" << rep.dataset.total;
    if (rep.dataset.design == "two")
        os << ", " << rep.dataset.levels_a.size() << "x" << rep.dataset.levels_b.size()
           << (rep.dataset.balanced ? " balanced" : " unbalanced");
    os << "\n";
    os << "level map A:";
    for (std::size_t i = 0; i < rep.dataset.levels_a.size(); ++i)
        os << " " << i + 1 << "=" << rep.dataset.levels_a[i];
    os << "\n";
    if (!rep.dataset.levels_b.empty()) {
        os << "level map B:";
        for (std::size_t j = 0; j < rep.dataset.levels_b.size(); ++j)
            os << " " << j + 1 << "=" << rep.dataset.levels_b[j];
        os << "\n";
    }

    os << "\nresidual diagnostics\n";
    for (const auto& g : rep.diagnostics.groups)
        os << "  " << g.label << ": sigma=" << fmt3(g.sigma) << " AI=" << fmt_interval(g.check.ai)
           << " singular points=" << g.check.violations.size()
           << (g.reject ? " REJECT" : " ok") << "\n";
    if (rep.diagnostics.homogeneity)
        os << "  sigma homogeneity: "
           << (rep.diagnostics.homogeneity->reject ? "reject" : "fail-to-reject") << "\n";
    if (rep.diagnostics.common)
        os << "  sigma common: " << (rep.diagnostics.common->reject ? "reject" : "fail-to-reject")
           << "\n";
    if (rep.diagnostics.sigma0) os << "  sigma0=" << fmt3(*rep.diagnostics.sigma0) << "\n";

    if (rep.fit) {
        const auto& f = *rep.fit;
        os << "\nestimates (model " << f.model << ", " << f.alpha * 100 << "% CI)\n";
        const auto line = [&](const std::string& name, const EstimateReport& e) {
            os << "  " << name << " = " << fmt3(e.estimate) << " +- "
               << fmt3(e.ci.half_width()) << "\n";
        };
        line("mu", f.mu);
        for (std::size_t i = 0; i < f.a.size(); ++i) line("a" + std::to_string(i + 1), f.a[i]);
        for (std::size_t j = 0; j < f.b.size(); ++j) line("b" + std::to_string(j + 1), f.b[j]);
        for (std::size_t i = 0; i < f.ab.size(); ++i)
            for (std::size_t j = 0; j < f.ab[i].size(); ++j)
                line("ab" + std::to_string(i + 1) + std::to_string(j + 1), f.ab[i][j]);
        if (!f.level_means.empty()) {
            os << "  level means:";
            for (double m : f.level_means) os << " " << fmt3(m);
            os << "\n";
        }
        if (!f.cell_expected.empty()) {
            os << "  expected cell responses:\n";
            for (std::size_t i = 0; i < f.cell_expected.size(); ++i) {
                os << "   ";
                for (double v : f.cell_expected[i]) os << " " << fmt3(v);
                os << "\n";
            }
        }
    }

    for (const auto& t : rep.tests) {
        os << "\ntest " << t.name << ": " << (t.reject ? "reject" : "fail-to-reject") << "\n";
        if (!t.ai_table.empty()) {
            // Rows are reference parameters, columns tested samples.
            for (std::size_t ref = 0; ref < t.ai_table.size(); ++ref) {
                os << "  AI(.; ref " << ref + 1 << "):";
                for (const auto& iv : t.ai_table[ref]) os << " " << fmt_interval(iv);
                os << "\n";
            }
        }
        const std::size_t s_levels = rep.dataset.levels_b.size();
        for (const auto& c : t.checks) {
            const bool per_cell = t.name == "interaction" && s_levels > 0;
            if (c.violations.empty() && !per_cell) continue;
            if (per_cell)
                os << "  cell (" << (c.sample - 1) / s_levels + 1 << ","
                   << (c.sample - 1) % s_levels + 1 << "): AI=" << fmt_interval(c.ai);
            else
                os << "  sample " << c.sample << " vs ref " << c.reference << ":";
            if (c.violations.empty()) {
                os << " clean\n";
                continue;
            }
            os << " violations at";
            for (auto v : c.violations) os << " " << v;
            os << " (threshold " << c.threshold << ")\n";
        }
    }

    if (rep.recommendation) {
        const auto& r = *rep.recommendation;
        os << "\nrecommendation (" << r.objective << "-the-better): " << r.label
           << " expected response " << fmt3(r.expected) << "\n";
    }
    if (rep.status != "complete")
        os << "\nstatus: " << rep.status << " at stage " << rep.failed_stage << ": "
           << rep.message << "\n";
    return os.str();
}

namespace {

CheckReport to_check_report(const uhtest::PairCheck& pc) {
    return {pc.sample + 1, pc.reference + 1, pc.ai, pc.violations, pc.threshold};
}

TestReport to_test_report(const uhtest::TestOutcome& t) {
    TestReport tr;
    tr.name = t.name;
    tr.reject = t.decision == uhtest::Decision::Reject;
    for (const auto& pc : t.detail) tr.checks.push_back(to_check_report(pc));
    tr.ai_table = t.ai_table;
    return tr;
}

EstimateReport to_estimate_report(const estimators::Estimate& e, double alpha) {
    return {e.value, e.scale, e.ci(alpha)};
}

FitReport to_fit_report(const estimators::EffectFit& fit, double alpha) {
    FitReport fr;
    switch (fit.design) {
        case estimators::ModelKind::Single: fr.model = "single"; break;
        case estimators::ModelKind::TwoAdditive: fr.model = "two-no-interaction"; break;
        case estimators::ModelKind::TwoInteraction: fr.model = "two-interaction"; break;
    }
    fr.sigma0 = fit.sigma0;
    fr.alpha = alpha;
    fr.mu = to_estimate_report(fit.mu, alpha);
    for (const auto& e : fit.a) fr.a.push_back(to_estimate_report(e, alpha));
    for (const auto& e : fit.b) fr.b.push_back(to_estimate_report(e, alpha));
    for (const auto& row : fit.ab) {
        std::vector<EstimateReport> r;
        for (const auto& e : row) r.push_back(to_estimate_report(e, alpha));
        fr.ab.push_back(std::move(r));
    }
    fr.q_row_abs_sums = fit.q_row_abs_sums;
    return fr;
}

}  // namespace

Recommendation choose_recommendation(const FitReport& fit, Objective objective,
                                     const DatasetSummary& dataset) {
    if (objective == Objective::None || fit.cell_expected.empty())
        throw InvalidInputError("recommendation needs an objective and a two-factor fit");
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < fit.cell_expected.size(); ++i)
        for (std::size_t j = 0; j < fit.cell_expected[i].size(); ++j) {
            const double v = fit.cell_expected[i][j];
            const double best = fit.cell_expected[bi][bj];
            if (objective == Objective::Larger ? v > best : v < best) {
                bi = i;
                bj = j;
            }
        }
    Recommendation rec;
    rec.objective = objective_name(objective);
    rec.level_a = bi + 1;
    rec.level_b = bj + 1;
    rec.label = "A" + dataset.levels_a[bi] + "B" + dataset.levels_b[bj];
    rec.expected = fit.cell_expected[bi][bj];
    return rec;
}

RunOutcome run_pipeline(std::istream& input, const RunConfig& cfg) {
    std::ostringstream raw;
    raw << input.rdbuf();
    const std::string bytes = raw.str();

    AnalysisReport rep;
    rep.provenance = {fnv1a_hex(bytes), canonical_config(cfg)};

    std::istringstream ss(bytes);
    const design::Dataset ds = design::parse_csv(ss, cfg.design);  // throws -> exit 1

    const auto halted = [&](const std::string& stage, const std::string& why) {
        rep.status = "halted";
        rep.failed_stage = stage;
        rep.message = why;
        return RunOutcome{rep, 2};
    };

    std::string stage = "fit";
    try {
        if (std::holds_alternative<design::SingleFactorData>(ds)) {
            const auto& d = std::get<design::SingleFactorData>(ds);
            rep.dataset.design = "single";
            rep.dataset.levels_a = d.labels();
            for (std::size_t i = 0; i < d.levels(); ++i)
                rep.dataset.replicates.push_back({d.replicates(i)});
            rep.dataset.total = d.total();
            bool allsame = true;
            for (std::size_t i = 1; i < d.levels(); ++i)
                if (d.replicates(i) != d.replicates(0)) allsame = false;
            rep.dataset.balanced = allsame;

            const auto means = estimators::fit_single_means(d);
            stage = "residual-diagnostics";
            const auto groups = estimators::residual_groups(d, means);
            const auto diag = uhtest::run_residual_diagnostics(groups, cfg.alpha);
            for (std::size_t g = 0; g < diag.normality.size(); ++g)
                rep.diagnostics.groups.push_back(
                    {"level " + d.label(g), diag.group_sigmas[g],
                     to_check_report(diag.normality[g].detail[0]),
                     diag.normality[g].decision == uhtest::Decision::Reject});
            if (diag.homogeneity) rep.diagnostics.homogeneity = to_test_report(*diag.homogeneity);
            if (diag.common) rep.diagnostics.common = to_test_report(*diag.common);
            rep.diagnostics.sigma0 = diag.sigma0;
            if (!diag.normality_ok)
                return halted("normality", "residual normality rejected for some level");
            if (diag.homogeneity->decision == uhtest::Decision::Reject)
                return halted("sigma-homogeneity", "standard deviations differ across levels");
            if (diag.common->decision == uhtest::Decision::Reject)
                return halted("sigma-common", "pooled sigma0 rejected by the common test");

            stage = "estimation";
            const double sigma0 = *diag.sigma0;
            const auto fit = estimators::fit_single_effects(d, sigma0);
            auto fr = to_fit_report(fit, 1.0 - cfg.alpha);
            fr.level_means = means.mu_i;
            rep.fit = std::move(fr);

            stage = "effect-tests";
            rep.tests.push_back(to_test_report(uhtest::homogeneity_effects(
                d, means.mu_i, diag.group_sigmas, 0.0, cfg.alpha, "means_homogeneity")));
            std::vector<double> effect_centers;
            for (const auto& e : fit.a) effect_centers.push_back(e.value);
            rep.tests.push_back(to_test_report(uhtest::homogeneity_effects(
                d, effect_centers, diag.group_sigmas, fit.mu.value, cfg.alpha,
                "effects_homogeneity")));
        } else {
            const auto& d = std::get<design::TwoFactorData>(ds);
            rep.dataset.design = "two";
            rep.dataset.levels_a = d.labels_a();
            rep.dataset.levels_b = d.labels_b();
            rep.dataset.replicates.resize(d.levels_a());
            for (std::size_t i = 0; i < d.levels_a(); ++i)
                for (std::size_t j = 0; j < d.levels_b(); ++j)
                    rep.dataset.replicates[i].push_back(d.replicates(i, j));
            rep.dataset.total = d.total();
            rep.dataset.balanced = d.balanced();

            // Point estimates do not depend on sigma0; fit with a placeholder
            // scale first, refit once sigma0 is validated.
            const auto prelim =
                d.balanced() ? estimators::fit_two_balanced(d, cfg.interaction, 1.0)
                             : estimators::fit_two_unbalanced(d, cfg.interaction, 1.0);

            stage = "residual-diagnostics";
            const auto groups = estimators::residual_groups(d, prelim);
            const auto diag = uhtest::run_residual_diagnostics(groups, cfg.alpha);
            for (std::size_t g = 0; g < diag.normality.size(); ++g) {
                const std::size_t i = g / d.levels_b(), j = g % d.levels_b();
                rep.diagnostics.groups.push_back(
                    {"cell (" + d.label_a(i) + "," + d.label_b(j) + ")", diag.group_sigmas[g],
                     to_check_report(diag.normality[g].detail[0]),
                     diag.normality[g].decision == uhtest::Decision::Reject});
            }
            if (diag.homogeneity) rep.diagnostics.homogeneity = to_test_report(*diag.homogeneity);
            if (diag.common) rep.diagnostics.common = to_test_report(*diag.common);
            rep.diagnostics.sigma0 = diag.sigma0;
            if (!diag.normality_ok)
                return halted("normality", "residual normality rejected for some cell");
            if (diag.homogeneity->decision == uhtest::Decision::Reject)
                return halted("sigma-homogeneity", "standard deviations differ across cells");
            if (diag.common->decision == uhtest::Decision::Reject)
                return halted("sigma-common", "pooled sigma0 rejected by the common test");

            stage = "estimation";
            const double sigma0 = *diag.sigma0;
            const auto fit = d.balanced()
                                 ? estimators::fit_two_balanced(d, cfg.interaction, sigma0)
                                 : estimators::fit_two_unbalanced(d, cfg.interaction, sigma0);
            auto fr = to_fit_report(fit, 1.0 - cfg.alpha);
            fr.cell_expected.resize(d.levels_a());
            for (std::size_t i = 0; i < d.levels_a(); ++i)
                for (std::size_t j = 0; j < d.levels_b(); ++j)
                    fr.cell_expected[i].push_back(fit.expected_response(i, j));
            rep.fit = std::move(fr);

            stage = "effect-tests";
            rep.tests.push_back(to_test_report(
                uhtest::homogeneity_main_effect(d, design::Factor::A, fit, cfg.alpha)));
            rep.tests.push_back(to_test_report(
                uhtest::homogeneity_main_effect(d, design::Factor::B, fit, cfg.alpha)));
            if (cfg.interaction)
                rep.tests.push_back(to_test_report(uhtest::interaction_test(d, fit, cfg.alpha)));

            stage = "recommendation";
            if (cfg.objective != Objective::None && cfg.interaction)
                rep.recommendation =
                    choose_recommendation(*rep.fit, cfg.objective, rep.dataset);
        }
    } catch (const Error& e) {
        return halted(stage, e.what());
    }

    rep.status = "complete";
    return {rep, 0};
}

RunOutcome run_file(const RunConfig& cfg) {
    std::ifstream in(cfg.input_path, std::ios::binary);
    if (!in) throw SchemaError("cannot open input file '" + cfg.input_path + "'");
    return run_pipeline(in, cfg);
}

}  // namespace ufe::cli

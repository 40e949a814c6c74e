#include "ufe/uhtest.hpp"

#include <cmath>

namespace ufe::uhtest {

namespace {

void check_alpha(double alpha) {
    if (!std::isfinite(alpha) || alpha <= 0.0 || alpha >= 1.0)
        throw InvalidInputError("alpha must lie in (0, 1)");
}

double group_sigma_about_zero(const std::vector<double>& g, std::size_t index) {
    if (g.size() < 2)
        throw DegenerateGroupError("group " + std::to_string(index + 1) +
                                   " needs at least 2 residuals");
    const double s = design::moment_sigma(g, 0.0);
    if (s <= 0.0)
        throw DegenerateGroupError("group " + std::to_string(index + 1) +
                                   " has zero residual scale");
    return s;
}

Decision aggregate(const std::vector<PairCheck>& detail) {
    for (const auto& pc : detail)
        if (static_cast<int>(pc.violations.size()) >= pc.threshold) return Decision::Reject;
    return Decision::FailToReject;
}

}  // namespace

int CountingRule::threshold(std::size_t m) const {
    check_alpha(alpha);
    if (m == 0) throw InvalidInputError("threshold undefined for an empty sample");
    const double t = alpha * static_cast<double>(m);
    const double nearest = std::round(t);
    // alpha * m at (or within rounding noise of) an integer means exactly
    // "at least that many"; otherwise round up.
    const double th = std::abs(t - nearest) < 1e-9 ? nearest : std::ceil(t);
    return std::max(1, static_cast<int>(th));
}

CountResult count_test(const std::vector<double>& sample, const udist::Interval& ai,
                       const CountingRule& rule) {
    if (sample.empty()) throw InvalidInputError("count_test: empty sample");
    CountResult res;
    res.threshold = rule.threshold(sample.size());
    for (std::size_t p = 0; p < sample.size(); ++p)
        if (ai.outside(sample[p])) res.violations.push_back(p + 1);
    res.decision = static_cast<int>(res.violations.size()) >= res.threshold
                       ? Decision::Reject
                       : Decision::FailToReject;
    return res;
}

GroupNormality residual_normality(const std::vector<double>& residuals, double alpha,
                                  std::size_t group_index) {
    check_alpha(alpha);
    GroupNormality out;
    out.sigma_g0 = group_sigma_about_zero(residuals, group_index);
    const auto ai = udist::acceptance_interval(0.0, out.sigma_g0, alpha);
    const auto cr = count_test(residuals, ai, {alpha});
    out.outcome.name = "normality";
    out.outcome.detail.push_back({group_index, group_index, ai, cr.violations, cr.threshold});
    out.outcome.decision = aggregate(out.outcome.detail);
    return out;
}

TestOutcome homogeneity_sigma(const std::vector<std::vector<double>>& groups, double alpha) {
    check_alpha(alpha);
    if (groups.size() < 2) throw InvalidInputError("homogeneity_sigma: need at least 2 groups");
    const std::size_t r = groups.size();
    std::vector<double> sigma(r);
    for (std::size_t g = 0; g < r; ++g) sigma[g] = group_sigma_about_zero(groups[g], g);

    TestOutcome out;
    out.name = "sigma_homogeneity";
    out.ai_table.assign(r, std::vector<udist::Interval>(r));
    for (std::size_t j = 0; j < r; ++j) {
        const auto ai = udist::acceptance_interval(0.0, sigma[j], alpha);
        for (std::size_t i = 0; i < r; ++i) {
            out.ai_table[j][i] = ai;
            if (i == j) continue;
            const auto cr = count_test(groups[i], ai, {alpha});
            out.detail.push_back({i, j, ai, cr.violations, cr.threshold});
        }
    }
    out.decision = aggregate(out.detail);
    return out;
}

CommonSigma common_sigma(const std::vector<std::vector<double>>& groups, double alpha,
                         const TestOutcome& homogeneity) {
    check_alpha(alpha);
    if (homogeneity.decision != Decision::FailToReject)
        throw SequencingError("common test requires the sigma homogeneity test to hold");
    std::vector<double> pooled;
    for (const auto& g : groups) pooled.insert(pooled.end(), g.begin(), g.end());
    CommonSigma out;
    out.sigma0 = group_sigma_about_zero(pooled, 0);
    const auto ai = udist::acceptance_interval(0.0, out.sigma0, alpha);
    const auto cr = count_test(pooled, ai, {alpha});
    out.outcome.name = "sigma_common";
    out.outcome.detail.push_back({0, 0, ai, cr.violations, cr.threshold});
    out.outcome.decision = aggregate(out.outcome.detail);
    return out;
}

TestOutcome homogeneity_effects(const design::SingleFactorData& d,
                                const std::vector<double>& centers,
                                const std::vector<double>& sigmas, double mu0, double alpha,
                                std::string name, design::AdjustedSample::Origin origin) {
    check_alpha(alpha);
    const std::size_t r = d.levels();
    if (centers.size() != r || sigmas.size() != r)
        throw InvalidInputError("homogeneity_effects: centers/sigmas must have one entry per level");
    for (std::size_t i = 0; i < r; ++i)
        if (!(sigmas[i] > 0.0))
            throw DegenerateGroupError("level " + std::to_string(i + 1) + " has zero sigma");

    std::vector<std::vector<double>> adjusted(r);
    for (std::size_t i = 0; i < r; ++i)
        adjusted[i] = design::adjust_shift(d.row(i), mu0, origin).values;

    TestOutcome out;
    out.name = std::move(name);
    out.ai_table.assign(r, std::vector<udist::Interval>(r));
    for (std::size_t j = 0; j < r; ++j)
        for (std::size_t i = 0; i < r; ++i) {
            // Center from the reference level j, scale from the tested level i.
            const auto ai = udist::acceptance_interval(centers[j], sigmas[i], alpha);
            out.ai_table[j][i] = ai;
            if (i == j) continue;
            const auto cr = count_test(adjusted[i], ai, {alpha});
            out.detail.push_back({i, j, ai, cr.violations, cr.threshold});
        }
    out.decision = aggregate(out.detail);
    return out;
}

TestOutcome homogeneity_main_effect(const design::TwoFactorData& d, design::Factor which,
                                    const estimators::EffectFit& fit, double alpha) {
    const auto collapsed = design::collapse_by_factor(d, which);
    const auto& effects = which == design::Factor::A ? fit.a : fit.b;
    if (effects.size() != collapsed.levels())
        throw InvalidInputError("homogeneity_main_effect: fit does not match dataset");

    std::vector<double> centers, sigmas;
    for (std::size_t i = 0; i < collapsed.levels(); ++i) {
        if (collapsed.replicates(i) < 2)
            throw DegenerateGroupError("collapsed level " + std::to_string(i + 1) +
                                       " needs at least 2 observations");
        centers.push_back(effects[i].value);
        sigmas.push_back(design::moment_sigma(collapsed.row(i), design::mean(collapsed.row(i))));
    }
    const bool is_a = which == design::Factor::A;
    return homogeneity_effects(collapsed, centers, sigmas, fit.mu.value, alpha,
                               is_a ? "main_effect_A" : "main_effect_B",
                               is_a ? design::AdjustedSample::Origin::CollapsedA
                                    : design::AdjustedSample::Origin::CollapsedB);
}

TestOutcome interaction_test(const design::TwoFactorData& d, const estimators::EffectFit& fit,
                             double alpha) {
    check_alpha(alpha);
    if (fit.ab.empty()) throw InvalidInputError("interaction_test: fit has no interaction terms");
    if (fit.a.size() != d.levels_a() || fit.b.size() != d.levels_b())
        throw InvalidInputError("interaction_test: fit does not match dataset");

    TestOutcome out;
    out.name = "interaction";
    for (std::size_t i = 0; i < d.levels_a(); ++i)
        for (std::size_t j = 0; j < d.levels_b(); ++j) {
            if (d.replicates(i, j) < 2)
                throw DegenerateGroupError("cell (" + std::to_string(i + 1) + "," +
                                           std::to_string(j + 1) +
                                           ") needs at least 2 replicates");
            const double fitted = fit.expected_response(i, j);
            std::vector<double> resid;
            for (double v : d.cell(i, j)) resid.push_back(v - fitted);
            const double sigma_ij = group_sigma_about_zero(resid, i * d.levels_b() + j);

            const auto adj =
                design::adjust_cell(d, i, j, fit.mu.value, fit.a[i].value, fit.b[j].value);
            const auto ai = udist::acceptance_interval(0.0, sigma_ij, alpha);
            const auto cr = count_test(adj.values, ai, {alpha});
            const std::size_t flat = i * d.levels_b() + j;
            out.detail.push_back({flat, flat, ai, cr.violations, cr.threshold});
        }
    out.decision = aggregate(out.detail);
    return out;
}

ResidualDiagnostics run_residual_diagnostics(const std::vector<std::vector<double>>& groups,
                                             double alpha) {
    check_alpha(alpha);
    ResidualDiagnostics diag;
    diag.normality_ok = true;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        auto gn = residual_normality(groups[g], alpha, g);
        diag.group_sigmas.push_back(gn.sigma_g0);
        if (gn.outcome.decision == Decision::Reject) diag.normality_ok = false;
        diag.normality.push_back(std::move(gn.outcome));
    }
    if (!diag.normality_ok) return diag;

    diag.homogeneity = homogeneity_sigma(groups, alpha);
    if (diag.homogeneity->decision == Decision::Reject) return diag;

    auto cs = common_sigma(groups, alpha, *diag.homogeneity);
    const bool ok = cs.outcome.decision == Decision::FailToReject;
    diag.common = std::move(cs.outcome);
    if (ok) diag.sigma0 = cs.sigma0;
    return diag;
}

}  // namespace ufe::uhtest

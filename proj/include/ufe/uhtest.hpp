#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ufe/design_data.hpp"
#include "ufe/estimators.hpp"
#include "ufe/udist.hpp"

namespace ufe::uhtest {

// Outlier-counting rejection rule: reject once at least ceil(alpha * m)
// points (never fewer than one) fall strictly outside the acceptance
// interval.
struct CountingRule {
    double alpha = 0.05;
    int threshold(std::size_t m) const;
};

enum class Decision { Reject, FailToReject };

struct CountResult {
    std::vector<std::size_t> violations;  // 1-based replicate indices
    int threshold = 1;
    Decision decision = Decision::FailToReject;

    std::size_t count() const { return violations.size(); }
};

// Strict exceedances of the interval bounds; boundary points are inside.
CountResult count_test(const std::vector<double>& sample, const udist::Interval& ai,
                       const CountingRule& rule);

// One sample checked against one reference parameter's acceptance interval.
struct PairCheck {
    std::size_t sample = 0;     // group index of the tested sample
    std::size_t reference = 0;  // group index the AI was built from
    udist::Interval ai;
    std::vector<std::size_t> violations;  // 1-based
    int threshold = 1;
};

struct TestOutcome {
    std::string name;
    Decision decision = Decision::FailToReject;
    std::vector<PairCheck> detail;  // decision = reject iff some row violates
    // Cross table of AIs, [reference][sample], including the diagonal; filled
    // by the homogeneity tests for report rendering.
    std::vector<std::vector<udist::Interval>> ai_table;
};

struct GroupNormality {
    TestOutcome outcome;
    double sigma_g0 = 0.0;
};

// Checks residuals of one group against AI(0, sigma_g0) with sigma_g0
// estimated from the same group.
GroupNormality residual_normality(const std::vector<double>& residuals, double alpha,
                                  std::size_t group_index = 0);

// H0: all group standard deviations equal. Every ordered pair (i, j), i != j,
// tests group i against AI(0, sigma_j0).
TestOutcome homogeneity_sigma(const std::vector<std::vector<double>>& groups, double alpha);

struct CommonSigma {
    TestOutcome outcome;
    double sigma0 = 0.0;  // pooled moment estimate
};

// H0*: the common sigma equals the pooled constant sigma0. Requires the
// homogeneity test to have failed to reject (SequencingError otherwise).
CommonSigma common_sigma(const std::vector<std::vector<double>>& groups, double alpha,
                         const TestOutcome& homogeneity);

// Homogeneity of level means or effects: sample i (shifted by mu0) against
// AI(center_j, sigma_i0) for every ordered pair i != j. Pass mu0 = 0 and the
// level means as centers for the means form; mu0 = mu-hat and the effect
// estimates for the effects form.
TestOutcome homogeneity_effects(
    const design::SingleFactorData& d, const std::vector<double>& centers,
    const std::vector<double>& sigmas, double mu0, double alpha, std::string name,
    design::AdjustedSample::Origin origin = design::AdjustedSample::Origin::ShiftByMu0);

// Collapses the two-factor data by one factor and runs the effects-form
// homogeneity test with centers from the fit and sigmas from the collapsed
// samples (moment about each collapsed sample's own mean).
TestOutcome homogeneity_main_effect(const design::TwoFactorData& d, design::Factor which,
                                    const estimators::EffectFit& fit, double alpha);

// H0^AB: all interaction effects zero. Each cell, adjusted by its additive
// baseline mu0 + a_i0 + b_j0, is checked against AI(0, sigma_ij0) with
// sigma_ij0 from the cell's fitted residuals. Rejects if any cell rejects.
TestOutcome interaction_test(const design::TwoFactorData& d, const estimators::EffectFit& fit,
                             double alpha);

// Full residual validation pipeline: per-group normality, then sigma
// homogeneity, then the common test. Stops at the first rejection; sigma0 is
// set only when everything downstream of it remains valid.
struct ResidualDiagnostics {
    std::vector<double> group_sigmas;
    std::vector<TestOutcome> normality;
    bool normality_ok = false;
    std::optional<TestOutcome> homogeneity;
    std::optional<TestOutcome> common;
    std::optional<double> sigma0;
};

ResidualDiagnostics run_residual_diagnostics(const std::vector<std::vector<double>>& groups,
                                             double alpha);

}  // namespace ufe::uhtest

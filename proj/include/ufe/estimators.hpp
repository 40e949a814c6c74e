#pragma once

#include <cstddef>
#include <vector>

#include "ufe/design_data.hpp"
#include "ufe/linsolve.hpp"
#include "ufe/udist.hpp"

namespace ufe::estimators {

enum class ModelKind { Single, TwoAdditive, TwoInteraction };

// Point estimate together with its plug-in estimator distribution (location =
// the estimate itself).
struct Estimate {
    double value = 0.0;
    double scale = 0.0;  // sigma of the estimator's normal uncertainty law

    udist::NormalUncertain dist() const { return {value, scale}; }
    udist::Interval ci(double alpha) const {
        return udist::confidence_interval(value, scale, alpha);
    }
};

// Per-level means of a single-factor design.
struct CellMeansFit {
    std::vector<double> mu_i;
};

// Full effect decomposition with estimator distributions, for any of the
// three model kinds. b/ab are empty when the model has no second factor or
// no interaction term.
struct EffectFit {
    ModelKind design = ModelKind::Single;
    Estimate mu;
    std::vector<Estimate> a;
    std::vector<Estimate> b;
    std::vector<std::vector<Estimate>> ab;  // r x s when present
    double sigma0 = 0.0;
    std::vector<double> q_row_abs_sums;  // matrix path only; empty otherwise

    // mu + a_i (+ b_j + (ab)_ij): the modeled cell response.
    double expected_response(std::size_t i, std::size_t j = 0) const;
};

// mu_i = row mean.
CellMeansFit fit_single_means(const design::SingleFactorData& d);

// mu = grand mean, a_i = row mean - grand mean; scales sigma0 and
// 2 (1 - m_i/N) sigma0.
EffectFit fit_single_effects(const design::SingleFactorData& d, double sigma0);

// Closed forms for a balanced two-factor design. Throws WrongPathError on
// unbalanced data; use fit_two_unbalanced there.
EffectFit fit_two_balanced(const design::TwoFactorData& d, bool interaction, double sigma0);

// Observation-incidence design matrix, weighted sum-to-zero constraint rows,
// and the parameter layout (mu, a_1..a_r, b_1..b_s[, (ab)_11..(ab)_rs]).
struct DesignSystem {
    linsolve::Matrix x;
    linsolve::Matrix c;
    linsolve::Vector d;
    std::size_t r = 0, s = 0;
    bool interaction = false;

    std::size_t params() const { return 1 + r + s + (interaction ? r * s : 0); }
    std::size_t mu_index() const { return 0; }
    std::size_t a_index(std::size_t i) const { return 1 + i; }
    std::size_t b_index(std::size_t j) const { return 1 + r + j; }
    std::size_t ab_index(std::size_t i, std::size_t j) const { return 1 + r + s + i * s + j; }
};

DesignSystem build_design(const design::TwoFactorData& d, bool interaction);

// Constrained least-squares (Lagrangian) path; valid for balanced data too.
// Estimator scales are the row-wise absolute sums of Q = (X^T X)^+ X^T times
// sigma0.
EffectFit fit_two_unbalanced(const design::TwoFactorData& d, bool interaction, double sigma0);

// Residual groups for diagnostics: one group per level (single factor) or per
// cell in row-major order (two factors), each residual = observation minus
// its modeled response.
std::vector<std::vector<double>> residual_groups(const design::SingleFactorData& d,
                                                 const CellMeansFit& fit);
std::vector<std::vector<double>> residual_groups(const design::TwoFactorData& d,
                                                 const EffectFit& fit);

}  // namespace ufe::estimators

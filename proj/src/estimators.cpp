#include "ufe/estimators.hpp"

#include <cmath>

namespace ufe::estimators {

namespace {

void check_sigma0(double sigma0) {
    if (!std::isfinite(sigma0) || sigma0 <= 0.0)
        throw InvalidInputError("sigma0 must be > 0 (validate it with the residual pipeline)");
}

double grand_mean_two(const design::TwoFactorData& d) {
    double sum = 0.0;
    for (std::size_t i = 0; i < d.levels_a(); ++i)
        for (std::size_t j = 0; j < d.levels_b(); ++j)
            for (double v : d.cell(i, j)) sum += v;
    return sum / static_cast<double>(d.total());
}

}  // namespace

double EffectFit::expected_response(std::size_t i, std::size_t j) const {
    double v = mu.value + a.at(i).value;
    if (!b.empty()) v += b.at(j).value;
    if (!ab.empty()) v += ab.at(i).at(j).value;
    return v;
}

CellMeansFit fit_single_means(const design::SingleFactorData& d) {
    CellMeansFit fit;
    fit.mu_i.reserve(d.levels());
    for (std::size_t i = 0; i < d.levels(); ++i) fit.mu_i.push_back(design::mean(d.row(i)));
    return fit;
}

EffectFit fit_single_effects(const design::SingleFactorData& d, double sigma0) {
    check_sigma0(sigma0);
    const auto means = fit_single_means(d);
    double grand = 0.0;
    for (std::size_t i = 0; i < d.levels(); ++i) grand += means.mu_i[i] * d.weight(i);

    EffectFit fit;
    fit.design = ModelKind::Single;
    fit.sigma0 = sigma0;
    fit.mu = {grand, sigma0};
    fit.a.reserve(d.levels());
    for (std::size_t i = 0; i < d.levels(); ++i)
        fit.a.push_back({means.mu_i[i] - grand, 2.0 * (1.0 - d.weight(i)) * sigma0});
    return fit;
}

EffectFit fit_two_balanced(const design::TwoFactorData& d, bool interaction, double sigma0) {
    check_sigma0(sigma0);
    if (!d.balanced())
        throw WrongPathError("closed forms need a balanced design; use fit_two_unbalanced");

    const std::size_t r = d.levels_a(), s = d.levels_b();
    const double grand = grand_mean_two(d);
    std::vector<double> margin_a(r, 0.0), margin_b(s, 0.0);
    std::vector<std::vector<double>> cell_mean(r, std::vector<double>(s, 0.0));
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < s; ++j) cell_mean[i][j] = design::mean(d.cell(i, j));
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < s; ++j) margin_a[i] += cell_mean[i][j];
        margin_a[i] /= static_cast<double>(s);
    }
    for (std::size_t j = 0; j < s; ++j) {
        for (std::size_t i = 0; i < r; ++i) margin_b[j] += cell_mean[i][j];
        margin_b[j] /= static_cast<double>(r);
    }

    const double rr = static_cast<double>(r), ss = static_cast<double>(s);
    EffectFit fit;
    fit.design = interaction ? ModelKind::TwoInteraction : ModelKind::TwoAdditive;
    fit.sigma0 = sigma0;
    fit.mu = {grand, sigma0};
    for (std::size_t i = 0; i < r; ++i)
        fit.a.push_back({margin_a[i] - grand, 2.0 * (1.0 - 1.0 / rr) * sigma0});
    for (std::size_t j = 0; j < s; ++j)
        fit.b.push_back({margin_b[j] - grand, 2.0 * (1.0 - 1.0 / ss) * sigma0});
    if (interaction) {
        const double ab_scale = 4.0 * (1.0 - 1.0 / rr - 1.0 / ss + 1.0 / (rr * ss)) * sigma0;
        fit.ab.assign(r, {});
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < s; ++j)
                fit.ab[i].push_back(
                    {cell_mean[i][j] - margin_a[i] - margin_b[j] + grand, ab_scale});
    }
    return fit;
}

DesignSystem build_design(const design::TwoFactorData& d, bool interaction) {
    DesignSystem sys;
    sys.r = d.levels_a();
    sys.s = d.levels_b();
    sys.interaction = interaction;
    const std::size_t p = sys.params();
    const std::size_t n = d.total();

    sys.x = linsolve::Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    Eigen::Index row = 0;
    for (std::size_t i = 0; i < sys.r; ++i)
        for (std::size_t j = 0; j < sys.s; ++j)
            for (std::size_t l = 0; l < d.replicates(i, j); ++l, ++row) {
                sys.x(row, static_cast<Eigen::Index>(sys.mu_index())) = 1.0;
                sys.x(row, static_cast<Eigen::Index>(sys.a_index(i))) = 1.0;
                sys.x(row, static_cast<Eigen::Index>(sys.b_index(j))) = 1.0;
                if (interaction)
                    sys.x(row, static_cast<Eigen::Index>(sys.ab_index(i, j))) = 1.0;
            }

    const std::size_t k = 2 + (interaction ? sys.r + sys.s : 0);
    sys.c = linsolve::Matrix::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(p));
    for (std::size_t i = 0; i < sys.r; ++i)
        sys.c(0, static_cast<Eigen::Index>(sys.a_index(i))) = d.weight_a(i);
    for (std::size_t j = 0; j < sys.s; ++j)
        sys.c(1, static_cast<Eigen::Index>(sys.b_index(j))) = d.weight_b(j);
    if (interaction) {
        for (std::size_t i = 0; i < sys.r; ++i)
            for (std::size_t j = 0; j < sys.s; ++j)
                sys.c(static_cast<Eigen::Index>(2 + i),
                      static_cast<Eigen::Index>(sys.ab_index(i, j))) = d.weight(i, j);
        for (std::size_t j = 0; j < sys.s; ++j)
            for (std::size_t i = 0; i < sys.r; ++i)
                sys.c(static_cast<Eigen::Index>(2 + sys.r + j),
                      static_cast<Eigen::Index>(sys.ab_index(i, j))) = d.weight(i, j);
    }
    sys.d = linsolve::Vector::Zero(static_cast<Eigen::Index>(k));
    return sys;
}

EffectFit fit_two_unbalanced(const design::TwoFactorData& d, bool interaction, double sigma0) {
    check_sigma0(sigma0);
    const DesignSystem sys = build_design(d, interaction);

    linsolve::Vector z(static_cast<Eigen::Index>(d.total()));
    Eigen::Index row = 0;
    for (std::size_t i = 0; i < sys.r; ++i)
        for (std::size_t j = 0; j < sys.s; ++j)
            for (double v : d.cell(i, j)) z(row++) = v;

    const auto sol = linsolve::solve_constrained_ls(sys.x, z, sys.c, sys.d);

    EffectFit fit;
    fit.design = interaction ? ModelKind::TwoInteraction : ModelKind::TwoAdditive;
    fit.sigma0 = sigma0;
    fit.q_row_abs_sums.reserve(sys.params());
    for (Eigen::Index q = 0; q < sol.q.rows(); ++q)
        fit.q_row_abs_sums.push_back(sol.q.row(q).cwiseAbs().sum());

    const auto scale_of = [&](std::size_t idx) { return fit.q_row_abs_sums[idx] * sigma0; };
    fit.mu = {sol.beta(static_cast<Eigen::Index>(sys.mu_index())), scale_of(sys.mu_index())};
    for (std::size_t i = 0; i < sys.r; ++i)
        fit.a.push_back(
            {sol.beta(static_cast<Eigen::Index>(sys.a_index(i))), scale_of(sys.a_index(i))});
    for (std::size_t j = 0; j < sys.s; ++j)
        fit.b.push_back(
            {sol.beta(static_cast<Eigen::Index>(sys.b_index(j))), scale_of(sys.b_index(j))});
    if (interaction) {
        fit.ab.assign(sys.r, {});
        for (std::size_t i = 0; i < sys.r; ++i)
            for (std::size_t j = 0; j < sys.s; ++j)
                fit.ab[i].push_back({sol.beta(static_cast<Eigen::Index>(sys.ab_index(i, j))),
                                     scale_of(sys.ab_index(i, j))});
    }
    return fit;
}

std::vector<std::vector<double>> residual_groups(const design::SingleFactorData& d,
                                                 const CellMeansFit& fit) {
    if (fit.mu_i.size() != d.levels())
        throw InvalidInputError("residual_groups: fit does not match dataset");
    std::vector<std::vector<double>> groups(d.levels());
    for (std::size_t i = 0; i < d.levels(); ++i)
        for (double v : d.row(i)) groups[i].push_back(v - fit.mu_i[i]);
    return groups;
}

std::vector<std::vector<double>> residual_groups(const design::TwoFactorData& d,
                                                 const EffectFit& fit) {
    if (fit.a.size() != d.levels_a() || fit.b.size() != d.levels_b())
        throw InvalidInputError("residual_groups: fit does not match dataset");
    std::vector<std::vector<double>> groups;
    groups.reserve(d.levels_a() * d.levels_b());
    for (std::size_t i = 0; i < d.levels_a(); ++i)
        for (std::size_t j = 0; j < d.levels_b(); ++j) {
            const double fitted = fit.expected_response(i, j);
            std::vector<double> g;
            g.reserve(d.replicates(i, j));
            for (double v : d.cell(i, j)) g.push_back(v - fitted);
            groups.push_back(std::move(g));
        }
    return groups;
}

}  // namespace ufe::estimators

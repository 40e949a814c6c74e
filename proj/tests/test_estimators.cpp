#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <sstream>

#include "test_util.hpp"
#include "ufe/estimators.hpp"
#include "ufe/golden.hpp"

using namespace ufe;
using testutil::near_abs;

namespace {

design::SingleFactorData example1() {
    std::istringstream in(cli::golden_csv("example1"));
    return std::get<design::SingleFactorData>(design::parse_csv(in, design::DesignKind::Single));
}
design::TwoFactorData example(const char* name) {
    std::istringstream in(cli::golden_csv(name));
    return std::get<design::TwoFactorData>(design::parse_csv(in, design::DesignKind::Two));
}

constexpr double kSigma0Ex1 = 1.164905718645648;
constexpr double kSigma0Ex2 = 1.9377822375076101;
constexpr double kSigma0Ex3 = 7.4294663130651388;

void check_constraints(const design::TwoFactorData& d, const estimators::EffectFit& fit,
                       double tol) {
    double wa = 0.0, wb = 0.0;
    for (std::size_t i = 0; i < d.levels_a(); ++i) wa += d.weight_a(i) * fit.a[i].value;
    for (std::size_t j = 0; j < d.levels_b(); ++j) wb += d.weight_b(j) * fit.b[j].value;
    CHECK(near_abs(wa, 0.0, tol));
    CHECK(near_abs(wb, 0.0, tol));
    if (fit.ab.empty()) return;
    for (std::size_t j = 0; j < d.levels_b(); ++j) {
        double w = 0.0;
        for (std::size_t i = 0; i < d.levels_a(); ++i) w += d.weight(i, j) * fit.ab[i][j].value;
        CHECK(near_abs(w, 0.0, tol));
    }
    for (std::size_t i = 0; i < d.levels_a(); ++i) {
        double w = 0.0;
        for (std::size_t j = 0; j < d.levels_b(); ++j) w += d.weight(i, j) * fit.ab[i][j].value;
        CHECK(near_abs(w, 0.0, tol));
    }
}

}  // namespace

TEST_CASE("single-factor level means") {
    const auto fit = estimators::fit_single_means(example1());
    REQUIRE(fit.mu_i.size() == 3);
    CHECK(near_abs(fit.mu_i[0], 4.302, 1e-9));
    CHECK(near_abs(fit.mu_i[1], 4.5, 1e-9));
    CHECK(near_abs(fit.mu_i[2], 2.6, 1e-9));

    const design::SingleFactorData constant(std::vector<std::vector<double>>{{3.0, 3.0}, {3.0, 3.0, 3.0}});
    for (double m : estimators::fit_single_means(constant).mu_i) CHECK(m == 3.0);

    const design::SingleFactorData singles(std::vector<std::vector<double>>{{1.25}, {-4.0}});
    const auto s = estimators::fit_single_means(singles);
    CHECK(s.mu_i == std::vector<double>{1.25, -4.0});
}

TEST_CASE("single-factor effect fit") {
    const auto d = example1();
    const auto fit = estimators::fit_single_effects(d, kSigma0Ex1);
    CHECK(near_abs(fit.mu.value, 3.674, 1e-9));
    CHECK(near_abs(fit.a[0].value, 0.628, 1e-9));
    CHECK(near_abs(fit.a[1].value, 0.826, 1e-9));
    CHECK(near_abs(fit.a[2].value, -1.074, 1e-9));

    CHECK(fit.mu.scale == kSigma0Ex1);
    CHECK(near_abs(fit.a[0].scale, 2.0 * (1.0 - 5.0 / 15.0) * kSigma0Ex1, 1e-12));

    CHECK(near_abs(fit.mu.ci(0.95).half_width(), 2.353, 1e-3));
    CHECK(near_abs(fit.a[0].ci(0.95).half_width(), 3.137, 1e-3));
    CHECK(near_abs(fit.a[1].ci(0.95).half_width(), 3.451, 1e-3));
    CHECK(near_abs(fit.a[2].ci(0.95).half_width(), 2.824, 1e-3));

    // Weighted effects cancel.
    double wsum = 0.0;
    for (std::size_t i = 0; i < d.levels(); ++i) wsum += d.weight(i) * fit.a[i].value;
    CHECK(near_abs(wsum, 0.0, 1e-12));

    const design::SingleFactorData constant(std::vector<std::vector<double>>{{2.0, 2.0}, {2.0, 2.0}});
    const auto cf = estimators::fit_single_effects(constant, 1.0);
    CHECK(cf.mu.value == 2.0);
    CHECK(cf.a[0].value == 0.0);

    CHECK_THROWS_AS(estimators::fit_single_effects(d, 0.0), InvalidInputError);
}

TEST_CASE("balanced single-factor designs share one effect scale") {
    std::mt19937 rng(11);
    const auto rows = testutil::random_single_rows(rng, true);
    const design::SingleFactorData d{rows};
    const auto fit = estimators::fit_single_effects(d, 2.5);
    const double want = 2.0 * (1.0 - 1.0 / static_cast<double>(d.levels())) * 2.5;
    for (const auto& e : fit.a) CHECK(near_abs(e.scale, want, 1e-12));
}

TEST_CASE("balanced two-factor closed forms") {
    const auto d = example("example2");
    const auto fit = estimators::fit_two_balanced(d, true, kSigma0Ex2);
    CHECK(near_abs(fit.mu.value, 45.75, 1e-9));
    CHECK(near_abs(fit.a[0].value, -34.0 / 15.0, 1e-9));
    CHECK(near_abs(fit.b[0].value, -29.0 / 60.0, 1e-9));
    CHECK(near_abs(fit.ab[0][0].value, 1.0 / 30.0, 1e-9));
    CHECK(near_abs(fit.ab[1][0].value, -1.0 / 30.0, 1e-9));

    // r = s = 2 collapses every scale coefficient to 1.
    CHECK(near_abs(fit.mu.scale, kSigma0Ex2, 1e-12));
    CHECK(near_abs(fit.a[0].scale, kSigma0Ex2, 1e-12));
    CHECK(near_abs(fit.b[1].scale, kSigma0Ex2, 1e-12));
    CHECK(near_abs(fit.ab[1][1].scale, kSigma0Ex2, 1e-12));
    CHECK(near_abs(fit.mu.ci(0.95).half_width(), 3.914, 1e-3));

    check_constraints(d, fit, 1e-12);

    CHECK_THROWS_AS(estimators::fit_two_balanced(example("example3"), true, 1.0), WrongPathError);

    std::vector<std::vector<std::vector<double>>> flat = {{{5.0, 5.0}, {5.0, 5.0}},
                                                          {{5.0, 5.0}, {5.0, 5.0}}};
    const auto cf = estimators::fit_two_balanced(design::TwoFactorData(flat), true, 1.0);
    CHECK(cf.mu.value == 5.0);
    CHECK(cf.a[0].value == 0.0);
    CHECK(cf.ab[0][1].value == 0.0);
}

TEST_CASE("scale coefficients for larger balanced designs") {
    std::mt19937 rng(21);
    std::uniform_real_distribution<double> value(-10, 10);
    std::vector<std::vector<std::vector<double>>> obs(3,
                                                      std::vector<std::vector<double>>(4));
    for (auto& row : obs)
        for (auto& cell : row)
            for (int k = 0; k < 2; ++k) cell.push_back(value(rng));
    const design::TwoFactorData d{obs};
    const auto fit = estimators::fit_two_balanced(d, true, 1.5);
    CHECK(near_abs(fit.a[1].scale, 2.0 * (1.0 - 1.0 / 3.0) * 1.5, 1e-12));
    CHECK(near_abs(fit.b[2].scale, 2.0 * (1.0 - 1.0 / 4.0) * 1.5, 1e-12));
    CHECK(near_abs(fit.ab[2][3].scale,
                   4.0 * (1.0 - 1.0 / 3.0 - 1.0 / 4.0 + 1.0 / 12.0) * 1.5, 1e-12));
}

TEST_CASE("build_design shapes and structure") {
    const auto d = example("example3");
    const auto sys = estimators::build_design(d, true);
    CHECK(sys.x.rows() == 11);
    CHECK(sys.x.cols() == 9);
    CHECK(sys.c.rows() == 6);
    CHECK(sys.c.cols() == 9);
    CHECK(sys.d.size() == 6);
    CHECK(sys.d.norm() == 0.0);
    for (Eigen::Index row = 0; row < sys.x.rows(); ++row) CHECK(sys.x.row(row).sum() == 4.0);
    CHECK(sys.c(0, 1) == doctest::Approx(6.0 / 11.0));
    CHECK(sys.c(0, 2) == doctest::Approx(5.0 / 11.0));
    CHECK(sys.c(1, 3) == doctest::Approx(5.0 / 11.0));
    // Interaction constraint rows carry w_ij at column 1 + r + s + (i-1)s + j.
    CHECK(sys.c(2, 5) == doctest::Approx(3.0 / 11.0));
    CHECK(sys.c(3, 7) == doctest::Approx(2.0 / 11.0));
    CHECK(sys.c(4, 5) == doctest::Approx(3.0 / 11.0));
    CHECK(sys.c(4, 7) == doctest::Approx(2.0 / 11.0));

    const auto additive = estimators::build_design(d, false);
    CHECK(additive.x.cols() == 5);
    CHECK(additive.c.rows() == 2);
    for (Eigen::Index row = 0; row < additive.x.rows(); ++row)
        CHECK(additive.x.row(row).sum() == 3.0);

    const auto d2 = example("example2");
    const auto balanced = estimators::build_design(d2, false);
    for (Eigen::Index col = 0; col < balanced.x.cols(); ++col) {
        const double colsum = balanced.x.col(col).sum();
        CHECK(std::fmod(colsum, 3.0) == 0.0);
    }
}

TEST_CASE("unbalanced matrix fit recovers the reference estimates") {
    const auto d = example("example3");
    const auto fit = estimators::fit_two_unbalanced(d, true, kSigma0Ex3);
    CHECK(near_abs(fit.mu.value, 625.0 / 11.0, 1e-9));
    CHECK(near_abs(fit.a[0].value, 320.0 / 27.0, 1e-9));
    CHECK(near_abs(fit.a[1].value, -128.0 / 9.0, 1e-9));
    CHECK(near_abs(fit.b[0].value, -202.0 / 99.0, 1e-9));
    CHECK(near_abs(fit.b[1].value, 505.0 / 297.0, 1e-9));
    CHECK(near_abs(fit.ab[0][0].value, -125.0 / 27.0, 1e-9));
    CHECK(near_abs(fit.ab[1][0].value, 125.0 / 18.0, 1e-9));

    REQUIRE(fit.q_row_abs_sums.size() == 9);
    CHECK(near_abs(fit.q_row_abs_sums[0], 4.0 / 9.0, 1e-9));
    for (int k = 1; k <= 4; ++k) CHECK(near_abs(fit.q_row_abs_sums[k], 2.0 / 3.0, 1e-9));
    for (int k = 5; k <= 8; ++k) CHECK(near_abs(fit.q_row_abs_sums[k], 1.0, 1e-9));

    CHECK(near_abs(fit.mu.ci(0.95).half_width(), 6.669, 1e-3));
    CHECK(near_abs(fit.a[0].ci(0.95).half_width(), 10.004159729559058, 1e-9));
    CHECK(near_abs(fit.ab[0][0].ci(0.95).half_width(), 15.006239594338588, 1e-9));

    check_constraints(d, fit, 1e-9);
    CHECK(near_abs(fit.expected_response(0, 1), 75.0, 1e-9));
    CHECK(near_abs(fit.expected_response(1, 1), 119.0 / 3.0, 1e-9));
}

TEST_CASE("matrix path agrees with closed forms on balanced data") {
    const auto d = example("example2");
    const auto closed = estimators::fit_two_balanced(d, true, kSigma0Ex2);
    const auto matrix = estimators::fit_two_unbalanced(d, true, kSigma0Ex2);
    CHECK(near_abs(matrix.mu.value, closed.mu.value, 1e-9));
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(near_abs(matrix.a[i].value, closed.a[i].value, 1e-9));
        CHECK(near_abs(matrix.b[i].value, closed.b[i].value, 1e-9));
        for (std::size_t j = 0; j < 2; ++j)
            CHECK(near_abs(matrix.ab[i][j].value, closed.ab[i][j].value, 1e-9));
    }
}

TEST_CASE("feasible synthetic data is recovered exactly") {
    // Cell values equal to mu + a_i + b_j + (ab)_ij for parameters already on
    // the constraint manifold; the fit must return those parameters.
    const auto d = example("example3");
    const double mu = 625.0 / 11.0;
    const double a[2] = {320.0 / 27.0, -128.0 / 9.0};
    const double b[2] = {-202.0 / 99.0, 505.0 / 297.0};
    const double ab[2][2] = {{-125.0 / 27.0, 125.0 / 27.0}, {125.0 / 18.0, -125.0 / 27.0}};
    std::vector<std::vector<std::vector<double>>> obs(2, std::vector<std::vector<double>>(2));
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j)
            obs[i][j].assign(d.replicates(i, j), mu + a[i] + b[j] + ab[i][j]);
    const auto fit = estimators::fit_two_unbalanced(design::TwoFactorData(obs), true, 1.0);
    CHECK(near_abs(fit.mu.value, mu, 1e-9));
    CHECK(near_abs(fit.a[0].value, a[0], 1e-9));
    CHECK(near_abs(fit.b[1].value, b[1], 1e-9));
    CHECK(near_abs(fit.ab[1][0].value, ab[1][0], 1e-9));
}

TEST_CASE("properties over random designs") {
    std::mt19937 rng(77);
    for (int it = 0; it < 25; ++it) {
        const bool interaction = it % 2 == 0;
        const auto balanced = testutil::random_two_factor(rng, true);
        const auto closed = estimators::fit_two_balanced(balanced, interaction, 1.0);
        const auto matrix = estimators::fit_two_unbalanced(balanced, interaction, 1.0);
        CHECK(near_abs(matrix.mu.value, closed.mu.value, 1e-8));
        for (std::size_t i = 0; i < balanced.levels_a(); ++i)
            CHECK(near_abs(matrix.a[i].value, closed.a[i].value, 1e-8));
        for (std::size_t j = 0; j < balanced.levels_b(); ++j)
            CHECK(near_abs(matrix.b[j].value, closed.b[j].value, 1e-8));
        if (interaction)
            for (std::size_t i = 0; i < balanced.levels_a(); ++i)
                for (std::size_t j = 0; j < balanced.levels_b(); ++j)
                    CHECK(near_abs(matrix.ab[i][j].value, closed.ab[i][j].value, 1e-8));

        // Cell-mean reconstruction under the interaction decomposition.
        if (interaction)
            for (std::size_t i = 0; i < balanced.levels_a(); ++i)
                for (std::size_t j = 0; j < balanced.levels_b(); ++j)
                    CHECK(near_abs(closed.expected_response(i, j),
                                   design::mean(balanced.cell(i, j)), 1e-9));

        const auto unbalanced = testutil::random_two_factor(rng, false);
        const auto fit = estimators::fit_two_unbalanced(unbalanced, interaction, 1.0);
        check_constraints(unbalanced, fit, 1e-9);
    }
}

TEST_CASE("shift and scale equivariance") {
    const auto d = example("example3");
    const auto base = estimators::fit_two_unbalanced(d, true, kSigma0Ex3);

    for (double c : {-100.0, 0.5, 1e3}) {
        std::vector<std::vector<std::vector<double>>> obs(2, std::vector<std::vector<double>>(2));
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < 2; ++j)
                for (double v : d.cell(i, j)) obs[i][j].push_back(v + c);
        const auto shifted =
            estimators::fit_two_unbalanced(design::TwoFactorData(obs), true, kSigma0Ex3);
        CHECK(near_abs(shifted.mu.value, base.mu.value + c, 1e-9 * std::max(1.0, std::abs(c))));
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < 2; ++j) {
                CHECK(near_abs(shifted.a[i].value, base.a[i].value, 1e-8));
                CHECK(near_abs(shifted.b[j].value, base.b[j].value, 1e-8));
                CHECK(near_abs(shifted.ab[i][j].value, base.ab[i][j].value, 1e-8));
            }
    }

    const double k = 3.5;
    std::vector<std::vector<std::vector<double>>> obs(2, std::vector<std::vector<double>>(2));
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j)
            for (double v : d.cell(i, j)) obs[i][j].push_back(v * k);
    const auto scaled =
        estimators::fit_two_unbalanced(design::TwoFactorData(obs), true, kSigma0Ex3 * k);
    CHECK(near_abs(scaled.mu.value, base.mu.value * k, 1e-8));
    CHECK(near_abs(scaled.a[0].value, base.a[0].value * k, 1e-8));
    CHECK(near_abs(scaled.mu.ci(0.95).half_width(), base.mu.ci(0.95).half_width() * k, 1e-8));
    CHECK(near_abs(scaled.ab[1][0].ci(0.95).half_width(),
                   base.ab[1][0].ci(0.95).half_width() * k, 1e-8));
}

TEST_CASE("residual groups") {
    const auto d1 = example1();
    const auto groups1 = estimators::residual_groups(d1, estimators::fit_single_means(d1));
    REQUIRE(groups1.size() == 3);
    CHECK(groups1[0].size() == 5);
    CHECK(near_abs(groups1[0][0], 2.91 - 4.302, 1e-9));
    for (const auto& g : groups1) {
        double s = 0.0;
        for (double v : g) s += v;
        CHECK(near_abs(s, 0.0, 1e-9));
    }

    const auto d3 = example("example3");
    const auto fit = estimators::fit_two_unbalanced(d3, true, kSigma0Ex3);
    const auto groups3 = estimators::residual_groups(d3, fit);
    REQUIRE(groups3.size() == 4);
    CHECK(near_abs(groups3[2][0], 42.0 - 47.5, 1e-9));
    CHECK(near_abs(groups3[2][1], 53.0 - 47.5, 1e-9));
}

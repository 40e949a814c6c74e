#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "ufe/design_data.hpp"
#include "ufe/linsolve.hpp"

namespace testutil {

inline bool near_abs(double x, double expected, double tol) {
    return std::abs(x - expected) <= tol;
}

// Largest violation of the four Penrose conditions, relative to ||A||_F
// (absolute for a zero matrix). Independent oracle for pinv.
inline double penrose_defect(const ufe::linsolve::Matrix& a, const ufe::linsolve::Matrix& ap) {
    const double scale = std::max(1.0, a.norm());
    double defect = 0.0;
    defect = std::max(defect, (a * ap * a - a).norm() / scale);
    defect = std::max(defect, (ap * a * ap - ap).norm() / scale);
    defect = std::max(defect, ((a * ap) - (a * ap).transpose()).norm() / scale);
    defect = std::max(defect, ((ap * a) - (ap * a).transpose()).norm() / scale);
    return defect;
}

inline std::vector<std::vector<double>> random_single_rows(std::mt19937& rng, bool balanced) {
    std::uniform_int_distribution<int> levels(2, 4), reps(1, 5);
    std::uniform_real_distribution<double> value(-10.0, 10.0);
    const int r = levels(rng);
    const int m0 = reps(rng);
    std::vector<std::vector<double>> rows(r);
    for (auto& row : rows) {
        const int m = balanced ? m0 : reps(rng);
        for (int k = 0; k < m; ++k) row.push_back(value(rng));
    }
    return rows;
}

inline ufe::design::TwoFactorData random_two_factor(std::mt19937& rng, bool balanced) {
    std::uniform_int_distribution<int> levels(2, 4), reps(1, 5);
    std::uniform_real_distribution<double> value(-10.0, 10.0);
    const int r = levels(rng), s = levels(rng);
    const int m0 = reps(rng);
    std::vector<std::vector<std::vector<double>>> obs(
        r, std::vector<std::vector<double>>(static_cast<std::size_t>(s)));
    bool has_two = false;
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < s; ++j) {
            const int m = balanced ? m0 : reps(rng);
            if (m >= 2) has_two = true;
            for (int k = 0; k < m; ++k) obs[i][j].push_back(value(rng));
        }
    if (!balanced && !has_two)
        obs[0][0].push_back(value(rng));  // keep at least one cell testable
    return ufe::design::TwoFactorData(std::move(obs));
}

}  // namespace testutil

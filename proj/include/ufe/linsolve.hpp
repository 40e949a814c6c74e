#pragma once

#include <Eigen/Dense>

#include "ufe/errors.hpp"

namespace ufe::linsolve {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Moore-Penrose pseudoinverse via SVD. Singular values below
// rel_tol * sigma_max are treated as zero; rel_tol < 0 selects the default
// max(rows, cols) * machine epsilon.
Matrix pinv(const Matrix& a, double rel_tol = -1.0);

// Minimizer of ||Z - X beta||^2 subject to C beta = d.
struct ConstrainedLsSolution {
    Vector beta;
    Vector lambda;              // Lagrange multipliers, one per constraint row
    Matrix q;                   // (X^T X)^+ X^T, p x N; scale source for estimator laws
    double constraint_residual; // max |C beta - d|
};

// Solves the augmented KKT system [[2X^T X, C^T], [C, 0]] [beta; lambda] =
// [2 X^T Z; d] with a minimum-norm pseudoinverse solve; redundant constraint
// rows are fine. An empty C (k = 0) gives the minimum-norm unconstrained fit.
// Throws InfeasibleError when no solution satisfies the constraints.
ConstrainedLsSolution solve_constrained_ls(const Matrix& x, const Vector& z, const Matrix& c,
                                           const Vector& d);

}  // namespace ufe::linsolve

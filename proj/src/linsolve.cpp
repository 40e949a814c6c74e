#include "ufe/linsolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ufe::linsolve {

namespace {

void check_finite(const Matrix& m, const char* what) {
    if (!m.allFinite()) throw InvalidInputError(std::string(what) + " has non-finite entries");
}

constexpr double kConstraintTol = 1e-8;

}  // namespace

Matrix pinv(const Matrix& a, double rel_tol) {
    check_finite(a, "pinv: matrix");
    if (a.size() == 0) return Matrix(a.cols(), a.rows());
    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (rel_tol < 0.0)
        rel_tol = static_cast<double>(std::max(a.rows(), a.cols())) *
                  std::numeric_limits<double>::epsilon();
    const auto& sv = svd.singularValues();
    const double cutoff = sv.size() > 0 ? rel_tol * sv(0) : 0.0;
    Vector inv_sv(sv.size());
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        inv_sv(i) = sv(i) > cutoff && sv(i) > 0.0 ? 1.0 / sv(i) : 0.0;
    return svd.matrixV() * inv_sv.asDiagonal() * svd.matrixU().transpose();
}

ConstrainedLsSolution solve_constrained_ls(const Matrix& x, const Vector& z, const Matrix& c,
                                           const Vector& d) {
    check_finite(x, "solve_constrained_ls: X");
    check_finite(c, "solve_constrained_ls: C");
    if (!z.allFinite() || !d.allFinite())
        throw InvalidInputError("solve_constrained_ls: non-finite right-hand side");
    const Eigen::Index n = x.rows(), p = x.cols(), k = c.rows();
    if (z.size() != n) throw InvalidInputError("solve_constrained_ls: Z length mismatch");
    if (k > 0 && c.cols() != p) throw InvalidInputError("solve_constrained_ls: C width mismatch");
    if (d.size() != k) throw InvalidInputError("solve_constrained_ls: d length mismatch");

    const Matrix xtx = x.transpose() * x;
    const Vector xtz = x.transpose() * z;
    const Matrix xtx_pinv = pinv(xtx);

    ConstrainedLsSolution sol;
    sol.q = xtx_pinv * x.transpose();

    if (k == 0) {
        sol.beta = sol.q * z;
        sol.lambda = Vector(0);
        sol.constraint_residual = 0.0;
        return sol;
    }

    Matrix kkt(p + k, p + k);
    kkt.setZero();
    kkt.topLeftCorner(p, p) = 2.0 * xtx;
    kkt.topRightCorner(p, k) = c.transpose();
    kkt.bottomLeftCorner(k, p) = c;
    Vector rhs(p + k);
    rhs.head(p) = 2.0 * xtz;
    rhs.tail(k) = d;

    // The KKT matrix is singular whenever constraints are redundant; the
    // minimum-norm solve still pins beta down as long as null(X) and null(C)
    // meet only at zero.
    const Vector v = pinv(kkt) * rhs;
    sol.beta = v.head(p);
    sol.lambda = v.tail(k);
    sol.constraint_residual = k > 0 ? (c * sol.beta - d).cwiseAbs().maxCoeff() : 0.0;

    const double scale = std::max(1.0, d.size() > 0 ? d.cwiseAbs().maxCoeff() : 0.0);
    if (!(sol.constraint_residual <= kConstraintTol * scale))
        throw InfeasibleError("constraints cannot be satisfied", sol.constraint_residual);

    // Stationarity cross-check against the multiplier form
    // beta = (X^T X)^+ X^T Z - (1/2)(X^T X)^+ C^T lambda, which determines
    // beta up to null(X^T X): compare through X^T X.
    const Vector beta_formula = sol.q * z - 0.5 * xtx_pinv * c.transpose() * sol.lambda;
    const double drift = (xtx * (sol.beta - beta_formula)).cwiseAbs().maxCoeff();
    const double ref = std::max(1.0, xtz.cwiseAbs().maxCoeff());
    if (!(drift <= 1e-7 * ref))
        throw Error("constrained solve failed the stationarity cross-check");

    return sol;
}

}  // namespace ufe::linsolve

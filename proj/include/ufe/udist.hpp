#pragma once

#include <cmath>

#include "ufe/errors.hpp"

namespace ufe::udist {

// Normal uncertainty distribution N(e, sigma) with CDF
//   Phi(z) = (1 + exp(pi (e - z) / (sqrt(3) sigma)))^-1
// Heavy-tailed (logistic-shaped); sigma plays the role of the standard deviation.
struct NormalUncertain {
    double e = 0.0;      // location
    double sigma = 1.0;  // scale, > 0

    NormalUncertain(double location, double scale) : e(location), sigma(scale) {
        if (!std::isfinite(location) || !std::isfinite(scale) || scale <= 0.0)
            throw InvalidInputError("NormalUncertain requires finite location and sigma > 0");
    }
};

// Closed interval [lo, hi].
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double width() const { return hi - lo; }
    double center() const { return 0.5 * (lo + hi); }
    double half_width() const { return 0.5 * (hi - lo); }
    // Strict exceedance: boundary points count as inside.
    bool outside(double x) const { return x < lo || x > hi; }

    bool operator==(const Interval&) const = default;
};

// CDF value in (0, 1).
double cdf(double z, const NormalUncertain& d);

// Quantile: inverse of cdf on alpha in (0, 1).
double inv(double alpha, const NormalUncertain& d);

// Two-sided confidence interval est +/- sigma * (sqrt(3)/pi) * ln((1+alpha)/(1-alpha)).
Interval confidence_interval(double est, double sigma, double alpha);

// Acceptance interval [inv(alpha/2), inv(1-alpha/2)] of N(center, sigma);
// symmetric about center. At alpha = 0.05 its half-width equals the 95%
// confidence half-width.
Interval acceptance_interval(double center, double sigma, double alpha);

}  // namespace ufe::udist

#include "ufe/udist.hpp"

#include <numbers>

namespace ufe::udist {

namespace {

constexpr double kScale = std::numbers::sqrt3 / std::numbers::pi;

void check_alpha(double alpha) {
    if (!std::isfinite(alpha) || alpha <= 0.0 || alpha >= 1.0)
        throw InvalidInputError("alpha must lie in (0, 1)");
}

// ln(alpha / (1 - alpha)), evaluated without forming the ratio so extreme
// quantiles keep full precision.
double log_odds(double alpha) { return std::log(alpha) - std::log1p(-alpha); }

// Half-width sigma * (sqrt(3)/pi) * ln((1 - tail) / tail). Both interval kinds
// funnel through here: a CI at confidence alpha and an AI at significance
// 1 - alpha have the same tail mass, so their half-widths agree bit for bit.
double half_width(double sigma, double tail) {
    return sigma * kScale * (std::log1p(-tail) - std::log(tail));
}

}  // namespace

double cdf(double z, const NormalUncertain& d) {
    if (!std::isfinite(z)) throw InvalidInputError("cdf: z must be finite");
    const double t = (d.e - z) / (kScale * d.sigma);
    // Logistic in -t; branch on the sign so exp never overflows far in a tail.
    if (t <= 0.0) return 1.0 / (1.0 + std::exp(t));
    const double u = std::exp(-t);
    return u / (1.0 + u);
}

double inv(double alpha, const NormalUncertain& d) {
    check_alpha(alpha);
    return d.e + kScale * d.sigma * log_odds(alpha);
}

Interval confidence_interval(double est, double sigma, double alpha) {
    check_alpha(alpha);
    if (!std::isfinite(est)) throw InvalidInputError("confidence_interval: estimate must be finite");
    if (!std::isfinite(sigma) || sigma <= 0.0)
        throw InvalidInputError("confidence_interval: sigma must be > 0");
    const double h = half_width(sigma, 0.5 * (1.0 - alpha));
    return {est - h, est + h};
}

Interval acceptance_interval(double center, double sigma, double alpha) {
    check_alpha(alpha);
    if (!std::isfinite(center)) throw InvalidInputError("acceptance_interval: center must be finite");
    if (!std::isfinite(sigma) || sigma <= 0.0)
        throw InvalidInputError("acceptance_interval: sigma must be > 0");
    const double h = half_width(sigma, 0.5 * alpha);
    return {center - h, center + h};
}

}  // namespace ufe::udist

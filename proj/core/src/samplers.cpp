#include "decouplenet/samplers.hpp"

#include <cmath>
#include <limits>

#include "decouplenet/errors.hpp"
#include "decouplenet/special.hpp"

namespace dcn::num {

double sample_gamma(double shape, Rng& rng) {
    if (!(shape > 0.0))
        throw DomainError("sample_gamma: shape must be positive");
    if (shape < 1.0) {
        // Boost the shape and correct with a power of an independent uniform.
        const double g = sample_gamma(shape + 1.0, rng);
        return g * std::pow(rng.uniform_open(), 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = std_normal_quantile(rng.uniform_open());
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = rng.uniform_open();
        const double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2)
            return d * v;
        if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v)))
            return d * v;
    }
}

double sample_positive_stable(double alpha, Rng& rng) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw DomainError("sample_positive_stable: alpha must lie in (0,1)");
    const double theta = M_PI * rng.uniform_open();
    const double e = rng.exponential();
    return std::sin(alpha * theta) / std::pow(std::sin(theta), 1.0 / alpha) *
           std::pow(std::sin((1.0 - alpha) * theta) / e, (1.0 - alpha) / alpha);
}

double sample_exp_tilted_stable(double alpha, double tilt, Rng& rng) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw DomainError("sample_exp_tilted_stable: alpha must lie in (0,1)");
    if (!(tilt >= 0.0))
        throw DomainError("sample_exp_tilted_stable: tilt must be non-negative");
    const double m = std::max(1.0, std::ceil(std::pow(tilt, alpha)));
    const double scale = std::pow(m, -1.0 / alpha);
    double total = 0.0;
    for (double i = 0.0; i < m; ++i) {
        for (long trial = 0;; ++trial) {
            if (trial > 10000)
                throw NumericError("sample_exp_tilted_stable: rejection loop failed to accept");
            const double s = scale * sample_positive_stable(alpha, rng);
            if (std::log(rng.uniform_open()) <= -tilt * s) {
                total += s;
                break;
            }
        }
    }
    return total;
}

std::uint64_t sample_log_series(double p, Rng& rng) {
    if (!(p > 0.0 && p < 1.0))
        throw DomainError("sample_log_series: p must lie in (0,1)");
    const double r = std::log1p(-p);                          // ln(1-p)
    const double ln_y = std::log1p(-std::exp(rng.uniform_open() * r)); // ln(1 - (1-p)^U)
    const double q = std::log(rng.uniform_open()) / ln_y;     // geometric inversion
    if (q >= 9.0e18)
        return std::numeric_limits<std::uint64_t>::max();
    return 1 + static_cast<std::uint64_t>(q);
}

} // namespace dcn::num

#pragma once

#include <cstdint>

#include "decouplenet/rng.hpp"

namespace dcn::num {

// One Gamma(shape, rate = 1) draw, shape > 0 (Marsaglia-Tsang).
double sample_gamma(double shape, Rng& rng);

// One positive alpha-stable draw with Laplace transform exp(-t^alpha),
// alpha in (0,1) (Kanter / Chambers-Mallows-Stuck representation).
double sample_positive_stable(double alpha, Rng& rng);

// One exponentially tilted positive stable draw with Laplace transform
// exp(-((tilt + t)^alpha - tilt^alpha)), alpha in (0,1), tilt >= 0.
//
// The draw is assembled from m = max(1, ceil(tilt^alpha)) independent pieces,
// each a rejection-sampled scaled stable; the per-piece acceptance rate is at
// least e^{-1}, so the expected number of rejections stays bounded for every
// tilt.  tilt = 0 reduces to the plain positive stable law.
double sample_exp_tilted_stable(double alpha, double tilt, Rng& rng);

// One logarithmic-series draw on {1,2,...} with P(V=k) = -p^k / (k ln(1-p)),
// p in (0,1).  Constant time: V | Y is geometric with Y = 1 - (1-p)^U.
std::uint64_t sample_log_series(double p, Rng& rng);

} // namespace dcn::num

#pragma once

#include "decouplenet/copula.hpp"
#include "decouplenet/rng.hpp"
#include "decouplenet/sample.hpp"

namespace dcn::rosenblatt {

// Sequential conditional-probability transform: component 1 is the identity,
// component j maps U_j through the conditional distribution given the first
// j-1 coordinates. Under the matching model the output is iid uniform on
// (0,1)^d. Closed forms exist for the independence, Clayton, normal and t
// families only; anything else raises DomainError. The input must lie
// strictly inside the unit hypercube.
Sample transform(const copula::CopulaSpec& spec, const Sample& u);

bool supported(const copula::CopulaSpec& spec);

struct UniformityCheck {
    double score;      // CvM distance of the transformed sample from uniformity
    double percentile; // fraction of a 200-replicate uniform null at or below score
};

// Samples n points from data_spec, pushes them through the transform_spec
// transform and locates the CvM score within a simulated null distribution of
// genuine uniform samples (200 replicates of the same size, derived
// deterministically from rng). A percentile near 1 flags non-uniformity.
UniformityCheck uniformity_check(const copula::CopulaSpec& transform_spec,
                                 const copula::CopulaSpec& data_spec, Eigen::Index n, Rng& rng);

inline UniformityCheck uniformity_check(const copula::CopulaSpec& spec, Eigen::Index n,
                                        Rng& rng) {
    return uniformity_check(spec, spec, n, rng);
}

} // namespace dcn::rosenblatt

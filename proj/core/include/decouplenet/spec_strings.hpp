#pragma once

#include <string>
#include <variant>

#include "decouplenet/copula.hpp"

namespace dcn::spec {

// Textual model specifications, e.g.
//
//   independence(d=3)
//   clayton(d=3,tau=0.4)            gumbel(d=5,theta=2)
//   frank(d=2,tau=-0.3)             normal(d=3,rho=0.5)
//   normal(d=5,pseed=7)             t(d=3,nu=4,tau=0.5)
//   nested-clayton(d=5,tau0=0.2,g=1+2:0.4,g=3+4+5:0.6)
//
// One-parameter families accept exactly one of tau= or theta= (rho= for the
// elliptical ones); pseed=<integer> draws a random correlation matrix from a
// dedicated generator seeded with that value, so the spec stays reproducible.
// Group members in nested-clayton are 1-based coordinate indices joined by
// '+', followed by ':' and the group's Kendall tau. The empirical copula is
// data-backed and has no spec string.
copula::CopulaSpec parse_copula(const std::string& text);

// Canonical, re-parseable form (theta/rho parameterization). Throws
// FormatError for specs that cannot be expressed as a string: empirical
// copulas and unstructured correlation matrices.
std::string format_copula(const copula::CopulaSpec& spec);

// A candidate model for assessment: either a fixed spec string or
// "fit:<family>" with family one of clayton, frank, gumbel, normal,
// normal-unstructured, t.
struct Candidate {
    std::string label;
    std::variant<copula::CopulaSpec, copula::FitFamily> model;

    bool fitted() const { return model.index() == 1; }
};

Candidate parse_candidate(const std::string& text);

} // namespace dcn::spec

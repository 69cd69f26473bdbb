#include "decouplenet/spec_strings.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <optional>
#include <utility>
#include <vector>

#include "decouplenet/errors.hpp"
#include "decouplenet/format.hpp"
#include "decouplenet/linalg.hpp"
#include "decouplenet/rng.hpp"

namespace dcn::spec {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a])))
        ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1])))
        --b;
    return s.substr(a, b - a);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

double parse_number(const std::string& text, const std::string& what) {
    const std::string t = trim(text);
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size())
        throw DomainError("spec string: cannot read a number for " + what + " from '" + text +
                          "'");
    return v;
}

long parse_integer(const std::string& text, const std::string& what) {
    const std::string t = trim(text);
    char* end = nullptr;
    const long v = std::strtol(t.c_str(), &end, 10);
    if (t.empty() || end != t.c_str() + t.size())
        throw DomainError("spec string: cannot read an integer for " + what + " from '" + text +
                          "'");
    return v;
}

// key=value arguments with duplicate detection; 'g' may repeat.
class Args {
  public:
    Args(const std::string& inner, std::string family) : family_(std::move(family)) {
        std::size_t pos = 0;
        while (pos < inner.size()) {
            std::size_t comma = inner.find(',', pos);
            if (comma == std::string::npos)
                comma = inner.size();
            const std::string tok = trim(inner.substr(pos, comma - pos));
            pos = comma + 1;
            if (tok.empty())
                continue;
            const std::size_t eq = tok.find('=');
            if (eq == std::string::npos)
                throw DomainError("spec string: expected key=value, got '" + tok + "'");
            items_.emplace_back(lower(trim(tok.substr(0, eq))), trim(tok.substr(eq + 1)));
        }
    }

    std::optional<std::string> take(const std::string& key) {
        std::optional<std::string> found;
        for (auto it = items_.begin(); it != items_.end();) {
            if (it->first == key) {
                if (found)
                    throw DomainError("spec string: duplicate key '" + key + "' in " + family_);
                found = it->second;
                it = items_.erase(it);
            } else {
                ++it;
            }
        }
        return found;
    }

    std::vector<std::string> take_all(const std::string& key) {
        std::vector<std::string> found;
        for (auto it = items_.begin(); it != items_.end();) {
            if (it->first == key) {
                found.push_back(it->second);
                it = items_.erase(it);
            } else {
                ++it;
            }
        }
        return found;
    }

    void finish() const {
        if (!items_.empty())
            throw DomainError("spec string: unknown key '" + items_.front().first + "' for " +
                              family_);
    }

  private:
    std::string family_;
    std::vector<std::pair<std::string, std::string>> items_;
};

int require_dim(Args& args, const std::string& family) {
    const auto d = args.take("d");
    if (!d)
        throw DomainError("spec string: " + family + " requires d=<dimension>");
    const long v = parse_integer(*d, "d");
    if (v < 2 || v > 10000)
        throw DomainError("spec string: d must be between 2 and 10000");
    return static_cast<int>(v);
}

// Exactly one of tau= / theta= for the one-parameter Archimedean families.
double archimedean_theta(Args& args, copula::Family family, const std::string& name) {
    const auto tau = args.take("tau");
    const auto theta = args.take("theta");
    if (tau.has_value() == theta.has_value())
        throw DomainError("spec string: " + name + " requires exactly one of tau= or theta=");
    if (theta)
        return parse_number(*theta, "theta");
    return copula::tau_to_param(family, parse_number(*tau, "tau"));
}

num::CorrelationMatrix correlation_argument(Args& args, int d, const std::string& name) {
    const auto rho = args.take("rho");
    const auto tau = args.take("tau");
    const auto pseed = args.take("pseed");
    const int given = rho.has_value() + tau.has_value() + pseed.has_value();
    if (given != 1)
        throw DomainError("spec string: " + name +
                          " requires exactly one of rho=, tau= or pseed=");
    if (pseed) {
        Rng prng(static_cast<std::uint64_t>(parse_integer(*pseed, "pseed")));
        return num::random_correlation_matrix(d, prng);
    }
    const double r = rho ? parse_number(*rho, "rho")
                         : copula::tau_to_param(copula::Family::normal, parse_number(*tau, "tau"));
    return num::CorrelationMatrix::exchangeable(d, r);
}

copula::NestedClaytonGroup parse_group(const std::string& text) {
    const std::size_t colon = text.rfind(':');
    if (colon == std::string::npos)
        throw DomainError("spec string: group must look like 1+2:0.4, got '" + text + "'");
    copula::NestedClaytonGroup g;
    g.theta = copula::tau_to_param(copula::Family::clayton,
                                   parse_number(text.substr(colon + 1), "group tau"));
    std::size_t pos = 0;
    const std::string members = text.substr(0, colon);
    while (pos <= members.size()) {
        std::size_t plus = members.find('+', pos);
        if (plus == std::string::npos)
            plus = members.size();
        const long idx = parse_integer(members.substr(pos, plus - pos), "group member");
        if (idx < 1)
            throw DomainError("spec string: group members are 1-based coordinate indices");
        g.members.push_back(static_cast<int>(idx - 1));
        pos = plus + 1;
    }
    return g;
}

bool matrix_is_exchangeable(const Eigen::MatrixXd& P) {
    const double r = P(0, 1);
    for (Eigen::Index i = 0; i < P.rows(); ++i)
        for (Eigen::Index j = 0; j < P.cols(); ++j)
            if (i != j && P(i, j) != r)
                return false;
    return true;
}

} // namespace

copula::CopulaSpec parse_copula(const std::string& text) {
    const std::string t = trim(text);
    const std::size_t open = t.find('(');
    if (open == std::string::npos || t.back() != ')')
        throw DomainError("spec string: expected family(key=value,...), got '" + text + "'");
    const std::string name = lower(trim(t.substr(0, open)));
    Args args(t.substr(open + 1, t.size() - open - 2), name);

    copula::CopulaSpec result;
    if (name == "independence") {
        result = copula::Independence{require_dim(args, name)};
    } else if (name == "clayton") {
        const int d = require_dim(args, name);
        result = copula::Clayton{d, archimedean_theta(args, copula::Family::clayton, name)};
    } else if (name == "frank") {
        const int d = require_dim(args, name);
        result = copula::Frank{d, archimedean_theta(args, copula::Family::frank, name)};
    } else if (name == "gumbel") {
        const int d = require_dim(args, name);
        result = copula::Gumbel{d, archimedean_theta(args, copula::Family::gumbel, name)};
    } else if (name == "normal") {
        const int d = require_dim(args, name);
        const auto rho = args.take("rho");
        const auto tau = args.take("tau");
        const auto pseed = args.take("pseed");
        const int given = rho.has_value() + tau.has_value() + pseed.has_value();
        if (given != 1)
            throw DomainError("spec string: normal requires exactly one of rho=, tau= or pseed=");
        if (pseed) {
            Rng prng(static_cast<std::uint64_t>(parse_integer(*pseed, "pseed")));
            result = copula::Normal{num::random_correlation_matrix(d, prng)};
        } else {
            // rho=/tau= name a single pairwise dependence, so keep the
            // exchangeable structure explicit instead of expanding it to a
            // full matrix.
            const double r = rho ? parse_number(*rho, "rho")
                                 : copula::tau_to_param(copula::Family::normal,
                                                        parse_number(*tau, "tau"));
            result = copula::NormalExchangeable{d, r};
        }
    } else if (name == "t" || name == "student-t") {
        const int d = require_dim(args, name);
        const auto nu = args.take("nu");
        if (!nu)
            throw DomainError("spec string: t requires nu=<degrees of freedom>");
        result = copula::StudentT{parse_number(*nu, "nu"), correlation_argument(args, d, "t")};
    } else if (name == "nested-clayton") {
        const int d = require_dim(args, name);
        const auto tau0 = args.take("tau0");
        if (!tau0)
            throw DomainError("spec string: nested-clayton requires tau0=<root tau>");
        copula::NestedClayton c;
        c.d = d;
        c.theta0 =
            copula::tau_to_param(copula::Family::clayton, parse_number(*tau0, "tau0"));
        for (const std::string& g : args.take_all("g"))
            c.groups.push_back(parse_group(g));
        result = std::move(c);
    } else if (name == "empirical") {
        throw DomainError(
            "spec string: the empirical copula is data-backed and has no spec string");
    } else {
        throw DomainError("spec string: unknown family '" + name + "'");
    }
    args.finish();
    copula::validate(result);
    return result;
}

namespace {

template <class... Ts> struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts> overloaded(Ts...) -> overloaded<Ts...>;

} // namespace

std::string format_copula(const copula::CopulaSpec& spec) {
    using copula::Family;
    using copula::param_to_tau;
    return std::visit(
        overloaded{
            [](const copula::Independence& c) {
                return "independence(d=" + std::to_string(c.d) + ")";
            },
            [](const copula::Clayton& c) {
                return "clayton(d=" + std::to_string(c.d) + ",theta=" + format_double(c.theta) +
                       ")";
            },
            [](const copula::Frank& c) {
                return "frank(d=" + std::to_string(c.d) + ",theta=" + format_double(c.theta) +
                       ")";
            },
            [](const copula::Gumbel& c) {
                return "gumbel(d=" + std::to_string(c.d) + ",theta=" + format_double(c.theta) +
                       ")";
            },
            [](const copula::Normal& c) -> std::string {
                if (!matrix_is_exchangeable(c.P.matrix()))
                    throw FormatError("format_copula: unstructured correlation matrices have no "
                                      "spec string");
                return "normal(d=" + std::to_string(c.P.dim()) +
                       ",rho=" + format_double(c.P.matrix()(0, 1)) + ")";
            },
            [](const copula::NormalExchangeable& c) {
                return "normal(d=" + std::to_string(c.d) + ",rho=" + format_double(c.rho) + ")";
            },
            [](const copula::StudentT& c) -> std::string {
                if (!matrix_is_exchangeable(c.P.matrix()))
                    throw FormatError("format_copula: unstructured correlation matrices have no "
                                      "spec string");
                return "t(d=" + std::to_string(c.P.dim()) + ",nu=" + format_double(c.nu) +
                       ",rho=" + format_double(c.P.matrix()(0, 1)) + ")";
            },
            [](const copula::NestedClayton& c) {
                std::string s = "nested-clayton(d=" + std::to_string(c.d) +
                                ",tau0=" + format_double(param_to_tau(Family::clayton, c.theta0));
                for (const auto& g : c.groups) {
                    s += ",g=";
                    for (std::size_t k = 0; k < g.members.size(); ++k)
                        s += (k ? "+" : "") + std::to_string(g.members[k] + 1);
                    s += ":" + format_double(param_to_tau(Family::clayton, g.theta));
                }
                return s + ")";
            },
            [](const copula::EmpiricalCopula&) -> std::string {
                throw FormatError("format_copula: the empirical copula has no spec string");
            },
        },
        spec);
}

Candidate parse_candidate(const std::string& text) {
    const std::string t = trim(text);
    if (t.rfind("fit:", 0) == 0) {
        const std::string name = lower(trim(t.substr(4)));
        copula::FitFamily family;
        if (name == "clayton")
            family = copula::FitFamily::clayton;
        else if (name == "frank")
            family = copula::FitFamily::frank;
        else if (name == "gumbel")
            family = copula::FitFamily::gumbel;
        else if (name == "normal")
            family = copula::FitFamily::normal_exchangeable;
        else if (name == "normal-unstructured")
            family = copula::FitFamily::normal_unstructured;
        else if (name == "t" || name == "student-t")
            family = copula::FitFamily::student_t;
        else
            throw DomainError("candidate: unknown fit family '" + name +
                              "' (expected clayton, frank, gumbel, normal, normal-unstructured "
                              "or t)");
        return Candidate{"fit:" + copula::fit_family_name(family), family};
    }
    copula::CopulaSpec spec = parse_copula(t);
    std::string lab = copula::label(spec);
    return Candidate{std::move(lab), std::move(spec)};
}

} // namespace dcn::spec

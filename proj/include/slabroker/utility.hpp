#pragma once

#include <cmath>
#include <map>
#include <string>

#include "slabroker/errors.hpp"
#include "slabroker/qos.hpp"

namespace slabroker {

namespace detail {

inline void check_unit_interval(double v, const char* what) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0)
        throw Error(Errc::Domain, std::string(what) + " must lie in [0, 1]");
}

inline void check_shape(double alpha, double beta) {
    if (!std::isfinite(alpha) || alpha < 0.0)
        throw Error(Errc::Domain, "alpha must be finite and non-negative");
    if (!std::isfinite(beta) || beta < 0.0)
        throw Error(Errc::Domain, "beta must be finite and non-negative");
}

}  // namespace detail

// Satisfaction from a utility-driven term at normalized level x. Runs from
// 0 at x=0 to 1 at x=1; alpha bows the curve, beta sharpens it. beta=0
// degenerates to the constant 1.
inline double utility_gain(double x, double alpha, double beta) {
    detail::check_unit_interval(x, "term level");
    detail::check_shape(alpha, beta);
    double xb = std::pow(x, beta);
    return xb * (1.0 + alpha) / (1.0 + alpha * xb);
}

// Satisfaction from a cost-driven term at normalized level y (0 = cheapest).
// Runs from 1 at y=0 to 0 at y=1; beta=0 degenerates to the constant 0.
inline double utility_cost(double y, double alpha, double beta) {
    detail::check_unit_interval(y, "term level");
    detail::check_shape(alpha, beta);
    double yb = std::pow(y, beta);
    return (1.0 - yb) / (1.0 + alpha * yb);
}

// Per-attribute shape of the scalar acceptance utility.
struct AttributeUtility {
    Direction direction{Direction::UtilityDriven};
    double weight{0.0};
    double alpha{0.0};
    double beta{1.0};
};

struct UtilityParams {
    std::map<std::string, AttributeUtility> attributes;

    void validate() const {
        if (attributes.empty())
            throw Error(Errc::AttributeMismatch, "utility params have no attributes");
        double sum = 0.0;
        for (const auto& [name, a] : attributes) {
            detail::check_shape(a.alpha, a.beta);
            if (!std::isfinite(a.weight) || a.weight < 0.0)
                throw Error(Errc::WeightSum,
                            "weight for '" + name + "' must be finite and non-negative");
            sum += a.weight;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw Error(Errc::WeightSum,
                        "weights sum to " + std::to_string(sum) + ", expected 1");
    }
};

// Weighted blend of the per-attribute satisfactions for one set of proposal
// terms. Terms must cover exactly the attributes named by the params.
inline double global_utility(const std::map<std::string, double>& terms,
                             const UtilityParams& params) {
    params.validate();
    for (const auto& [name, value] : terms) {
        (void)value;
        if (!params.attributes.count(name))
            throw Error(Errc::AttributeMismatch, "unexpected term '" + name + "'");
    }
    double sum = 0.0;
    for (const auto& [name, a] : params.attributes) {
        auto it = terms.find(name);
        if (it == terms.end())
            throw Error(Errc::AttributeMismatch, "missing term '" + name + "'");
        double s = a.direction == Direction::UtilityDriven
                       ? utility_gain(it->second, a.alpha, a.beta)
                       : utility_cost(it->second, a.alpha, a.beta);
        sum += a.weight * s;
    }
    return sum;
}

}  // namespace slabroker

#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "slabroker/errors.hpp"

namespace slabroker {

// Whether a larger raw value is better (availability, reliability, throughput)
// or worse (cost, response time).
enum class Direction { UtilityDriven, CostDriven };

inline Direction parse_direction(const std::string& text) {
    if (text == "utility" || text == "utility_driven") return Direction::UtilityDriven;
    if (text == "cost" || text == "cost_driven") return Direction::CostDriven;
    throw Error(Errc::UnknownAttributeDirection, "unrecognized direction '" + text + "'");
}

inline const char* direction_name(Direction d) {
    return d == Direction::UtilityDriven ? "utility" : "cost";
}

struct QosAttributeSpec {
    std::string name;
    Direction direction{Direction::UtilityDriven};
    double weight{0.0};
    std::string unit;
};

struct Offer {
    std::string provider_id;
    std::map<std::string, double> values;  // attribute name -> raw level
};

struct Requirement {
    std::map<std::string, double> values;  // attribute name -> required raw level
};

// Ordering for provider ids: numeric when both sides are plain integers
// ("9" before "10"), lexicographic otherwise. Used for deterministic
// tie-breaks in rankings.
inline bool provider_id_less(const std::string& a, const std::string& b) {
    auto all_digits = [](const std::string& s) {
        return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
            return std::isdigit(c) != 0;
        });
    };
    if (all_digits(a) && all_digits(b)) {
        if (a.size() != b.size()) return a.size() < b.size();
    }
    return a < b;
}

struct Bounds {
    double lower{0.0};
    double upper{0.0};
};

struct NormalizedRow {
    std::string provider_id;
    std::map<std::string, double> values;  // attribute name -> q in [0, 1]
};

struct NormalizedMatrix {
    std::vector<NormalizedRow> rows;          // one per offer, input order kept
    std::map<std::string, double> requirement;  // the requirement's own row
    std::map<std::string, Bounds> bounds;     // scaling bounds per attribute
};

namespace detail {

inline void check_specs(const std::vector<QosAttributeSpec>& specs) {
    if (specs.empty())
        throw Error(Errc::AttributeMismatch, "attribute spec list is empty");
    std::map<std::string, int> seen;
    for (const auto& s : specs) {
        if (s.name.empty())
            throw Error(Errc::AttributeMismatch, "attribute with empty name");
        if (++seen[s.name] > 1)
            throw Error(Errc::AttributeMismatch, "duplicate attribute '" + s.name + "'");
    }
}

inline double fetch(const std::map<std::string, double>& values,
                    const std::string& attribute, const std::string& owner) {
    auto it = values.find(attribute);
    if (it == values.end())
        throw Error(Errc::AttributeMismatch,
                    owner + " is missing attribute '" + attribute + "'");
    if (!std::isfinite(it->second))
        throw Error(Errc::NonFiniteValue,
                    owner + " has non-finite value for '" + attribute + "'");
    return it->second;
}

inline void check_weights(const std::vector<QosAttributeSpec>& specs) {
    double sum = 0.0;
    for (const auto& s : specs) {
        if (!std::isfinite(s.weight) || s.weight < 0.0)
            throw Error(Errc::WeightSum,
                        "weight for '" + s.name + "' must be finite and non-negative");
        sum += s.weight;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw Error(Errc::WeightSum, "weights sum to " + std::to_string(sum) + ", expected 1");
}

}  // namespace detail

// Min-max scaling of offers against the requirement. The bounds for each
// attribute span the offers *and* the requirement, so the requirement widens
// the window when it lies outside the offered range. Utility-driven values
// scale up with the raw level, cost-driven values are mirrored so that 1 is
// always best. A zero-width window maps every value to 1.
inline NormalizedMatrix normalize(const std::vector<Offer>& offers,
                                  const Requirement& requirement,
                                  const std::vector<QosAttributeSpec>& specs) {
    detail::check_specs(specs);
    if (offers.empty())
        throw Error(Errc::EmptyOfferSet, "no offers to normalize");

    NormalizedMatrix out;
    for (const auto& spec : specs) {
        double req = detail::fetch(requirement.values, spec.name, "requirement");
        Bounds b{req, req};
        for (const auto& offer : offers) {
            double v = detail::fetch(offer.values, spec.name, "offer '" + offer.provider_id + "'");
            b.lower = std::min(b.lower, v);
            b.upper = std::max(b.upper, v);
        }
        out.bounds[spec.name] = b;
    }

    auto scale = [&](const QosAttributeSpec& spec, double v) {
        const Bounds& b = out.bounds.at(spec.name);
        double range = b.upper - b.lower;
        if (range == 0.0) return 1.0;
        return spec.direction == Direction::UtilityDriven ? (v - b.lower) / range
                                                          : (b.upper - v) / range;
    };

    out.rows.reserve(offers.size());
    for (const auto& offer : offers) {
        NormalizedRow row;
        row.provider_id = offer.provider_id;
        for (const auto& spec : specs)
            row.values[spec.name] = scale(spec, offer.values.at(spec.name));
        out.rows.push_back(std::move(row));
    }
    for (const auto& spec : specs)
        out.requirement[spec.name] = scale(spec, requirement.values.at(spec.name));
    return out;
}

// Weighted sum of one normalized row. Weights must sum to 1.
inline double aggregate_utility(const std::map<std::string, double>& normalized_row,
                                const std::vector<QosAttributeSpec>& specs) {
    detail::check_specs(specs);
    detail::check_weights(specs);
    double sum = 0.0;
    for (const auto& spec : specs)
        sum += spec.weight * detail::fetch(normalized_row, spec.name, "normalized row");
    return sum;
}

enum class RankMethod { WeightedUtility, Topsis };

inline const char* rank_method_name(RankMethod m) {
    return m == RankMethod::WeightedUtility ? "weighted_utility" : "topsis";
}

struct RankedEntry {
    int rank{0};  // 1-based position after sorting
    std::string provider_id;
    double score{0.0};  // fraction in [0, 1]
};

struct RankingTable {
    RankMethod method{RankMethod::WeightedUtility};
    std::vector<RankedEntry> entries;  // sorted best first
};

namespace detail {

inline void finish_table(RankingTable& table) {
    std::stable_sort(table.entries.begin(), table.entries.end(),
                     [](const RankedEntry& a, const RankedEntry& b) {
                         if (a.score != b.score) return a.score > b.score;
                         return provider_id_less(a.provider_id, b.provider_id);
                     });
    for (std::size_t i = 0; i < table.entries.size(); ++i)
        table.entries[i].rank = static_cast<int>(i) + 1;
}

}  // namespace detail

// Rank offers by weighted normalized utility, best first. Ties break on
// ascending provider id so the result is a deterministic function of the
// inputs.
inline RankingTable select_best(const std::vector<Offer>& offers,
                                const Requirement& requirement,
                                const std::vector<QosAttributeSpec>& specs) {
    NormalizedMatrix matrix = normalize(offers, requirement, specs);
    detail::check_weights(specs);
    RankingTable table;
    table.method = RankMethod::WeightedUtility;
    table.entries.reserve(matrix.rows.size());
    for (const auto& row : matrix.rows) {
        double score = 0.0;
        for (const auto& spec : specs) score += spec.weight * row.values.at(spec.name);
        table.entries.push_back(RankedEntry{0, row.provider_id, score});
    }
    detail::finish_table(table);
    return table;
}

// Closeness-to-ideal ranking over the same normalized matrix the weighted
// ranking uses. Each row is weighted, the per-attribute best/worst of the
// weighted values form the ideal and negative-ideal points, and the score is
// the relative closeness S- / (S+ + S-). A row coinciding with both points
// (all attributes degenerate) scores 1.
inline RankingTable topsis_rank(const std::vector<Offer>& offers,
                                const Requirement& requirement,
                                const std::vector<QosAttributeSpec>& specs) {
    if (offers.size() < 2)
        throw Error(Errc::TooFewOffers, "closeness ranking needs at least 2 offers");
    NormalizedMatrix matrix = normalize(offers, requirement, specs);
    detail::check_weights(specs);

    std::map<std::string, Bounds> weighted_extent;
    for (const auto& spec : specs) {
        Bounds b{std::numeric_limits<double>::infinity(),
                 -std::numeric_limits<double>::infinity()};
        for (const auto& row : matrix.rows) {
            double v = spec.weight * row.values.at(spec.name);
            b.lower = std::min(b.lower, v);
            b.upper = std::max(b.upper, v);
        }
        weighted_extent[spec.name] = b;
    }

    RankingTable table;
    table.method = RankMethod::Topsis;
    table.entries.reserve(matrix.rows.size());
    for (const auto& row : matrix.rows) {
        double to_ideal = 0.0;
        double to_worst = 0.0;
        for (const auto& spec : specs) {
            double v = spec.weight * row.values.at(spec.name);
            const Bounds& b = weighted_extent.at(spec.name);
            to_ideal += (v - b.upper) * (v - b.upper);
            to_worst += (v - b.lower) * (v - b.lower);
        }
        double splus = std::sqrt(to_ideal);
        double sminus = std::sqrt(to_worst);
        double denom = splus + sminus;
        double score = denom == 0.0 ? 1.0 : sminus / denom;
        table.entries.push_back(RankedEntry{0, row.provider_id, score});
    }
    detail::finish_table(table);
    return table;
}

// Per-attribute flags telling whether one normalized row meets or beats the
// requirement's own normalized level.
inline std::map<std::string, bool> satisfaction_flags(const NormalizedMatrix& matrix,
                                                      std::size_t row_index) {
    if (row_index >= matrix.rows.size())
        throw Error(Errc::Range, "row index out of range");
    std::map<std::string, bool> flags;
    for (const auto& [name, c] : matrix.requirement)
        flags[name] = matrix.rows[row_index].values.at(name) >= c;
    return flags;
}

}  // namespace slabroker

#pragma once

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <nlohmann/json.hpp>

#include "slabroker/errors.hpp"
#include "slabroker/negotiation.hpp"
#include "slabroker/qos.hpp"

namespace slabroker {

struct QosRequirementEntry {
    std::string name;
    double min_value{0.0};
    double max_value{0.0};
    double preferred_value{0.0};
    std::string unit;
    double weight{0.0};
};

// A consumer's request template: per-attribute acceptable window, preferred
// level, and importance weight.
struct SlaRequestDoc {
    std::string service_name;
    std::string consumer_id;
    std::vector<QosRequirementEntry> entries;

    const QosRequirementEntry* find(const std::string& name) const {
        for (const auto& e : entries)
            if (e.name == name) return &e;
        return nullptr;
    }

    void validate() const {
        if (service_name.empty())
            throw Error(Errc::Schema, "request has no service name");
        if (entries.empty())
            throw Error(Errc::Schema, "request has no attributes");
        double weight_sum = 0.0;
        std::map<std::string, int> seen;
        for (const auto& e : entries) {
            if (e.name.empty()) throw Error(Errc::Schema, "attribute with empty name");
            if (++seen[e.name] > 1)
                throw Error(Errc::Schema, "duplicate attribute '" + e.name + "'");
            for (double v : {e.min_value, e.max_value, e.preferred_value, e.weight})
                if (!std::isfinite(v))
                    throw Error(Errc::Schema, "non-finite value for '" + e.name + "'");
            if (e.min_value > e.max_value)
                throw Error(Errc::Range, "'" + e.name + "' has min-value above max-value");
            if (e.preferred_value < e.min_value || e.preferred_value > e.max_value)
                throw Error(Errc::Range,
                            "'" + e.name + "' preferred-value outside [min-value, max-value]");
            if (e.weight < 0.0)
                throw Error(Errc::Range, "'" + e.name + "' has negative weight");
            weight_sum += e.weight;
        }
        if (std::abs(weight_sum - 1.0) > 1e-9)
            throw Error(Errc::Range,
                        "attribute weights sum to " + std::to_string(weight_sum) + ", expected 1");
    }
};

// Maps attribute names to directions. Ships with the conventional readings
// for the common attributes; config may add or override entries. Lookup is
// case-insensitive.
struct DirectionRegistry {
    std::map<std::string, Direction> overrides;

    static std::string fold(const std::string& name) {
        std::string out;
        out.reserve(name.size());
        for (unsigned char c : name) out.push_back(static_cast<char>(std::tolower(c)));
        return out;
    }

    Direction lookup(const std::string& name) const {
        std::string key = fold(name);
        auto it = overrides.find(key);
        if (it != overrides.end()) return it->second;
        if (key == "availability" || key == "reliability" || key == "throughput")
            return Direction::UtilityDriven;
        if (key == "response-time" || key == "response_time" || key == "cost")
            return Direction::CostDriven;
        throw Error(Errc::UnknownAttributeDirection,
                    "no direction known for attribute '" + name + "'");
    }

    void add(const std::string& name, Direction d) { overrides[fold(name)] = d; }
};

// --- XML ingestion -----------------------------------------------------

// Parses the request document format: a <service name="..."> root holding a
// <QoSAttributes> list of <QoSAttribute> entries with name, min-value,
// max-value, preferred-value, unit, and weight children.
inline SlaRequestDoc parse_sla_request_xml(const std::string& text) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::read_xml(in, tree, pt::xml_parser::trim_whitespace);
    } catch (const pt::xml_parser_error& e) {
        throw Error(Errc::XmlSyntax, e.what());
    }
    SlaRequestDoc doc;
    try {
        const pt::ptree& service = tree.get_child("service");
        doc.service_name = service.get<std::string>("<xmlattr>.name");
        for (const auto& [key, node] : service.get_child("QoSAttributes")) {
            if (key != "QoSAttribute") continue;
            QosRequirementEntry e;
            e.name = node.get<std::string>("name");
            e.min_value = node.get<double>("min-value");
            e.max_value = node.get<double>("max-value");
            e.preferred_value = node.get<double>("preferred-value");
            e.unit = node.get<std::string>("unit", "");
            e.weight = node.get<double>("weight");
            doc.entries.push_back(std::move(e));
        }
    } catch (const pt::ptree_error& e) {
        throw Error(Errc::Schema, e.what());
    }
    doc.validate();
    return doc;
}

inline std::string to_sla_request_xml(const SlaRequestDoc& doc) {
    namespace pt = boost::property_tree;
    pt::ptree attributes;
    for (const auto& e : doc.entries) {
        pt::ptree node;
        node.put("name", e.name);
        node.put("min-value", e.min_value);
        node.put("max-value", e.max_value);
        node.put("preferred-value", e.preferred_value);
        node.put("unit", e.unit);
        node.put("weight", e.weight);
        attributes.add_child("QoSAttribute", node);
    }
    pt::ptree tree;
    tree.put("service.<xmlattr>.name", doc.service_name);
    tree.add_child("service.QoSAttributes", attributes);
    std::ostringstream out;
    pt::write_xml(out, tree,
                  pt::xml_writer_settings<std::string>(' ', 2));
    return out.str();
}

inline void to_json(nlohmann::json& j, const QosRequirementEntry& e) {
    j = nlohmann::json{{"name", e.name},
                       {"min_value", e.min_value},
                       {"max_value", e.max_value},
                       {"preferred_value", e.preferred_value},
                       {"unit", e.unit},
                       {"weight", e.weight}};
}

inline void from_json(const nlohmann::json& j, QosRequirementEntry& e) {
    e.name = j.at("name").get<std::string>();
    e.min_value = j.at("min_value").get<double>();
    e.max_value = j.at("max_value").get<double>();
    e.preferred_value = j.at("preferred_value").get<double>();
    e.unit = j.value("unit", std::string{});
    e.weight = j.at("weight").get<double>();
}

inline void to_json(nlohmann::json& j, const SlaRequestDoc& doc) {
    j = nlohmann::json{{"service_name", doc.service_name},
                       {"consumer_id", doc.consumer_id},
                       {"entries", doc.entries}};
}

inline void from_json(const nlohmann::json& j, SlaRequestDoc& doc) {
    doc.service_name = j.at("service_name").get<std::string>();
    doc.consumer_id = j.value("consumer_id", std::string{});
    doc.entries = j.at("entries").get<std::vector<QosRequirementEntry>>();
}

inline SlaRequestDoc parse_sla_request_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::Schema, e.what());
    }
    SlaRequestDoc doc;
    try {
        doc = j.get<SlaRequestDoc>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::Schema, e.what());
    }
    doc.validate();
    return doc;
}

// --- bridges into the selection and negotiation engines ----------------

// Turns a request document into the selection inputs: the requirement vector
// is the preferred levels, the specs carry weight, unit, and direction.
inline std::pair<Requirement, std::vector<QosAttributeSpec>> to_requirement(
    const SlaRequestDoc& doc, const DirectionRegistry& registry = {}) {
    doc.validate();
    Requirement req;
    std::vector<QosAttributeSpec> specs;
    specs.reserve(doc.entries.size());
    for (const auto& e : doc.entries) {
        req.values[e.name] = e.preferred_value;
        specs.push_back(QosAttributeSpec{e.name, registry.lookup(e.name), e.weight, e.unit});
    }
    return {std::move(req), std::move(specs)};
}

// Satisfaction level -> raw value against the document's windows: a level of
// 1 means the most satisfying end (max for utility-driven, min for
// cost-driven attributes).
inline std::map<std::string, double> denormalize_terms(
    const std::map<std::string, double>& terms, const SlaRequestDoc& doc,
    const DirectionRegistry& registry = {}) {
    std::map<std::string, double> raw;
    for (const auto& [name, level] : terms) {
        const QosRequirementEntry* e = doc.find(name);
        if (!e) throw Error(Errc::AttributeMismatch, "request has no attribute '" + name + "'");
        detail::check_unit_interval(level, ("term '" + name + "'").c_str());
        double range = e->max_value - e->min_value;
        raw[name] = registry.lookup(name) == Direction::UtilityDriven
                        ? e->min_value + level * range
                        : e->max_value - level * range;
    }
    return raw;
}

// Raw values -> protocol term levels: plain min-max position inside the
// document's windows for every attribute, clamped to [0, 1]. For
// cost-driven attributes 0 is therefore the cheapest end, which is what the
// acceptance utility consumes.
inline std::map<std::string, double> protocol_terms_from_raw(
    const std::map<std::string, double>& raw, const SlaRequestDoc& doc) {
    std::map<std::string, double> terms;
    for (const auto& [name, value] : raw) {
        const QosRequirementEntry* e = doc.find(name);
        if (!e) throw Error(Errc::AttributeMismatch, "request has no attribute '" + name + "'");
        if (!std::isfinite(value))
            throw Error(Errc::NonFiniteValue, "non-finite value for '" + name + "'");
        double range = e->max_value - e->min_value;
        double t = range == 0.0 ? 1.0 : (value - e->min_value) / range;
        terms[name] = std::clamp(t, 0.0, 1.0);
    }
    return terms;
}

// --- agreements ---------------------------------------------------------

enum class SloComparator { GreaterEqual, LessEqual };

inline const char* slo_comparator_name(SloComparator c) {
    return c == SloComparator::GreaterEqual ? ">=" : "<=";
}

inline SloComparator parse_slo_comparator(const std::string& s) {
    if (s == ">=") return SloComparator::GreaterEqual;
    if (s == "<=") return SloComparator::LessEqual;
    throw Error(Errc::MalformedRecord, "unknown comparator '" + s + "'");
}

struct Slo {
    std::string indicator;
    SloComparator comparator{SloComparator::GreaterEqual};
    double target{0.0};
    double percentile{95.0};                       // share of samples that must satisfy
    std::int64_t window_ms{30ll * 24 * 3600 * 1000};  // assessment window length
};

struct Penalty {
    std::size_t slo_index{0};  // index into Sla::slos
    std::string description;
    double amount{0.0};
};

struct Sla {
    std::string sla_id;
    std::string consumer_id;
    std::string provider_id;
    std::string scope;
    std::int64_t activation_time_ms{0};
    std::int64_t validity_start_ms{0};
    std::int64_t validity_end_ms{0};
    double cost_amount{0.0};
    std::string cost_currency{"USD"};
    std::string assessment_method;
    std::vector<Slo> slos;
    std::vector<Penalty> penalties;
    std::vector<std::string> exclusions;

    void validate() const {
        if (slos.empty()) throw Error(Errc::Schema, "agreement has no objectives");
        for (const auto& p : penalties)
            if (p.slo_index >= slos.size())
                throw Error(Errc::Schema, "penalty references a missing objective");
        if (validity_end_ms < validity_start_ms)
            throw Error(Errc::Range, "validity period ends before it starts");
    }
};

struct AgreementDefaults {
    double percentile{95.0};
    std::int64_t window_ms{30ll * 24 * 3600 * 1000};
    std::int64_t validity_ms{365ll * 24 * 3600 * 1000};
    double penalty_amount{5.0};
    std::string currency{"USD"};
    std::string assessment_method{"windowed percentile over the monitoring feed"};
    std::vector<std::string> exclusions{"scheduled maintenance"};
};

inline std::int64_t now_epoch_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

// Materializes the agreement for a concluded session. Protocol terms are
// flipped to satisfaction levels for cost-driven attributes before being
// mapped back into the document's raw windows, so an agreement at a
// provider's opening terms reproduces the provider's advertised values.
inline Sla build_agreement(const NegotiationSession& session, const SlaRequestDoc& doc,
                           const std::string& provider_id,
                           const AgreementDefaults& defaults = {},
                           const DirectionRegistry& registry = {},
                           std::int64_t now_ms = now_epoch_ms()) {
    if (session.outcome != NegotiationOutcome::Agreement)
        throw Error(Errc::NotAgreed, "session did not reach an agreement");
    if (session.agreed_terms.empty())
        throw Error(Errc::NotAgreed, "agreed session carries no terms");

    std::map<std::string, double> satisfaction;
    for (const auto& [name, level] : session.agreed_terms) {
        if (!doc.find(name))
            throw Error(Errc::AttributeMismatch, "request has no attribute '" + name + "'");
        satisfaction[name] = registry.lookup(name) == Direction::UtilityDriven
                                 ? level
                                 : 1.0 - level;
    }
    std::map<std::string, double> raw = denormalize_terms(satisfaction, doc, registry);

    Sla sla;
    sla.consumer_id = doc.consumer_id;
    sla.provider_id = provider_id;
    sla.scope = doc.service_name;
    sla.activation_time_ms = now_ms;
    sla.validity_start_ms = now_ms;
    sla.validity_end_ms = now_ms + defaults.validity_ms;
    sla.assessment_method = defaults.assessment_method;
    sla.exclusions = defaults.exclusions;
    sla.cost_currency = defaults.currency;

    for (const auto& e : doc.entries) {
        auto it = raw.find(e.name);
        if (it == raw.end()) continue;  // attribute not negotiated
        Direction d = registry.lookup(e.name);
        if (DirectionRegistry::fold(e.name) == "cost") {
            sla.cost_amount = it->second;
            continue;  // the price is a contract figure, not a monitored objective
        }
        Slo slo;
        slo.indicator = e.name;
        slo.comparator = d == Direction::UtilityDriven ? SloComparator::GreaterEqual
                                                       : SloComparator::LessEqual;
        slo.target = it->second;
        slo.percentile = defaults.percentile;
        slo.window_ms = defaults.window_ms;
        sla.slos.push_back(std::move(slo));
    }
    for (std::size_t i = 0; i < sla.slos.size(); ++i)
        sla.penalties.push_back(
            Penalty{i, "service credit on violation", defaults.penalty_amount});
    sla.validate();
    return sla;
}

inline void to_json(nlohmann::json& j, const Slo& s) {
    j = nlohmann::json{{"indicator", s.indicator},
                       {"comparator", slo_comparator_name(s.comparator)},
                       {"target", s.target},
                       {"percentile", s.percentile},
                       {"window_ms", s.window_ms}};
}

inline void from_json(const nlohmann::json& j, Slo& s) {
    s.indicator = j.at("indicator").get<std::string>();
    s.comparator = parse_slo_comparator(j.at("comparator").get<std::string>());
    s.target = j.at("target").get<double>();
    s.percentile = j.value("percentile", 95.0);
    s.window_ms = j.value("window_ms", 30ll * 24 * 3600 * 1000);
}

inline void to_json(nlohmann::json& j, const Penalty& p) {
    j = nlohmann::json{{"slo_index", p.slo_index},
                       {"description", p.description},
                       {"amount", p.amount}};
}

inline void from_json(const nlohmann::json& j, Penalty& p) {
    p.slo_index = j.at("slo_index").get<std::size_t>();
    p.description = j.value("description", std::string{});
    p.amount = j.value("amount", 0.0);
}

inline void to_json(nlohmann::json& j, const Sla& s) {
    j = nlohmann::json{{"sla_id", s.sla_id},
                       {"consumer_id", s.consumer_id},
                       {"provider_id", s.provider_id},
                       {"scope", s.scope},
                       {"activation_time_ms", s.activation_time_ms},
                       {"validity", {{"start_ms", s.validity_start_ms}, {"end_ms", s.validity_end_ms}}},
                       {"cost", {{"amount", s.cost_amount}, {"currency", s.cost_currency}}},
                       {"assessment_method", s.assessment_method},
                       {"slos", s.slos},
                       {"penalties", s.penalties},
                       {"exclusions", s.exclusions}};
}

inline void from_json(const nlohmann::json& j, Sla& s) {
    s.sla_id = j.value("sla_id", std::string{});
    s.consumer_id = j.value("consumer_id", std::string{});
    s.provider_id = j.value("provider_id", std::string{});
    s.scope = j.value("scope", std::string{});
    s.activation_time_ms = j.value("activation_time_ms", std::int64_t{0});
    if (j.contains("validity")) {
        s.validity_start_ms = j["validity"].value("start_ms", std::int64_t{0});
        s.validity_end_ms = j["validity"].value("end_ms", std::int64_t{0});
    }
    if (j.contains("cost")) {
        s.cost_amount = j["cost"].value("amount", 0.0);
        s.cost_currency = j["cost"].value("currency", std::string{"USD"});
    }
    s.assessment_method = j.value("assessment_method", std::string{});
    s.slos = j.at("slos").get<std::vector<Slo>>();
    s.penalties = j.value("penalties", std::vector<Penalty>{});
    s.exclusions = j.value("exclusions", std::vector<std::string>{});
}

}  // namespace slabroker

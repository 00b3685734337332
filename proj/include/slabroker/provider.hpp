#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "slabroker/concession.hpp"
#include "slabroker/errors.hpp"
#include "slabroker/negotiation.hpp"
#include "slabroker/qos.hpp"
#include "slabroker/sla.hpp"

namespace slabroker {

// A simulated counterparty. Terms are in the protocol convention (plain
// min-max position inside the request windows); the agent starts at its
// opening terms and drifts toward best_terms as rounds pass.
struct ProviderAgent {
    std::string provider_id;
    std::map<std::string, double> opening_terms;
    std::map<std::string, double> best_terms;  // reservation position
    std::map<std::string, Direction> directions;
    ConcessionConfig strategy{"linear", 0.2, 3.0};
    std::map<std::string, std::pair<double, double>> template_bounds;  // raw windows served
    int max_rounds{10};

    void validate() const {
        strategy.validate();
        if (opening_terms.empty())
            throw Error(Errc::AttributeMismatch, "provider has no opening terms");
        for (const auto& [name, v] : opening_terms) {
            detail::check_unit_interval(v, "opening term");
            auto it = best_terms.find(name);
            if (it == best_terms.end())
                throw Error(Errc::AttributeMismatch,
                            "provider best terms missing '" + name + "'");
            detail::check_unit_interval(it->second, "best term");
            if (!directions.count(name))
                throw Error(Errc::AttributeMismatch,
                            "provider direction missing '" + name + "'");
        }
    }
};

struct ValidationResult {
    bool accepted{true};
    std::vector<std::string> rejected_attributes;
};

// Whether the provider can serve the request at all: every requested window
// must intersect the provider's template window for that attribute, and the
// provider must recognize every attribute.
inline ValidationResult validate_request(const ProviderAgent& agent, const SlaRequestDoc& doc) {
    doc.validate();
    ValidationResult result;
    for (const auto& e : doc.entries) {
        auto it = agent.template_bounds.find(e.name);
        if (it == agent.template_bounds.end()) {
            result.rejected_attributes.push_back(e.name + " (not offered)");
            continue;
        }
        double lo = it->second.first;
        double hi = it->second.second;
        if (e.max_value < lo || e.min_value > hi)
            result.rejected_attributes.push_back(e.name + " (window disjoint from template)");
    }
    result.accepted = result.rejected_attributes.empty();
    return result;
}

// Whether a broker counter lies strictly within what the provider is
// willing to grant: strictly inside the reservation position on every
// attribute, reading "inside" per direction (cost-driven terms have 0 as
// the consumer-favorable end). A counter touching the reservation boundary
// does not count; the provider keeps to its own schedule there.
inline bool counter_within_best(const ProviderAgent& agent,
                                const std::map<std::string, double>& counter_terms) {
    for (const auto& [name, best] : agent.best_terms) {
        auto it = counter_terms.find(name);
        if (it == counter_terms.end())
            throw Error(Errc::AttributeMismatch, "counter missing term '" + name + "'");
        bool consumer_wants_high = agent.directions.at(name) == Direction::UtilityDriven;
        if (consumer_wants_high ? it->second >= best : it->second <= best) return false;
    }
    return true;
}

// The provider's proposal after `round` full concession steps: opening terms
// moved toward best_terms by the schedule fraction. Round 0 is the opening
// itself. A counter-proposal already strictly within the provider's
// reservation position is echoed back verbatim, closing the deal.
inline ProposalMessage respond(const ProviderAgent& agent, const ProposalMessage& incoming,
                               int round) {
    agent.validate();
    if (incoming.from != Party::Broker)
        throw Error(Errc::ProtocolViolation, "provider responds to broker messages only");
    if (incoming.kind != MessageKind::SlaRequest && incoming.kind != MessageKind::CounterProposal)
        throw Error(Errc::ProtocolViolation,
                    std::string("provider cannot respond to ") +
                        message_kind_name(incoming.kind));
    ProposalMessage proposal;
    proposal.kind = MessageKind::Proposal;
    proposal.from = Party::Provider;
    proposal.round = round + 1;
    if (incoming.kind == MessageKind::CounterProposal &&
        counter_within_best(agent, incoming.terms)) {
        proposal.terms = incoming.terms;
        proposal.annotations = "accepting counter";
        return proposal;
    }
    double f = concession_fraction(agent.strategy, round, agent.max_rounds);
    for (const auto& [name, opening] : agent.opening_terms)
        proposal.terms[name] = opening + f * (agent.best_terms.at(name) - opening);
    return proposal;
}

// Provider-side protocol driver. Feeds `respond` with the concession step
// count and closes the handshake; echoes a broker counter back as the next
// proposal when the counter is already within the provider's reservation
// position.
class ProviderNegotiator {
public:
    explicit ProviderNegotiator(ProviderAgent agent) : agent_(std::move(agent)) {
        agent_.validate();
    }

    // Pre-set by the service when template validation already failed; makes
    // the first reply a Reject.
    void reject_with(std::vector<std::string> reasons) { reject_reasons_ = std::move(reasons); }

    std::optional<ProposalMessage> handle(const ProposalMessage& incoming) {
        if (state_ == SessionState::Agreed || state_ == SessionState::Failed)
            throw Error(Errc::ProtocolViolation, "provider session already ended");
        switch (incoming.kind) {
            case MessageKind::SlaRequest:
            case MessageKind::CounterProposal: {
                if (incoming.kind == MessageKind::SlaRequest && !reject_reasons_.empty()) {
                    ProposalMessage reject;
                    reject.kind = MessageKind::Reject;
                    reject.from = Party::Provider;
                    reject.round = incoming.round;
                    std::string note;
                    for (const auto& r : reject_reasons_)
                        note += (note.empty() ? "" : "; ") + r;
                    reject.annotations = note;
                    state_ = SessionState::Failed;
                    return reject;
                }
                ProposalMessage proposal = respond(agent_, incoming, proposals_sent_);
                proposals_sent_ += 1;
                state_ = SessionState::Evaluating;
                return proposal;
            }
            case MessageKind::SlaConfirmation: {
                ProposalMessage ack;
                ack.kind = MessageKind::SlaConfirmation;
                ack.from = Party::Provider;
                ack.round = incoming.round;
                ack.terms = incoming.terms;
                state_ = SessionState::Agreed;
                return ack;
            }
            case MessageKind::Reject:
            case MessageKind::Withdraw: {
                state_ = SessionState::Failed;
                return std::nullopt;
            }
            default:
                throw Error(Errc::ProtocolViolation,
                            std::string("provider cannot handle ") +
                                message_kind_name(incoming.kind));
        }
    }

    SessionState state() const { return state_; }
    int proposals_sent() const { return proposals_sent_; }
    const ProviderAgent& agent() const { return agent_; }

private:
    ProviderAgent agent_;
    SessionState state_{SessionState::Idle};
    int proposals_sent_{0};
    std::vector<std::string> reject_reasons_;
};

// Builds the simulated agent for one provider record against a request
// document: opening terms are the advertised offer scaled into the request
// windows, best terms default to the opening unless the record overrides
// them. The agent's template windows come from the record when given and
// collapse to the advertised point otherwise, so request validation tests
// what the provider actually serves.
inline ProviderAgent make_agent(const std::string& provider_id, const Offer& offer,
                                const SlaRequestDoc& doc, const DirectionRegistry& registry,
                                const ConcessionConfig& strategy,
                                const std::map<std::string, double>& best_terms_override,
                                const std::map<std::string, std::pair<double, double>>&
                                    template_bounds,
                                int max_rounds) {
    ProviderAgent agent;
    agent.provider_id = provider_id;
    agent.strategy = strategy;
    agent.max_rounds = max_rounds;
    std::map<std::string, double> advertised;
    for (const auto& e : doc.entries) {
        auto it = offer.values.find(e.name);
        if (it == offer.values.end())
            throw Error(Errc::AttributeMismatch,
                        "offer '" + provider_id + "' is missing attribute '" + e.name + "'");
        advertised[e.name] = it->second;
        agent.directions[e.name] = registry.lookup(e.name);
        auto tb = template_bounds.find(e.name);
        agent.template_bounds[e.name] =
            tb != template_bounds.end() ? tb->second : std::make_pair(it->second, it->second);
    }
    agent.opening_terms = protocol_terms_from_raw(advertised, doc);
    agent.best_terms = agent.opening_terms;
    for (const auto& [name, value] : best_terms_override) {
        if (!agent.best_terms.count(name))
            throw Error(Errc::AttributeMismatch,
                        "best-terms override names unknown attribute '" + name + "'");
        detail::check_unit_interval(value, "best term");
        agent.best_terms[name] = value;
    }
    return agent;
}

inline void to_json(nlohmann::json& j, const ProviderAgent& a) {
    j = nlohmann::json{{"provider_id", a.provider_id},
                       {"opening_terms", a.opening_terms},
                       {"best_terms", a.best_terms},
                       {"strategy", a.strategy},
                       {"max_rounds", a.max_rounds}};
    nlohmann::json dirs = nlohmann::json::object();
    for (const auto& [name, d] : a.directions) dirs[name] = direction_name(d);
    j["directions"] = dirs;
    nlohmann::json bounds = nlohmann::json::object();
    for (const auto& [name, b] : a.template_bounds)
        bounds[name] = nlohmann::json::array({b.first, b.second});
    j["template_bounds"] = bounds;
}

inline void from_json(const nlohmann::json& j, ProviderAgent& a) {
    a.provider_id = j.value("provider_id", std::string{});
    a.opening_terms = j.at("opening_terms").get<std::map<std::string, double>>();
    a.best_terms = j.value("best_terms", a.opening_terms);
    a.strategy = j.value("strategy", ConcessionConfig{});
    a.max_rounds = j.value("max_rounds", 10);
    a.directions.clear();
    for (const auto& [name, d] : j.at("directions").items())
        a.directions[name] = parse_direction(d.get<std::string>());
    a.template_bounds.clear();
    if (j.contains("template_bounds"))
        for (const auto& [name, b] : j["template_bounds"].items())
            a.template_bounds[name] = {b.at(0).get<double>(), b.at(1).get<double>()};
}

}  // namespace slabroker

#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "slabroker/concession.hpp"
#include "slabroker/errors.hpp"
#include "slabroker/utility.hpp"

namespace slabroker {

enum class Party { Broker, Provider };
enum class MessageKind { SlaRequest, Proposal, CounterProposal, SlaConfirmation, Reject, Withdraw };
enum class SessionState { Idle, RequestSent, AwaitingProposal, Evaluating, CounterSent, Confirming, Agreed, Failed };
enum class NegotiationOutcome { Agreement, MaxRoundsExceeded, Rejected, Withdrawn };
enum class Decision { Accept, Counter, Withdraw };

inline const char* party_name(Party p) { return p == Party::Broker ? "broker" : "provider"; }

inline const char* message_kind_name(MessageKind k) {
    switch (k) {
        case MessageKind::SlaRequest: return "sla_request";
        case MessageKind::Proposal: return "proposal";
        case MessageKind::CounterProposal: return "counter_proposal";
        case MessageKind::SlaConfirmation: return "sla_confirmation";
        case MessageKind::Reject: return "reject";
        case MessageKind::Withdraw: return "withdraw";
    }
    return "unknown";
}

inline const char* session_state_name(SessionState s) {
    switch (s) {
        case SessionState::Idle: return "idle";
        case SessionState::RequestSent: return "request_sent";
        case SessionState::AwaitingProposal: return "awaiting_proposal";
        case SessionState::Evaluating: return "evaluating";
        case SessionState::CounterSent: return "counter_sent";
        case SessionState::Confirming: return "confirming";
        case SessionState::Agreed: return "agreed";
        case SessionState::Failed: return "failed";
    }
    return "unknown";
}

inline const char* outcome_name(NegotiationOutcome o) {
    switch (o) {
        case NegotiationOutcome::Agreement: return "agreement";
        case NegotiationOutcome::MaxRoundsExceeded: return "max_rounds_exceeded";
        case NegotiationOutcome::Rejected: return "rejected";
        case NegotiationOutcome::Withdrawn: return "withdrawn";
    }
    return "unknown";
}

inline Party parse_party(const std::string& s) {
    if (s == "broker") return Party::Broker;
    if (s == "provider") return Party::Provider;
    throw Error(Errc::MalformedRecord, "unknown party '" + s + "'");
}

inline MessageKind parse_message_kind(const std::string& s) {
    for (MessageKind k : {MessageKind::SlaRequest, MessageKind::Proposal,
                          MessageKind::CounterProposal, MessageKind::SlaConfirmation,
                          MessageKind::Reject, MessageKind::Withdraw})
        if (s == message_kind_name(k)) return k;
    throw Error(Errc::MalformedRecord, "unknown message kind '" + s + "'");
}

inline SessionState parse_session_state(const std::string& s) {
    for (SessionState st : {SessionState::Idle, SessionState::RequestSent,
                            SessionState::AwaitingProposal, SessionState::Evaluating,
                            SessionState::CounterSent, SessionState::Confirming,
                            SessionState::Agreed, SessionState::Failed})
        if (s == session_state_name(st)) return st;
    throw Error(Errc::MalformedRecord, "unknown session state '" + s + "'");
}

inline NegotiationOutcome parse_outcome(const std::string& s) {
    for (NegotiationOutcome o : {NegotiationOutcome::Agreement, NegotiationOutcome::MaxRoundsExceeded,
                                 NegotiationOutcome::Rejected, NegotiationOutcome::Withdrawn})
        if (s == outcome_name(o)) return o;
    throw Error(Errc::MalformedRecord, "unknown outcome '" + s + "'");
}

struct ProposalMessage {
    MessageKind kind{MessageKind::Proposal};
    Party from{Party::Broker};
    int round{0};
    std::map<std::string, double> terms;  // normalized levels, may be empty
    std::string annotations;
};

// One bilateral session, broker side. `round` counts provider proposals
// received; the transcript holds every message sent or received in order.
struct NegotiationSession {
    std::string session_id;
    SessionState state{SessionState::Idle};
    int round{0};
    int max_rounds{10};
    double threshold{0.65};
    UtilityParams params;
    ConcessionConfig counter_strategy{"linear", 0.25, 3.0};
    std::map<std::string, double> ideal_terms;
    std::vector<ProposalMessage> transcript;
    std::optional<NegotiationOutcome> outcome;
    std::map<std::string, double> agreed_terms;

    void validate() const {
        params.validate();
        counter_strategy.validate();
        if (max_rounds < 1) throw Error(Errc::Config, "max_rounds must be positive");
        if (!std::isfinite(threshold) || threshold < 0.0 || threshold > 1.0)
            throw Error(Errc::Config, "threshold must lie in [0, 1]");
        for (const auto& [name, a] : params.attributes) {
            (void)a;
            auto it = ideal_terms.find(name);
            if (it == ideal_terms.end())
                throw Error(Errc::AttributeMismatch, "ideal terms missing '" + name + "'");
            detail::check_unit_interval(it->second, "ideal term");
        }
    }
};

inline bool session_terminal(SessionState s) {
    return s == SessionState::Agreed || s == SessionState::Failed;
}

// The broker's most favorable corner of the term space: 1 for utility-driven
// attributes, 0 for cost-driven ones.
inline std::map<std::string, double> default_ideal_terms(const UtilityParams& params) {
    std::map<std::string, double> terms;
    for (const auto& [name, a] : params.attributes)
        terms[name] = a.direction == Direction::UtilityDriven ? 1.0 : 0.0;
    return terms;
}

// Opens the session: emits the SlaRequest carrying the broker's ideal terms.
inline ProposalMessage session_start(NegotiationSession& session) {
    session.validate();
    if (session.state != SessionState::Idle)
        throw Error(Errc::ProtocolViolation, "session already started");
    ProposalMessage msg;
    msg.kind = MessageKind::SlaRequest;
    msg.from = Party::Broker;
    msg.round = 0;
    msg.terms = session.ideal_terms;
    session.transcript.push_back(msg);
    session.state = SessionState::RequestSent;
    return msg;
}

// Pure decision rule for an incoming provider proposal: accept when its
// utility clears the threshold, counter while rounds remain, withdraw at the
// horizon.
inline Decision evaluate_offer(const NegotiationSession& session, const ProposalMessage& proposal) {
    if (proposal.kind != MessageKind::Proposal || proposal.from != Party::Provider)
        throw Error(Errc::ProtocolViolation, "evaluate expects a provider proposal");
    if (session.state != SessionState::RequestSent && session.state != SessionState::CounterSent &&
        session.state != SessionState::Evaluating)
        throw Error(Errc::ProtocolViolation,
                    std::string("cannot evaluate in state ") + session_state_name(session.state));
    double u = global_utility(proposal.terms, session.params);
    if (u >= session.threshold) return Decision::Accept;
    int landing_round = session.state == SessionState::Evaluating ? session.round : session.round + 1;
    return landing_round < session.max_rounds ? Decision::Counter : Decision::Withdraw;
}

// Counter-offer for the proposal under evaluation: interpolates from the
// broker's ideal toward the provider's latest terms by the concession
// schedule at the current round.
inline ProposalMessage generate_counter(const NegotiationSession& session) {
    if (session.state != SessionState::Evaluating)
        throw Error(Errc::ProtocolViolation, "no proposal under evaluation");
    const ProposalMessage& latest = session.transcript.back();
    if (latest.kind != MessageKind::Proposal || latest.from != Party::Provider)
        throw Error(Errc::ProtocolViolation, "transcript does not end with a provider proposal");
    double f = concession_fraction(session.counter_strategy, session.round, session.max_rounds);
    ProposalMessage counter;
    counter.kind = MessageKind::CounterProposal;
    counter.from = Party::Broker;
    counter.round = session.round;
    for (const auto& [name, ideal] : session.ideal_terms) {
        double toward = latest.terms.at(name);
        counter.terms[name] = ideal + f * (toward - ideal);
    }
    return counter;
}

// Feeds one incoming message through the broker state machine. Returns the
// broker's reply, or nothing when the session has no message to send (ack
// received, or the provider ended the session).
inline std::optional<ProposalMessage> step(NegotiationSession& session,
                                           const ProposalMessage& incoming) {
    if (session_terminal(session.state))
        throw Error(Errc::ProtocolViolation, "session already ended");
    if (incoming.from != Party::Provider)
        throw Error(Errc::ProtocolViolation, "broker can only receive provider messages");

    switch (incoming.kind) {
        case MessageKind::Proposal: {
            if (session.state != SessionState::RequestSent &&
                session.state != SessionState::CounterSent)
                throw Error(Errc::ProtocolViolation,
                            std::string("proposal not expected in state ") +
                                session_state_name(session.state));
            session.transcript.push_back(incoming);
            session.round += 1;
            session.state = SessionState::Evaluating;
            double u = global_utility(incoming.terms, session.params);
            Decision decision = evaluate_offer(session, incoming);
            std::ostringstream note;
            note << "utility=" << u;
            if (decision == Decision::Accept) {
                session.agreed_terms = incoming.terms;
                ProposalMessage confirm;
                confirm.kind = MessageKind::SlaConfirmation;
                confirm.from = Party::Broker;
                confirm.round = session.round;
                confirm.terms = incoming.terms;
                confirm.annotations = note.str();
                session.transcript.push_back(confirm);
                session.state = SessionState::Confirming;
                return confirm;
            }
            if (decision == Decision::Counter) {
                ProposalMessage counter = generate_counter(session);
                counter.annotations = note.str();
                session.transcript.push_back(counter);
                session.state = SessionState::CounterSent;
                return counter;
            }
            ProposalMessage withdraw;
            withdraw.kind = MessageKind::Withdraw;
            withdraw.from = Party::Broker;
            withdraw.round = session.round;
            withdraw.annotations = note.str();
            session.transcript.push_back(withdraw);
            session.state = SessionState::Failed;
            session.outcome = NegotiationOutcome::MaxRoundsExceeded;
            return withdraw;
        }
        case MessageKind::SlaConfirmation: {
            if (session.state != SessionState::Confirming)
                throw Error(Errc::ProtocolViolation, "confirmation ack not expected");
            session.transcript.push_back(incoming);
            session.state = SessionState::Agreed;
            session.outcome = NegotiationOutcome::Agreement;
            return std::nullopt;
        }
        case MessageKind::Reject: {
            if (session.state != SessionState::RequestSent &&
                session.state != SessionState::CounterSent &&
                session.state != SessionState::Confirming)
                throw Error(Errc::ProtocolViolation, "reject not expected");
            session.transcript.push_back(incoming);
            session.state = SessionState::Failed;
            session.outcome = NegotiationOutcome::Rejected;
            return std::nullopt;
        }
        case MessageKind::Withdraw: {
            if (session.state != SessionState::RequestSent &&
                session.state != SessionState::CounterSent &&
                session.state != SessionState::Confirming)
                throw Error(Errc::ProtocolViolation, "withdraw not expected");
            session.transcript.push_back(incoming);
            session.state = SessionState::Failed;
            session.outcome = NegotiationOutcome::Withdrawn;
            return std::nullopt;
        }
        default:
            throw Error(Errc::ProtocolViolation,
                        std::string("unexpected message kind ") +
                            message_kind_name(incoming.kind));
    }
}

// Drives a whole session against a provider peer exposing
// optional<ProposalMessage> handle(const ProposalMessage&). Returns the
// finished session; the peer sees every broker message including the final
// withdraw or confirmation.
template <typename Peer>
NegotiationSession run_negotiation(NegotiationSession session, Peer& peer) {
    std::optional<ProposalMessage> outbound = session_start(session);
    while (outbound) {
        std::optional<ProposalMessage> reply = peer.handle(*outbound);
        if (session_terminal(session.state)) break;
        if (!reply) break;
        outbound = step(session, *reply);
    }
    return session;
}

inline void to_json(nlohmann::json& j, const ProposalMessage& m) {
    j = nlohmann::json{{"kind", message_kind_name(m.kind)},
                       {"from", party_name(m.from)},
                       {"round", m.round},
                       {"terms", m.terms}};
    if (!m.annotations.empty()) j["annotations"] = m.annotations;
}

inline void from_json(const nlohmann::json& j, ProposalMessage& m) {
    m.kind = parse_message_kind(j.at("kind").get<std::string>());
    m.from = parse_party(j.at("from").get<std::string>());
    m.round = j.at("round").get<int>();
    m.terms = j.value("terms", std::map<std::string, double>{});
    m.annotations = j.value("annotations", std::string{});
}

inline void to_json(nlohmann::json& j, const AttributeUtility& a) {
    j = nlohmann::json{{"direction", direction_name(a.direction)},
                       {"weight", a.weight},
                       {"alpha", a.alpha},
                       {"beta", a.beta}};
}

inline void from_json(const nlohmann::json& j, AttributeUtility& a) {
    a.direction = parse_direction(j.at("direction").get<std::string>());
    a.weight = j.at("weight").get<double>();
    a.alpha = j.at("alpha").get<double>();
    a.beta = j.at("beta").get<double>();
}

inline void to_json(nlohmann::json& j, const UtilityParams& p) {
    j = nlohmann::json{{"attributes", p.attributes}};
}

inline void from_json(const nlohmann::json& j, UtilityParams& p) {
    p.attributes = j.at("attributes").get<std::map<std::string, AttributeUtility>>();
}

inline void to_json(nlohmann::json& j, const ConcessionConfig& c) {
    j = nlohmann::json{{"name", c.name}, {"rate", c.rate}, {"exponent", c.exponent}};
}

inline void from_json(const nlohmann::json& j, ConcessionConfig& c) {
    c.name = j.value("name", std::string{"linear"});
    c.rate = j.value("rate", 0.25);
    c.exponent = j.value("exponent", 3.0);
}

inline void to_json(nlohmann::json& j, const NegotiationSession& s) {
    j = nlohmann::json{{"session_id", s.session_id},
                       {"state", session_state_name(s.state)},
                       {"round", s.round},
                       {"max_rounds", s.max_rounds},
                       {"threshold", s.threshold},
                       {"params", s.params},
                       {"counter_strategy", s.counter_strategy},
                       {"ideal_terms", s.ideal_terms},
                       {"transcript", s.transcript}};
    if (s.outcome) j["outcome"] = outcome_name(*s.outcome);
    if (!s.agreed_terms.empty()) j["agreed_terms"] = s.agreed_terms;
}

inline void from_json(const nlohmann::json& j, NegotiationSession& s) {
    s.session_id = j.value("session_id", std::string{});
    s.state = parse_session_state(j.at("state").get<std::string>());
    s.round = j.at("round").get<int>();
    s.max_rounds = j.at("max_rounds").get<int>();
    s.threshold = j.at("threshold").get<double>();
    s.params = j.at("params").get<UtilityParams>();
    s.counter_strategy = j.at("counter_strategy").get<ConcessionConfig>();
    s.ideal_terms = j.at("ideal_terms").get<std::map<std::string, double>>();
    s.transcript = j.at("transcript").get<std::vector<ProposalMessage>>();
    if (j.contains("outcome")) s.outcome = parse_outcome(j.at("outcome").get<std::string>());
    s.agreed_terms = j.value("agreed_terms", std::map<std::string, double>{});
}

}  // namespace slabroker

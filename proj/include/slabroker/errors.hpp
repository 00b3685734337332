#pragma once

#include <stdexcept>
#include <string>

namespace slabroker {

// Every failure the engine can raise, one code per contract-level condition.
// Callers that need to branch on the cause switch on code(); the message is
// for humans and always names the offending attribute/file/field.
enum class Errc {
    EmptyOfferSet,
    AttributeMismatch,
    NonFiniteValue,
    WeightSum,
    Domain,
    TooFewOffers,
    ProtocolViolation,
    UnknownAttributeDirection,
    XmlSyntax,
    Schema,
    Range,
    NotAgreed,
    UnmappedIndicator,
    MalformedRecord,
    NoProviders,
    ConflictingRecord,
    NotFound,
    Config,
    Io,
};

inline const char* errc_name(Errc code) {
    switch (code) {
        case Errc::EmptyOfferSet: return "empty_offer_set";
        case Errc::AttributeMismatch: return "attribute_mismatch";
        case Errc::NonFiniteValue: return "non_finite_value";
        case Errc::WeightSum: return "weight_sum";
        case Errc::Domain: return "domain";
        case Errc::TooFewOffers: return "too_few_offers";
        case Errc::ProtocolViolation: return "protocol_violation";
        case Errc::UnknownAttributeDirection: return "unknown_attribute_direction";
        case Errc::XmlSyntax: return "xml_syntax";
        case Errc::Schema: return "schema";
        case Errc::Range: return "range";
        case Errc::NotAgreed: return "not_agreed";
        case Errc::UnmappedIndicator: return "unmapped_indicator";
        case Errc::MalformedRecord: return "malformed_record";
        case Errc::NoProviders: return "no_providers";
        case Errc::ConflictingRecord: return "conflicting_record";
        case Errc::NotFound: return "not_found";
        case Errc::Config: return "config";
        case Errc::Io: return "io";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message),
          code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

}  // namespace slabroker

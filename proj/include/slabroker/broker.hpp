#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "slabroker/errors.hpp"
#include "slabroker/io.hpp"
#include "slabroker/monitoring.hpp"
#include "slabroker/negotiation.hpp"
#include "slabroker/persistence.hpp"
#include "slabroker/provider.hpp"
#include "slabroker/qos.hpp"
#include "slabroker/sla.hpp"

namespace slabroker {

// Per-consumer negotiation preferences. Anything left empty falls back to
// the request document and the service defaults.
struct ConsumerProfile {
    std::string consumer_id;
    std::map<std::string, double> weights;  // overrides the document weights
    std::map<std::string, double> alpha;    // per-attribute curve bow
    std::map<std::string, double> beta;     // per-attribute curve sharpness
    double threshold{0.65};
    int max_rounds{10};
    nlohmann::json preferences;  // free-form, stored verbatim
};

inline void to_json(nlohmann::json& j, const ConsumerProfile& p) {
    j = nlohmann::json{{"consumer_id", p.consumer_id},
                       {"weights", p.weights},
                       {"alpha", p.alpha},
                       {"beta", p.beta},
                       {"threshold", p.threshold},
                       {"max_rounds", p.max_rounds},
                       {"preferences", p.preferences.is_null() ? nlohmann::json::object()
                                                               : p.preferences}};
}

inline void from_json(const nlohmann::json& j, ConsumerProfile& p) {
    p.consumer_id = j.value("consumer_id", std::string{});
    p.weights = j.value("weights", std::map<std::string, double>{});
    p.alpha = j.value("alpha", std::map<std::string, double>{});
    p.beta = j.value("beta", std::map<std::string, double>{});
    p.threshold = j.value("threshold", 0.65);
    p.max_rounds = j.value("max_rounds", 10);
    p.preferences = j.value("preferences", nlohmann::json::object());
}

// One advertised provider: the offer used for selection plus the simulation
// knobs for negotiation.
struct ProviderRecord {
    std::string provider_id;
    std::map<std::string, double> offer;  // advertised raw levels
    std::map<std::string, std::pair<double, double>> template_bounds;  // served windows
    ConcessionConfig strategy{"linear", 0.2, 3.0};
    std::map<std::string, double> best_terms;  // reservation override, normalized
    bool live{true};

    void validate() const {
        if (provider_id.empty()) throw Error(Errc::Schema, "provider record has no id");
        if (offer.empty()) throw Error(Errc::Schema, "provider record has no offer");
        for (const auto& [name, v] : offer)
            if (!std::isfinite(v))
                throw Error(Errc::NonFiniteValue,
                            "offer value for '" + name + "' is not finite");
        strategy.validate();
        for (const auto& [name, b] : template_bounds)
            if (!std::isfinite(b.first) || !std::isfinite(b.second) || b.first > b.second)
                throw Error(Errc::Range, "template bounds for '" + name + "' are invalid");
    }
};

inline void to_json(nlohmann::json& j, const ProviderRecord& r) {
    j = nlohmann::json{{"provider_id", r.provider_id},
                       {"offer", r.offer},
                       {"strategy", r.strategy},
                       {"live", r.live}};
    if (!r.best_terms.empty()) j["best_terms"] = r.best_terms;
    if (!r.template_bounds.empty()) {
        nlohmann::json bounds = nlohmann::json::object();
        for (const auto& [name, b] : r.template_bounds)
            bounds[name] = nlohmann::json::array({b.first, b.second});
        j["template_bounds"] = bounds;
    }
}

inline void from_json(const nlohmann::json& j, ProviderRecord& r) {
    r.provider_id = j.at("provider_id").get<std::string>();
    r.offer = j.at("offer").get<std::map<std::string, double>>();
    r.strategy = j.value("strategy", ConcessionConfig{"linear", 0.2, 3.0});
    r.best_terms = j.value("best_terms", std::map<std::string, double>{});
    r.live = j.value("live", true);
    r.template_bounds.clear();
    if (j.contains("template_bounds"))
        for (const auto& [name, b] : j["template_bounds"].items())
            r.template_bounds[name] = {b.at(0).get<double>(), b.at(1).get<double>()};
}

struct BrokerConfig {
    double default_threshold{0.65};
    int default_max_rounds{10};
    bool fallback_to_next_rank{false};
    ConcessionConfig counter_strategy{"linear", 0.25, 3.0};
    double default_alpha_utility{0.99};
    double default_alpha_cost{0.20};
    double default_beta{1.0};
    AgreementDefaults agreement;
    DirectionRegistry directions;
    MetricMapping mapping;  // feed mapping; indicators not named fall back to identity
};

inline BrokerConfig parse_broker_config(const nlohmann::json& j) {
    BrokerConfig cfg;
    cfg.default_threshold = j.value("default_threshold", cfg.default_threshold);
    cfg.default_max_rounds = j.value("default_max_rounds", cfg.default_max_rounds);
    cfg.fallback_to_next_rank = j.value("fallback_to_next_rank", cfg.fallback_to_next_rank);
    if (j.contains("counter_strategy"))
        cfg.counter_strategy = j["counter_strategy"].get<ConcessionConfig>();
    if (j.contains("defaults")) {
        const auto& d = j["defaults"];
        cfg.default_alpha_utility = d.value("alpha_utility", cfg.default_alpha_utility);
        cfg.default_alpha_cost = d.value("alpha_cost", cfg.default_alpha_cost);
        cfg.default_beta = d.value("beta", cfg.default_beta);
    }
    if (j.contains("agreement")) {
        const auto& a = j["agreement"];
        cfg.agreement.percentile = a.value("percentile", cfg.agreement.percentile);
        cfg.agreement.window_ms = a.value("window_ms", cfg.agreement.window_ms);
        cfg.agreement.validity_ms = a.value("validity_ms", cfg.agreement.validity_ms);
        cfg.agreement.penalty_amount = a.value("penalty_amount", cfg.agreement.penalty_amount);
        cfg.agreement.currency = a.value("currency", cfg.agreement.currency);
    }
    if (j.contains("directions"))
        for (const auto& [name, d] : j["directions"].items())
            cfg.directions.add(name, parse_direction(d.get<std::string>()));
    if (j.contains("mapping")) cfg.mapping = j["mapping"].get<MetricMapping>();
    cfg.counter_strategy.validate();
    cfg.mapping.validate();
    if (cfg.default_max_rounds < 1)
        throw Error(Errc::Config, "default_max_rounds must be positive");
    if (cfg.default_threshold < 0.0 || cfg.default_threshold > 1.0)
        throw Error(Errc::Config, "default_threshold must lie in [0, 1]");
    return cfg;
}

inline void to_json(nlohmann::json& j, const RankedEntry& e) {
    double rounded = std::round(e.score * 10000.0) / 100.0;
    j = nlohmann::json{{"rank", e.rank},
                       {"provider_id", e.provider_id},
                       {"score", e.score},
                       {"score_percent", rounded}};
}

inline void from_json(const nlohmann::json& j, RankedEntry& e) {
    e.rank = j.at("rank").get<int>();
    e.provider_id = j.at("provider_id").get<std::string>();
    e.score = j.at("score").get<double>();
}

inline void to_json(nlohmann::json& j, const RankingTable& t) {
    j = nlohmann::json{{"method", rank_method_name(t.method)}, {"entries", t.entries}};
}

inline void from_json(const nlohmann::json& j, RankingTable& t) {
    std::string method = j.at("method").get<std::string>();
    t.method = method == "topsis" ? RankMethod::Topsis : RankMethod::WeightedUtility;
    t.entries = j.at("entries").get<std::vector<RankedEntry>>();
}

struct AttemptRecord {
    std::string provider_id;
    NegotiationSession session;
};

inline void to_json(nlohmann::json& j, const AttemptRecord& a) {
    j = nlohmann::json{{"provider_id", a.provider_id}, {"session", a.session}};
}

inline void from_json(const nlohmann::json& j, AttemptRecord& a) {
    a.provider_id = j.at("provider_id").get<std::string>();
    a.session = j.at("session").get<NegotiationSession>();
}

// Everything one submit_request produced: the rankings, the negotiation
// attempts in the order they ran, and the agreement id when one was reached.
struct SessionRecord {
    std::string session_id;
    std::string consumer_id;
    SlaRequestDoc request;
    RankingTable ranking;
    RankingTable topsis;  // empty entries when fewer than two offers
    std::vector<AttemptRecord> attempts;
    std::optional<std::string> sla_id;

    const AttemptRecord& final_attempt() const {
        if (attempts.empty()) throw Error(Errc::NotFound, "session has no attempts");
        return attempts.back();
    }
};

inline void to_json(nlohmann::json& j, const SessionRecord& r) {
    j = nlohmann::json{{"session_id", r.session_id},
                       {"consumer_id", r.consumer_id},
                       {"request", r.request},
                       {"ranking", r.ranking},
                       {"topsis", r.topsis},
                       {"attempts", r.attempts}};
    if (r.sla_id) j["sla_id"] = *r.sla_id;
}

inline void from_json(const nlohmann::json& j, SessionRecord& r) {
    r.session_id = j.at("session_id").get<std::string>();
    r.consumer_id = j.at("consumer_id").get<std::string>();
    r.request = j.at("request").get<SlaRequestDoc>();
    r.ranking = j.at("ranking").get<RankingTable>();
    r.topsis = j.at("topsis").get<RankingTable>();
    r.attempts = j.at("attempts").get<std::vector<AttemptRecord>>();
    if (j.contains("sla_id")) r.sla_id = j["sla_id"].get<std::string>();
}

// The brokering service: provider registry, consumer profiles, the
// select-negotiate-contract pipeline, and per-agreement monitoring state.
// All state changes go through append-only logs in the data directory and
// are rebuilt by replay on startup, so a restart sees identical records.
class BrokerService {
public:
    explicit BrokerService(std::filesystem::path data_dir, BrokerConfig config = {})
        : config_(std::move(config)),
          providers_log_(data_dir / "providers.jsonl"),
          profiles_log_(data_dir / "profiles.jsonl"),
          sessions_log_(data_dir / "sessions.jsonl"),
          slas_log_(data_dir / "slas.jsonl"),
          metrics_log_(data_dir / "metrics.jsonl") {
        providers_log_.replay([&](const nlohmann::json& e) {
            ProviderRecord r = e.at("data").get<ProviderRecord>();
            providers_[r.provider_id] = std::move(r);
        });
        profiles_log_.replay([&](const nlohmann::json& e) {
            ConsumerProfile p = e.at("data").get<ConsumerProfile>();
            profiles_[p.consumer_id] = std::move(p);
        });
        sessions_log_.replay([&](const nlohmann::json& e) {
            SessionRecord r = e.at("data").get<SessionRecord>();
            next_session_ = std::max(next_session_, numeric_suffix(r.session_id) + 1);
            sessions_[r.session_id] = std::move(r);
        });
        slas_log_.replay([&](const nlohmann::json& e) {
            Sla s = e.at("data").get<Sla>();
            next_sla_ = std::max(next_sla_, numeric_suffix(s.sla_id) + 1);
            slas_[s.sla_id] = std::move(s);
        });
        metrics_log_.replay([&](const nlohmann::json& e) {
            MetricSample s = e.get<MetricSample>();
            metrics_[e.at("sla_id").get<std::string>()].insert(s);
        });
    }

    const BrokerConfig& config() const { return config_; }

    // Adds or, when allowed, replaces one provider advertisement.
    std::string register_provider(const ProviderRecord& record, bool allow_update = false) {
        record.validate();
        std::unique_lock lock(mu_);
        auto it = providers_.find(record.provider_id);
        if (it != providers_.end() && !allow_update)
            throw Error(Errc::ConflictingRecord,
                        "provider '" + record.provider_id + "' already registered");
        providers_log_.append(nlohmann::json{{"op", "put"}, {"data", record}});
        providers_[record.provider_id] = record;
        return record.provider_id;
    }

    void put_profile(const ConsumerProfile& profile) {
        if (profile.consumer_id.empty())
            throw Error(Errc::Schema, "profile has no consumer id");
        if (profile.max_rounds < 1)
            throw Error(Errc::Config, "profile max_rounds must be positive");
        if (profile.threshold < 0.0 || profile.threshold > 1.0)
            throw Error(Errc::Config, "profile threshold must lie in [0, 1]");
        std::unique_lock lock(mu_);
        profiles_log_.append(nlohmann::json{{"op", "put"}, {"data", profile}});
        profiles_[profile.consumer_id] = profile;
    }

    // The full pipeline for one request: rank capable providers, negotiate
    // with the best one (then the next ones, when fallback is enabled),
    // and materialize the agreement on success. Returns the session id.
    std::string submit_request(const SlaRequestDoc& doc) {
        doc.validate();
        if (doc.consumer_id.empty())
            throw Error(Errc::Schema, "request has no consumer id");
        std::unique_lock lock(mu_);

        auto [requirement, specs] = to_requirement(doc, config_.directions);
        ConsumerProfile profile = effective_profile(doc);
        if (!profile.weights.empty()) {
            for (auto& spec : specs) {
                auto it = profile.weights.find(spec.name);
                if (it == profile.weights.end())
                    throw Error(Errc::Config, "profile weights do not cover attribute '" +
                                                  spec.name + "'");
                spec.weight = it->second;
            }
        }

        std::vector<Offer> offers;
        for (const auto& [id, record] : providers_) {
            if (!record.live) continue;
            Offer offer;
            offer.provider_id = id;
            bool covers = true;
            for (const auto& spec : specs) {
                auto it = record.offer.find(spec.name);
                if (it == record.offer.end()) {
                    covers = false;
                    break;
                }
                offer.values[spec.name] = it->second;
            }
            if (covers) offers.push_back(std::move(offer));
        }
        if (offers.empty())
            throw Error(Errc::NoProviders, "no live provider covers the requested attributes");

        SessionRecord record;
        record.session_id = format_id("s", next_session_++);
        record.consumer_id = doc.consumer_id;
        record.request = doc;
        record.ranking = select_best(offers, requirement, specs);
        record.topsis.method = RankMethod::Topsis;
        if (offers.size() >= 2)
            record.topsis = topsis_rank(offers, requirement, specs);

        UtilityParams params = negotiation_params(specs, profile);
        for (const auto& ranked : record.ranking.entries) {
            const ProviderRecord& provider = providers_.at(ranked.provider_id);
            ProviderAgent agent = make_agent(
                provider.provider_id, Offer{provider.provider_id, provider.offer}, doc,
                config_.directions, provider.strategy, provider.best_terms,
                provider.template_bounds, profile.max_rounds);
            ProviderNegotiator peer(agent);
            ValidationResult check = validate_request(agent, doc);
            if (!check.accepted) peer.reject_with(check.rejected_attributes);

            NegotiationSession session;
            session.session_id = record.session_id;
            session.max_rounds = profile.max_rounds;
            session.threshold = profile.threshold;
            session.params = params;
            session.counter_strategy = config_.counter_strategy;
            session.ideal_terms = default_ideal_terms(params);
            session = run_negotiation(std::move(session), peer);
            record.attempts.push_back(AttemptRecord{provider.provider_id, session});

            if (session.outcome == NegotiationOutcome::Agreement) {
                Sla sla = build_agreement(session, doc, provider.provider_id,
                                          config_.agreement, config_.directions);
                sla.sla_id = format_id("sla", next_sla_++);
                slas_log_.append(nlohmann::json{{"op", "put"}, {"data", sla}});
                slas_[sla.sla_id] = sla;
                record.sla_id = sla.sla_id;
                break;
            }
            if (!config_.fallback_to_next_rank) break;
        }

        sessions_log_.append(nlohmann::json{{"op", "put"}, {"data", record}});
        sessions_[record.session_id] = record;
        return record.session_id;
    }

    SessionRecord get_session(const std::string& session_id) const {
        std::shared_lock lock(mu_);
        auto it = sessions_.find(session_id);
        if (it == sessions_.end())
            throw Error(Errc::NotFound, "no session '" + session_id + "'");
        return it->second;
    }

    Sla get_sla(const std::string& sla_id) const {
        std::shared_lock lock(mu_);
        auto it = slas_.find(sla_id);
        if (it == slas_.end()) throw Error(Errc::NotFound, "no agreement '" + sla_id + "'");
        return it->second;
    }

    IngestStats post_metrics(const std::string& sla_id, std::istream& feed) {
        ParsedFeed parsed = parse_feed_jsonl(feed);
        std::unique_lock lock(mu_);
        if (!slas_.count(sla_id)) throw Error(Errc::NotFound, "no agreement '" + sla_id + "'");
        SampleStore& store = metrics_[sla_id];
        IngestStats stats;
        stats.malformed = parsed.malformed;
        for (const auto& s : parsed.samples) {
            if (store.insert(s)) {
                nlohmann::json line = s;
                line["sla_id"] = sla_id;
                metrics_log_.append(line);
                ++stats.accepted;
            } else {
                ++stats.duplicates;
            }
        }
        return stats;
    }

    ComplianceReport get_compliance(const std::string& sla_id, Window window) const {
        std::shared_lock lock(mu_);
        auto it = slas_.find(sla_id);
        if (it == slas_.end()) throw Error(Errc::NotFound, "no agreement '" + sla_id + "'");
        const Sla& sla = it->second;

        MetricMapping mapping;
        std::map<std::string, bool> mapped;
        for (const auto& rule : config_.mapping.rules) {
            for (const auto& slo : sla.slos) {
                if (rule.sla_indicator == slo.indicator) {
                    mapping.rules.push_back(rule);
                    mapped[slo.indicator] = true;
                }
            }
        }
        for (const auto& slo : sla.slos) {
            if (mapped.count(slo.indicator)) continue;
            MappingRule identity;
            identity.metric_name = slo.indicator;
            identity.sla_indicator = slo.indicator;
            mapping.rules.push_back(identity);
        }

        static const SampleStore empty_store;
        auto ms = metrics_.find(sla_id);
        const SampleStore& store = ms == metrics_.end() ? empty_store : ms->second;
        return evaluate_compliance(sla, map_metrics(mapping, store), window);
    }

    std::vector<ProviderRecord> providers() const {
        std::shared_lock lock(mu_);
        std::vector<ProviderRecord> out;
        out.reserve(providers_.size());
        for (const auto& [id, r] : providers_) {
            (void)id;
            out.push_back(r);
        }
        return out;
    }

    std::optional<ConsumerProfile> profile(const std::string& consumer_id) const {
        std::shared_lock lock(mu_);
        auto it = profiles_.find(consumer_id);
        if (it == profiles_.end()) return std::nullopt;
        return it->second;
    }

private:
    static std::int64_t numeric_suffix(const std::string& id) {
        auto dash = id.rfind('-');
        if (dash == std::string::npos) return 0;
        try {
            return std::stoll(id.substr(dash + 1));
        } catch (const std::exception&) {
            return 0;
        }
    }

    static std::string format_id(const char* prefix, std::int64_t n) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%s-%06lld", prefix, static_cast<long long>(n));
        return buf;
    }

    ConsumerProfile effective_profile(const SlaRequestDoc& doc) const {
        auto it = profiles_.find(doc.consumer_id);
        if (it != profiles_.end()) return it->second;
        ConsumerProfile p;
        p.consumer_id = doc.consumer_id;
        p.threshold = config_.default_threshold;
        p.max_rounds = config_.default_max_rounds;
        return p;
    }

    UtilityParams negotiation_params(const std::vector<QosAttributeSpec>& specs,
                                     const ConsumerProfile& profile) const {
        UtilityParams params;
        for (const auto& spec : specs) {
            AttributeUtility a;
            a.direction = spec.direction;
            a.weight = spec.weight;
            auto alpha = profile.alpha.find(spec.name);
            a.alpha = alpha != profile.alpha.end()
                          ? alpha->second
                          : (spec.direction == Direction::UtilityDriven
                                 ? config_.default_alpha_utility
                                 : config_.default_alpha_cost);
            auto beta = profile.beta.find(spec.name);
            a.beta = beta != profile.beta.end() ? beta->second : config_.default_beta;
            params.attributes[spec.name] = a;
        }
        return params;
    }

    BrokerConfig config_;
    JsonlStore providers_log_;
    JsonlStore profiles_log_;
    JsonlStore sessions_log_;
    JsonlStore slas_log_;
    JsonlStore metrics_log_;
    std::map<std::string, ProviderRecord> providers_;
    std::map<std::string, ConsumerProfile> profiles_;
    std::map<std::string, SessionRecord> sessions_;
    std::map<std::string, Sla> slas_;
    std::map<std::string, SampleStore> metrics_;
    std::int64_t next_session_{1};
    std::int64_t next_sla_{1};
    mutable std::shared_mutex mu_;
};

}  // namespace slabroker

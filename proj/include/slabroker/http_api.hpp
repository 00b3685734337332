#pragma once

#include <cstdint>
#include <sstream>
#include <string>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "slabroker/broker.hpp"
#include "slabroker/errors.hpp"

namespace slabroker {

namespace detail {

inline int http_status(Errc code) {
    switch (code) {
        case Errc::NotFound: return 404;
        case Errc::ConflictingRecord: return 409;
        case Errc::NoProviders: return 409;
        case Errc::NotAgreed: return 409;
        case Errc::Io: return 500;
        default: return 400;
    }
}

inline void reply_json(httplib::Response& res, int status, const nlohmann::json& body) {
    res.status = status;
    res.set_content(body.dump(2) + "\n", "application/json");
}

template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        reply_json(res, http_status(e.code()),
                   nlohmann::json{{"error", errc_name(e.code())}, {"message", e.what()}});
    } catch (const std::exception& e) {
        reply_json(res, 500, nlohmann::json{{"error", "internal"}, {"message", e.what()}});
    }
}

inline std::int64_t query_int(const httplib::Request& req, const std::string& key,
                              std::int64_t fallback) {
    if (!req.has_param(key)) return fallback;
    try {
        return std::stoll(req.get_param_value(key));
    } catch (const std::exception&) {
        throw Error(Errc::Range, "query parameter '" + key + "' is not an integer");
    }
}

}  // namespace detail

// Wires the service onto an HTTP server. Bodies and responses are JSON
// except the request endpoint, which also accepts the XML template format,
// and the metrics endpoint, which takes the JSON-lines feed.
inline void attach_routes(httplib::Server& server, BrokerService& service) {
    server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
        detail::reply_json(res, 200, nlohmann::json{{"status", "ok"}});
    });

    server.Post("/providers", [&service](const httplib::Request& req, httplib::Response& res) {
        detail::guarded(res, [&] {
            bool update = req.get_param_value("update") == "true" ||
                          req.get_param_value("update") == "1";
            nlohmann::json body;
            try {
                body = nlohmann::json::parse(req.body);
            } catch (const nlohmann::json::exception& e) {
                throw Error(Errc::Schema, e.what());
            }
            std::vector<ProviderRecord> records;
            try {
                if (body.is_object() && body.contains("providers"))
                    records = body["providers"].get<std::vector<ProviderRecord>>();
                else
                    records.push_back(body.get<ProviderRecord>());
            } catch (const nlohmann::json::exception& e) {
                throw Error(Errc::Schema, e.what());
            }
            nlohmann::json ids = nlohmann::json::array();
            for (const auto& r : records) ids.push_back(service.register_provider(r, update));
            detail::reply_json(res, 201, nlohmann::json{{"registered", ids}});
        });
    });

    server.Post("/consumers/:id/profile",
                [&service](const httplib::Request& req, httplib::Response& res) {
                    detail::guarded(res, [&] {
                        ConsumerProfile profile;
                        try {
                            profile = nlohmann::json::parse(req.body).get<ConsumerProfile>();
                        } catch (const nlohmann::json::exception& e) {
                            throw Error(Errc::Schema, e.what());
                        }
                        profile.consumer_id = req.path_params.at("id");
                        service.put_profile(profile);
                        detail::reply_json(res, 200,
                                           nlohmann::json{{"consumer_id", profile.consumer_id}});
                    });
                });

    server.Post("/requests", [&service](const httplib::Request& req, httplib::Response& res) {
        detail::guarded(res, [&] {
            std::string content_type = req.get_header_value("Content-Type");
            SlaRequestDoc doc = content_type.find("xml") != std::string::npos
                                    ? parse_sla_request_xml(req.body)
                                    : parse_sla_request_json(req.body);
            if (req.has_param("consumer")) doc.consumer_id = req.get_param_value("consumer");
            std::string session_id = service.submit_request(doc);
            SessionRecord record = service.get_session(session_id);
            nlohmann::json out{{"session_id", session_id},
                               {"state", session_state_name(record.final_attempt().session.state)},
                               {"provider_id", record.final_attempt().provider_id}};
            if (record.final_attempt().session.outcome)
                out["outcome"] = outcome_name(*record.final_attempt().session.outcome);
            if (record.sla_id) out["sla_id"] = *record.sla_id;
            detail::reply_json(res, 201, out);
        });
    });

    server.Get("/sessions/:id", [&service](const httplib::Request& req, httplib::Response& res) {
        detail::guarded(res, [&] {
            detail::reply_json(res, 200, service.get_session(req.path_params.at("id")));
        });
    });

    server.Get("/slas/:id", [&service](const httplib::Request& req, httplib::Response& res) {
        detail::guarded(res, [&] {
            detail::reply_json(res, 200, service.get_sla(req.path_params.at("id")));
        });
    });

    server.Post("/slas/:id/metrics",
                [&service](const httplib::Request& req, httplib::Response& res) {
                    detail::guarded(res, [&] {
                        std::istringstream feed(req.body);
                        IngestStats stats =
                            service.post_metrics(req.path_params.at("id"), feed);
                        detail::reply_json(res, 200,
                                           nlohmann::json{{"accepted", stats.accepted},
                                                          {"duplicates", stats.duplicates},
                                                          {"malformed", stats.malformed}});
                    });
                });

    server.Get("/slas/:id/compliance",
               [&service](const httplib::Request& req, httplib::Response& res) {
                   detail::guarded(res, [&] {
                       const std::string sla_id = req.path_params.at("id");
                       Sla sla = service.get_sla(sla_id);
                       std::int64_t window_ms = 30ll * 24 * 3600 * 1000;
                       for (const auto& slo : sla.slos)
                           window_ms = std::max(window_ms, slo.window_ms);
                       std::int64_t end = detail::query_int(req, "end", now_epoch_ms());
                       std::int64_t start = detail::query_int(req, "start", end - window_ms);
                       detail::reply_json(res, 200,
                                          service.get_compliance(sla_id, Window{start, end}));
                   });
               });
}

}  // namespace slabroker

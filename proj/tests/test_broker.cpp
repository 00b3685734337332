#include <catch2/catch_amalgamated.hpp>

#include <atomic>
#include <chrono>
#include <filesystem>
#include <sstream>
#include <string>

#include "slabroker/broker.hpp"

#include "fixtures.hpp"
#include "matchers.hpp"

using namespace slabroker;
using Catch::Approx;

namespace {

std::filesystem::path fresh_data_dir() {
    static std::atomic<int> counter{0};
    auto stamp = std::chrono::system_clock::now().time_since_epoch().count();
    auto dir = std::filesystem::temp_directory_path() /
               ("slabroker-test-" + std::to_string(stamp) + "-" +
                std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(dir);
    return dir;
}

std::vector<ProviderRecord> table_fleet() {
    std::vector<ProviderRecord> fleet;
    for (const auto& row : fixtures::kCatalog) {
        ProviderRecord r;
        r.provider_id = row.id;
        r.offer = {{"Availability", row.availability},
                   {"Reliability", row.reliability},
                   {"Cost", row.cost},
                   {"Response-time", row.response_time}};
        fleet.push_back(std::move(r));
    }
    return fleet;
}

SlaRequestDoc catalog_request() {
    SlaRequestDoc doc;
    doc.service_name = "ProjectManagementService";
    doc.consumer_id = "company-a";
    doc.entries = {
        QosRequirementEntry{"Availability", 0.97, 1.0, 0.9997, "fraction", 0.305},
        QosRequirementEntry{"Reliability", 0.9995, 1.0, 0.9996, "fraction", 0.267},
        QosRequirementEntry{"Cost", 1.0, 40.0, 25.0, "dollar", 0.197},
        QosRequirementEntry{"Response-time", 1.0, 10.0, 6.0, "ms", 0.231},
    };
    return doc;
}

ProviderRecord simple_provider(const std::string& id, double availability, double cost) {
    ProviderRecord r;
    r.provider_id = id;
    r.offer = {{"Availability", availability}, {"Cost", cost}};
    return r;
}

SlaRequestDoc simple_request() {
    SlaRequestDoc doc;
    doc.service_name = "StorageService";
    doc.consumer_id = "company-b";
    doc.entries = {
        QosRequirementEntry{"Availability", 0.9, 1.0, 0.97, "fraction", 0.6},
        QosRequirementEntry{"Cost", 1.0, 100.0, 50.0, "dollar", 0.4},
    };
    return doc;
}

}  // namespace

TEST_CASE("provider registration rejects conflicts unless updates are allowed",
          "[broker]") {
    BrokerService svc(fresh_data_dir());
    ProviderRecord r = simple_provider("p-1", 0.999, 10.0);
    CHECK(svc.register_provider(r) == "p-1");
    CHECK_THROWS_MATCHES(svc.register_provider(r), Error,
                         ErrcMatcher(Errc::ConflictingRecord));

    r.offer["Cost"] = 12.0;
    svc.register_provider(r, /*allow_update=*/true);
    auto providers = svc.providers();
    REQUIRE(providers.size() == 1);
    CHECK(providers[0].offer.at("Cost") == 12.0);

    ProviderRecord bad;
    CHECK_THROWS_MATCHES(svc.register_provider(bad), Error, ErrcMatcher(Errc::Schema));
    bad.provider_id = "p-2";
    bad.offer = {{"Availability", std::nan("")}};
    CHECK_THROWS_MATCHES(svc.register_provider(bad), Error,
                         ErrcMatcher(Errc::NonFiniteValue));
    bad.offer = {{"Availability", 0.9}};
    bad.template_bounds = {{"Availability", {0.95, 0.9}}};
    CHECK_THROWS_MATCHES(svc.register_provider(bad), Error, ErrcMatcher(Errc::Range));
}

TEST_CASE("profiles are validated and retrievable", "[broker]") {
    BrokerService svc(fresh_data_dir());
    CHECK_FALSE(svc.profile("company-a").has_value());

    ConsumerProfile p;
    CHECK_THROWS_MATCHES(svc.put_profile(p), Error, ErrcMatcher(Errc::Schema));
    p.consumer_id = "company-a";
    p.max_rounds = 0;
    CHECK_THROWS_MATCHES(svc.put_profile(p), Error, ErrcMatcher(Errc::Config));
    p.max_rounds = 10;
    p.threshold = 1.5;
    CHECK_THROWS_MATCHES(svc.put_profile(p), Error, ErrcMatcher(Errc::Config));

    p.threshold = 0.7;
    svc.put_profile(p);
    auto stored = svc.profile("company-a");
    REQUIRE(stored.has_value());
    CHECK(stored->threshold == 0.7);
}

TEST_CASE("a request without capable providers is refused", "[broker]") {
    BrokerService svc(fresh_data_dir());
    CHECK_THROWS_MATCHES(svc.submit_request(simple_request()), Error,
                         ErrcMatcher(Errc::NoProviders));

    // a provider that misses an attribute does not count as capable
    ProviderRecord partial;
    partial.provider_id = "p-partial";
    partial.offer = {{"Availability", 0.99}};
    svc.register_provider(partial);
    CHECK_THROWS_MATCHES(svc.submit_request(simple_request()), Error,
                         ErrcMatcher(Errc::NoProviders));

    // nor does one that is not live
    ProviderRecord down = simple_provider("p-down", 0.99, 10.0);
    down.live = false;
    svc.register_provider(down);
    CHECK_THROWS_MATCHES(svc.submit_request(simple_request()), Error,
                         ErrcMatcher(Errc::NoProviders));
}

TEST_CASE("submit_request ranks the catalog and contracts the best provider",
          "[broker]") {
    BrokerService svc(fresh_data_dir());
    for (const auto& r : table_fleet()) svc.register_provider(r);

    std::string session_id = svc.submit_request(catalog_request());
    CHECK(session_id == "s-000001");

    SessionRecord session = svc.get_session(session_id);
    CHECK(session.consumer_id == "company-a");
    REQUIRE(session.ranking.entries.size() == 24);
    CHECK(session.ranking.method == RankMethod::WeightedUtility);
    CHECK(session.ranking.entries[0].provider_id == "24");
    CHECK(session.ranking.entries[0].score ==
          Approx(fixtures::kWeightedScores[23]).margin(1e-9));
    for (std::size_t i = 0; i < 24; ++i)
        CHECK(session.ranking.entries[i].provider_id == fixtures::kWeightedOrder[i]);

    REQUIRE(session.topsis.entries.size() == 24);
    CHECK(session.topsis.method == RankMethod::Topsis);
    CHECK(session.topsis.entries[0].provider_id == "24");
    CHECK(session.topsis.entries[0].score ==
          Approx(fixtures::kClosenessScores[23]).margin(1e-9));

    REQUIRE(session.attempts.size() == 1);
    CHECK(session.attempts[0].provider_id == "24");
    CHECK(session.attempts[0].session.outcome == NegotiationOutcome::Agreement);

    REQUIRE(session.sla_id.has_value());
    CHECK(*session.sla_id == "sla-000001");

    // provider 24 opens at its advertised terms and those already clear the
    // acceptance threshold, so the agreement round-trips to the advertisement
    Sla sla = svc.get_sla(*session.sla_id);
    CHECK(sla.provider_id == "24");
    CHECK(sla.consumer_id == "company-a");
    CHECK(sla.scope == "ProjectManagementService");
    CHECK(sla.cost_amount == Approx(25.4).margin(1e-9));
    REQUIRE(sla.slos.size() == 3);
    REQUIRE(sla.penalties.size() == 3);
    std::map<std::string, double> targets;
    for (const auto& slo : sla.slos) targets[slo.indicator] = slo.target;
    CHECK(targets.at("Availability") == Approx(0.99999).margin(1e-9));
    CHECK(targets.at("Reliability") == Approx(0.99992).margin(1e-9));
    CHECK(targets.at("Response-time") == Approx(5.0).margin(1e-9));

    nlohmann::json j = session;
    CHECK(j["ranking"]["entries"][0]["score_percent"].get<double>() == Approx(75.14));

    CHECK_THROWS_MATCHES(svc.get_session("s-999999"), Error, ErrcMatcher(Errc::NotFound));
    CHECK_THROWS_MATCHES(svc.get_sla("sla-999999"), Error, ErrcMatcher(Errc::NotFound));
}

TEST_CASE("profile weights steer the ranking", "[broker]") {
    BrokerService svc(fresh_data_dir());
    for (const auto& r : table_fleet()) svc.register_provider(r);

    ConsumerProfile p;
    p.consumer_id = "company-a";
    p.weights = {{"Availability", 0.0},
                 {"Reliability", 0.0},
                 {"Cost", 1.0},
                 {"Response-time", 0.0}};
    svc.put_profile(p);

    std::string session_id = svc.submit_request(catalog_request());
    SessionRecord session = svc.get_session(session_id);

    // with all weight on cost the cheapest advertisement must rank first
    const auto* cheapest = &fixtures::kCatalog[0];
    for (const auto& row : fixtures::kCatalog)
        if (row.cost < cheapest->cost) cheapest = &row;
    CHECK(session.ranking.entries[0].provider_id == std::string(cheapest->id));
    CHECK(session.ranking.entries[0].provider_id != "24");

    // weights that do not cover every requested attribute are a hard error
    ConsumerProfile incomplete;
    incomplete.consumer_id = "company-c";
    incomplete.weights = {{"Availability", 1.0}};
    svc.put_profile(incomplete);
    SlaRequestDoc doc = catalog_request();
    doc.consumer_id = "company-c";
    CHECK_THROWS_MATCHES(svc.submit_request(doc), Error, ErrcMatcher(Errc::Config));
}

TEST_CASE("a rejected best candidate ends the session unless fallback is on",
          "[broker]") {
    // alpha ranks first but its template window cannot host the request;
    // beta ranks second and agrees immediately
    ProviderRecord alpha = simple_provider("alpha", 0.999, 10.0);
    alpha.template_bounds = {{"Cost", {150.0, 200.0}}};
    ProviderRecord beta = simple_provider("beta", 0.99, 20.0);

    SECTION("without fallback the session fails after the first attempt") {
        BrokerService svc(fresh_data_dir());
        svc.register_provider(alpha);
        svc.register_provider(beta);
        std::string id = svc.submit_request(simple_request());
        SessionRecord session = svc.get_session(id);
        CHECK(session.ranking.entries[0].provider_id == "alpha");
        REQUIRE(session.attempts.size() == 1);
        CHECK(session.attempts[0].session.outcome == NegotiationOutcome::Rejected);
        CHECK_FALSE(session.sla_id.has_value());
    }

    SECTION("with fallback the broker moves to the next rank") {
        BrokerConfig cfg;
        cfg.fallback_to_next_rank = true;
        BrokerService svc(fresh_data_dir(), cfg);
        svc.register_provider(alpha);
        svc.register_provider(beta);
        std::string id = svc.submit_request(simple_request());
        SessionRecord session = svc.get_session(id);
        REQUIRE(session.attempts.size() == 2);
        CHECK(session.attempts[0].provider_id == "alpha");
        CHECK(session.attempts[0].session.outcome == NegotiationOutcome::Rejected);
        CHECK(session.attempts[1].provider_id == "beta");
        CHECK(session.attempts[1].session.outcome == NegotiationOutcome::Agreement);
        REQUIRE(session.sla_id.has_value());
        CHECK(svc.get_sla(*session.sla_id).provider_id == "beta");
    }
}

TEST_CASE("metric feeds attach to an agreement and drive compliance", "[broker]") {
    BrokerService svc(fresh_data_dir());
    for (const auto& r : table_fleet()) svc.register_provider(r);
    std::string session_id = svc.submit_request(catalog_request());
    std::string sla_id = *svc.get_session(session_id).sla_id;

    std::istringstream nowhere("{}");
    CHECK_THROWS_MATCHES(svc.post_metrics("sla-999999", nowhere), Error,
                         ErrcMatcher(Errc::NotFound));

    // 20 response-time samples, one over target, plus one duplicate and one
    // malformed line; no mapping is configured so metric names are taken as
    // indicator names directly
    std::ostringstream feed;
    for (int i = 0; i < 20; ++i) {
        double value = i == 7 ? 9.0 : 4.0;
        feed << nlohmann::json{{"timestamp", 1000 + i * 1000},
                               {"metric_name", "Response-time"},
                               {"value", value},
                               {"source_id", "probe-1"}}
             << "\n";
    }
    feed << nlohmann::json{{"timestamp", 1000},
                           {"metric_name", "Response-time"},
                           {"value", 8.8},
                           {"source_id", "probe-1"}}
         << "\n";
    feed << "not json\n";

    std::istringstream in(feed.str());
    IngestStats stats = svc.post_metrics(sla_id, in);
    CHECK(stats.accepted == 20);
    CHECK(stats.duplicates == 1);
    CHECK(stats.malformed == 1);

    ComplianceReport report = svc.get_compliance(sla_id, Window{0, 30'000});
    REQUIRE(report.per_slo.size() == 3);
    std::map<std::string, SloResult> by_indicator;
    for (const auto& r : report.per_slo) by_indicator[r.slo.indicator] = r;

    // 19 of 20 at or under 5 ms: 0.95 achieved against a 95th percentile
    CHECK(by_indicator.at("Response-time").sample_count == 20);
    CHECK(by_indicator.at("Response-time").achieved_fraction == Approx(0.95));
    CHECK(by_indicator.at("Response-time").status == SloStatus::Compliant);
    CHECK(by_indicator.at("Availability").status == SloStatus::Indeterminate);
    CHECK(by_indicator.at("Reliability").status == SloStatus::Indeterminate);
    CHECK(report.violations() == 0);

    // one more miss tips the fraction below the required share
    std::istringstream more(nlohmann::json{{"timestamp", 25'000},
                                           {"metric_name", "Response-time"},
                                           {"value", 7.7},
                                           {"source_id", "probe-1"}}
                                .dump() +
                            "\n");
    svc.post_metrics(sla_id, more);
    report = svc.get_compliance(sla_id, Window{0, 30'000});
    for (const auto& r : report.per_slo) by_indicator[r.slo.indicator] = r;
    CHECK(by_indicator.at("Response-time").status == SloStatus::Violated);
    CHECK(by_indicator.at("Response-time").shortfall ==
          Approx(0.95 - 19.0 / 21.0).margin(1e-12));
    CHECK(report.violations() == 1);
}

TEST_CASE("a restarted service replays to the identical state", "[broker]") {
    auto dir = fresh_data_dir();
    nlohmann::json session_before, sla_before, compliance_before;
    {
        BrokerService svc(dir);
        for (const auto& r : table_fleet()) svc.register_provider(r);
        std::string session_id = svc.submit_request(catalog_request());
        std::string sla_id = *svc.get_session(session_id).sla_id;

        std::istringstream feed(nlohmann::json{{"timestamp", 1000},
                                               {"metric_name", "Response-time"},
                                               {"value", 4.2},
                                               {"source_id", "probe-1"}}
                                    .dump() +
                                "\n");
        svc.post_metrics(sla_id, feed);

        session_before = svc.get_session(session_id);
        sla_before = svc.get_sla(sla_id);
        compliance_before = svc.get_compliance(sla_id, Window{0, 10'000});
    }

    BrokerService replayed(dir);
    CHECK(replayed.providers().size() == 24);
    CHECK(nlohmann::json(replayed.get_session("s-000001")) == session_before);
    CHECK(nlohmann::json(replayed.get_sla("sla-000001")) == sla_before);
    CHECK(nlohmann::json(replayed.get_compliance("sla-000001", Window{0, 10'000})) ==
          compliance_before);

    // id sequences continue where the first process stopped
    std::string next = replayed.submit_request(catalog_request());
    CHECK(next == "s-000002");
    CHECK(*replayed.get_session(next).sla_id == "sla-000002");

    // re-posting the same feed is idempotent after a restart as well
    std::istringstream feed(nlohmann::json{{"timestamp", 1000},
                                           {"metric_name", "Response-time"},
                                           {"value", 4.2},
                                           {"source_id", "probe-1"}}
                                .dump() +
                            "\n");
    IngestStats stats = replayed.post_metrics("sla-000001", feed);
    CHECK(stats.accepted == 0);
    CHECK(stats.duplicates == 1);
}

TEST_CASE("broker config parses from json and validates", "[broker]") {
    nlohmann::json j = {
        {"default_threshold", 0.7},
        {"default_max_rounds", 6},
        {"fallback_to_next_rank", true},
        {"counter_strategy", {{"name", "boulware"}, {"rate", 0.2}, {"exponent", 2.0}}},
        {"defaults", {{"alpha_utility", 0.9}, {"alpha_cost", 0.3}, {"beta", 2.0}}},
        {"agreement", {{"percentile", 99.0}, {"penalty_amount", 7.5}}},
        {"directions", {{"Throughput", "utility"}}},
    };
    BrokerConfig cfg = parse_broker_config(j);
    CHECK(cfg.default_threshold == 0.7);
    CHECK(cfg.default_max_rounds == 6);
    CHECK(cfg.fallback_to_next_rank);
    CHECK(cfg.counter_strategy.name == "boulware");
    CHECK(cfg.default_alpha_cost == 0.3);
    CHECK(cfg.agreement.percentile == 99.0);
    CHECK(cfg.agreement.penalty_amount == 7.5);
    CHECK(cfg.directions.lookup("Throughput") == Direction::UtilityDriven);

    j["counter_strategy"]["name"] = "mystery";
    CHECK_THROWS_MATCHES(parse_broker_config(j), Error, ErrcMatcher(Errc::Config));
}

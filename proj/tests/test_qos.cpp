#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "slabroker/qos.hpp"

#include "fixtures.hpp"
#include "matchers.hpp"

using namespace slabroker;
using Catch::Approx;

namespace {

std::vector<QosAttributeSpec> two_attr_specs(double w_up = 0.6, double w_down = 0.4) {
    return {{"speed", Direction::UtilityDriven, w_up, ""},
            {"price", Direction::CostDriven, w_down, ""}};
}

Offer make_offer(const std::string& id, double speed, double price) {
    Offer o;
    o.provider_id = id;
    o.values = {{"speed", speed}, {"price", price}};
    return o;
}

Requirement make_req(double speed, double price) {
    Requirement r;
    r.values = {{"speed", speed}, {"price", price}};
    return r;
}

}  // namespace

TEST_CASE("normalization bounds span offers and requirement", "[qos]") {
    auto offers = std::vector<Offer>{make_offer("a", 10.0, 5.0), make_offer("b", 20.0, 8.0)};
    auto matrix = normalize(offers, make_req(25.0, 2.0), two_attr_specs());

    CHECK(matrix.bounds.at("speed").lower == 10.0);
    CHECK(matrix.bounds.at("speed").upper == 25.0);  // widened by the requirement
    CHECK(matrix.bounds.at("price").lower == 2.0);
    CHECK(matrix.bounds.at("price").upper == 8.0);

    // speed scales up with the raw value, price is mirrored
    CHECK(matrix.rows[0].values.at("speed") == Approx(0.0));
    CHECK(matrix.rows[1].values.at("speed") == Approx(10.0 / 15.0));
    CHECK(matrix.requirement.at("speed") == Approx(1.0));
    CHECK(matrix.rows[0].values.at("price") == Approx(0.5));
    CHECK(matrix.rows[1].values.at("price") == Approx(0.0));
    CHECK(matrix.requirement.at("price") == Approx(1.0));
}

TEST_CASE("normalization catalog spot values", "[qos]") {
    auto matrix = normalize(fixtures::catalog_offers(), fixtures::catalog_requirement(),
                            fixtures::catalog_specs());

    CHECK(matrix.bounds.at("Availability").lower == Approx(0.99911));
    CHECK(matrix.bounds.at("Availability").upper == Approx(0.99999));
    CHECK(matrix.bounds.at("Reliability").lower == Approx(0.9995));
    CHECK(matrix.bounds.at("Reliability").upper == Approx(0.99992));
    CHECK(matrix.bounds.at("Cost").lower == Approx(6.7));
    CHECK(matrix.bounds.at("Cost").upper == Approx(40.2));
    CHECK(matrix.bounds.at("Response-time").lower == Approx(2.0));
    CHECK(matrix.bounds.at("Response-time").upper == Approx(7.0));

    // row index 11 is provider 12, row index 8 is provider 9
    CHECK(matrix.rows[11].provider_id == "12");
    CHECK(matrix.rows[11].values.at("Availability") ==
          Approx(0.7954545454544651).margin(1e-12));
    CHECK(matrix.rows[11].values.at("Reliability") ==
          Approx(0.6190476190474806).margin(1e-12));
    CHECK(matrix.rows[8].provider_id == "9");
    CHECK(matrix.rows[8].values.at("Availability") ==
          Approx(0.9545454545454086).margin(1e-12));
    // provider 12 has the cheapest offer and provider 4 the dearest
    CHECK(matrix.rows[11].values.at("Cost") == Approx(1.0));
    CHECK(matrix.rows[3].values.at("Cost") == Approx(0.0));
}

TEST_CASE("zero-width window maps every value to 1", "[qos]") {
    auto offers = std::vector<Offer>{make_offer("a", 3.0, 5.0), make_offer("b", 3.0, 9.0)};
    auto matrix = normalize(offers, make_req(3.0, 5.0), two_attr_specs());
    CHECK(matrix.rows[0].values.at("speed") == 1.0);
    CHECK(matrix.rows[1].values.at("speed") == 1.0);
    CHECK(matrix.requirement.at("speed") == 1.0);
}

TEST_CASE("normalization is invariant under affine rescaling of a column", "[qos]") {
    auto offers = std::vector<Offer>{make_offer("a", 10.0, 5.0), make_offer("b", 18.0, 8.0),
                                     make_offer("c", 14.0, 3.5)};
    auto req = make_req(16.0, 4.0);
    auto specs = two_attr_specs();
    auto base = normalize(offers, req, specs);

    const double a = 7.25;
    const double b = -123.0;
    for (auto& o : offers) o.values["price"] = a * o.values["price"] + b;
    req.values["price"] = a * req.values["price"] + b;
    auto scaled = normalize(offers, req, specs);

    for (std::size_t i = 0; i < offers.size(); ++i) {
        CHECK(scaled.rows[i].values.at("price") ==
              Approx(base.rows[i].values.at("price")).margin(1e-12));
        CHECK(scaled.rows[i].values.at("speed") ==
              Approx(base.rows[i].values.at("speed")).margin(1e-12));
    }
    CHECK(scaled.requirement.at("price") == Approx(base.requirement.at("price")).margin(1e-12));
}

TEST_CASE("negating a column and flipping its direction is a no-op", "[qos]") {
    auto offers = std::vector<Offer>{make_offer("a", 10.0, 5.0), make_offer("b", 18.0, 8.0)};
    auto req = make_req(12.0, 6.5);
    auto base = normalize(offers, req, two_attr_specs());

    for (auto& o : offers) o.values["price"] = -o.values["price"];
    req.values["price"] = -req.values["price"];
    auto specs = two_attr_specs();
    specs[1].direction = Direction::UtilityDriven;
    auto flipped = normalize(offers, req, specs);

    for (std::size_t i = 0; i < offers.size(); ++i)
        CHECK(flipped.rows[i].values.at("price") ==
              Approx(base.rows[i].values.at("price")).margin(1e-12));
    CHECK(flipped.requirement.at("price") ==
          Approx(base.requirement.at("price")).margin(1e-12));
}

TEST_CASE("improving an attribute never lowers the aggregate", "[qos]") {
    auto specs = two_attr_specs();
    auto offers = std::vector<Offer>{make_offer("a", 10.0, 5.0), make_offer("b", 18.0, 8.0)};
    auto req = make_req(12.0, 6.5);
    auto before = normalize(offers, req, specs);
    double u_before = aggregate_utility(before.rows[0].values, specs);

    offers[0].values["speed"] = 15.0;  // better for a utility-driven attribute
    auto after = normalize(offers, req, specs);
    double u_after = aggregate_utility(after.rows[0].values, specs);
    CHECK(u_after >= u_before);

    offers[0].values["price"] = 4.0;  // cheaper is better for a cost-driven one
    auto cheaper = normalize(offers, req, specs);
    CHECK(aggregate_utility(cheaper.rows[0].values, specs) >= u_after);
}

TEST_CASE("aggregate matches a straight recompute", "[qos]") {
    auto matrix = normalize(fixtures::catalog_offers(), fixtures::catalog_requirement(),
                            fixtures::catalog_specs());
    auto specs = fixtures::catalog_specs();
    for (const auto& row : matrix.rows) {
        double expected = 0.0;
        for (const auto& s : specs) expected += s.weight * row.values.at(s.name);
        CHECK(aggregate_utility(row.values, specs) == Approx(expected).margin(1e-15));
    }
}

TEST_CASE("normalization input checks", "[qos]") {
    auto specs = two_attr_specs();
    CHECK_THROWS_MATCHES(normalize({}, make_req(1, 1), specs), Error,
                         ErrcMatcher(Errc::EmptyOfferSet));

    auto offers = std::vector<Offer>{make_offer("a", 1.0, 2.0)};
    Requirement missing;
    missing.values = {{"speed", 1.0}};
    CHECK_THROWS_MATCHES(normalize(offers, missing, specs), Error,
                         ErrcMatcher(Errc::AttributeMismatch));

    auto bad = offers;
    bad[0].values["speed"] = std::nan("");
    CHECK_THROWS_MATCHES(normalize(bad, make_req(1, 1), specs), Error,
                         ErrcMatcher(Errc::NonFiniteValue));

    auto dup = specs;
    dup.push_back(specs[0]);
    CHECK_THROWS_MATCHES(normalize(offers, make_req(1, 1), dup), Error,
                         ErrcMatcher(Errc::AttributeMismatch));
}

TEST_CASE("weights must be non-negative and sum to one", "[qos]") {
    auto offers = std::vector<Offer>{make_offer("a", 1.0, 2.0), make_offer("b", 2.0, 1.0)};
    auto req = make_req(1.5, 1.5);

    auto specs = two_attr_specs(0.6, 0.5);  // sums to 1.1
    CHECK_THROWS_MATCHES(select_best(offers, req, specs), Error, ErrcMatcher(Errc::WeightSum));

    specs = two_attr_specs(1.4, -0.4);
    CHECK_THROWS_MATCHES(select_best(offers, req, specs), Error, ErrcMatcher(Errc::WeightSum));
}

TEST_CASE("weighted ranking reproduces the frozen catalog scores", "[qos]") {
    auto table = select_best(fixtures::catalog_offers(), fixtures::catalog_requirement(),
                             fixtures::catalog_specs());
    REQUIRE(table.method == RankMethod::WeightedUtility);
    REQUIRE(table.entries.size() == 24);

    std::map<std::string, double> by_id;
    for (const auto& e : table.entries) by_id[e.provider_id] = e.score;
    for (std::size_t i = 0; i < fixtures::kCatalog.size(); ++i)
        CHECK(by_id.at(fixtures::kCatalog[i].id) ==
              Approx(fixtures::kWeightedScores[i]).margin(1e-9));

    for (std::size_t i = 0; i < table.entries.size(); ++i) {
        CHECK(table.entries[i].rank == static_cast<int>(i) + 1);
        CHECK(table.entries[i].provider_id == fixtures::kWeightedOrder[i]);
    }
}

TEST_CASE("closeness ranking reproduces the frozen catalog scores", "[qos]") {
    auto table = topsis_rank(fixtures::catalog_offers(), fixtures::catalog_requirement(),
                             fixtures::catalog_specs());
    REQUIRE(table.method == RankMethod::Topsis);
    REQUIRE(table.entries.size() == 24);

    std::map<std::string, double> by_id;
    for (const auto& e : table.entries) {
        by_id[e.provider_id] = e.score;
        CHECK(e.score >= 0.0);
        CHECK(e.score <= 1.0);
    }
    for (std::size_t i = 0; i < fixtures::kCatalog.size(); ++i)
        CHECK(by_id.at(fixtures::kCatalog[i].id) ==
              Approx(fixtures::kClosenessScores[i]).margin(1e-9));

    for (std::size_t i = 0; i < table.entries.size(); ++i)
        CHECK(table.entries[i].provider_id == fixtures::kClosenessOrder[i]);
}

TEST_CASE("both methods agree on the best catalog offer", "[qos]") {
    auto weighted = select_best(fixtures::catalog_offers(), fixtures::catalog_requirement(),
                                fixtures::catalog_specs());
    auto closeness = topsis_rank(fixtures::catalog_offers(), fixtures::catalog_requirement(),
                                 fixtures::catalog_specs());
    CHECK(weighted.entries.front().provider_id == "24");
    CHECK(closeness.entries.front().provider_id == "24");
}

TEST_CASE("ties break on ascending provider id, numerically aware", "[qos]") {
    auto offers = std::vector<Offer>{make_offer("10", 5.0, 3.0), make_offer("2", 5.0, 3.0),
                                     make_offer("1", 9.0, 1.0)};
    auto table = select_best(offers, make_req(5.0, 3.0), two_attr_specs());
    REQUIRE(table.entries.size() == 3);
    CHECK(table.entries[0].provider_id == "1");
    CHECK(table.entries[1].provider_id == "2");
    CHECK(table.entries[2].provider_id == "10");
    CHECK(table.entries[1].score == table.entries[2].score);
}

TEST_CASE("provider id ordering", "[qos]") {
    CHECK(provider_id_less("2", "10"));
    CHECK_FALSE(provider_id_less("10", "2"));
    CHECK(provider_id_less("9", "11"));
    CHECK(provider_id_less("alpha", "beta"));
    CHECK(provider_id_less("p1", "p2"));
    CHECK_FALSE(provider_id_less("x", "x"));
}

TEST_CASE("closeness ranking needs at least two offers", "[qos]") {
    auto offers = std::vector<Offer>{make_offer("a", 1.0, 2.0)};
    CHECK_THROWS_MATCHES(topsis_rank(offers, make_req(1, 2), two_attr_specs()), Error,
                         ErrcMatcher(Errc::TooFewOffers));
}

TEST_CASE("identical offers all sit at the ideal point", "[qos]") {
    auto offers = std::vector<Offer>{make_offer("a", 5.0, 3.0), make_offer("b", 5.0, 3.0)};
    auto table = topsis_rank(offers, make_req(5.0, 3.0), two_attr_specs());
    CHECK(table.entries[0].score == 1.0);
    CHECK(table.entries[1].score == 1.0);
    CHECK(table.entries[0].provider_id == "a");
}

TEST_CASE("satisfaction flags compare a row against the requirement", "[qos]") {
    auto offers = std::vector<Offer>{make_offer("a", 10.0, 5.0), make_offer("b", 20.0, 2.0)};
    auto matrix = normalize(offers, make_req(15.0, 4.0), two_attr_specs());

    auto flags_a = satisfaction_flags(matrix, 0);
    CHECK_FALSE(flags_a.at("speed"));  // 10 < required 15
    CHECK_FALSE(flags_a.at("price"));  // 5 dearer than required 4
    auto flags_b = satisfaction_flags(matrix, 1);
    CHECK(flags_b.at("speed"));
    CHECK(flags_b.at("price"));

    CHECK_THROWS_MATCHES(satisfaction_flags(matrix, 2), Error, ErrcMatcher(Errc::Range));
}

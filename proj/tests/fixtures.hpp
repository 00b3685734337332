#pragma once

#include <array>
#include <string>
#include <vector>

#include "slabroker/qos.hpp"

// Reference catalog used across the test suite: 24 advertised offers over
// four attributes, the matching consumer request, and frozen expected scores
// for both ranking methods. The expected values were derived once with an
// independent straight-line recompute and are pinned here to 16 digits.
namespace fixtures {

struct CatalogRow {
    const char* id;
    double availability;
    double reliability;
    double cost;
    double response_time;
};

inline constexpr std::array<CatalogRow, 24> kCatalog{{
    {"1", 0.99988, 0.9995, 16.1, 6},  {"2", 0.99968, 0.99953, 38.1, 2},
    {"3", 0.99935, 0.99962, 8.4, 3},  {"4", 0.99988, 0.99964, 40.2, 3},
    {"5", 0.99959, 0.99954, 12.6, 4}, {"6", 0.99963, 0.99958, 22.2, 6},
    {"7", 0.99939, 0.99971, 33.2, 7}, {"8", 0.99918, 0.99975, 25.3, 2},
    {"9", 0.99995, 0.9999, 30.8, 7},  {"10", 0.99958, 0.99956, 24.2, 3},
    {"11", 0.99945, 0.99971, 22.8, 7}, {"12", 0.99981, 0.99976, 6.7, 7},
    {"13", 0.99911, 0.99987, 15, 3},  {"14", 0.99924, 0.99983, 11.7, 5},
    {"15", 0.99912, 0.9998, 24.8, 5}, {"16", 0.99948, 0.99973, 22.7, 3},
    {"17", 0.99952, 0.99967, 31.9, 5}, {"18", 0.99999, 0.99962, 23.9, 2},
    {"19", 0.99944, 0.99975, 33.7, 3}, {"20", 0.99943, 0.99972, 20.7, 5},
    {"21", 0.99987, 0.99957, 19.6, 5}, {"22", 0.99959, 0.99977, 27.2, 2},
    {"23", 0.9997, 0.99952, 20.4, 4}, {"24", 0.99999, 0.99992, 25.4, 5},
}};

// Frozen weighted utilities and closeness scores per provider, catalog order.
inline constexpr std::array<double, 24> kWeightedScores{
    0.4547973880596823, 0.4599775004845627, 0.5312705175420673, 0.5406749999999337,
    0.4926966854040799, 0.3831351618530451, 0.2717096336498794, 0.5018108305872815,
    0.6006996898623490, 0.4799301366543514, 0.3536632971505403, 0.6048993506492892,
    0.5682053304904069, 0.5148395473928682, 0.3771413888350198, 0.5621633698390891,
    0.3913826565224900, 0.7081394456289374, 0.4963274520255587, 0.4578378755572818,
    0.5214493894164913, 0.6454542547005039, 0.4722387429733821, 0.7514328358208957,
};

inline constexpr std::array<double, 24> kClosenessScores{
    0.4796764691384137, 0.4822256074254832, 0.4912306376227640, 0.5529050277208082,
    0.4791158963981729, 0.4046946374905531, 0.3135260797690892, 0.4794044118458947,
    0.5897247533216302, 0.4770787582711181, 0.3770067557262956, 0.5762310485440205,
    0.5153548795777065, 0.4881089848898246, 0.3924810296034862, 0.5465750090410646,
    0.4042165021069852, 0.6504676430994700, 0.4976398419627741, 0.4502590078874603,
    0.5269796524446752, 0.6223344021201759, 0.4770884042780156, 0.7059529707482026,
};

// Provider ids best-first under each method.
inline const std::vector<std::string> kWeightedOrder{
    "24", "18", "22", "12", "9",  "13", "16", "4", "3",  "21", "14", "8",
    "19", "5",  "10", "23", "2",  "20", "1",  "17", "6", "15", "11", "7"};

inline const std::vector<std::string> kClosenessOrder{
    "24", "18", "22", "9",  "12", "4",  "16", "21", "13", "19", "3", "14",
    "2",  "1",  "8",  "5",  "23", "10", "20", "6",  "17", "15", "11", "7"};

inline std::vector<slabroker::Offer> catalog_offers() {
    std::vector<slabroker::Offer> offers;
    for (const auto& row : kCatalog) {
        slabroker::Offer o;
        o.provider_id = row.id;
        o.values = {{"Availability", row.availability},
                    {"Reliability", row.reliability},
                    {"Cost", row.cost},
                    {"Response-time", row.response_time}};
        offers.push_back(std::move(o));
    }
    return offers;
}

inline std::vector<slabroker::QosAttributeSpec> catalog_specs() {
    using slabroker::Direction;
    return {{"Availability", Direction::UtilityDriven, 0.305, "fraction"},
            {"Reliability", Direction::UtilityDriven, 0.267, "fraction"},
            {"Cost", Direction::CostDriven, 0.197, "dollar"},
            {"Response-time", Direction::CostDriven, 0.231, "ms"}};
}

inline slabroker::Requirement catalog_requirement() {
    slabroker::Requirement req;
    req.values = {{"Availability", 0.9997},
                  {"Reliability", 0.9996},
                  {"Cost", 25.0},
                  {"Response-time", 6.0}};
    return req;
}

}  // namespace fixtures

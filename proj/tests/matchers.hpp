#pragma once

#include <string>

#include <catch2/catch_amalgamated.hpp>

#include "slabroker/errors.hpp"

// Matches a slabroker::Error by its code, for CHECK_THROWS_MATCHES.
struct ErrcMatcher : Catch::Matchers::MatcherBase<slabroker::Error> {
    slabroker::Errc expected;

    explicit ErrcMatcher(slabroker::Errc e) : expected(e) {}

    bool match(const slabroker::Error& err) const override { return err.code() == expected; }

    std::string describe() const override {
        return std::string("has code ") + slabroker::errc_name(expected);
    }
};

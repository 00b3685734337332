#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "slabroker/errors.hpp"

namespace slabroker {

// Time-dependent concession schedule. The fraction says how far an agent has
// moved from its opening position toward its reservation position after a
// given number of rounds; the protocol interpolates terms with it. These
// schedules are engine plumbing with conventional shapes, not part of the
// decision model itself.
struct ConcessionConfig {
    std::string name{"linear"};  // constant | linear | boulware
    double rate{0.25};           // per-round step for the linear schedule
    double exponent{3.0};        // hardness of the boulware schedule

    void validate() const {
        if (name != "constant" && name != "linear" && name != "boulware")
            throw Error(Errc::Config, "unknown concession schedule '" + name + "'");
        if (!std::isfinite(rate) || rate < 0.0)
            throw Error(Errc::Config, "concession rate must be finite and non-negative");
        if (!std::isfinite(exponent) || exponent <= 0.0)
            throw Error(Errc::Config, "concession exponent must be positive");
    }
};

// Fraction conceded after `round` full rounds, clamped to [0, 1]. The
// boulware schedule holds firm early and capitulates as the horizon
// approaches; round max_rounds-1 reaches the full concession.
inline double concession_fraction(const ConcessionConfig& config, int round, int max_rounds) {
    config.validate();
    if (round < 0) throw Error(Errc::Domain, "round must be non-negative");
    if (max_rounds < 1) throw Error(Errc::Domain, "max_rounds must be positive");
    if (config.name == "constant") return 0.0;
    if (config.name == "linear")
        return std::clamp(static_cast<double>(round) * config.rate, 0.0, 1.0);
    double horizon = std::max(1, max_rounds - 1);
    double t = std::min(1.0, static_cast<double>(round) / horizon);
    return std::pow(t, config.exponent);
}

}  // namespace slabroker

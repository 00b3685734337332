#pragma once

#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "slabroker/errors.hpp"
#include "slabroker/qos.hpp"
#include "slabroker/sla.hpp"

namespace slabroker {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::Io, "cannot open '" + path + "'");
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::Io, "cannot write '" + path + "'");
    out << content;
    if (!out) throw Error(Errc::Io, "write failed for '" + path + "'");
}

// Offer tables as CSV: a provider_id column first, then one column per
// attribute, names taken from the header verbatim.
inline std::vector<Offer> load_offers_csv(std::istream& in) {
    auto split = [](const std::string& line) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream row(line);
        while (std::getline(row, cell, ',')) {
            if (!cell.empty() && cell.back() == '\r') cell.pop_back();
            cells.push_back(cell);
        }
        return cells;
    };

    std::string line;
    if (!std::getline(in, line))
        throw Error(Errc::MalformedRecord, "offer table is empty");
    std::vector<std::string> header = split(line);
    if (header.size() < 2 || header[0] != "provider_id")
        throw Error(Errc::MalformedRecord,
                    "offer table header must start with provider_id");

    std::vector<Offer> offers;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::vector<std::string> cells = split(line);
        if (cells.size() != header.size())
            throw Error(Errc::MalformedRecord,
                        "line " + std::to_string(line_no) + ": expected " +
                            std::to_string(header.size()) + " cells, found " +
                            std::to_string(cells.size()));
        Offer offer;
        offer.provider_id = cells[0];
        if (offer.provider_id.empty())
            throw Error(Errc::MalformedRecord,
                        "line " + std::to_string(line_no) + ": empty provider id");
        for (std::size_t i = 1; i < cells.size(); ++i) {
            try {
                std::size_t used = 0;
                double v = std::stod(cells[i], &used);
                if (used != cells[i].size()) throw std::invalid_argument(cells[i]);
                offer.values[header[i]] = v;
            } catch (const std::exception&) {
                throw Error(Errc::MalformedRecord,
                            "line " + std::to_string(line_no) + ": bad number '" +
                                cells[i] + "' for " + header[i]);
            }
        }
        offers.push_back(std::move(offer));
    }
    return offers;
}

inline void to_json(nlohmann::json& j, const Offer& o) {
    j = nlohmann::json{{"provider_id", o.provider_id}, {"values", o.values}};
}

inline void from_json(const nlohmann::json& j, Offer& o) {
    o.provider_id = j.at("provider_id").get<std::string>();
    o.values = j.at("values").get<std::map<std::string, double>>();
}

// Offer tables as JSON: either a top-level array of offers or an object
// with an "offers" array.
inline std::vector<Offer> load_offers_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::MalformedRecord, e.what());
    }
    try {
        if (j.is_object() && j.contains("offers")) return j["offers"].get<std::vector<Offer>>();
        return j.get<std::vector<Offer>>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::MalformedRecord, e.what());
    }
}

inline std::vector<Offer> load_offers(const std::string& path) {
    std::string text = read_file(path);
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv") {
        std::istringstream in(text);
        return load_offers_csv(in);
    }
    return load_offers_json(text);
}

// Request documents dispatch on extension: .xml for the service template
// format, anything else is treated as JSON.
inline SlaRequestDoc load_request(const std::string& path) {
    std::string text = read_file(path);
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".xml")
        return parse_sla_request_xml(text);
    return parse_sla_request_json(text);
}

}  // namespace slabroker

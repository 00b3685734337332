// Command line front end: offline selection, negotiation scenarios, curve
// tables, compliance reports, and the HTTP service.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "slabroker/broker.hpp"
#include "slabroker/concession.hpp"
#include "slabroker/errors.hpp"
#include "slabroker/http_api.hpp"
#include "slabroker/io.hpp"
#include "slabroker/monitoring.hpp"
#include "slabroker/negotiation.hpp"
#include "slabroker/provider.hpp"
#include "slabroker/qos.hpp"
#include "slabroker/sla.hpp"
#include "slabroker/utility.hpp"

namespace {

using nlohmann::json;
using namespace slabroker;

std::vector<double> parse_double_list(const std::string& text, const char* what) {
    std::vector<double> out;
    std::istringstream in(text);
    std::string cell;
    while (std::getline(in, cell, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(cell, &used));
            if (used != cell.size()) throw std::invalid_argument(cell);
        } catch (const std::exception&) {
            throw Error(Errc::Config, std::string(what) + ": bad number '" + cell + "'");
        }
    }
    if (out.empty()) throw Error(Errc::Config, std::string(what) + ": empty list");
    return out;
}

void emit(const std::string& out_path, const std::string& content) {
    if (out_path.empty()) {
        std::cout << content;
        return;
    }
    write_file(out_path, content);
}

std::string render_table(const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> widths;
    for (const auto& row : rows) {
        if (widths.size() < row.size()) widths.resize(row.size(), 0);
        for (std::size_t i = 0; i < row.size(); ++i)
            widths[i] = std::max(widths[i], row[i].size());
    }
    std::ostringstream out;
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            out << row[i];
            if (i + 1 < row.size())
                out << std::string(widths[i] - row[i].size() + 2, ' ');
        }
        out << '\n';
    }
    return out.str();
}

std::string percent2(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", fraction * 100.0);
    return buf;
}

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// --- select --------------------------------------------------------------

struct SelectArgs {
    std::string offers_path;
    std::string request_path;
    std::string weights;
    bool topsis{false};
    bool report{false};
    bool normalized{false};
    std::string format{"table"};
    std::string out;
};

int cmd_select(const SelectArgs& args) {
    SlaRequestDoc doc = load_request(args.request_path);
    std::vector<Offer> offers = load_offers(args.offers_path);
    if (!args.weights.empty()) {
        std::vector<double> w = parse_double_list(args.weights, "--weights");
        if (w.size() != doc.entries.size())
            throw Error(Errc::Config, "--weights needs one value per request attribute");
        for (std::size_t i = 0; i < w.size(); ++i) doc.entries[i].weight = w[i];
        doc.validate();
    }
    DirectionRegistry registry;
    auto [requirement, specs] = to_requirement(doc, registry);
    NormalizedMatrix matrix = normalize(offers, requirement, specs);
    RankingTable ranking = select_best(offers, requirement, specs);
    std::optional<RankingTable> topsis;
    if (args.topsis) topsis = topsis_rank(offers, requirement, specs);

    if (args.format == "json") {
        json out{{"service_name", doc.service_name}, {"weighted_utility", ranking}};
        if (topsis) out["topsis"] = *topsis;
        if (args.report) {
            json sat = json::object();
            for (std::size_t i = 0; i < matrix.rows.size(); ++i)
                sat[matrix.rows[i].provider_id] = satisfaction_flags(matrix, i);
            out["satisfaction"] = sat;
        }
        if (args.normalized) {
            json rows = json::object();
            for (const auto& row : matrix.rows) rows[row.provider_id] = row.values;
            json bounds = json::object();
            for (const auto& [name, b] : matrix.bounds)
                bounds[name] = json::array({b.lower, b.upper});
            out["normalized"] = {{"rows", rows},
                                 {"requirement", matrix.requirement},
                                 {"bounds", bounds}};
        }
        emit(args.out, out.dump(2) + "\n");
        return 0;
    }

    if (args.format == "csv") {
        std::ostringstream out;
        out << "method,rank,provider_id,score_percent\n";
        auto dump = [&](const RankingTable& t) {
            for (const auto& e : t.entries)
                out << rank_method_name(t.method) << ',' << e.rank << ',' << e.provider_id
                    << ',' << percent2(e.score) << '\n';
        };
        dump(ranking);
        if (topsis) dump(*topsis);
        emit(args.out, out.str());
        return 0;
    }

    if (args.format != "table")
        throw Error(Errc::Config, "unknown format '" + args.format + "'");

    std::ostringstream text;
    auto dump_table = [&](const RankingTable& t) {
        text << rank_method_name(t.method) << '\n';
        std::vector<std::vector<std::string>> rows{{"rank", "provider_id", "score%"}};
        for (const auto& e : t.entries)
            rows.push_back({std::to_string(e.rank), e.provider_id, percent2(e.score)});
        text << render_table(rows) << '\n';
    };
    dump_table(ranking);
    if (topsis) dump_table(*topsis);
    if (args.report) {
        text << "satisfaction (offer meets requirement per attribute)\n";
        std::vector<std::vector<std::string>> rows;
        std::vector<std::string> header{"provider_id"};
        for (const auto& spec : specs) header.push_back(spec.name);
        rows.push_back(header);
        for (std::size_t i = 0; i < matrix.rows.size(); ++i) {
            std::vector<std::string> row{matrix.rows[i].provider_id};
            auto flags = satisfaction_flags(matrix, i);
            for (const auto& spec : specs) row.push_back(flags.at(spec.name) ? "yes" : "no");
            rows.push_back(row);
        }
        text << render_table(rows) << '\n';
    }
    if (args.normalized) {
        text << "normalized matrix\n";
        std::vector<std::vector<std::string>> rows;
        std::vector<std::string> header{"provider_id"};
        for (const auto& spec : specs) header.push_back(spec.name);
        rows.push_back(header);
        for (const auto& row : matrix.rows) {
            std::vector<std::string> cells{row.provider_id};
            for (const auto& spec : specs) cells.push_back(num(row.values.at(spec.name)));
            rows.push_back(cells);
        }
        std::vector<std::string> req_row{"(requirement)"};
        for (const auto& spec : specs) req_row.push_back(num(matrix.requirement.at(spec.name)));
        rows.push_back(req_row);
        text << render_table(rows) << '\n';
    }
    emit(args.out, text.str());
    return 0;
}

// --- negotiate -----------------------------------------------------------

struct Scenario {
    UtilityParams params;
    std::map<std::string, Direction> directions;
    double threshold{0.65};
    int max_rounds{10};
    ConcessionConfig broker_strategy{"linear", 0.25, 3.0};
    std::map<std::string, double> ideal_terms;  // empty -> per-direction extremes
    ProviderAgent provider;
};

Scenario parse_scenario(const json& j) {
    Scenario sc;
    if (!j.contains("attributes") || !j["attributes"].is_array() || j["attributes"].empty())
        throw Error(Errc::Config, "scenario needs a non-empty attributes array");
    for (const auto& a : j["attributes"]) {
        std::string name = a.at("name").get<std::string>();
        AttributeUtility u;
        u.direction = parse_direction(a.at("direction").get<std::string>());
        u.weight = a.at("weight").get<double>();
        u.alpha = a.value("alpha", u.direction == Direction::UtilityDriven ? 0.99 : 0.20);
        u.beta = a.value("beta", 1.0);
        sc.params.attributes[name] = u;
        sc.directions[name] = u.direction;
    }
    sc.threshold = j.value("threshold", 0.65);
    sc.max_rounds = j.value("max_rounds", 10);
    if (j.contains("broker")) {
        const auto& b = j["broker"];
        if (b.contains("strategy")) sc.broker_strategy = b["strategy"].get<ConcessionConfig>();
        if (b.contains("ideal_terms"))
            sc.ideal_terms = b["ideal_terms"].get<std::map<std::string, double>>();
    }
    if (!j.contains("provider"))
        throw Error(Errc::Config, "scenario needs a provider section");
    const auto& p = j["provider"];
    sc.provider.provider_id = p.value("provider_id", std::string{"sim"});
    sc.provider.opening_terms = p.at("opening_terms").get<std::map<std::string, double>>();
    sc.provider.best_terms = p.value("best_terms", sc.provider.opening_terms);
    if (p.contains("strategy")) sc.provider.strategy = p["strategy"].get<ConcessionConfig>();
    sc.provider.directions = sc.directions;
    sc.provider.max_rounds = sc.max_rounds;
    return sc;
}

NegotiationSession run_scenario(const Scenario& sc) {
    NegotiationSession session;
    session.session_id = "scenario";
    session.threshold = sc.threshold;
    session.max_rounds = sc.max_rounds;
    session.params = sc.params;
    session.counter_strategy = sc.broker_strategy;
    session.ideal_terms =
        sc.ideal_terms.empty() ? default_ideal_terms(sc.params) : sc.ideal_terms;
    ProviderNegotiator peer(sc.provider);
    return run_negotiation(std::move(session), peer);
}

Scenario random_scenario(std::mt19937& rng) {
    Scenario sc;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> attr_count(1, 4);
    std::uniform_int_distribution<int> beta_pick(0, 3);
    std::uniform_int_distribution<int> strat_pick(0, 2);
    const double betas[] = {0.5, 1.0, 2.0, 4.0};
    const char* strategies[] = {"constant", "linear", "boulware"};

    int n = attr_count(rng);
    std::vector<double> weights(n);
    double weight_sum = 0.0;
    for (auto& w : weights) {
        w = 0.05 + unit(rng);
        weight_sum += w;
    }
    for (int i = 0; i < n; ++i) {
        std::string name = "attr" + std::to_string(i);
        AttributeUtility u;
        u.direction = unit(rng) < 0.5 ? Direction::UtilityDriven : Direction::CostDriven;
        u.weight = weights[i] / weight_sum;
        u.alpha = unit(rng);
        u.beta = betas[beta_pick(rng)];
        sc.params.attributes[name] = u;
        sc.directions[name] = u.direction;

        double opening = unit(rng);
        double best = u.direction == Direction::UtilityDriven
                          ? opening + (1.0 - opening) * unit(rng)
                          : opening * unit(rng);
        sc.provider.opening_terms[name] = opening;
        sc.provider.best_terms[name] = best;
    }
    // Fix the weight sum exactly so validation holds under accumulation noise.
    double acc = 0.0;
    for (const auto& [name, u] : sc.params.attributes) {
        (void)u;
        acc += sc.params.attributes[name].weight;
    }
    sc.params.attributes.rbegin()->second.weight += 1.0 - acc;

    sc.threshold = 0.4 + 0.5 * unit(rng);
    sc.max_rounds = 1 + static_cast<int>(unit(rng) * 11);
    sc.broker_strategy =
        ConcessionConfig{strategies[strat_pick(rng)], 0.05 + 0.4 * unit(rng), 1.0 + 4.0 * unit(rng)};
    sc.provider.strategy =
        ConcessionConfig{strategies[strat_pick(rng)], 0.05 + 0.4 * unit(rng), 1.0 + 4.0 * unit(rng)};
    sc.provider.provider_id = "sim";
    sc.provider.directions = sc.directions;
    sc.provider.max_rounds = sc.max_rounds;
    return sc;
}

struct NegotiateArgs {
    std::string scenario_path;
    int sweep{0};
    std::uint32_t seed{1};
    double threshold{-1.0};
    int max_rounds{0};
    std::string format{"table"};
    std::string out;
};

int cmd_negotiate(const NegotiateArgs& args) {
    if (args.sweep > 0) {
        std::mt19937 rng(args.seed);
        std::map<std::string, int> outcomes;
        std::size_t max_messages = 0;
        long long total_rounds = 0;
        for (int i = 0; i < args.sweep; ++i) {
            Scenario sc = random_scenario(rng);
            NegotiationSession session = run_scenario(sc);
            if (!session.outcome || !session_terminal(session.state))
                throw Error(Errc::ProtocolViolation, "sweep scenario did not terminate");
            std::size_t bound = 2 * static_cast<std::size_t>(session.max_rounds) + 2;
            if (session.transcript.size() > bound)
                throw Error(Errc::ProtocolViolation, "sweep scenario exceeded message bound");
            outcomes[outcome_name(*session.outcome)] += 1;
            max_messages = std::max(max_messages, session.transcript.size());
            total_rounds += session.round;
        }
        if (args.format == "json") {
            json out{{"scenarios", args.sweep},
                     {"seed", args.seed},
                     {"outcomes", outcomes},
                     {"max_messages", max_messages},
                     {"mean_rounds", static_cast<double>(total_rounds) / args.sweep}};
            emit(args.out, out.dump(2) + "\n");
        } else {
            std::vector<std::vector<std::string>> rows{{"outcome", "count"}};
            for (const auto& [name, count] : outcomes)
                rows.push_back({name, std::to_string(count)});
            rows.push_back({"max_messages", std::to_string(max_messages)});
            std::ostringstream text;
            text << args.sweep << " scenarios, seed " << args.seed << "\n"
                 << render_table(rows);
            emit(args.out, text.str());
        }
        return 0;
    }

    if (args.scenario_path.empty())
        throw Error(Errc::Config, "negotiate needs --scenario or --sweep");
    json j;
    try {
        j = json::parse(read_file(args.scenario_path));
    } catch (const json::exception& e) {
        throw Error(Errc::Config, std::string("scenario: ") + e.what());
    }
    Scenario sc = parse_scenario(j);
    if (args.threshold >= 0.0) sc.threshold = args.threshold;
    if (args.max_rounds > 0) {
        sc.max_rounds = args.max_rounds;
        sc.provider.max_rounds = args.max_rounds;
    }
    NegotiationSession session = run_scenario(sc);

    if (args.format == "json") {
        emit(args.out, json(session).dump(2) + "\n");
        return 0;
    }
    std::ostringstream text;
    std::vector<std::vector<std::string>> rows{{"round", "from", "kind", "terms", "note"}};
    for (const auto& m : session.transcript) {
        std::string terms;
        for (const auto& [name, v] : m.terms)
            terms += (terms.empty() ? "" : " ") + name + "=" + num(v);
        rows.push_back({std::to_string(m.round), party_name(m.from),
                        message_kind_name(m.kind), terms, m.annotations});
    }
    text << render_table(rows);
    text << "state: " << session_state_name(session.state);
    if (session.outcome) text << ", outcome: " << outcome_name(*session.outcome);
    text << ", rounds: " << session.round << "\n";
    if (!session.agreed_terms.empty()) {
        text << "agreed:";
        for (const auto& [name, v] : session.agreed_terms) text << ' ' << name << '=' << num(v);
        text << '\n';
    }
    emit(args.out, text.str());
    return 0;
}

// --- curves ----------------------------------------------------------------

struct CurvesArgs {
    std::string kind;
    int grid{101};
    double alpha{-1.0};
    std::string betas;
    std::string weights{"0.7,0.3"};
    std::string alphas{"0.99,0.2"};
    std::string format{"csv"};
    std::string out;
};

int cmd_curves(const CurvesArgs& args) {
    if (args.grid < 2) throw Error(Errc::Config, "--grid must be at least 2");
    std::ostringstream text;
    if (args.kind == "f" || args.kind == "g") {
        bool gain = args.kind == "f";
        double alpha = args.alpha >= 0.0 ? args.alpha : (gain ? 0.99 : 0.20);
        std::vector<double> betas =
            parse_double_list(args.betas.empty() ? "1,2,4" : args.betas, "--betas");
        text << (gain ? "x" : "y");
        for (double b : betas) text << ",beta=" << num(b);
        text << '\n';
        for (int i = 0; i < args.grid; ++i) {
            double t = static_cast<double>(i) / (args.grid - 1);
            text << num(t);
            for (double b : betas)
                text << ',' << num(gain ? utility_gain(t, alpha, b) : utility_cost(t, alpha, b));
            text << '\n';
        }
    } else if (args.kind == "u") {
        std::vector<double> w = parse_double_list(args.weights, "--weights");
        std::vector<double> al = parse_double_list(args.alphas, "--alphas");
        std::vector<double> be = parse_double_list(args.betas.empty() ? "4,2" : args.betas, "--betas");
        if (w.size() != 2 || al.size() != 2 || be.size() != 2)
            throw Error(Errc::Config, "the u surface takes exactly two attributes");
        UtilityParams params;
        params.attributes["x"] = AttributeUtility{Direction::UtilityDriven, w[0], al[0], be[0]};
        params.attributes["y"] = AttributeUtility{Direction::CostDriven, w[1], al[1], be[1]};
        text << "x,y,U\n";
        for (int i = 0; i < args.grid; ++i) {
            for (int k = 0; k < args.grid; ++k) {
                double x = static_cast<double>(i) / (args.grid - 1);
                double y = static_cast<double>(k) / (args.grid - 1);
                text << num(x) << ',' << num(y) << ','
                     << num(global_utility({{"x", x}, {"y", y}}, params)) << '\n';
            }
        }
    } else {
        throw Error(Errc::Config, "--kind must be f, g, or u");
    }

    if (args.format == "json") {
        // Re-shape the CSV into arrays; keeps one code path for the numbers.
        std::istringstream in(text.str());
        std::string line;
        std::getline(in, line);
        json rows = json::array();
        std::istringstream head(line);
        std::vector<std::string> cols;
        std::string col;
        while (std::getline(head, col, ',')) cols.push_back(col);
        while (std::getline(in, line)) {
            std::istringstream cells(line);
            std::string cell;
            json row = json::object();
            for (const auto& name : cols) {
                std::getline(cells, cell, ',');
                row[name] = std::stod(cell);
            }
            rows.push_back(row);
        }
        emit(args.out, rows.dump(2) + "\n");
    } else if (args.format == "csv") {
        emit(args.out, text.str());
    } else {
        throw Error(Errc::Config, "unknown format '" + args.format + "'");
    }
    return 0;
}

// --- monitor ---------------------------------------------------------------

struct MonitorArgs {
    std::string sla_path;
    std::string feed_path;
    std::string mapping_path;
    std::int64_t start{0};
    std::int64_t end{0};
    std::int64_t bucket{0};
    std::string format{"table"};
    std::string out;
};

int cmd_monitor(const MonitorArgs& args) {
    Sla sla;
    try {
        sla = json::parse(read_file(args.sla_path)).get<Sla>();
    } catch (const json::exception& e) {
        throw Error(Errc::Schema, std::string("agreement: ") + e.what());
    }
    sla.validate();

    SampleStore store;
    std::ifstream feed(args.feed_path, std::ios::binary);
    if (!feed) throw Error(Errc::Io, "cannot open '" + args.feed_path + "'");
    IngestStats ingest = store.ingest_jsonl(feed);

    MetricMapping mapping;
    if (!args.mapping_path.empty()) {
        try {
            mapping = json::parse(read_file(args.mapping_path)).get<MetricMapping>();
        } catch (const json::exception& e) {
            throw Error(Errc::Config, std::string("mapping: ") + e.what());
        }
    } else {
        for (const auto& slo : sla.slos) {
            MappingRule rule;
            rule.metric_name = slo.indicator;
            rule.sla_indicator = slo.indicator;
            mapping.rules.push_back(rule);
        }
    }
    if (args.bucket > 0)
        for (auto& rule : mapping.rules) rule.bucket_ms = args.bucket;

    std::map<std::string, std::vector<TimePoint>> series = map_metrics(mapping, store);

    Window window{args.start, args.end};
    if (window.start_ms == 0 && window.end_ms == 0) {
        std::int64_t lo = std::numeric_limits<std::int64_t>::max();
        std::int64_t hi = std::numeric_limits<std::int64_t>::min();
        for (const auto& [name, points] : series) {
            (void)name;
            for (const auto& p : points) {
                lo = std::min(lo, p.timestamp_ms);
                hi = std::max(hi, p.timestamp_ms);
            }
        }
        window = lo > hi ? Window{0, 0} : Window{lo, hi + 1};
    }

    ComplianceReport report = evaluate_compliance(sla, series, window);
    if (args.format == "json") {
        json doc = report;
        doc["ingest"] = {{"accepted", ingest.accepted},
                         {"duplicates", ingest.duplicates},
                         {"malformed", ingest.malformed}};
        emit(args.out, doc.dump(2) + "\n");
        return 0;
    }
    std::vector<std::vector<std::string>> rows{
        {"indicator", "objective", "percentile", "samples", "achieved%", "status", "shortfall"}};
    for (const auto& r : report.per_slo) {
        rows.push_back({r.slo.indicator,
                        std::string(slo_comparator_name(r.slo.comparator)) + " " + num(r.slo.target),
                        num(r.slo.percentile), std::to_string(r.sample_count),
                        r.sample_count ? percent2(r.achieved_fraction) : "-",
                        slo_status_name(r.status),
                        r.status == SloStatus::Violated ? num(r.shortfall) : "-"});
    }
    std::ostringstream text;
    text << "feed: " << ingest.accepted << " accepted, " << ingest.duplicates
         << " duplicates, " << ingest.malformed << " malformed\n"
         << "window [" << window.start_ms << ", " << window.end_ms << ")\n"
         << render_table(rows) << "violations: " << report.violations() << "\n";
    emit(args.out, text.str());
    return 0;
}

// --- serve -------------------------------------------------------------

struct ServeArgs {
    std::string data_dir;
    std::string config_path;
    std::string fleet_path;
    std::string host{"127.0.0.1"};
    int port{8080};
};

int cmd_serve(const ServeArgs& args) {
    std::string data_dir = args.data_dir;
    if (data_dir.empty()) {
        const char* env = std::getenv("SLABROKER_DATA_DIR");
        data_dir = env && *env ? env : "./slabroker-data";
    }
    BrokerConfig config;
    if (!args.config_path.empty()) {
        try {
            config = parse_broker_config(json::parse(read_file(args.config_path)));
        } catch (const json::exception& e) {
            throw Error(Errc::Config, std::string("config: ") + e.what());
        }
    }
    BrokerService service(data_dir, config);
    if (!args.fleet_path.empty()) {
        json fleet;
        try {
            fleet = json::parse(read_file(args.fleet_path));
        } catch (const json::exception& e) {
            throw Error(Errc::Config, std::string("fleet: ") + e.what());
        }
        for (const auto& r : fleet.at("providers"))
            service.register_provider(r.get<ProviderRecord>(), true);
    }
    httplib::Server server;
    attach_routes(server, service);
    std::cout << "listening on http://" << args.host << ":" << args.port
              << " (data: " << data_dir << ")\n";
    if (!server.listen(args.host, args.port))
        throw Error(Errc::Io, "cannot listen on " + args.host + ":" + std::to_string(args.port));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SLA brokering toolkit"};
    app.require_subcommand(1);

    SelectArgs select_args;
    CLI::App* select = app.add_subcommand("select", "rank provider offers for a request");
    select->add_option("--offers", select_args.offers_path, "offer table (.csv or .json)")
        ->required();
    select->add_option("--request", select_args.request_path, "request document (.xml or .json)")
        ->required();
    select->add_option("--weights", select_args.weights,
                       "comma list overriding the request weights, in document order");
    select->add_flag("--topsis", select_args.topsis, "add the closeness-to-ideal ranking");
    select->add_flag("--report", select_args.report, "add per-attribute satisfaction flags");
    select->add_flag("--normalized", select_args.normalized, "add the normalized matrix");
    select->add_option("--format", select_args.format, "table, csv, or json");
    select->add_option("--out", select_args.out, "write to file instead of stdout");

    NegotiateArgs negotiate_args;
    CLI::App* negotiate = app.add_subcommand("negotiate", "run a negotiation scenario");
    negotiate->add_option("--scenario", negotiate_args.scenario_path, "scenario file (.json)");
    negotiate->add_option("--sweep", negotiate_args.sweep,
                          "run this many randomized scenarios instead");
    negotiate->add_option("--seed", negotiate_args.seed, "seed for --sweep");
    negotiate->add_option("--threshold", negotiate_args.threshold,
                          "override the acceptance threshold");
    negotiate->add_option("--max-rounds", negotiate_args.max_rounds,
                          "override the round limit");
    negotiate->add_option("--format", negotiate_args.format, "table or json");
    negotiate->add_option("--out", negotiate_args.out, "write to file instead of stdout");

    CurvesArgs curves_args;
    CLI::App* curves = app.add_subcommand("curves", "tabulate the satisfaction curves");
    curves->add_option("--kind", curves_args.kind, "f (gain), g (cost), or u (surface)")
        ->required();
    curves->add_option("--grid", curves_args.grid, "points per axis");
    curves->add_option("--alpha", curves_args.alpha, "curve bow for f/g");
    curves->add_option("--betas", curves_args.betas, "comma list of curve sharpness values");
    curves->add_option("--weights", curves_args.weights, "two weights for the u surface");
    curves->add_option("--alphas", curves_args.alphas, "two alphas for the u surface");
    curves->add_option("--format", curves_args.format, "csv or json");
    curves->add_option("--out", curves_args.out, "write to file instead of stdout");

    MonitorArgs monitor_args;
    CLI::App* monitor = app.add_subcommand("monitor", "judge a feed against an agreement");
    monitor->add_option("--sla", monitor_args.sla_path, "agreement file (.json)")->required();
    monitor->add_option("--feed", monitor_args.feed_path, "metric feed (.jsonl)")->required();
    monitor->add_option("--mapping", monitor_args.mapping_path, "metric mapping (.json)");
    monitor->add_option("--start", monitor_args.start, "window start, epoch ms");
    monitor->add_option("--end", monitor_args.end, "window end, epoch ms");
    monitor->add_option("--bucket", monitor_args.bucket, "override uptime bucket length, ms");
    monitor->add_option("--format", monitor_args.format, "table or json");
    monitor->add_option("--out", monitor_args.out, "write to file instead of stdout");

    ServeArgs serve_args;
    CLI::App* serve = app.add_subcommand("serve", "run the HTTP service");
    serve->add_option("--data", serve_args.data_dir,
                      "data directory (default: $SLABROKER_DATA_DIR or ./slabroker-data)");
    serve->add_option("--config", serve_args.config_path, "service config (.json)");
    serve->add_option("--fleet", serve_args.fleet_path, "provider fleet to preload (.json)");
    serve->add_option("--host", serve_args.host, "bind address");
    serve->add_option("--port", serve_args.port, "port");

    CLI11_PARSE(app, argc, argv);

    try {
        if (select->parsed()) return cmd_select(select_args);
        if (negotiate->parsed()) return cmd_negotiate(negotiate_args);
        if (curves->parsed()) return cmd_curves(curves_args);
        if (monitor->parsed()) return cmd_monitor(monitor_args);
        if (serve->parsed()) return cmd_serve(serve_args);
    } catch (const slabroker::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "slabroker/errors.hpp"
#include "slabroker/sla.hpp"

namespace slabroker {

struct MetricSample {
    std::int64_t timestamp_ms{0};
    std::string metric_name;
    double value{0.0};
    std::string source_id;
};

inline void to_json(nlohmann::json& j, const MetricSample& s) {
    j = nlohmann::json{{"timestamp", s.timestamp_ms},
                       {"metric_name", s.metric_name},
                       {"value", s.value},
                       {"source_id", s.source_id}};
}

inline void from_json(const nlohmann::json& j, MetricSample& s) {
    s.timestamp_ms = j.at("timestamp").get<std::int64_t>();
    s.metric_name = j.at("metric_name").get<std::string>();
    s.value = j.at("value").get<double>();
    s.source_id = j.at("source_id").get<std::string>();
}

struct IngestStats {
    std::size_t accepted{0};
    std::size_t duplicates{0};
    std::size_t malformed{0};
};

struct ParsedFeed {
    std::vector<MetricSample> samples;
    std::size_t malformed{0};
};

// One JSON object per line: {"timestamp": ms, "metric_name": "...",
// "value": x, "source_id": "..."}. Blank lines are skipped. A line that
// fails to parse, misses a field, or carries a non-finite value counts as
// malformed and is dropped; the rest of the feed still goes through.
inline ParsedFeed parse_feed_jsonl(std::istream& in) {
    ParsedFeed feed;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        MetricSample s;
        try {
            s = nlohmann::json::parse(line).get<MetricSample>();
        } catch (const nlohmann::json::exception&) {
            ++feed.malformed;
            continue;
        }
        if (!std::isfinite(s.value)) {
            ++feed.malformed;
            continue;
        }
        feed.samples.push_back(std::move(s));
    }
    return feed;
}

// Holds raw feed samples, deduplicated on (metric, timestamp, source).
// Replays of the same feed are idempotent; the first value seen for a key
// wins.
class SampleStore {
public:
    // True when the sample is new, false for a duplicate key.
    bool insert(const MetricSample& s) {
        return samples_.emplace(Key{s.metric_name, s.timestamp_ms, s.source_id}, s.value)
            .second;
    }

    IngestStats ingest(const std::vector<MetricSample>& samples) {
        IngestStats stats;
        for (const auto& s : samples) {
            if (insert(s))
                ++stats.accepted;
            else
                ++stats.duplicates;
        }
        return stats;
    }

    IngestStats ingest_jsonl(std::istream& in) {
        ParsedFeed feed = parse_feed_jsonl(in);
        IngestStats stats = ingest(feed.samples);
        stats.malformed = feed.malformed;
        return stats;
    }

    std::size_t size() const { return samples_.size(); }

    // Samples for one metric, ascending by timestamp.
    std::vector<MetricSample> series(const std::string& metric_name) const {
        std::vector<MetricSample> out;
        auto lo = samples_.lower_bound(Key{metric_name, std::numeric_limits<std::int64_t>::min(), ""});
        for (auto it = lo; it != samples_.end() && std::get<0>(it->first) == metric_name; ++it)
            out.push_back(MetricSample{std::get<1>(it->first), std::get<0>(it->first),
                                       it->second, std::get<2>(it->first)});
        return out;
    }

    std::vector<std::string> metric_names() const {
        std::vector<std::string> names;
        for (const auto& [key, value] : samples_) {
            (void)value;
            if (names.empty() || names.back() != std::get<0>(key))
                names.push_back(std::get<0>(key));
        }
        return names;
    }

private:
    using Key = std::tuple<std::string, std::int64_t, std::string>;

    std::map<Key, double> samples_;
};

enum class TransformKind { Identity, Scale, UptimeFromHeartbeat };

inline const char* transform_name(TransformKind t) {
    switch (t) {
        case TransformKind::Identity: return "identity";
        case TransformKind::Scale: return "scale";
        case TransformKind::UptimeFromHeartbeat: return "uptime_from_heartbeat";
    }
    return "unknown";
}

inline TransformKind parse_transform(const std::string& s) {
    for (TransformKind t : {TransformKind::Identity, TransformKind::Scale,
                            TransformKind::UptimeFromHeartbeat})
        if (s == transform_name(t)) return t;
    throw Error(Errc::Config, "unknown transform '" + s + "'");
}

struct MappingRule {
    std::string metric_name;   // feed side
    std::string sla_indicator;  // contract side
    TransformKind transform{TransformKind::Identity};
    double scale_factor{1.0};
    std::int64_t gap_threshold_ms{90'000};
    std::int64_t bucket_ms{3'600'000};
};

struct MetricMapping {
    std::vector<MappingRule> rules;

    void validate() const {
        std::map<std::string, int> indicators;
        for (const auto& r : rules) {
            if (r.metric_name.empty() || r.sla_indicator.empty())
                throw Error(Errc::Config, "mapping rule with empty name");
            if (++indicators[r.sla_indicator] > 1)
                throw Error(Errc::Config,
                            "indicator '" + r.sla_indicator + "' mapped more than once");
            if (!std::isfinite(r.scale_factor) || r.scale_factor == 0.0)
                throw Error(Errc::Config, "scale factor must be finite and non-zero");
            if (r.gap_threshold_ms <= 0 || r.bucket_ms <= 0)
                throw Error(Errc::Config, "gap threshold and bucket must be positive");
        }
    }
};

inline void to_json(nlohmann::json& j, const MappingRule& r) {
    j = nlohmann::json{{"metric_name", r.metric_name},
                       {"sla_indicator", r.sla_indicator},
                       {"transform", transform_name(r.transform)},
                       {"scale_factor", r.scale_factor},
                       {"gap_threshold_ms", r.gap_threshold_ms},
                       {"bucket_ms", r.bucket_ms}};
}

inline void from_json(const nlohmann::json& j, MappingRule& r) {
    r.metric_name = j.at("metric_name").get<std::string>();
    r.sla_indicator = j.at("sla_indicator").get<std::string>();
    r.transform = parse_transform(j.value("transform", std::string{"identity"}));
    r.scale_factor = j.value("scale_factor", 1.0);
    r.gap_threshold_ms = j.value("gap_threshold_ms", std::int64_t{90'000});
    r.bucket_ms = j.value("bucket_ms", std::int64_t{3'600'000});
}

inline void to_json(nlohmann::json& j, const MetricMapping& m) {
    j = nlohmann::json{{"rules", m.rules}};
}

inline void from_json(const nlohmann::json& j, MetricMapping& m) {
    m.rules = j.at("rules").get<std::vector<MappingRule>>();
}

struct TimePoint {
    std::int64_t timestamp_ms{0};
    double value{0.0};
};

namespace detail {

// Derives per-bucket uptime fractions from heartbeat timestamps. Time
// between consecutive heartbeats counts as up when the gap stays at or under
// the threshold and down otherwise; bucket time before the first or after
// the last heartbeat counts down as well.
inline std::vector<TimePoint> uptime_buckets(const std::vector<MetricSample>& heartbeats,
                                             std::int64_t gap_threshold_ms,
                                             std::int64_t bucket_ms) {
    std::vector<TimePoint> out;
    if (heartbeats.empty()) return out;

    std::vector<std::pair<std::int64_t, std::int64_t>> up;
    for (std::size_t i = 1; i < heartbeats.size(); ++i) {
        std::int64_t t0 = heartbeats[i - 1].timestamp_ms;
        std::int64_t t1 = heartbeats[i].timestamp_ms;
        if (t1 - t0 <= gap_threshold_ms) {
            if (!up.empty() && up.back().second == t0)
                up.back().second = t1;
            else
                up.emplace_back(t0, t1);
        }
    }

    auto floor_div = [](std::int64_t a, std::int64_t b) {
        return a >= 0 ? a / b : -((-a + b - 1) / b);
    };
    std::int64_t first_bucket = floor_div(heartbeats.front().timestamp_ms, bucket_ms);
    std::int64_t last_bucket = floor_div(heartbeats.back().timestamp_ms, bucket_ms);
    std::size_t cursor = 0;
    for (std::int64_t b = first_bucket; b <= last_bucket; ++b) {
        std::int64_t start = b * bucket_ms;
        std::int64_t end = start + bucket_ms;
        while (cursor < up.size() && up[cursor].second <= start) ++cursor;
        std::int64_t covered = 0;
        for (std::size_t i = cursor; i < up.size() && up[i].first < end; ++i)
            covered += std::min(end, up[i].second) - std::max(start, up[i].first);
        out.push_back(TimePoint{start, static_cast<double>(covered) / bucket_ms});
    }
    return out;
}

}  // namespace detail

// Applies the mapping rules to the raw feed, producing one time series per
// contract indicator.
inline std::map<std::string, std::vector<TimePoint>> map_metrics(const MetricMapping& mapping,
                                                                 const SampleStore& store) {
    mapping.validate();
    std::map<std::string, std::vector<TimePoint>> out;
    for (const auto& rule : mapping.rules) {
        std::vector<MetricSample> raw = store.series(rule.metric_name);
        std::vector<TimePoint> points;
        switch (rule.transform) {
            case TransformKind::Identity:
                for (const auto& s : raw) points.push_back(TimePoint{s.timestamp_ms, s.value});
                break;
            case TransformKind::Scale:
                for (const auto& s : raw)
                    points.push_back(TimePoint{s.timestamp_ms, s.value * rule.scale_factor});
                break;
            case TransformKind::UptimeFromHeartbeat:
                points = detail::uptime_buckets(raw, rule.gap_threshold_ms, rule.bucket_ms);
                break;
        }
        out[rule.sla_indicator] = std::move(points);
    }
    return out;
}

struct Window {
    std::int64_t start_ms{0};
    std::int64_t end_ms{0};
};

inline void to_json(nlohmann::json& j, const Window& w) {
    j = nlohmann::json{{"start_ms", w.start_ms}, {"end_ms", w.end_ms}};
}

inline void from_json(const nlohmann::json& j, Window& w) {
    w.start_ms = j.at("start_ms").get<std::int64_t>();
    w.end_ms = j.at("end_ms").get<std::int64_t>();
}

enum class SloStatus { Compliant, Violated, Indeterminate };

inline const char* slo_status_name(SloStatus s) {
    switch (s) {
        case SloStatus::Compliant: return "compliant";
        case SloStatus::Violated: return "violated";
        case SloStatus::Indeterminate: return "indeterminate";
    }
    return "unknown";
}

struct SloResult {
    Slo slo;
    std::size_t sample_count{0};
    double achieved_fraction{0.0};  // share of samples meeting the objective
    SloStatus status{SloStatus::Indeterminate};
    double shortfall{0.0};  // required fraction minus achieved, when positive
};

struct ComplianceReport {
    std::string sla_id;
    Window window;
    std::vector<SloResult> per_slo;

    std::size_t violations() const {
        std::size_t n = 0;
        for (const auto& r : per_slo)
            if (r.status == SloStatus::Violated) ++n;
        return n;
    }
};

// Judges every objective of the agreement over one evaluation window. Each
// objective needs its indicator present in the mapped series; an objective
// with no samples inside the window is indeterminate rather than violated.
inline ComplianceReport evaluate_compliance(
    const Sla& sla, const std::map<std::string, std::vector<TimePoint>>& series,
    Window window) {
    sla.validate();
    if (window.end_ms < window.start_ms)
        throw Error(Errc::Range, "window ends before it starts");
    ComplianceReport report;
    report.sla_id = sla.sla_id;
    report.window = window;
    for (const auto& slo : sla.slos) {
        auto it = series.find(slo.indicator);
        if (it == series.end())
            throw Error(Errc::UnmappedIndicator,
                        "no series mapped for indicator '" + slo.indicator + "'");
        SloResult r;
        r.slo = slo;
        std::size_t met = 0;
        for (const auto& p : it->second) {
            if (p.timestamp_ms < window.start_ms || p.timestamp_ms >= window.end_ms) continue;
            ++r.sample_count;
            bool ok = slo.comparator == SloComparator::GreaterEqual ? p.value >= slo.target
                                                                    : p.value <= slo.target;
            if (ok) ++met;
        }
        double required = slo.percentile / 100.0;
        if (r.sample_count == 0) {
            r.status = SloStatus::Indeterminate;
        } else {
            r.achieved_fraction = static_cast<double>(met) / r.sample_count;
            bool compliant = r.achieved_fraction >= required - 1e-12;
            r.status = compliant ? SloStatus::Compliant : SloStatus::Violated;
            if (!compliant) r.shortfall = required - r.achieved_fraction;
        }
        report.per_slo.push_back(std::move(r));
    }
    return report;
}

inline void to_json(nlohmann::json& j, const SloResult& r) {
    j = nlohmann::json{{"slo", r.slo},
                       {"sample_count", r.sample_count},
                       {"achieved_fraction", r.achieved_fraction},
                       {"status", slo_status_name(r.status)}};
    if (r.status == SloStatus::Violated) j["shortfall"] = r.shortfall;
}

inline void to_json(nlohmann::json& j, const ComplianceReport& r) {
    j = nlohmann::json{{"sla_id", r.sla_id}, {"window", r.window}, {"slos", r.per_slo}};
    nlohmann::json violations = nlohmann::json::array();
    for (const auto& s : r.per_slo)
        if (s.status == SloStatus::Violated)
            violations.push_back(nlohmann::json{{"indicator", s.slo.indicator},
                                                {"shortfall", s.shortfall},
                                                {"window", r.window}});
    j["violations"] = violations;
}

}  // namespace slabroker

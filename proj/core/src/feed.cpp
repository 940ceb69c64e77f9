#include "perpsim/feed.hpp"

#include "perpsim/csvio.hpp"
#include "perpsim/errors.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <set>
#include <sstream>

namespace perpsim {
namespace {

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
    std::size_t pos = 0;
    while ((pos = s.find(from, pos)) != std::string::npos) {
        s.replace(pos, from.size(), to);
        pos += to.size();
    }
    return s;
}

struct ParsedUrl {
    std::string host_port; // scheme://host:port
    std::string path;      // /path?query
};

ParsedUrl split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw DataError("feed url must start with http://");
    const std::string scheme = url.substr(0, scheme_end);
    if (scheme != "http")
        throw DataError("feed client supports http:// endpoints only (got " + scheme +
                        "://); pre-seed the cache for anything else");
    const auto path_start = url.find('/', scheme_end + 3);
    ParsedUrl out;
    if (path_start == std::string::npos) {
        out.host_port = url;
        out.path = "/";
    } else {
        out.host_port = url.substr(0, path_start);
        out.path = url.substr(path_start);
    }
    return out;
}

double json_number(const nlohmann::json& v, const std::string& field) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) return parse_double_field(v.get<std::string>(), field);
    throw DataError("feed: field '" + field + "' is not numeric");
}

} // namespace

FeedConfig FeedConfig::from_key_values(const KeyValueConfig& kv) {
    FeedConfig cfg;
    cfg.name = kv.get_string("feed.name", "");
    cfg.kind = kv.get_string("feed.kind", "");
    cfg.url_template = kv.get_string("feed.url", "");
    cfg.auth_env = kv.get_string("feed.auth_env", "");
    cfg.auth_header = kv.get_string("feed.auth_header", "Authorization");
    cfg.records_path = kv.get_string("feed.records_path", "");
    cfg.source_tag = kv.get_string("feed.source_tag", "simulated");
    for (const auto& key : kv.keys())
        if (key.rfind("map.", 0) == 0)
            cfg.field_map[key.substr(4)] = kv.values().at(key);
    if (cfg.name.empty()) throw DataError("feed config: feed.name is required");
    if (cfg.kind != "candles" && cfg.kind != "activity")
        throw DataError("feed config: feed.kind must be candles|activity");
    if (cfg.url_template.empty()) throw DataError("feed config: feed.url is required");
    if (cfg.field_map.find("date") == cfg.field_map.end())
        throw DataError("feed config: map.date is required");
    return cfg;
}

FeedConfig FeedConfig::load(const std::string& path) {
    return from_key_values(KeyValueConfig::load(path));
}

FeedClient::FeedClient(std::string cache_dir) : cache_dir_(std::move(cache_dir)) {
    std::filesystem::create_directories(cache_dir_);
}

std::string FeedClient::cache_path(const FeedConfig& config, Date start, Date end) const {
    return (std::filesystem::path(cache_dir_) /
            (config.name + "_" + start.to_string() + "_" + end.to_string() + ".json"))
        .string();
}

std::string FeedClient::fetch_body(const FeedConfig& config, Date start, Date end) {
    const std::string cached = cache_path(config, start, end);
    if (std::filesystem::exists(cached)) return read_text_file(cached);

    const std::string url = replace_all(
        replace_all(config.url_template, "{start}", start.to_string()), "{end}", end.to_string());
    const ParsedUrl parsed = split_url(url);

    httplib::Client client(parsed.host_port);
    client.set_connection_timeout(10);
    client.set_read_timeout(30);
    httplib::Headers headers;
    if (!config.auth_env.empty()) {
        const char* secret = std::getenv(config.auth_env.c_str());
        if (secret && *secret) headers.emplace(config.auth_header, secret);
    }
    ++network_calls_;
    const httplib::Result res = client.Get(parsed.path, headers);
    if (!res)
        throw DataError("feed '" + config.name +
                        "': transport failure: " + httplib::to_string(res.error()));
    if (res->status != 200)
        throw DataError("feed '" + config.name + "': HTTP " + std::to_string(res->status));
    write_text_file(cached, res->body);
    return res->body;
}

FeedSeries FeedClient::fetch(const FeedConfig& config, Date start, Date end) {
    if (end < start) throw DataError("feed: end date before start date");

    // required schema fields per kind; validate the mapping before any I/O
    std::vector<std::string> fields;
    if (config.kind == "candles") fields = {"date", "open", "high", "low", "close"};
    else fields = {"date", "volume", "oi_long", "oi_short", "liq_long", "liq_short"};
    const bool with_leverage = config.kind == "activity" &&
                               config.field_map.count("lev_long") &&
                               config.field_map.count("lev_short");
    if (with_leverage) {
        fields.push_back("lev_long");
        fields.push_back("lev_short");
    }
    std::vector<std::string> unmatched;
    for (const auto& f : fields)
        if (!config.field_map.count(f)) unmatched.push_back(f);
    if (!unmatched.empty()) {
        std::string list;
        for (const auto& f : unmatched) list += (list.empty() ? "" : ", ") + f;
        throw DataError("feed '" + config.name + "': schema mapping lacks fields: " + list);
    }

    const std::string body = fetch_body(config, start, end);

    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
        throw DataError("feed '" + config.name + "': response is not JSON: " + e.what());
    }
    const nlohmann::json* records = &doc;
    if (!config.records_path.empty()) {
        if (!doc.is_object() || !doc.contains(config.records_path))
            throw DataError("feed '" + config.name + "': response lacks records key '" +
                            config.records_path + "'");
        records = &doc.at(config.records_path);
    }
    if (!records->is_array())
        throw DataError("feed '" + config.name + "': records are not an array");

    // re-emit as CSV so the parsers apply the full schema validation
    std::ostringstream csv;
    for (std::size_t i = 0; i < fields.size(); ++i) csv << (i ? "," : "") << fields[i];
    csv << '\n';
    std::set<std::string> seen_dates;
    for (const auto& record : *records) {
        if (!record.is_object())
            throw DataError("feed '" + config.name + "': record is not an object");
        for (std::size_t i = 0; i < fields.size(); ++i) {
            const std::string& response_key = config.field_map.at(fields[i]);
            if (!record.contains(response_key)) {
                std::string list;
                for (const auto& f : fields)
                    if (!record.contains(config.field_map.at(f)))
                        list += (list.empty() ? "" : ", ") + f + " (<- " +
                                config.field_map.at(f) + ")";
                throw DataError("feed '" + config.name +
                                "': record lacks mapped fields: " + list);
            }
            const auto& value = record.at(response_key);
            if (i == 0) {
                const std::string date = value.get<std::string>();
                seen_dates.insert(date);
                csv << date;
            } else {
                csv << ',' << format_double(json_number(value, fields[i]));
            }
        }
        csv << '\n';
    }

    // every requested day must be present; report the gaps, never fill them
    std::vector<std::string> missing;
    for (Date d = start; d <= end; d = d.next_day())
        if (!seen_dates.count(d.to_string())) missing.push_back(d.to_string());
    if (!missing.empty()) {
        std::string list;
        for (std::size_t i = 0; i < missing.size() && i < 5; ++i)
            list += (i ? ", " : "") + missing[i];
        throw DataError("feed '" + config.name + "': missing " +
                        std::to_string(missing.size()) + " of " +
                        std::to_string(end - start + 1) + " requested days: " + list +
                        (missing.size() > 5 ? ", ..." : ""));
    }

    if (config.kind == "candles") return parse_candles(csv.str());
    return parse_activity(csv.str(), source_tag_from_string(config.source_tag));
}

std::vector<Candle> FeedClient::fetch_candles(const FeedConfig& config, Date start, Date end) {
    return std::get<std::vector<Candle>>(fetch(config, start, end));
}

ActivitySeries FeedClient::fetch_activity(const FeedConfig& config, Date start, Date end) {
    return std::get<ActivitySeries>(fetch(config, start, end));
}

} // namespace perpsim

#pragma once

#include "perpsim/config.hpp"
#include "perpsim/dates.hpp"
#include "perpsim/marketdata.hpp"

#include <map>
#include <string>
#include <variant>
#include <vector>

namespace perpsim {

/// Remote-feed description: endpoint template, credentials location and the
/// response schema mapping. Loaded from a key-value config file:
///
///   feed.name = myfeed
///   feed.kind = candles            # or activity
///   feed.url  = http://host:8080/api?from={start}&to={end}
///   feed.auth_env = MYFEED_KEY     # optional; header value from this env var
///   feed.auth_header = X-Api-Key   # optional, default Authorization
///   feed.records_path = data       # response key holding the record array
///   feed.source_tag = lob-cex      # activity feeds only
///   map.date = t
///   map.open = o                   # one map.* entry per schema field
struct FeedConfig {
    std::string name;
    std::string kind; // "candles" | "activity"
    std::string url_template;
    std::string auth_env;
    std::string auth_header = "Authorization";
    std::string records_path;
    std::string source_tag = "simulated";
    std::map<std::string, std::string> field_map; // our field -> response key

    static FeedConfig from_key_values(const KeyValueConfig& kv);
    static FeedConfig load(const std::string& path);
};

using FeedSeries = std::variant<std::vector<Candle>, ActivitySeries>;

/// HTTP client with a disk cache keyed by (feed, range). A cached range is
/// served byte-identically with zero network calls, so reruns are
/// offline-reproducible. Partially missing days are an error naming the
/// missing dates, never silently filled.
class FeedClient {
public:
    explicit FeedClient(std::string cache_dir);

    FeedSeries fetch(const FeedConfig& config, Date start, Date end);
    std::vector<Candle> fetch_candles(const FeedConfig& config, Date start, Date end);
    ActivitySeries fetch_activity(const FeedConfig& config, Date start, Date end);

    int network_calls() const { return network_calls_; }
    std::string cache_path(const FeedConfig& config, Date start, Date end) const;

private:
    std::string fetch_body(const FeedConfig& config, Date start, Date end);

    std::string cache_dir_;
    int network_calls_ = 0;
};

} // namespace perpsim

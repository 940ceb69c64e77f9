#include "perpsim/config.hpp"
#include "perpsim/errors.hpp"
#include "perpsim/feed.hpp"

#include <doctest.h>
#include <httplib.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <thread>

using namespace perpsim;
namespace fs = std::filesystem;

namespace {

struct LocalFeedServer {
    httplib::Server server;
    std::thread thread;
    int port = 0;
    std::atomic<int> hits{0};
    std::atomic<bool> drop_last_day{false};
    std::string last_auth;

    LocalFeedServer() {
        server.Get("/candles", [this](const httplib::Request& req, httplib::Response& res) {
            ++hits;
            if (req.has_header("X-Api-Key")) last_auth = req.get_header_value("X-Api-Key");
            const Date start = Date::from_string(req.get_param_value("from"));
            Date end = Date::from_string(req.get_param_value("to"));
            if (drop_last_day) end = end + (-1);
            std::ostringstream body;
            body << "{\"data\":[";
            bool first = true;
            double px = 20'000.0;
            for (Date d = start; d <= end; d = d.next_day()) {
                if (!first) body << ',';
                first = false;
                body << "{\"t\":\"" << d.to_string() << "\",\"o\":" << px << ",\"h\":" << px * 1.02
                     << ",\"l\":" << px * 0.99 << ",\"c\":" << px * 1.01 << "}";
                px *= 1.001;
            }
            body << "]}";
            res.set_content(body.str(), "application/json");
        });
        server.Get("/badschema", [this](const httplib::Request&, httplib::Response& res) {
            ++hits;
            res.set_content(R"({"data":[{"day":"2023-01-01","o":1,"h":2,"l":0.5,"c":1.5}]})",
                            "application/json");
        });
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~LocalFeedServer() {
        server.stop();
        thread.join();
    }

    std::string url(const std::string& path) const {
        return "http://127.0.0.1:" + std::to_string(port) + path;
    }
};

FeedConfig candle_feed(const LocalFeedServer& server) {
    KeyValueConfig kv = KeyValueConfig::parse(
        "feed.name = localtest\n"
        "feed.kind = candles\n"
        "feed.records_path = data\n"
        "map.date = t\nmap.open = o\nmap.high = h\nmap.low = l\nmap.close = c\n");
    kv.set("feed.url", server.url("/candles?from={start}&to={end}"));
    return FeedConfig::from_key_values(kv);
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

} // namespace

TEST_CASE("remote fetch, then a byte-identical cache hit with zero network calls") {
    LocalFeedServer server;
    TempDir cache("perpsim-feed-cache-a");
    const FeedConfig feed = candle_feed(server);
    const Date start = Date::from_string("2023-03-01");
    const Date end = Date::from_string("2023-03-10");

    FeedClient first(cache.path.string());
    const auto candles = first.fetch_candles(feed, start, end);
    CHECK(first.network_calls() == 1);
    CHECK(server.hits == 1);
    REQUIRE(candles.size() == 10);
    CHECK(candles.front().date.to_string() == "2023-03-01");
    CHECK(candles.front().open == doctest::Approx(20'000.0));

    // a fresh client on the same cache directory never touches the network
    FeedClient second(cache.path.string());
    const auto cached = second.fetch_candles(feed, start, end);
    CHECK(second.network_calls() == 0);
    CHECK(server.hits == 1);
    REQUIRE(cached.size() == candles.size());
    for (std::size_t i = 0; i < candles.size(); ++i) {
        CHECK(cached[i].open == candles[i].open);   // byte-identical series
        CHECK(cached[i].close == candles[i].close);
    }
}

TEST_CASE("partially missing days are an error naming the missing date") {
    LocalFeedServer server;
    server.drop_last_day = true;
    TempDir cache("perpsim-feed-cache-b");
    FeedClient client(cache.path.string());
    const FeedConfig feed = candle_feed(server);
    try {
        client.fetch_candles(feed, Date::from_string("2023-03-01"), Date::from_string("2023-04-30"));
        FAIL("expected a partial-data error");
    } catch (const DataError& e) {
        const std::string what = e.what();
        CHECK(what.find("missing 1 of 61") != std::string::npos);
        CHECK(what.find("2023-04-30") != std::string::npos);
    }
}

TEST_CASE("schema mapping failures list the unmatched fields") {
    LocalFeedServer server;
    TempDir cache("perpsim-feed-cache-c");
    FeedClient client(cache.path.string());
    KeyValueConfig kv = KeyValueConfig::parse(
        "feed.name = badmap\nfeed.kind = candles\nfeed.records_path = data\n"
        "map.date = t\nmap.open = o\nmap.high = h\nmap.low = l\nmap.close = c\n");
    kv.set("feed.url", server.url("/badschema?from={start}&to={end}"));
    const FeedConfig feed = FeedConfig::from_key_values(kv);
    try {
        client.fetch_candles(feed, Date::from_string("2023-01-01"), Date::from_string("2023-01-01"));
        FAIL("expected a schema error");
    } catch (const DataError& e) {
        const std::string what = e.what();
        CHECK(what.find("lacks mapped fields") != std::string::npos);
        CHECK(what.find("date") != std::string::npos); // 't' missing, response used 'day'
    }

    // a mapping that omits a required field fails before any parsing
    KeyValueConfig incomplete = KeyValueConfig::parse(
        "feed.name = short\nfeed.kind = candles\nmap.date = t\nmap.open = o\n");
    incomplete.set("feed.url", server.url("/candles?from={start}&to={end}"));
    const FeedConfig feed2 = FeedConfig::from_key_values(incomplete);
    try {
        client.fetch_candles(feed2, Date::from_string("2023-01-01"),
                             Date::from_string("2023-01-02"));
        FAIL("expected a mapping-completeness error");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("high") != std::string::npos);
    }
}

TEST_CASE("transport failures surface as data errors") {
    TempDir cache("perpsim-feed-cache-d");
    FeedClient client(cache.path.string());
    KeyValueConfig kv = KeyValueConfig::parse(
        "feed.name = deadend\nfeed.kind = candles\n"
        "feed.url = http://127.0.0.1:9/nothing?a={start}&b={end}\n"
        "map.date = t\nmap.open = o\nmap.high = h\nmap.low = l\nmap.close = c\n");
    CHECK_THROWS_AS(client.fetch_candles(FeedConfig::from_key_values(kv),
                                         Date::from_string("2023-01-01"),
                                         Date::from_string("2023-01-02")),
                    DataError);
    // https endpoints are out of scope for the embedded client
    kv.set("feed.url", "https://example.com/x?a={start}&b={end}");
    CHECK_THROWS_AS(client.fetch_candles(FeedConfig::from_key_values(kv),
                                         Date::from_string("2023-01-01"),
                                         Date::from_string("2023-01-02")),
                    DataError);
}

TEST_CASE("credentials come from the configured environment variable") {
    LocalFeedServer server;
    TempDir cache("perpsim-feed-cache-e");
    ::setenv("PERPSIM_TEST_FEED_KEY", "sekrit", 1);
    KeyValueConfig kv = KeyValueConfig::parse(
        "feed.name = authed\nfeed.kind = candles\nfeed.records_path = data\n"
        "feed.auth_env = PERPSIM_TEST_FEED_KEY\nfeed.auth_header = X-Api-Key\n"
        "map.date = t\nmap.open = o\nmap.high = h\nmap.low = l\nmap.close = c\n");
    kv.set("feed.url", server.url("/candles?from={start}&to={end}"));
    FeedClient client(cache.path.string());
    client.fetch_candles(FeedConfig::from_key_values(kv), Date::from_string("2023-01-01"),
                         Date::from_string("2023-01-03"));
    CHECK(server.last_auth == "sekrit");
    ::unsetenv("PERPSIM_TEST_FEED_KEY");
}

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace perpsim {

/// Flat `key = value` config file. '#' starts a comment, blank lines ignored,
/// keys may be dotted (e.g. "agents.uninformed.count"). Later keys override
/// earlier ones.
class KeyValueConfig {
public:
    KeyValueConfig() = default;

    static KeyValueConfig parse(const std::string& text);
    static KeyValueConfig load(const std::string& path);

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    long get_int(const std::string& key, long fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    void set(const std::string& key, const std::string& value);

    /// Keys in insertion order (for manifest echoes).
    const std::vector<std::string>& keys() const { return order_; }
    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
    std::vector<std::string> order_;
};

} // namespace perpsim

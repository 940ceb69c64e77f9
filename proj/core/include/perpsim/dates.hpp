#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace perpsim {

/// Calendar day. Stored as a proleptic-Gregorian serial day number so that
/// ordering, gap detection and arithmetic are integer operations.
class Date {
public:
    Date() = default;
    Date(int year, int month, int day);

    /// Parses "YYYY-MM-DD". Throws DataError on anything else.
    static Date from_string(const std::string& iso);
    static Date from_serial(std::int64_t days) { return Date(days, 0); }

    std::string to_string() const;

    int year() const;
    int month() const;
    int day() const;

    std::int64_t serial() const { return serial_; }
    Date next_day() const { return Date(serial_ + 1, 0); }

    friend std::int64_t operator-(Date a, Date b) { return a.serial_ - b.serial_; }
    friend Date operator+(Date a, std::int64_t days) { return Date(a.serial_ + days, 0); }
    auto operator<=>(const Date&) const = default;

private:
    Date(std::int64_t serial, int) : serial_(serial) {}
    std::int64_t serial_ = 0; // days since 1970-01-01
};

} // namespace perpsim

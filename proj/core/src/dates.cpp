#include "perpsim/dates.hpp"

#include "perpsim/errors.hpp"

#include <array>
#include <cstdio>

namespace perpsim {
namespace {

// Civil-calendar <-> serial-day conversions (days since 1970-01-01).
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

std::array<int, 3> civil_from_days(std::int64_t z) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    return {static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

} // namespace

Date::Date(int year, int month, int day) : serial_(days_from_civil(year, month, day)) {
    if (month < 1 || month > 12 || day < 1 || day > 31)
        throw DataError("invalid calendar date: " + std::to_string(year) + "-" +
                        std::to_string(month) + "-" + std::to_string(day));
    const auto back = civil_from_days(serial_);
    if (back[0] != year || back[1] != month || back[2] != day)
        throw DataError("invalid calendar date: " + std::to_string(year) + "-" +
                        std::to_string(month) + "-" + std::to_string(day));
}

Date Date::from_string(const std::string& iso) {
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-' ||
        !is_digit(iso[0]) || !is_digit(iso[1]) || !is_digit(iso[2]) || !is_digit(iso[3]) ||
        !is_digit(iso[5]) || !is_digit(iso[6]) || !is_digit(iso[8]) || !is_digit(iso[9]))
        throw DataError("date not in YYYY-MM-DD form: '" + iso + "'");
    const int y = std::stoi(iso.substr(0, 4));
    const int m = std::stoi(iso.substr(5, 2));
    const int d = std::stoi(iso.substr(8, 2));
    return Date(y, m, d);
}

std::string Date::to_string() const {
    const auto c = civil_from_days(serial_);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", c[0], c[1], c[2]);
    return buf;
}

int Date::year() const { return civil_from_days(serial_)[0]; }
int Date::month() const { return civil_from_days(serial_)[1]; }
int Date::day() const { return civil_from_days(serial_)[2]; }

} // namespace perpsim

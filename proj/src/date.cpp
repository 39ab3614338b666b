#include "stockpick/date.hpp"

#include <charconv>

#include "stockpick/errors.hpp"

namespace stockpick {

namespace {

bool is_leap(int y) {
    return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

}  // namespace

int days_in_month(int year, int month) {
    static const int lengths[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (month == 2 && is_leap(year)) return 29;
    return lengths[month - 1];
}

bool Date::valid() const {
    return month >= 1 && month <= 12 && day >= 1 && day <= days_in_month(year, month);
}

std::int64_t Date::serial() const {
    // Howard Hinnant's days_from_civil.
    std::int64_t y = year - (month <= 2);
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (month + (month > 2 ? -3 : 9)) + 2) / 5 + day - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

Date Date::from_serial(std::int64_t days) {
    std::int64_t z = days + 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    return Date{static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

Date Date::add_months(int months) const {
    int total = (year * 12 + (month - 1)) + months;
    int y = total / 12;
    int m = total % 12;
    if (m < 0) {
        m += 12;
        y -= 1;
    }
    Date out{y, m + 1, day};
    int max_day = days_in_month(out.year, out.month);
    if (out.day > max_day) out.day = max_day;
    return out;
}

std::string Date::to_string() const {
    char buf[11];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
    return std::string(buf);
}

Date Date::parse(const std::string& iso) {
    auto fail = [&]() -> Error {
        return Error::data("MalformedRow", "invalid ISO-8601 date '" + iso + "'");
    };
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') throw fail();
    Date d;
    auto parse_part = [&](int begin, int end, int& out) {
        auto [ptr, ec] = std::from_chars(iso.data() + begin, iso.data() + end, out);
        if (ec != std::errc{} || ptr != iso.data() + end) throw fail();
    };
    parse_part(0, 4, d.year);
    parse_part(5, 7, d.month);
    parse_part(8, 10, d.day);
    if (!d.valid()) throw fail();
    return d;
}

}  // namespace stockpick

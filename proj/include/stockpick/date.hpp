#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace stockpick {

// Calendar date with ISO-8601 text form. Comparison is field-wise
// (year, month, day), which matches chronological order.
struct Date {
    int year = 1970;
    int month = 1;
    int day = 1;

    auto operator<=>(const Date&) const = default;

    bool valid() const;

    /// Days since 1970-01-01 (proleptic Gregorian).
    std::int64_t serial() const;
    static Date from_serial(std::int64_t days);

    /// Calendar-month shift; day-of-month clamped to the target month's length.
    Date add_months(int months) const;

    std::string to_string() const;
    static Date parse(const std::string& iso);  // throws Error "MalformedRow"
};

int days_in_month(int year, int month);

}  // namespace stockpick

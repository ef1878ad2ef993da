#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace fraudkit {

/// Calendar date (proleptic Gregorian). Parsed and printed as ISO 8601
/// YYYY-MM-DD. Arithmetic goes through the serial day number (days since
/// 1970-01-01).
struct Date {
    int year = 1970;
    int month = 1;  // 1..12
    int day = 1;    // 1..31

    static std::optional<Date> parse(std::string_view text);
    static Date from_serial(std::int64_t days_since_epoch);

    bool valid() const;
    std::int64_t serial() const;
    Date plus_days(std::int64_t n) const { return from_serial(serial() + n); }
    std::string str() const;

    friend auto operator<=>(const Date& a, const Date& b) {
        if (auto c = a.year <=> b.year; c != 0) return c;
        if (auto c = a.month <=> b.month; c != 0) return c;
        return a.day <=> b.day;
    }
    friend bool operator==(const Date&, const Date&) = default;
};

/// Signed day count from `a` to `b` (positive when b is later).
inline std::int64_t days_between(const Date& a, const Date& b) {
    return b.serial() - a.serial();
}

/// A calendar month, parsed and printed as YYYY-MM.
struct YearMonth {
    int year = 1970;
    int month = 1;

    static std::optional<YearMonth> parse(std::string_view text);
    static YearMonth of(const Date& d) { return {d.year, d.month}; }
    static YearMonth from_index(int idx) { return {idx / 12, idx % 12 + 1}; }

    int index() const { return year * 12 + (month - 1); }
    YearMonth next() const { return from_index(index() + 1); }
    Date first_day() const { return Date{year, month, 1}; }
    Date last_day() const;
    int days_in_month() const;
    std::string str() const;

    friend auto operator<=>(const YearMonth& a, const YearMonth& b) {
        return a.index() <=> b.index();
    }
    friend bool operator==(const YearMonth&, const YearMonth&) = default;
};

}  // namespace fraudkit

#include "fraudkit/dates.hpp"

#include <charconv>
#include <chrono>

namespace fraudkit {
namespace {

bool parse_int(std::string_view s, int& out) {
    if (s.empty()) return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

std::chrono::year_month_day to_ymd(const Date& d) {
    return std::chrono::year{d.year} / d.month / d.day;
}

}  // namespace

std::optional<Date> Date::parse(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    Date d;
    if (!parse_int(text.substr(0, 4), d.year) || !parse_int(text.substr(5, 2), d.month) ||
        !parse_int(text.substr(8, 2), d.day))
        return std::nullopt;
    if (!d.valid()) return std::nullopt;
    return d;
}

bool Date::valid() const {
    return to_ymd(*this).ok();
}

std::int64_t Date::serial() const {
    return std::chrono::sys_days(to_ymd(*this)).time_since_epoch().count();
}

Date Date::from_serial(std::int64_t days_since_epoch) {
    std::chrono::year_month_day ymd{
        std::chrono::sys_days{std::chrono::days{days_since_epoch}}};
    return Date{int(ymd.year()), int(unsigned(ymd.month())), int(unsigned(ymd.day()))};
}

std::string Date::str() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
    return buf;
}

std::optional<YearMonth> YearMonth::parse(std::string_view text) {
    if (text.size() != 7 || text[4] != '-') return std::nullopt;
    YearMonth ym;
    if (!parse_int(text.substr(0, 4), ym.year) || !parse_int(text.substr(5, 2), ym.month))
        return std::nullopt;
    if (ym.month < 1 || ym.month > 12) return std::nullopt;
    return ym;
}

int YearMonth::days_in_month() const {
    auto mdl = std::chrono::year{year} / month / std::chrono::last;
    return int(unsigned(mdl.day()));
}

Date YearMonth::last_day() const {
    return Date{year, month, days_in_month()};
}

std::string YearMonth::str() const {
    char buf[12];
    std::snprintf(buf, sizeof(buf), "%04d-%02d", year, month);
    return buf;
}

}  // namespace fraudkit

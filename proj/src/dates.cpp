#include "survmine/dates.hpp"

#include <array>
#include <charconv>
#include <cstdio>

namespace survmine {

namespace {

bool parse_uint(std::string_view s, unsigned& out) {
    if (s.empty()) return false;
    unsigned v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return false;
    out = v;
    return true;
}

std::optional<std::chrono::year_month_day> parse_ymd(std::string_view s) {
    // Fixed layout YYYY-MM-DD.
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
    unsigned y = 0, m = 0, d = 0;
    if (!parse_uint(s.substr(0, 4), y) || !parse_uint(s.substr(5, 2), m) ||
        !parse_uint(s.substr(8, 2), d)) {
        return std::nullopt;
    }
    std::chrono::year_month_day ymd{std::chrono::year{static_cast<int>(y)},
                                    std::chrono::month{m}, std::chrono::day{d}};
    if (!ymd.ok()) return std::nullopt;
    return ymd;
}

}  // namespace

std::optional<UtcDate> parse_iso_date(std::string_view text) {
    auto ymd = parse_ymd(text);
    if (!ymd) return std::nullopt;
    return UtcDate{*ymd};
}

std::optional<UtcInstant> parse_iso8601(std::string_view text) {
    if (text.size() == 10) {
        auto d = parse_iso_date(text);
        if (!d) return std::nullopt;
        return UtcInstant{d->time_since_epoch()};
    }
    // YYYY-MM-DD{T or space}HH:MM:SS{Z or +00:00}
    if (text.size() < 19) return std::nullopt;
    if (text[10] != 'T' && text[10] != ' ') return std::nullopt;
    auto ymd = parse_ymd(text.substr(0, 10));
    if (!ymd) return std::nullopt;
    std::string_view clock = text.substr(11);
    std::string_view zone;
    if (clock.size() > 8) {
        zone = clock.substr(8);
        clock = clock.substr(0, 8);
    }
    if (!zone.empty() && zone != "Z" && zone != "+00:00" && zone != "+0000") {
        return std::nullopt;
    }
    if (clock.size() != 8 || clock[2] != ':' || clock[5] != ':') return std::nullopt;
    unsigned hh = 0, mm = 0, ss = 0;
    if (!parse_uint(clock.substr(0, 2), hh) || !parse_uint(clock.substr(3, 2), mm) ||
        !parse_uint(clock.substr(6, 2), ss)) {
        return std::nullopt;
    }
    if (hh > 23 || mm > 59 || ss > 60) return std::nullopt;  // 60 tolerates leap seconds
    if (ss == 60) ss = 59;
    std::chrono::sys_days day{*ymd};
    return UtcInstant{day.time_since_epoch() + std::chrono::hours{hh} +
                      std::chrono::minutes{mm} + std::chrono::seconds{ss}};
}

std::string format_iso_date(UtcDate d) {
    std::chrono::year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", int(ymd.year()),
                  unsigned(ymd.month()), unsigned(ymd.day()));
    return buf;
}

std::string format_iso8601(UtcInstant t) {
    UtcDate day = std::chrono::floor<std::chrono::days>(t);
    auto tod = std::chrono::hh_mm_ss{t - day};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%sT%02ld:%02ld:%02ldZ", format_iso_date(day).c_str(),
                  static_cast<long>(tod.hours().count()),
                  static_cast<long>(tod.minutes().count()),
                  static_cast<long>(tod.seconds().count()));
    return buf;
}

std::int64_t whole_days_between(UtcInstant from, UtcInstant to) {
    const std::int64_t secs = (to - from).count();
    // Floor division; negative spans round toward -infinity.
    std::int64_t d = secs / 86400;
    if (secs % 86400 != 0 && secs < 0) --d;
    return d;
}

}  // namespace survmine

#include "roadpop/timestamp.hpp"

#include <charconv>
#include <cstdio>

namespace roadpop {

namespace {

constexpr std::int64_t kMsPerDay = 86'400'000;

bool read_int(std::string_view s, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > s.size()) return false;
  for (std::size_t i = pos; i < pos + len; ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
  }
  std::from_chars(s.data() + pos, s.data() + pos + len, out);
  return true;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

// Inverse of days_from_civil (H. Hinnant's civil_from_days).
void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const auto doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp < 10 ? mp + 3 : mp - 9;
  if (m <= 2) ++y;
}

}  // namespace

std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const auto yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m > 2 ? m - 3 : m + 9) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

double Timestamp::local_seconds_of_day() const {
  const std::int64_t local = utc_ms + std::int64_t{offset_min} * 60'000;
  const std::int64_t ms = local - floor_div(local, kMsPerDay) * kMsPerDay;
  return static_cast<double>(ms) / 1000.0;
}

int Timestamp::local_hour() const { return static_cast<int>(local_seconds_of_day() / 3600.0); }

std::optional<Timestamp> parse_iso8601(std::string_view s) {
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  int year = 0, month = 0, day = 0, hour = 0, minute = 0, second = 0;
  if (!read_int(s, 0, 4, year) || s.size() < 19 || s[4] != '-' || !read_int(s, 5, 2, month) ||
      s[7] != '-' || !read_int(s, 8, 2, day) || (s[10] != 'T' && s[10] != ' ') ||
      !read_int(s, 11, 2, hour) || s[13] != ':' || !read_int(s, 14, 2, minute) || s[16] != ':' ||
      !read_int(s, 17, 2, second)) {
    return std::nullopt;
  }
  if (month < 1 || month > 12 || day < 1 || day > 31 || hour > 23 || minute > 59 || second > 60) {
    return std::nullopt;
  }
  std::size_t pos = 19;
  std::int64_t millis = 0;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    int digits = 0;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
      if (digits < 3) millis = millis * 10 + (s[pos] - '0');
      ++digits;
      ++pos;
    }
    if (digits == 0) return std::nullopt;
    for (int i = digits; i < 3; ++i) millis *= 10;
  }
  int offset = 0;
  if (pos < s.size()) {
    if (s[pos] == 'Z' && pos + 1 == s.size()) {
      offset = 0;
    } else if (s[pos] == '+' || s[pos] == '-') {
      const int sign = s[pos] == '-' ? -1 : 1;
      int oh = 0, om = 0;
      if (!read_int(s, pos + 1, 2, oh)) return std::nullopt;
      std::size_t mpos = pos + 3;
      if (mpos < s.size() && s[mpos] == ':') ++mpos;
      if (mpos < s.size()) {
        if (!read_int(s, mpos, 2, om) || mpos + 2 != s.size()) return std::nullopt;
      }
      if (oh > 14 || om > 59) return std::nullopt;
      offset = sign * (oh * 60 + om);
    } else {
      return std::nullopt;
    }
  }
  const std::int64_t days = days_from_civil(year, static_cast<unsigned>(month), static_cast<unsigned>(day));
  const std::int64_t local_ms =
      days * kMsPerDay + ((hour * 60LL + minute) * 60LL + second) * 1000LL + millis;
  return Timestamp{local_ms - std::int64_t{offset} * 60'000, offset};
}

std::string format_iso8601(const Timestamp& t) {
  const std::int64_t local = t.utc_ms + std::int64_t{t.offset_min} * 60'000;
  const std::int64_t days = floor_div(local, kMsPerDay);
  std::int64_t ms = local - days * kMsPerDay;
  std::int64_t y = 0;
  unsigned m = 0, d = 0;
  civil_from_days(days, y, m, d);
  const auto millis = static_cast<int>(ms % 1000);
  ms /= 1000;
  const auto sec = static_cast<int>(ms % 60);
  const auto min = static_cast<int>((ms / 60) % 60);
  const auto hr = static_cast<int>(ms / 3600);
  char buf[64];
  int n = std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02uT%02d:%02d:%02d", static_cast<long long>(y),
                        m, d, hr, min, sec);
  if (millis != 0) n += std::snprintf(buf + n, sizeof(buf) - n, ".%03d", millis);
  if (t.offset_min == 0) {
    std::snprintf(buf + n, sizeof(buf) - n, "Z");
  } else {
    const int a = t.offset_min < 0 ? -t.offset_min : t.offset_min;
    std::snprintf(buf + n, sizeof(buf) - n, "%c%02d:%02d", t.offset_min < 0 ? '-' : '+', a / 60, a % 60);
  }
  return buf;
}

}  // namespace roadpop

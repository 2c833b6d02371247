#include <secretsniff/timeutil.hpp>

#include <cctype>
#include <cstdio>
#include <ctime>
#include <stdexcept>

namespace secretsniff {

Timestamp
now_seconds()
{
  return std::chrono::floor<std::chrono::seconds>(
    std::chrono::system_clock::now());
}

std::string
format_rfc3339(Timestamp t)
{
  const std::time_t raw = t.time_since_epoch().count();
  std::tm tm{};
  gmtime_r(&raw, &tm);
  char buf[64];
  std::snprintf(buf,
                sizeof(buf),
                "%04d-%02d-%02dT%02d:%02d:%02dZ",
                tm.tm_year + 1900,
                tm.tm_mon + 1,
                tm.tm_mday,
                tm.tm_hour,
                tm.tm_min,
                tm.tm_sec);
  return buf;
}

namespace {

int
read_digits(std::string_view text, std::size_t& pos, std::size_t count)
{
  if (pos + count > text.size()) {
    throw std::invalid_argument("truncated timestamp");
  }
  int value = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const char c = text[pos + i];
    if (!std::isdigit(static_cast<unsigned char>(c))) {
      throw std::invalid_argument("expected digit in timestamp");
    }
    value = value * 10 + (c - '0');
  }
  pos += count;
  return value;
}

void
expect(std::string_view text, std::size_t& pos, char c)
{
  if (pos >= text.size() || text[pos] != c) {
    throw std::invalid_argument("malformed timestamp");
  }
  ++pos;
}

} // namespace

Timestamp
parse_rfc3339(std::string_view text)
{
  using namespace std::chrono;
  std::size_t pos = 0;
  const int year = read_digits(text, pos, 4);
  expect(text, pos, '-');
  const int month = read_digits(text, pos, 2);
  expect(text, pos, '-');
  const int day = read_digits(text, pos, 2);
  if (pos >= text.size() || (text[pos] != 'T' && text[pos] != 't')) {
    throw std::invalid_argument("malformed timestamp");
  }
  ++pos;
  const int hour = read_digits(text, pos, 2);
  expect(text, pos, ':');
  const int minute = read_digits(text, pos, 2);
  expect(text, pos, ':');
  const int second = read_digits(text, pos, 2);
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
      ++pos;
    }
  }

  int offset_minutes = 0;
  if (pos < text.size() && (text[pos] == 'Z' || text[pos] == 'z')) {
    ++pos;
  } else if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
    const int sign = text[pos] == '-' ? -1 : 1;
    ++pos;
    const int oh = read_digits(text, pos, 2);
    expect(text, pos, ':');
    const int om = read_digits(text, pos, 2);
    offset_minutes = sign * (oh * 60 + om);
  } else {
    throw std::invalid_argument("timestamp lacks a UTC offset");
  }
  if (pos != text.size()) {
    throw std::invalid_argument("trailing characters after timestamp");
  }

  const year_month_day ymd{std::chrono::year{year},
                           std::chrono::month{static_cast<unsigned>(month)},
                           std::chrono::day{static_cast<unsigned>(day)}};
  if (!ymd.ok() || hour > 23 || minute > 59 || second > 60) {
    throw std::invalid_argument("timestamp out of range");
  }
  return sys_days{ymd} + hours{hour} + minutes{minute} + seconds{second}
         - minutes{offset_minutes};
}

} // namespace secretsniff

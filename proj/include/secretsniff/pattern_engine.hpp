#pragma once

#include <secretsniff/secret_source.hpp>

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace secretsniff {

struct EngineConfig
{
  std::size_t min_secret_length = 8;
  std::size_t max_gap_ws = 1000;
  std::size_t max_gap_nonws = 5;
};

// space, \t, \n, \v, \f, \r
constexpr bool is_gap_whitespace(unsigned char c)
{
  return c == ' ' || (c >= '\t' && c <= '\r');
}

// A secret compiled for interruption-tolerant matching: its bytes must
// appear in order, and between two consecutive bytes there may be any
// interleaving of at most max_gap_ws whitespace bytes and at most
// max_gap_nonws other bytes.
class InterruptionPattern
{
public:
  const std::string& secret_id() const { return secret_id_; }
  std::string_view literals() const { return literals_; }
  std::size_t max_gap_nonws() const { return max_gap_nonws_; }
  std::size_t max_gap_ws() const { return max_gap_ws_; }

  // Longest span any match of this pattern can cover:
  // L + (L - 1) * (max_gap_nonws + max_gap_ws).
  std::size_t max_span() const;

private:
  friend InterruptionPattern build_pattern(const Secret&, const EngineConfig&);

  std::string secret_id_;
  std::string literals_;
  std::size_t max_gap_nonws_ = 5;
  std::size_t max_gap_ws_ = 1000;
};

struct Match
{
  std::string secret_id;
  std::uint64_t byte_start = 0;
  std::uint64_t byte_end = 0;
  std::uint64_t gap_chars_used = 0;

  bool operator==(const Match&) const = default;
};

// Throws PatternError when the secret is shorter than min_secret_length.
InterruptionPattern build_pattern(const Secret& secret,
                                  const EngineConfig& config);

// Shortest match beginning exactly at `start`, if any.
std::optional<Match> match_at(const InterruptionPattern& pattern,
                              std::string_view text,
                              std::size_t start);

// Non-overlapping matches of one pattern, earliest start wins.
std::vector<Match> find_matches(const InterruptionPattern& pattern,
                                std::string_view text);

// Union over all patterns, sorted by (byte_start, secret_id).
std::vector<Match> find_all(std::span<const InterruptionPattern> patterns,
                            std::string_view text);

namespace detail {
struct GapScratch;
}

// Incremental multi-pattern scanner for text fed as overlapping windows.
// Per-pattern dedup state carries across windows so that a sequence of
// windows yields exactly the matches of a single pass over the whole text.
class MatchScanner
{
public:
  explicit MatchScanner(std::span<const InterruptionPattern> patterns);
  ~MatchScanner();
  MatchScanner(MatchScanner&&) noexcept;
  MatchScanner& operator=(MatchScanner&&) noexcept;

  // Scans `window` whose first byte sits at absolute offset `window_offset`.
  // Only matches starting in [owned_begin, owned_end) (absolute) are
  // reported; the window must extend at least max_span() - 1 bytes past
  // owned_end unless it reaches the end of the text. Windows must be fed
  // in increasing owned ranges. Appends to `out` in start order per pattern.
  void scan(std::string_view window,
            std::uint64_t window_offset,
            std::uint64_t owned_begin,
            std::uint64_t owned_end,
            std::vector<Match>& out);

  void reset();

  // Maximum max_span() over all patterns (0 when empty).
  std::size_t max_span() const { return max_span_; }

private:
  std::span<const InterruptionPattern> patterns_;
  std::vector<std::vector<std::uint32_t>> by_first_byte_;
  std::vector<std::uint64_t> last_end_;
  std::size_t max_span_ = 0;
  std::unique_ptr<detail::GapScratch> scratch_;
};

} // namespace secretsniff

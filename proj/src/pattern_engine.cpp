#include <secretsniff/error.hpp>
#include <secretsniff/pattern_engine.hpp>

#include <algorithm>
#include <limits>

namespace secretsniff {

namespace {

constexpr std::uint32_t unreached = std::numeric_limits<std::uint32_t>::max();

std::size_t
saturating_add(std::size_t a, std::size_t b)
{
  return a > std::numeric_limits<std::size_t>::max() - b
           ? std::numeric_limits<std::size_t>::max()
           : a + b;
}

std::size_t
saturating_mul(std::size_t a, std::size_t b)
{
  if (a != 0 && b > std::numeric_limits<std::size_t>::max() / a) {
    return std::numeric_limits<std::size_t>::max();
  }
  return a * b;
}

} // namespace

std::size_t
InterruptionPattern::max_span() const
{
  const std::size_t n = literals_.size();
  if (n == 0) {
    return 0;
  }
  const std::size_t per_gap = saturating_add(max_gap_nonws_, max_gap_ws_);
  return saturating_add(n, saturating_mul(n - 1, per_gap));
}

InterruptionPattern
build_pattern(const Secret& secret, const EngineConfig& config)
{
  const std::size_t min_len = std::max<std::size_t>(config.min_secret_length, 1);
  if (secret.value.size() < min_len) {
    throw PatternError("secret \"" + secret.id + "\" is shorter than "
                       + std::to_string(min_len) + " bytes");
  }
  InterruptionPattern p;
  p.secret_id_ = secret.id;
  p.literals_ = secret.value;
  p.max_gap_nonws_ = config.max_gap_nonws;
  p.max_gap_ws_ = config.max_gap_ws;
  return p;
}

// Frontier simulation of the gap automaton. A state is (literals matched
// so far, non-whitespace filler in the current gap) holding the smallest
// whitespace filler count that reaches it; a state with fewer of both
// counts dominates. Positions are visited in increasing order, so the
// first completion is the shortest match.
namespace detail {

struct GapScratch
{
  std::vector<std::uint32_t> cur;
  std::vector<std::uint32_t> next;
  std::vector<std::uint32_t> cur_active;
  std::vector<std::uint32_t> next_active;
  std::vector<std::uint8_t> queued;

  void reserve(std::size_t literals, std::size_t width)
  {
    const std::size_t cells = literals * width;
    if (cur.size() < cells) {
      cur.resize(cells, unreached);
      next.resize(cells, unreached);
    }
    if (queued.size() < literals + 1) {
      queued.resize(literals + 1, 0);
    }
  }

  void clear(std::size_t width)
  {
    for (auto i : cur_active) {
      std::fill_n(cur.begin() + i * width, width, unreached);
    }
    for (auto i : next_active) {
      std::fill_n(next.begin() + i * width, width, unreached);
      queued[i] = 0;
    }
    cur_active.clear();
    next_active.clear();
  }

  std::optional<std::size_t> shortest_end(const InterruptionPattern& pattern,
                                          std::string_view text,
                                          std::size_t start);
};

std::optional<std::size_t>
GapScratch::shortest_end(const InterruptionPattern& pattern,
                                    std::string_view text,
                                    std::size_t start)
{
  const std::string_view lits = pattern.literals();
  const std::size_t n = lits.size();
  if (n == 0 || start >= text.size() || text[start] != lits[0]) {
    return std::nullopt;
  }
  if (n == 1) {
    return start + 1;
  }

  const std::size_t max_ws = pattern.max_gap_ws();
  const std::size_t max_nonws = pattern.max_gap_nonws();

  // Until the second literal shows up every byte is filler, so a single
  // counter pair decides whether the attempt can continue at all.
  std::size_t ws = 0;
  std::size_t nonws = 0;
  std::size_t pos = start + 1;
  for (;; ++pos) {
    if (pos >= text.size()) {
      return std::nullopt;
    }
    const auto c = static_cast<unsigned char>(text[pos]);
    if (c == static_cast<unsigned char>(lits[1])) {
      break;
    }
    if (is_gap_whitespace(c)) {
      if (++ws > max_ws) {
        return std::nullopt;
      }
    } else if (++nonws > max_nonws) {
      return std::nullopt;
    }
  }

  const std::size_t width = max_nonws + 1;
  reserve(n, width);
  cur[1 * width + nonws] = static_cast<std::uint32_t>(ws);
  cur_active.push_back(1);

  auto relax = [&](std::uint32_t lit, std::size_t nw, std::uint32_t value) {
    auto& cell = next[lit * width + nw];
    if (value < cell) {
      cell = value;
    }
    if (!queued[lit]) {
      queued[lit] = 1;
      next_active.push_back(lit);
    }
  };

  for (; pos < text.size() && !cur_active.empty(); ++pos) {
    const auto c = static_cast<unsigned char>(text[pos]);
    const bool white = is_gap_whitespace(c);
    for (std::size_t a = 0; a < cur_active.size(); ++a) {
      const std::uint32_t lit = cur_active[a];
      std::uint32_t* row = &cur[lit * width];
      if (c == static_cast<unsigned char>(lits[lit])) {
        if (lit + 1 == n) {
          clear(width);
          return pos + 1;
        }
        relax(lit + 1, 0, 0);
      }
      for (std::size_t nw = 0; nw < width; ++nw) {
        const std::uint32_t w = row[nw];
        if (w == unreached) {
          continue;
        }
        row[nw] = unreached;
        if (white) {
          if (w < max_ws) {
            relax(lit, nw, w + 1);
          }
        } else if (nw + 1 < width) {
          relax(lit, nw + 1, w);
        }
      }
    }
    cur_active.clear();

    for (const std::uint32_t lit : next_active) {
      queued[lit] = 0;
      std::uint32_t* row = &next[lit * width];
      std::uint32_t best = unreached;
      for (std::size_t nw = 0; nw < width; ++nw) {
        if (row[nw] >= best) {
          row[nw] = unreached;
        } else {
          best = row[nw];
        }
      }
      if (best != unreached) {
        cur_active.push_back(lit);
      }
    }
    next_active.clear();
    std::swap(cur, next);
  }

  clear(width);
  return std::nullopt;
}

} // namespace detail

std::optional<Match>
match_at(const InterruptionPattern& pattern, std::string_view text, std::size_t start)
{
  detail::GapScratch scratch;
  const auto end = scratch.shortest_end(pattern, text, start);
  if (!end) {
    return std::nullopt;
  }
  return Match{pattern.secret_id(),
               start,
               *end,
               (*end - start) - pattern.literals().size()};
}

MatchScanner::MatchScanner(std::span<const InterruptionPattern> patterns)
  : patterns_(patterns),
    by_first_byte_(256),
    last_end_(patterns.size(), 0),
    scratch_(std::make_unique<detail::GapScratch>())
{
  for (std::size_t i = 0; i < patterns_.size(); ++i) {
    const auto lits = patterns_[i].literals();
    if (lits.empty()) {
      continue;
    }
    by_first_byte_[static_cast<unsigned char>(lits[0])].push_back(
      static_cast<std::uint32_t>(i));
    max_span_ = std::max(max_span_, patterns_[i].max_span());
  }
}

MatchScanner::~MatchScanner() = default;
MatchScanner::MatchScanner(MatchScanner&&) noexcept = default;
MatchScanner& MatchScanner::operator=(MatchScanner&&) noexcept = default;

void
MatchScanner::reset()
{
  std::fill(last_end_.begin(), last_end_.end(), 0);
}

void
MatchScanner::scan(std::string_view window,
                   std::uint64_t window_offset,
                   std::uint64_t owned_begin,
                   std::uint64_t owned_end,
                   std::vector<Match>& out)
{
  if (patterns_.empty()) {
    return;
  }
  const std::uint64_t window_end = window_offset + window.size();
  const std::uint64_t begin = std::max(owned_begin, window_offset);
  const std::uint64_t end = std::min(owned_end, window_end);
  const auto* data = reinterpret_cast<const unsigned char*>(window.data());

  for (std::uint64_t abs = begin; abs < end; ++abs) {
    const std::size_t rel = abs - window_offset;
    const auto& candidates = by_first_byte_[data[rel]];
    if (candidates.empty()) {
      continue;
    }
    for (const std::uint32_t idx : candidates) {
      if (abs < last_end_[idx]) {
        continue;
      }
      const auto& pattern = patterns_[idx];
      const auto stop = scratch_->shortest_end(pattern, window, rel);
      if (!stop) {
        continue;
      }
      const std::uint64_t match_end = window_offset + *stop;
      out.push_back(Match{pattern.secret_id(),
                          abs,
                          match_end,
                          (match_end - abs) - pattern.literals().size()});
      last_end_[idx] = match_end;
    }
  }
}

std::vector<Match>
find_matches(const InterruptionPattern& pattern, std::string_view text)
{
  std::vector<Match> out;
  MatchScanner scanner(std::span(&pattern, 1));
  scanner.scan(text, 0, 0, text.size(), out);
  return out;
}

std::vector<Match>
find_all(std::span<const InterruptionPattern> patterns, std::string_view text)
{
  std::vector<Match> out;
  MatchScanner scanner(patterns);
  scanner.scan(text, 0, 0, text.size(), out);
  std::sort(out.begin(), out.end(), [](const Match& a, const Match& b) {
    if (a.byte_start != b.byte_start) {
      return a.byte_start < b.byte_start;
    }
    if (a.secret_id != b.secret_id) {
      return a.secret_id < b.secret_id;
    }
    return a.byte_end < b.byte_end;
  });
  return out;
}

} // namespace secretsniff

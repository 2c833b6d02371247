#include <secretsniff/error.hpp>
#include <secretsniff/pattern_engine.hpp>

#include "support/gap_oracle.hpp"
#include "support/planting.hpp"

#include <doctest.h>

#include <random>

using namespace secretsniff;

namespace {

InterruptionPattern
pattern_for(const std::string& value, EngineConfig config = {})
{
  return build_pattern(Secret{"s", value, {}}, config);
}

std::vector<oracle::OracleMatch>
engine_spans(const InterruptionPattern& p, std::string_view text)
{
  std::vector<oracle::OracleMatch> out;
  for (const auto& m : find_matches(p, text)) {
    out.push_back({m.byte_start, m.byte_end});
  }
  return out;
}

} // namespace

TEST_CASE("build_pattern keeps every byte literal and the default gap bound")
{
  const auto p = pattern_for("abcdefgh");
  CHECK(p.literals() == "abcdefgh");
  CHECK(p.literals().size() == 8);
  CHECK(p.max_gap_nonws() == 5);
  CHECK(p.max_gap_ws() == 1000);
  CHECK(p.max_span() == 8 + 7 * (5 + 1000));
}

TEST_CASE("regex metacharacters are plain literals")
{
  const auto p = pattern_for("a.c$efgh");
  CHECK(match_at(p, "a.c$efgh", 0).has_value());
  // '.' is not a wildcard: "aXc$efgh" has no '.' at all, so no match.
  CHECK_FALSE(match_at(p, "aXc$efgh", 0).has_value());
  // With the dot present after filler the gap rule applies.
  const auto m = match_at(p, "aX.c$efgh", 0);
  REQUIRE(m);
  CHECK(m->byte_end == 9);
  CHECK(m->gap_chars_used == 1);
}

TEST_CASE("secrets shorter than min_secret_length are rejected by id")
{
  try {
    build_pattern(Secret{"tiny-one", "short", {}}, EngineConfig{});
    FAIL("expected PatternError");
  } catch (const PatternError& e) {
    CHECK(std::string(e.what()).find("tiny-one") != std::string::npos);
    CHECK(std::string(e.what()).find("short\"") == std::string::npos);
  }
}

TEST_CASE("match_at examples")
{
  const auto p = pattern_for("abcdwxyz");

  SUBCASE("zero gap")
  {
    const auto m = match_at(p, "abcdwxyz", 0);
    REQUIRE(m);
    CHECK(m->byte_start == 0);
    CHECK(m->byte_end == 8);
    CHECK(m->gap_chars_used == 0);
  }
  SUBCASE("one gap of five non-whitespace bytes")
  {
    const auto m = match_at(p, "ab12345cdwxyz", 0);
    REQUIRE(m);
    CHECK(m->byte_end == 13);
    CHECK(m->gap_chars_used == 5);
  }
  SUBCASE("six non-whitespace bytes is one too many")
  {
    CHECK_FALSE(match_at(p, "ab123456cdwxyz", 0));
  }
  SUBCASE("whitespace-only gaps")
  {
    const std::string text = "a b\n\tc   dwxyz";
    const auto m = match_at(p, text, 0);
    REQUIRE(m);
    CHECK(m->byte_end == text.size());
  }
  SUBCASE("whitespace does not reset the non-whitespace budget")
  {
    CHECK_FALSE(match_at(p, "ab 12 345 6 cdwxyz", 0));
    CHECK(match_at(p, "ab 12 345 cdwxyz", 0));
  }
  SUBCASE("no trailing or leading gap")
  {
    const auto m = match_at(p, "abcdwxyz   ", 0);
    REQUIRE(m);
    CHECK(m->byte_end == 8);
  }
  SUBCASE("text not starting with the first literal")
  {
    CHECK_FALSE(match_at(p, "xbcdwxyz", 0));
  }
}

TEST_CASE("string concatenation and line wrapping are caught")
{
  const auto p = pattern_for("hunter2token");
  CHECK(match_at(p, R"(hunter2" + "token)", 0));
  CHECK(match_at(p, "hunter2\" \\\n    \"token", 0));
}

TEST_CASE("whitespace cap is honoured")
{
  EngineConfig cfg;
  cfg.max_gap_ws = 3;
  const auto p = pattern_for("abcdwxyz", cfg);
  CHECK(match_at(p, "ab   cdwxyz", 0));
  CHECK_FALSE(match_at(p, "ab    cdwxyz", 0));
  CHECK(p.max_span() == 8 + 7 * (5 + 3));
}

TEST_CASE("shortest match is reported")
{
  const auto p = pattern_for("abababab");
  // Filler may itself contain literal bytes; the earliest completion wins.
  const auto m = match_at(p, "abababababab", 0);
  REQUIRE(m);
  CHECK(m->byte_end == 8);
}

TEST_CASE("find_matches examples")
{
  const auto p = pattern_for("abcdwxyz");
  const auto two = find_matches(p, "abcdwxyz..abcdwxyz");
  REQUIRE(two.size() == 2);
  CHECK(two[0].byte_start == 0);
  CHECK(two[1].byte_start == 10);

  const auto run = find_matches(pattern_for("aaaaaaaa"), "aaaaaaaaa");
  REQUIRE(run.size() == 1);
  CHECK(run[0].byte_start == 0);
  CHECK(run[0].byte_end == 8);

  CHECK(find_matches(p, "").empty());
}

TEST_CASE("find_all examples")
{
  std::vector<InterruptionPattern> ps{build_pattern(Secret{"b", "zzzzqqqq1", {}}, {}),
                                      build_pattern(Secret{"a", "abcdwxyz", {}}, {})};
  const auto ms = find_all(ps, "..zzzzqqqq1..abcdwxyz..");
  REQUIRE(ms.size() == 2);
  CHECK(ms[0].secret_id == "b");
  CHECK(ms[1].secret_id == "a");
  CHECK(find_all({}, "anything").empty());

  // Same start: ordered by id.
  std::vector<InterruptionPattern> same{build_pattern(Secret{"z", "abcdwxyz", {}}, {}),
                                        build_pattern(Secret{"m", "abcdwxyz", {}}, {})};
  const auto tied = find_all(same, "abcdwxyz");
  REQUIRE(tied.size() == 2);
  CHECK(tied[0].secret_id == "m");
}

TEST_CASE("engine agrees with the reference oracle on random inputs")
{
  std::mt19937_64 rng(0x5eed);
  std::uniform_int_distribution<std::size_t> secret_len(8, 24);
  std::uniform_int_distribution<int> gap_size(0, 8);
  std::uniform_int_distribution<int> coin(0, 3);
  std::uniform_int_distribution<std::size_t> ws_cap(0, 6);

  for (int trial = 0; trial < 1500; ++trial) {
    // A tiny alphabet makes partial and overlapping matches common.
    const std::string alphabet = trial % 2 ? "ab" : "abc";
    const std::string secret = gen::random_string(rng, secret_len(rng), alphabet);
    EngineConfig cfg;
    if (trial % 3 == 0) {
      cfg.max_gap_ws = ws_cap(rng);
    }
    const auto p = pattern_for(secret, cfg);
    oracle::GapOracle ref(secret, cfg.max_gap_nonws, cfg.max_gap_ws);

    std::string text = gen::random_string(rng, 20, alphabet + "x ");
    for (int plant = 0; plant < 3; ++plant) {
      text += gen::interrupted(secret, [&](std::size_t) {
        return coin(rng) ? std::string() : gen::gap_filler(rng, gap_size(rng), gap_size(rng) / 2, alphabet + "x");
      });
      text += gen::random_string(rng, 10, alphabet + "x\n");
    }
    INFO("trial " << trial);
    REQUIRE(engine_spans(p, text) == ref.find_matches(text));
  }
}

TEST_CASE("gap boundary: found iff every gap holds at most five non-whitespace bytes")
{
  std::mt19937_64 rng(7);
  const std::string secret = "Qz7LmP2xKw9R";
  const auto p = pattern_for(secret);
  for (int g = 0; g <= 10; ++g) {
    const std::string text = "<<" + gen::interrupted(secret, [&](std::size_t) {
      return gen::random_string(rng, static_cast<std::size_t>(g), "#");
    }) + ">>";
    const auto ms = find_matches(p, text);
    INFO("gap " << g);
    CHECK(ms.size() == (g <= 5 ? 1u : 0u));
  }
}

TEST_CASE("matches are anchored on literal bytes")
{
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const std::string secret = gen::random_string(rng, 10, "abcd");
    const auto p = pattern_for(secret);
    const std::string text = gen::random_string(rng, 300, "abcd \n-");
    for (const auto& m : find_matches(p, text)) {
      CHECK(m.byte_start < m.byte_end);
      CHECK(text[m.byte_start] == secret.front());
      CHECK(text[m.byte_end - 1] == secret.back());
      CHECK(m.gap_chars_used == (m.byte_end - m.byte_start) - secret.size());
    }
  }
}

TEST_CASE("prefixing text shifts matches without changing them")
{
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const std::string secret = gen::random_string(rng, 9, "abc");
    const auto p = pattern_for(secret);
    const std::string text = gen::random_string(rng, 200, "abc \t");
    // Six non-secret bytes cannot be bridged by one gap, so no match
    // touches the prefix's last byte.
    const std::string prefix = gen::random_string(rng, 17, "abc") + "######";
    const auto base = find_matches(p, text);
    const auto shifted = find_matches(p, prefix + text);
    std::vector<Match> tail;
    for (auto m : shifted) {
      CHECK_FALSE((m.byte_start < prefix.size() && m.byte_end >= prefix.size()));
      if (m.byte_start >= prefix.size()) {
        m.byte_start -= prefix.size();
        m.byte_end -= prefix.size();
        tail.push_back(m);
      }
    }
    CHECK(tail == base);
  }
}

TEST_CASE("exact occurrences are always found")
{
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 300; ++trial) {
    const std::string secret = gen::random_string(rng, 8 + trial % 40, gen::alnum);
    const auto p = pattern_for(secret);
    const std::string text = gen::random_string(rng, 100, gen::alnum) + secret + gen::random_string(rng, 50, gen::alnum);
    const std::size_t at = 100;
    bool covered = false;
    for (const auto& m : find_matches(p, text)) {
      covered |= m.byte_start <= at && m.byte_end >= at + secret.size();
    }
    CHECK(covered);
  }
}

TEST_CASE("windowed scanning equals a single pass")
{
  std::mt19937_64 rng(14);
  EngineConfig cfg;
  cfg.max_gap_ws = 4;
  std::vector<InterruptionPattern> ps;
  for (int i = 0; i < 5; ++i) {
    ps.push_back(build_pattern(Secret{"id" + std::to_string(i), gen::random_string(rng, 8, "abc"), {}}, cfg));
  }
  const std::string text = gen::random_string(rng, 5000, "abc \n");
  const auto whole = find_all(ps, text);

  MatchScanner scanner(ps);
  const std::size_t span = scanner.max_span();
  for (std::size_t chunk : {span, span + 7, std::size_t{300}}) {
    scanner.reset();
    std::vector<Match> pieces;
    for (std::size_t owned = 0; owned < text.size(); owned += chunk) {
      const std::size_t end = std::min(text.size(), owned + chunk);
      const std::size_t win_end = std::min(text.size(), end + span - 1);
      scanner.scan(std::string_view(text).substr(owned, win_end - owned), owned, owned, end, pieces);
    }
    std::sort(pieces.begin(), pieces.end(), [](const Match& a, const Match& b) {
      return a.byte_start != b.byte_start ? a.byte_start < b.byte_start : a.secret_id < b.secret_id;
    });
    CHECK(pieces == whole);
  }
}

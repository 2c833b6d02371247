#include <secretsniff/codebase_scanner.hpp>
#include <secretsniff/error.hpp>

#include "support/gap_oracle.hpp"
#include "support/planting.hpp"
#include "support/tempdir.hpp"

#include <doctest.h>

#include <random>

using namespace secretsniff;
namespace fs = std::filesystem;

namespace {

const SecretStore db_store({{"db-pass", "hunter2token", {}}}, "t");

std::vector<std::string>
generic(const std::vector<fs::path>& paths)
{
  std::vector<std::string> out;
  for (const auto& p : paths) {
    out.push_back(p.generic_string());
  }
  return out;
}

} // namespace

TEST_CASE("walk_tree prunes VCS dirs and sorts")
{
  testutil::TempDir dir;
  testutil::write_file(dir / "b.txt", "b");
  testutil::write_file(dir / "a/z.txt", "z");
  testutil::write_file(dir / "a/y.log", "y");
  testutil::write_file(dir / ".git/config", "secret");
  testutil::write_file(dir / "sub/.hg/x", "x");
  const auto w = walk_tree(dir.path(), {});
  CHECK(generic(w.files) == std::vector<std::string>{"a/y.log", "a/z.txt", "b.txt"});
  CHECK(w.skipped.empty());

  ScanConfig ignoring;
  ignoring.ignore_globs = {"*.log", "b.*"};
  CHECK(generic(walk_tree(dir.path(), ignoring).files) == std::vector<std::string>{"a/z.txt"});

  ignoring.ignore_globs = {"a/*"};
  CHECK(generic(walk_tree(dir.path(), ignoring).files) == std::vector<std::string>{"b.txt"});
}

TEST_CASE("walk_tree records symlinks and never follows them")
{
  testutil::TempDir dir;
  testutil::write_file(dir / "d/f.txt", "f");
  fs::create_directory_symlink(dir.path() / "d", dir / "d/loop");
  fs::create_symlink(dir.path() / "d/f.txt", dir / "link.txt");
  const auto w = walk_tree(dir.path(), {});
  CHECK(generic(w.files) == std::vector<std::string>{"d/f.txt"});
  REQUIRE(w.skipped.size() == 2);
  CHECK(w.skipped[0] == SkippedPath{"d/loop", "symlink"});
  CHECK(w.skipped[1] == SkippedPath{"link.txt", "symlink"});
}

TEST_CASE("walk_tree edge cases")
{
  testutil::TempDir dir;
  CHECK(walk_tree(dir.path(), {}).files.empty());
  CHECK_THROWS_AS(walk_tree(dir / "missing", {}), ScanError);
  testutil::write_file(dir / "plain", "x");
  CHECK_THROWS_AS(walk_tree(dir / "plain", {}), ScanError);
}

TEST_CASE("glob_ignored")
{
  const std::vector<std::string> globs{"*.min.js", "vendor/*"};
  CHECK(glob_ignored("web/app.min.js", globs));
  CHECK(glob_ignored("vendor/lib.c", globs));
  CHECK_FALSE(glob_ignored("src/vendor.c", globs));
  CHECK_FALSE(glob_ignored("app.js", globs));
}

TEST_CASE("scan_file reports line and column")
{
  testutil::TempDir dir;
  testutil::write_file(dir / "src/a.txt", "line one\nline two\nkey hunter2token end\n");
  const auto compiled = CompiledSecrets::compile(db_store, {});
  const auto scan = scan_file(dir / "src/a.txt", "src/a.txt", compiled, {});
  REQUIRE(scan.findings.size() == 1);
  const auto& f = scan.findings[0];
  CHECK(f.secret_id == "db-pass");
  CHECK(f.path == "src/a.txt");
  CHECK(f.line == 3);
  CHECK(f.column == 5);
  CHECK(f.byte_start == 22);
  CHECK(f.byte_end == 34);
  CHECK(f.rule == Rule::pattern);
  CHECK(f.correlation.empty());
  CHECK(f.excerpt.find("hunter2token") == std::string::npos);
  CHECK(f.excerpt.find(redaction_mask) != std::string::npos);
  CHECK(scan.bytes == 39);
}

TEST_CASE("correlation present when a pepper is configured")
{
  ScanConfig cfg;
  cfg.pepper = Pepper::from_hex(std::string(64, 'c'));
  const auto compiled = CompiledSecrets::compile(db_store, cfg);
  const auto found = findings_for_text("x hunter2token", "p", compiled);
  REQUIRE(found.size() == 1);
  CHECK(found[0].correlation == cfg.pepper->correlation("hunter2token"));
}

TEST_CASE("binary files are skipped")
{
  testutil::TempDir dir;
  testutil::write_file(dir / "bin", std::string("\0hunter2token", 13));
  const auto compiled = CompiledSecrets::compile(db_store, {});
  const auto scan = scan_file(dir / "bin", "bin", compiled, {});
  CHECK(scan.findings.empty());
  CHECK(scan.skip_reason == "binary");
}

TEST_CASE("interrupted secrets in files")
{
  const auto compiled = CompiledSecrets::compile(db_store, {});
  CHECK(findings_for_text("x = \"hunter2\" +\n    \"token\"", "p", compiled).size() == 1);
  CHECK(findings_for_text("hunter2\n  token", "p", compiled).size() == 1);
  CHECK(findings_for_text("hun<b>ter2token", "p", compiled).size() == 1);
  CHECK(findings_for_text("hun<bold>ter2token", "p", compiled).empty());
}

TEST_CASE("excerpts scrub other store values, including short ones")
{
  const SecretStore store({{"long", "hunter2token", {}}, {"tiny", "pw42", {}}}, "t");
  const auto compiled = CompiledSecrets::compile(store, {});
  CHECK(compiled.excluded_ids() == std::vector<std::string>{"tiny"});
  const auto found = findings_for_text("pw42 hunter2token pw42 hunter2token", "p", compiled);
  REQUIRE(found.size() == 2);
  for (const auto& f : found) {
    CHECK(f.excerpt.find("pw42") == std::string::npos);
    CHECK(f.excerpt.find("hunter2token") == std::string::npos);
  }
}

TEST_CASE("chunked scanning equals a single pass across chunk boundaries")
{
  std::mt19937_64 rng(7);
  const std::string secret = "Zq8vN2xW0pLk";
  const SecretStore store({{"s", secret, {}}}, "t");
  const auto compiled = CompiledSecrets::compile(store, {});

  std::string text = gen::random_string(rng, 10u << 20, "abcdefghij \n");
  const std::size_t chunk = 1u << 20;
  std::vector<std::size_t> starts;
  // Straddle every chunk boundary with a gap-filled plant.
  for (std::size_t b = chunk; b + 200 < text.size(); b += chunk) {
    const auto planted =
      gen::interrupted(secret, [&](std::size_t) { return gen::gap_filler(rng, 3, 5, "#"); });
    const std::size_t at = b - planted.size() / 2;
    text.replace(at, planted.size(), planted);
    starts.push_back(at);
  }

  testutil::TempDir dir;
  testutil::write_file(dir / "big.txt", text);
  ScanConfig small;
  small.chunk_size = chunk;
  const auto chunked = scan_file(dir / "big.txt", "big.txt", compiled, small);
  const auto single = findings_for_text(text, "big.txt", compiled);
  CHECK(chunked.findings == single);
  REQUIRE(chunked.findings.size() == starts.size());
  for (std::size_t i = 0; i < starts.size(); ++i) {
    CHECK(chunked.findings[i].byte_start == starts[i]);
  }

  // Tiny chunk sizes are clamped to the widest match.
  ScanConfig tiny;
  tiny.chunk_size = 1;
  const std::string small_text = text.substr(chunk - 200, 400);
  testutil::write_file(dir / "small.txt", small_text);
  CHECK(scan_file(dir / "small.txt", "small.txt", compiled, tiny).findings
        == findings_for_text(small_text, "small.txt", compiled));
}

TEST_CASE("scan_tree")
{
  testutil::TempDir dir;
  testutil::write_file(dir / "a.txt", "nothing");
  testutil::write_file(dir / "b/c.txt", "one hunter2token here");
  testutil::write_file(dir / "d.bin", std::string("\0\1\2", 3));
  testutil::write_file(dir / ".git/HEAD", "hunter2token");

  ScanConfig cfg;
  const auto r = scan_tree(dir.path(), db_store, cfg);
  CHECK(r.files_scanned == 2);
  REQUIRE(r.findings.size() == 1);
  CHECK(r.findings[0].path == "b/c.txt");
  REQUIRE(r.files_skipped.size() == 1);
  CHECK(r.files_skipped[0] == SkippedPath{"d.bin", "binary"});
  CHECK(r.bytes_scanned == 7 + 21);

  cfg.workers = 4;
  const auto parallel = scan_tree(dir.path(), db_store, cfg);
  CHECK(parallel.findings == r.findings);
  CHECK(parallel.files_skipped == r.files_skipped);
}

TEST_CASE("scan_tree rejects a store with nothing to match")
{
  testutil::TempDir dir;
  const SecretStore shorty({{"s", "abc", {}}}, "t");
  CHECK_THROWS_AS(scan_tree(dir.path(), shorty, {}), ScanError);
  CHECK(scan_tree(dir.path(), SecretStore{}, {}).findings.empty());
}

TEST_CASE("scan_tree agrees with the oracle on random trees")
{
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<Secret> secrets;
    for (int i = 0; i < 5; ++i) {
      secrets.push_back({"s" + std::to_string(i), gen::random_string(rng, 8 + i, "abcdef"), {}});
    }
    const SecretStore store(secrets, "t");
    testutil::TempDir dir;
    std::size_t expected = 0;
    for (int f = 0; f < 6; ++f) {
      std::string text = gen::random_string(rng, 3000, "abcdefgh \n#");
      if (f % 2 == 0) {
        const auto& s = secrets[rng() % secrets.size()].value;
        text.insert(text.size() / 2, " " + s + " ");
      }
      const std::string name = "f" + std::to_string(f) + ".txt";
      testutil::write_file(dir / name, text);
      for (const auto& s : secrets) {
        expected += oracle::GapOracle(s.value).find_matches(text).size();
      }
    }
    const auto r = scan_tree(dir.path(), store, {});
    CHECK(r.findings.size() == expected);
  }
}

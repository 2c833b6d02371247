#include <secretsniff/error.hpp>
#include <secretsniff/secret_source.hpp>

#include "support/tempdir.hpp"

#include <doctest.h>

using namespace secretsniff;

namespace {

std::string
error_of(std::string_view doc)
{
  try {
    parse_secret_store(doc, "fixture");
  } catch (const SecretStoreError& e) {
    return e.what();
  }
  return {};
}

} // namespace

TEST_CASE("load_secrets reads every entry")
{
  testutil::TempDir dir;
  testutil::write_file(dir / "store.json", R"({"secrets": [
    {"id": "db-pass", "value": "hunter2token", "tags": ["prod", "db"]},
    {"id": "api-key", "value": "AKxZq91"}
  ]})");
  const auto store = load_secrets(dir / "store.json");
  REQUIRE(store.size() == 2);
  CHECK(store.secrets()[0] == Secret{"db-pass", "hunter2token", {"prod", "db"}});
  CHECK(store.secrets()[1].tags.empty());
  CHECK(store.find("api-key")->value == "AKxZq91");
  CHECK(store.find("nope") == nullptr);
  CHECK(store.loaded_at().time_since_epoch().count() > 0);

  FileSecretSource source(dir / "store.json");
  CHECK(source.load().secrets()[0] == store.secrets()[0]);
}

TEST_CASE("empty store is valid")
{
  CHECK(parse_secret_store(R"({"secrets": []})", "x").empty());
}

TEST_CASE("invalid stores name the offending entry but never its value")
{
  CHECK(error_of(R"({"secrets": [{"id": "x", "value": "aaaaaaaa1"}, {"id": "x", "value": "bbbbbbbb2"}]})")
          .find("duplicate id \"x\"") != std::string::npos);
  CHECK(error_of(R"({"secrets": [{"id": "e", "value": ""}]})").find("empty value") != std::string::npos);

  const auto nl = error_of(R"({"secrets": [{"id": "multi", "value": "line1\nline2secret"}]})");
  CHECK(nl.find("multi") != std::string::npos);
  CHECK(nl.find("line2secret") == std::string::npos);

  CHECK(error_of(R"({"secrets": [{"id": "t", "value": "v", "tgas": []}]})").find("unknown key \"tgas\"")
        != std::string::npos);
  CHECK(error_of(R"({"secret": []})").find("unknown key") != std::string::npos);
  CHECK(error_of(R"({"secrets": [{"value": "v"}]})").find("missing \"id\"") != std::string::npos);
  CHECK(error_of(R"({"secrets": [{"id": "q"}]})").find("missing \"value\"") != std::string::npos);
  CHECK(error_of(R"({"secrets": [{"id": 4, "value": "v"}]})").find("must be a string") != std::string::npos);

  // The JSON library's own message would quote the surrounding input.
  const auto broken = error_of(R"({"secrets": [{"id": "k", "value": "TOPSECRETVALUE})");
  CHECK(broken.find("malformed JSON") != std::string::npos);
  CHECK(broken.find("TOPSECRETVALUE") == std::string::npos);
}

TEST_CASE("unreadable file")
{
  CHECK_THROWS_AS(load_secrets("/nonexistent/store.json"), SecretStoreError);
}

TEST_CASE("load is deterministic")
{
  const std::string doc = R"({"secrets": [{"id": "a", "value": "12345678"}, {"id": "b", "value": "x"}]})";
  const auto s1 = parse_secret_store(doc, "f");
  const auto s2 = parse_secret_store(doc, "f");
  CHECK(std::equal(s1.secrets().begin(), s1.secrets().end(), s2.secrets().begin(), s2.secrets().end()));
}

TEST_CASE("filter_by_min_length partitions the store")
{
  const SecretStore store({{"short", "abcd", {}}, {"long", "abcdefghijkl", {}}}, "t");

  const auto f8 = filter_by_min_length(store, 8);
  REQUIRE(f8.kept.size() == 1);
  CHECK(f8.kept.secrets()[0].id == "long");
  CHECK(f8.excluded_ids == std::vector<std::string>{"short"});

  const auto f1 = filter_by_min_length(store, 1);
  CHECK(f1.kept.size() == 2);
  CHECK(f1.excluded_ids.empty());

  const auto empty = filter_by_min_length(SecretStore{}, 8);
  CHECK(empty.kept.empty());
  CHECK(empty.excluded_ids.empty());

  for (std::size_t n = 1; n < 20; ++n) {
    const auto f = filter_by_min_length(store, n);
    CHECK(f.kept.size() + f.excluded_ids.size() == store.size());
  }
}

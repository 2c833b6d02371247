// Checks on the test-only reference implementations themselves.

#include "support/diff_generator.hpp"
#include "support/gap_oracle.hpp"
#include "support/reference_sha256.hpp"

#include <doctest.h>

TEST_CASE("reference SHA-256 matches published vectors")
{
  CHECK(reference::hex(reference::sha256(""))
        == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(reference::hex(reference::sha256("abc"))
        == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(reference::hex(reference::sha256("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq"))
        == "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
  CHECK(reference::hex(reference::sha256(std::string(1000000, 'a')))
        == "cdc76e5c9914fb9281a1c7e284d73e67f1809a48a497200e046d39ccc7112cd0");
}

TEST_CASE("gap oracle on hand-checked cases")
{
  oracle::GapOracle o("abcdwxyz");
  CHECK(o.shortest_end("abcdwxyz", 0) == 8u);
  CHECK(o.shortest_end("ab12345cdwxyz", 0) == 13u);
  CHECK_FALSE(o.shortest_end("ab123456cdwxyz", 0));
  CHECK(o.shortest_end("a b\n\tc   dwxyz", 0) == 14u);
  CHECK_FALSE(o.shortest_end("ab 12 345 6 cdwxyz", 0));
  CHECK(oracle::GapOracle("aaaaaaaa").find_matches("aaaaaaaaa").size() == 1);
}

TEST_CASE("diff generator hunk headers follow the unified convention")
{
  gen::GeneratedDiff d;
  gen::append_file_diff("f", {"ctx"}, {"ctx", "added"}, 3, d);
  CHECK(d.text == "--- a/f\n+++ b/f\n@@ -1,1 +1,2 @@\n ctx\n+added\n");
  REQUIRE(d.added.size() == 1);
  CHECK(d.added[0] == gen::ExpectedLine{"f", 2, "added"});
}

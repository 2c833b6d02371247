#include <secretsniff/error.hpp>
#include <secretsniff/report.hpp>

#include "support/webhook_server.hpp"

#include <doctest.h>

#include <sstream>

using namespace secretsniff;
using nlohmann::ordered_json;

namespace {

Finding
sample(std::string id = "db-pass", std::uint64_t line = 3)
{
  Finding f;
  f.secret_id = std::move(id);
  f.path = "src/a.txt";
  f.line = line;
  f.column = 5;
  f.byte_start = 40;
  f.byte_end = 52;
  f.rule = Rule::pattern;
  f.excerpt = "key " + std::string(redaction_mask) + " end";
  f.correlation = "1a2b3c4d";
  return f;
}

EmitOptions
fixed_options()
{
  EmitOptions o;
  o.tool_version = "9.9.9";
  o.emitted_at = parse_rfc3339("2024-05-01T12:00:00Z");
  return o;
}

AlertOptions
quick()
{
  AlertOptions o;
  o.timeout = std::chrono::milliseconds(1000);
  o.initial_backoff = std::chrono::milliseconds(10);
  return o;
}

} // namespace

TEST_CASE("human format")
{
  RevisionReport r{"rev1", {sample()}};
  CHECK(emit_report(r, Format::human) == "src/a.txt:3:5 db-pass pattern 1a2b3c4d\n");

  r.findings[0].correlation.clear();
  CHECK(emit_report(r, Format::human) == "src/a.txt:3:5 db-pass pattern -\n");
  CHECK(emit_report(RevisionReport{"r", {}}, Format::human).empty());
}

TEST_CASE("empty json report")
{
  ScanReport scan;
  scan.root = "/repo";
  const auto doc = ordered_json::parse(emit_report(scan, Format::json, fixed_options()));
  CHECK(doc["tool_version"] == "9.9.9");
  CHECK(doc["emitted_at"] == "2024-05-01T12:00:00Z");
  CHECK(doc["subject"]["kind"] == "scan");
  CHECK(doc["subject"]["id"] == "/repo");
  CHECK(doc["findings"].is_array());
  CHECK(doc["findings"].empty());
  CHECK(doc["files_scanned"] == 0);
}

TEST_CASE("jsonl has one line per finding plus a summary")
{
  RevisionReport r{"rev1", {sample("a", 1), sample("b", 2)}};
  std::istringstream in(emit_report(r, Format::jsonl, fixed_options()));
  std::vector<ordered_json> lines;
  for (std::string line; std::getline(in, line);) {
    lines.push_back(ordered_json::parse(line));
  }
  REQUIRE(lines.size() == 3);
  CHECK(finding_from_json(lines[0]) == r.findings[0]);
  CHECK(finding_from_json(lines[1]) == r.findings[1]);
  CHECK(lines[2]["summary"]["finding_count"] == 2);
  CHECK(lines[2]["summary"]["subject"]["id"] == "rev1");
}

TEST_CASE("json findings round-trip")
{
  for (Rule rule : {Rule::pattern, Rule::hash_token}) {
    Finding f = sample();
    f.rule = rule;
    f.excerpt = "caf\xc3\xa9 \t \"q\" \\ " + std::string(redaction_mask);
    CHECK(finding_from_json(ordered_json::parse(dump_json(finding_to_json(f)))) == f);
  }
  const auto doc = ordered_json::parse(emit_report(RevisionReport{"r", {sample()}}, Format::json));
  CHECK(finding_from_json(doc["findings"][0]) == sample());

  ordered_json missing = finding_to_json(sample());
  missing.erase("line");
  CHECK_THROWS_AS(finding_from_json(missing), Error);
}

TEST_CASE("invalid UTF-8 in excerpts does not break output")
{
  Finding f = sample();
  f.excerpt = "bad \xff\xfe bytes";
  CHECK_NOTHROW(ordered_json::parse(emit_report(RevisionReport{"r", {f}}, Format::json)));
}

TEST_CASE("format names")
{
  CHECK(format_from_string("jsonl") == Format::jsonl);
  CHECK(to_string(Format::json) == "json");
  CHECK_THROWS_AS(format_from_string("xml"), ConfigError);
}

TEST_CASE("alert delivered first time")
{
  testutil::WebhookServer server;
  AlertPayload payload{"revision", "rev1", {sample()}};
  const auto result = send_alert(payload, server.url(), quick());
  CHECK(result.status == DeliveryResult::Status::delivered);
  CHECK(result.attempts == 1);
  CHECK(result.http_status == 200);
  const auto bodies = server.bodies();
  REQUIRE(bodies.size() == 1);
  const auto sent = ordered_json::parse(bodies[0]);
  CHECK(sent["subject"]["id"] == "rev1");
  CHECK(sent["findings"].size() == 1);
}

TEST_CASE("alert retried after server errors")
{
  testutil::WebhookServer server({500, 500});
  const auto result = send_alert(AlertPayload{"revision", "r", {sample()}}, server.url(), quick());
  CHECK(result.status == DeliveryResult::Status::delivered);
  CHECK(result.attempts == 3);
  CHECK(server.bodies().size() == 3);
}

TEST_CASE("alert rejected without retry")
{
  testutil::WebhookServer server({404});
  const auto result = send_alert(AlertPayload{"revision", "r", {}}, server.url(), quick());
  CHECK(result.status == DeliveryResult::Status::rejected);
  CHECK(result.attempts == 1);
  CHECK(result.http_status == 404);
}

TEST_CASE("unreachable webhook fails after three attempts")
{
  const std::string url = "http://127.0.0.1:" + std::to_string(testutil::unused_port()) + "/hook";
  const auto result = send_alert(AlertPayload{"revision", "r", {}}, url, quick());
  CHECK(result.status == DeliveryResult::Status::failed);
  CHECK(result.attempts == 3);
  CHECK_FALSE(result.error.empty());
  // Two backoff sleeps: 10 ms then 20 ms.
  CHECK(result.latency >= std::chrono::milliseconds(30));
}

TEST_CASE("malformed webhook urls")
{
  CHECK_THROWS_AS(send_alert({}, "ftp://x/y", quick()), ConfigError);
  CHECK_THROWS_AS(send_alert({}, "not a url", quick()), ConfigError);
}

#pragma once

#include <secretsniff/codebase_scanner.hpp>
#include <secretsniff/finding.hpp>
#include <secretsniff/timeutil.hpp>

#include <json.hpp>

#include <chrono>
#include <string>
#include <string_view>
#include <vector>

namespace secretsniff {

std::string_view tool_version();

enum class Format { human, json, jsonl };

Format format_from_string(std::string_view text);
std::string_view to_string(Format format);

struct EmitOptions
{
  std::string tool_version{secretsniff::tool_version()};
  Timestamp emitted_at = now_seconds();
};

struct RevisionReport
{
  std::string revision_id;
  std::vector<Finding> findings;
};

std::string emit_report(const ScanReport& report,
                        Format format,
                        const EmitOptions& options = {});
std::string emit_report(const RevisionReport& report,
                        Format format,
                        const EmitOptions& options = {});

nlohmann::ordered_json finding_to_json(const Finding& finding);
// Throws Error on missing or mistyped fields.
Finding finding_from_json(const nlohmann::ordered_json& object);

// Invalid UTF-8 is replaced rather than rejected.
std::string dump_json(const nlohmann::ordered_json& value, int indent = -1);

struct AlertPayload
{
  std::string subject_kind; // "scan" or "revision"
  std::string subject_id;
  std::vector<Finding> findings;
  std::string tool_version{secretsniff::tool_version()};
  Timestamp emitted_at = now_seconds();

  nlohmann::ordered_json to_json() const;
};

struct AlertOptions
{
  std::chrono::milliseconds timeout{5000};
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{250};
};

struct DeliveryResult
{
  enum class Status { delivered, rejected, failed };

  Status status = Status::failed;
  int http_status = 0;
  int attempts = 0;
  std::chrono::milliseconds latency{0};
  std::string error;
};

std::string_view to_string(DeliveryResult::Status status);

// POSTs the payload as JSON. Connection failures and 5xx are retried with
// exponential backoff up to max_attempts total attempts; 4xx is recorded
// as rejected without retry. Throws ConfigError on a malformed URL.
DeliveryResult send_alert(const AlertPayload& payload,
                          std::string_view webhook_url,
                          const AlertOptions& options = {});

} // namespace secretsniff

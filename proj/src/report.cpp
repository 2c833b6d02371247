#include <secretsniff/error.hpp>
#include <secretsniff/report.hpp>

#include <httplib.h>

#include <thread>

namespace secretsniff {

using nlohmann::ordered_json;

std::string_view
tool_version()
{
  return SECRETSNIFF_VERSION;
}

Format
format_from_string(std::string_view text)
{
  if (text == "human") {
    return Format::human;
  }
  if (text == "json") {
    return Format::json;
  }
  if (text == "jsonl") {
    return Format::jsonl;
  }
  throw ConfigError("unknown format \"" + std::string(text) + "\" (expected human, json or jsonl)");
}

std::string_view
to_string(Format format)
{
  switch (format) {
  case Format::human: return "human";
  case Format::json: return "json";
  case Format::jsonl: return "jsonl";
  }
  return "human";
}

std::string
dump_json(const ordered_json& value, int indent)
{
  return value.dump(indent, ' ', false, ordered_json::error_handler_t::replace);
}

ordered_json
finding_to_json(const Finding& f)
{
  ordered_json j;
  j["secret_id"] = f.secret_id;
  j["path"] = f.path;
  j["line"] = f.line;
  j["column"] = f.column;
  j["byte_start"] = f.byte_start;
  j["byte_end"] = f.byte_end;
  j["rule"] = to_string(f.rule);
  j["correlation"] = f.correlation;
  j["excerpt"] = f.excerpt;
  return j;
}

Finding
finding_from_json(const ordered_json& j)
{
  try {
    Finding f;
    f.secret_id = j.at("secret_id").get<std::string>();
    f.path = j.at("path").get<std::string>();
    f.line = j.at("line").get<std::uint64_t>();
    f.column = j.at("column").get<std::uint64_t>();
    f.byte_start = j.at("byte_start").get<std::uint64_t>();
    f.byte_end = j.at("byte_end").get<std::uint64_t>();
    f.rule = rule_from_string(j.at("rule").get<std::string>());
    f.correlation = j.at("correlation").get<std::string>();
    f.excerpt = j.at("excerpt").get<std::string>();
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed finding object: ") + e.what());
  }
}

namespace {

ordered_json
findings_json(const std::vector<Finding>& findings)
{
  ordered_json arr = ordered_json::array();
  for (const auto& f : findings) {
    arr.push_back(finding_to_json(f));
  }
  return arr;
}

ordered_json
header(std::string_view kind, const std::string& id, const EmitOptions& options)
{
  ordered_json j;
  j["tool_version"] = options.tool_version;
  j["emitted_at"] = format_rfc3339(options.emitted_at);
  j["subject"] = {{"kind", kind}, {"id", id}};
  return j;
}

std::string
human_lines(const std::vector<Finding>& findings)
{
  std::string out;
  for (const auto& f : findings) {
    out += f.path + ":" + std::to_string(f.line) + ":" + std::to_string(f.column) + " "
           + f.secret_id + " " + std::string(to_string(f.rule)) + " "
           + (f.correlation.empty() ? "-" : f.correlation) + "\n";
  }
  return out;
}

std::string
jsonl(const std::vector<Finding>& findings, ordered_json summary)
{
  std::string out;
  for (const auto& f : findings) {
    out += dump_json(finding_to_json(f)) + "\n";
  }
  ordered_json tail;
  tail["summary"] = std::move(summary);
  out += dump_json(tail) + "\n";
  return out;
}

} // namespace

std::string
emit_report(const ScanReport& report, Format format, const EmitOptions& options)
{
  if (format == Format::human) {
    return human_lines(report.findings);
  }

  ordered_json skipped = ordered_json::array();
  for (const auto& s : report.files_skipped) {
    skipped.push_back({{"path", s.path}, {"reason", s.reason}});
  }
  ordered_json j = header("scan", report.root.generic_string(), options);
  if (format == Format::json) {
    j["findings"] = findings_json(report.findings);
  } else {
    j["finding_count"] = report.findings.size();
  }
  j["files_scanned"] = report.files_scanned;
  j["files_skipped"] = std::move(skipped);
  j["bytes_scanned"] = report.bytes_scanned;
  j["duration_seconds"] = report.duration_seconds;
  j["excluded_secret_ids"] = report.excluded_secret_ids;

  if (format == Format::json) {
    return dump_json(j, 2) + "\n";
  }
  return jsonl(report.findings, std::move(j));
}

std::string
emit_report(const RevisionReport& report, Format format, const EmitOptions& options)
{
  if (format == Format::human) {
    return human_lines(report.findings);
  }
  ordered_json j = header("revision", report.revision_id, options);
  if (format == Format::json) {
    j["findings"] = findings_json(report.findings);
    return dump_json(j, 2) + "\n";
  }
  j["finding_count"] = report.findings.size();
  return jsonl(report.findings, std::move(j));
}

ordered_json
AlertPayload::to_json() const
{
  ordered_json j;
  j["tool_version"] = tool_version;
  j["emitted_at"] = format_rfc3339(emitted_at);
  j["subject"] = {{"kind", subject_kind}, {"id", subject_id}};
  j["findings"] = findings_json(findings);
  return j;
}

std::string_view
to_string(DeliveryResult::Status status)
{
  switch (status) {
  case DeliveryResult::Status::delivered: return "delivered";
  case DeliveryResult::Status::rejected: return "rejected";
  case DeliveryResult::Status::failed: return "failed";
  }
  return "failed";
}

namespace {

struct ParsedUrl
{
  std::string origin; // scheme://host[:port]
  std::string path;
};

ParsedUrl
parse_webhook_url(std::string_view url)
{
  std::size_t scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) {
    throw ConfigError("webhook URL must start with http:// or https://");
  }
  const std::string_view scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw ConfigError("webhook URL must start with http:// or https://");
  }
  const std::size_t host_begin = scheme_end + 3;
  std::size_t path_begin = url.find('/', host_begin);
  if (path_begin == std::string_view::npos) {
    path_begin = url.size();
  }
  const std::string_view authority = url.substr(host_begin, path_begin - host_begin);
  if (authority.empty() || authority.find_first_of(" @\t") != std::string_view::npos) {
    throw ConfigError("webhook URL has no usable host");
  }
  ParsedUrl out;
  out.origin = std::string(url.substr(0, path_begin));
  out.path = path_begin == url.size() ? "/" : std::string(url.substr(path_begin));
  return out;
}

} // namespace

DeliveryResult
send_alert(const AlertPayload& payload, std::string_view webhook_url, const AlertOptions& options)
{
  const ParsedUrl url = parse_webhook_url(webhook_url);
  const std::string body = dump_json(payload.to_json());

  httplib::Client client(url.origin);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(options.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(options.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  DeliveryResult result;
  const auto started = std::chrono::steady_clock::now();
  auto backoff = options.initial_backoff;
  const int attempts = std::max(1, options.max_attempts);
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    result.attempts = attempt;
    auto res = client.Post(url.path, body, "application/json");
    if (res) {
      result.http_status = res->status;
      if (res->status >= 200 && res->status < 300) {
        result.status = DeliveryResult::Status::delivered;
        result.error.clear();
        break;
      }
      if (res->status < 500) {
        result.status = DeliveryResult::Status::rejected;
        result.error = "webhook rejected alert with HTTP " + std::to_string(res->status);
        break;
      }
      result.error = "webhook returned HTTP " + std::to_string(res->status);
    } else {
      result.http_status = 0;
      result.error = "connection failed: " + httplib::to_string(res.error());
    }
    result.status = DeliveryResult::Status::failed;
    if (attempt < attempts) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
  }
  result.latency = std::chrono::duration_cast<std::chrono::milliseconds>(
    std::chrono::steady_clock::now() - started);
  return result;
}

} // namespace secretsniff

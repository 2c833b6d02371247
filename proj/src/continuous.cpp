#include <secretsniff/continuous.hpp>
#include <secretsniff/error.hpp>

#include <algorithm>
#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

namespace secretsniff {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::vector<Finding>
pattern_findings_for_revision(const Revision& revision,
                              const CompiledSecrets& secrets,
                              bool include_context)
{
  std::vector<Finding> out;
  const auto lines = sniff_lines(revision, include_context);
  std::size_t i = 0;
  while (i < lines.size()) {
    std::size_t j = i + 1;
    while (j < lines.size() && lines[j].path == lines[i].path
           && lines[j].line == lines[j - 1].line + 1) {
      ++j;
    }
    std::string block;
    std::vector<std::uint64_t> line_offsets;
    for (std::size_t k = i; k < j; ++k) {
      line_offsets.push_back(block.size());
      block += lines[k].text;
      block += '\n';
    }
    for (auto f : findings_for_text(block, lines[i].path, secrets)) {
      const std::uint64_t line_begin = line_offsets[f.line - 1];
      f.line = lines[i].line + (f.line - 1);
      const std::uint64_t length = f.byte_end - f.byte_start;
      f.byte_start -= line_begin;
      f.byte_end = f.byte_start + length;
      out.push_back(std::move(f));
    }
    i = j;
  }
  return out;
}

RevisionReport
check_revision(std::string_view diff_text, std::string revision_id, const CheckContext& context)
{
  if (context.cache == nullptr || context.pepper == nullptr) {
    throw ConfigError("check_revision needs a cache and a pepper");
  }
  RevisionReport report;
  report.revision_id = revision_id;
  const Revision revision = parse_unified_diff(diff_text, std::move(revision_id));
  report.findings = detect(revision, *context.cache, *context.pepper, context.detect);
  if (context.pattern_secrets != nullptr) {
    auto extra = pattern_findings_for_revision(revision, *context.pattern_secrets,
                                               context.detect.include_context);
    std::move(extra.begin(), extra.end(), std::back_inserter(report.findings));
  }
  std::stable_sort(report.findings.begin(), report.findings.end(),
                   [](const Finding& a, const Finding& b) {
                     if (a.path != b.path) {
                       return a.path < b.path;
                     }
                     if (a.line != b.line) {
                       return a.line < b.line;
                     }
                     if (a.column != b.column) {
                       return a.column < b.column;
                     }
                     return a.rule < b.rule;
                   });
  return report;
}

namespace {

constexpr const char* processed_dir = "processed";
constexpr const char* flagged_dir = "flagged";
constexpr const char* failed_dir = "failed";

fs::path
free_destination(const fs::path& dir, const fs::path& name)
{
  fs::path candidate = dir / name;
  for (int n = 1; fs::exists(candidate); ++n) {
    candidate = dir / (name.string() + "." + std::to_string(n));
  }
  return candidate;
}

std::string
read_file(const fs::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error("cannot read " + path.filename().string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

} // namespace

Watcher::Watcher(WatchOptions options, CheckContext context)
  : options_(std::move(options)),
    context_(context)
{
  std::error_code ec;
  if (!fs::is_directory(options_.inbox, ec)) {
    throw ConfigError("inbox " + options_.inbox.string() + " is not a directory");
  }
  for (const char* sub : {processed_dir, flagged_dir, failed_dir}) {
    fs::create_directories(options_.inbox / sub, ec);
    if (ec) {
      throw ConfigError("cannot create " + (options_.inbox / sub).string() + ": " + ec.message());
    }
  }
  if (options_.log_path.empty()) {
    options_.log_path = options_.inbox / "results.jsonl";
  }
  if (context_.cache == nullptr || context_.pepper == nullptr) {
    throw ConfigError("watch mode needs a cache and a pepper");
  }
  if (context_.pepper->id() != context_.cache->pepper_id()) {
    throw PepperMismatchError("pepper " + context_.pepper->id()
                              + " did not build this cache (built with "
                              + context_.cache->pepper_id() + ")");
  }
}

void
Watcher::append_log(const std::string& line)
{
  std::lock_guard lock(log_mutex_);
  std::ofstream out(options_.log_path, std::ios::binary | std::ios::app);
  out << line << '\n';
}

Watcher::Outcome
Watcher::process(const fs::path& file, bool& alerted)
{
  const fs::path name = file.filename();
  const std::string revision_id = file.stem().string();

  ordered_json entry;
  entry["revision"] = revision_id;
  entry["file"] = name.string();

  Outcome outcome = Outcome::failed;
  std::string error;
  try {
    const RevisionReport report = check_revision(read_file(file), revision_id, context_);
    outcome = report.findings.empty() ? Outcome::clean : Outcome::flagged;
    entry["status"] = outcome == Outcome::clean ? "clean" : "flagged";
    entry["finding_count"] = report.findings.size();
    ordered_json findings = ordered_json::array();
    for (const auto& f : report.findings) {
      findings.push_back(finding_to_json(f));
    }
    entry["findings"] = std::move(findings);

    if (outcome == Outcome::flagged && options_.webhook) {
      AlertPayload payload;
      payload.subject_kind = "revision";
      payload.subject_id = revision_id;
      payload.findings = report.findings;
      const DeliveryResult delivery = send_alert(payload, *options_.webhook, options_.alert);
      alerted = true;
      entry["alert"] = {{"status", to_string(delivery.status)},
                        {"http_status", delivery.http_status},
                        {"attempts", delivery.attempts},
                        {"latency_ms", delivery.latency.count()}};
    }
  } catch (const std::exception& e) {
    outcome = Outcome::failed;
    error = e.what();
    entry["status"] = "failed";
    entry["error"] = error;
  }

  const char* dest_dir = outcome == Outcome::clean     ? processed_dir
                         : outcome == Outcome::flagged ? flagged_dir
                                                       : failed_dir;
  std::error_code ec;
  fs::path dest = free_destination(options_.inbox / dest_dir, name);
  fs::rename(file, dest, ec);
  if (ec && outcome != Outcome::failed) {
    error = "could not move into " + std::string(dest_dir) + ": " + ec.message();
    outcome = Outcome::failed;
    entry["status"] = "failed";
    entry["error"] = error;
    dest = free_destination(options_.inbox / failed_dir, name);
    fs::rename(file, dest, ec);
  }
  if (outcome == Outcome::failed && !ec) {
    std::ofstream note(dest.string() + ".error.txt", std::ios::binary | std::ios::trunc);
    note << error << '\n';
  }
  entry["moved_to"] = ec ? std::string() : fs::relative(dest, options_.inbox, ec).generic_string();
  entry["processed_at"] = format_rfc3339(now_seconds());
  append_log(dump_json(entry));
  return outcome;
}

PollStats
Watcher::poll_once()
{
  std::vector<fs::path> batch;
  std::error_code ec;
  for (fs::directory_iterator it(options_.inbox, ec), end; !ec && it != end; it.increment(ec)) {
    std::error_code sec;
    if (it->path().extension() == ".diff" && it->is_regular_file(sec)) {
      batch.push_back(it->path());
    }
  }
  std::sort(batch.begin(), batch.end());

  PollStats stats;
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> clean{0}, flagged{0}, failed{0}, alerts{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < batch.size(); i = next++) {
      bool alerted = false;
      switch (process(batch[i], alerted)) {
      case Outcome::clean: ++clean; break;
      case Outcome::flagged: ++flagged; break;
      case Outcome::failed: ++failed; break;
      }
      if (alerted) {
        ++alerts;
      }
    }
  };
  const unsigned workers =
    std::max(1u, std::min<unsigned>(options_.workers, static_cast<unsigned>(batch.size())));
  {
    std::vector<std::jthread> pool;
    for (unsigned i = 1; i < workers; ++i) {
      pool.emplace_back(worker);
    }
    worker();
  }
  stats.clean = clean;
  stats.flagged = flagged;
  stats.failed = failed;
  stats.alerts_sent = alerts;
  return stats;
}

void
Watcher::run(std::stop_token stop, const std::function<bool()>& interrupted)
{
  auto should_stop = [&] { return stop.stop_requested() || (interrupted && interrupted()); };
  while (!should_stop()) {
    poll_once();
    const auto until = std::chrono::steady_clock::now() + options_.interval;
    while (!should_stop() && std::chrono::steady_clock::now() < until) {
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
  }
}

} // namespace secretsniff

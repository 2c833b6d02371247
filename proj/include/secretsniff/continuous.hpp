#pragma once

#include <secretsniff/codebase_scanner.hpp>
#include <secretsniff/report.hpp>
#include <secretsniff/token_hasher.hpp>

#include <chrono>
#include <functional>
#include <cstddef>
#include <filesystem>
#include <mutex>
#include <optional>
#include <stop_token>
#include <string>
#include <string_view>

namespace secretsniff {

struct CheckContext
{
  const HashedSecretCache* cache = nullptr;
  const Pepper* pepper = nullptr;
  // Raw secrets for the optional pattern pass over sniffed lines.
  const CompiledSecrets* pattern_secrets = nullptr;
  DetectConfig detect;
};

// Parses the diff and runs the hash path (plus the pattern path when
// pattern_secrets is set). Findings sorted by (path, line, column, rule).
RevisionReport check_revision(std::string_view diff_text,
                              std::string revision_id,
                              const CheckContext& context);

// Pattern findings over sniffed lines; consecutive lines of one file are
// joined so line-wrapped secrets are still caught.
std::vector<Finding> pattern_findings_for_revision(const Revision& revision,
                                                   const CompiledSecrets& secrets,
                                                   bool include_context);

struct WatchOptions
{
  std::filesystem::path inbox;
  std::filesystem::path log_path; // defaults to <inbox>/results.jsonl
  unsigned workers = 4;
  std::chrono::milliseconds interval{2000};
  std::optional<std::string> webhook;
  AlertOptions alert;
};

struct PollStats
{
  std::size_t clean = 0;
  std::size_t flagged = 0;
  std::size_t failed = 0;
  std::size_t alerts_sent = 0;

  std::size_t total() const { return clean + flagged + failed; }
};

// Polls an inbox directory for *.diff files. Each file ends up in exactly
// one of processed/, flagged/ or failed/, and gets one line in the log.
// Producers should write elsewhere and rename into the inbox.
class Watcher
{
public:
  Watcher(WatchOptions options, CheckContext context);

  PollStats poll_once();
  void run(std::stop_token stop, const std::function<bool()>& interrupted = {});

  const WatchOptions& options() const { return options_; }

private:
  enum class Outcome { clean, flagged, failed };

  Outcome process(const std::filesystem::path& file, bool& alerted);
  void append_log(const std::string& line);

  WatchOptions options_;
  CheckContext context_;
  std::mutex log_mutex_;
};

} // namespace secretsniff

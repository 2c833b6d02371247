#pragma once

#include <secretsniff/finding.hpp>
#include <secretsniff/pattern_engine.hpp>
#include <secretsniff/secret_source.hpp>
#include <secretsniff/token_hasher.hpp>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace secretsniff {

inline constexpr std::size_t default_chunk_size = 4u << 20;
inline constexpr std::size_t binary_probe_bytes = 8192;

struct ScanConfig
{
  EngineConfig engine;
  std::vector<std::string> ignore_globs;
  std::vector<std::string> ignored_dirs{".git", ".hg", ".svn"};
  std::size_t chunk_size = default_chunk_size;
  unsigned workers = 1;
  // When set, findings carry the peppered correlation digest.
  std::optional<Pepper> pepper;
};

struct SkippedPath
{
  std::string path;
  std::string reason;

  bool operator==(const SkippedPath&) const = default;
};

struct WalkResult
{
  // Relative to the root, sorted by generic string.
  std::vector<std::filesystem::path> files;
  std::vector<SkippedPath> skipped;
};

// Throws ScanError when root is not a readable directory.
WalkResult walk_tree(const std::filesystem::path& root,
                     const ScanConfig& config);

bool glob_ignored(const std::filesystem::path& relative,
                  std::span<const std::string> globs);

// Patterns plus everything needed to turn matches into findings.
class CompiledSecrets
{
public:
  static CompiledSecrets compile(const SecretStore& store,
                                 const ScanConfig& config);

  std::span<const InterruptionPattern> patterns() const { return patterns_; }
  const std::vector<std::string>& excluded_ids() const { return excluded_; }
  const Redactor& redactor() const { return redactor_; }
  std::string correlation(const std::string& secret_id) const;
  std::size_t max_span() const { return max_span_; }

private:
  std::vector<InterruptionPattern> patterns_;
  std::vector<std::string> excluded_;
  Redactor redactor_;
  std::unordered_map<std::string, std::string> correlation_;
  std::size_t max_span_ = 0;
};

struct FileScan
{
  std::vector<Finding> findings;
  std::optional<std::string> skip_reason;
  std::uint64_t bytes = 0;
};

// Streams the file in windows of chunk_size bytes overlapping by the
// longest possible match, so memory stays bounded for any file size.
FileScan scan_file(const std::filesystem::path& file,
                   const std::string& display_path,
                   const CompiledSecrets& secrets,
                   const ScanConfig& config);

// Matches converted to findings for in-memory text.
std::vector<Finding> findings_for_text(std::string_view text,
                                       const std::string& display_path,
                                       const CompiledSecrets& secrets);

struct ScanReport
{
  std::filesystem::path root;
  std::vector<Finding> findings; // sorted by (path, byte_start, secret_id)
  std::uint64_t files_scanned = 0;
  std::vector<SkippedPath> files_skipped;
  std::uint64_t bytes_scanned = 0;
  double duration_seconds = 0.0;
  std::vector<std::string> excluded_secret_ids;
};

// Throws ScanError on unreadable root or when a non-empty store leaves no
// secret long enough to pattern-match.
ScanReport scan_tree(const std::filesystem::path& root,
                     const SecretStore& store,
                     const ScanConfig& config);

} // namespace secretsniff

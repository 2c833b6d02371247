#pragma once

#include <secretsniff/error.hpp>

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace secretsniff {

enum class LineKind { context, added, removed };

struct HunkLine
{
  LineKind kind;
  std::string text;

  bool operator==(const HunkLine&) const = default;
};

struct Hunk
{
  std::uint64_t old_start = 0;
  std::uint64_t old_count = 0;
  std::uint64_t new_start = 0;
  std::uint64_t new_count = 0;
  std::vector<HunkLine> lines;

  bool operator==(const Hunk&) const = default;
};

struct FileDiff
{
  // Git "a/" and "b/" prefixes removed; "/dev/null" kept verbatim.
  std::string old_path;
  std::string new_path;
  std::vector<Hunk> hunks;
  bool binary = false;

  bool operator==(const FileDiff&) const = default;
};

struct Revision
{
  std::string revision_id;
  std::vector<FileDiff> files;
  std::vector<std::string> warnings;
};

class DiffParseError : public Error
{
public:
  enum class Kind {
    malformed_hunk_header,
    malformed_file_header,
    count_mismatch,
    truncated
  };

  DiffParseError(Kind kind, std::size_t line, const std::string& what);

  Kind kind() const { return kind_; }
  // 1-based line of the defect within the diff text.
  std::size_t line() const { return line_; }

private:
  Kind kind_;
  std::size_t line_;
};

Revision parse_unified_diff(std::string_view text, std::string revision_id);

struct HunkHeader
{
  std::uint64_t old_start = 0;
  std::uint64_t old_count = 0;
  std::uint64_t new_start = 0;
  std::uint64_t new_count = 0;
};

// "@@ -a[,b] +c[,d] @@[ section]"; false if malformed.
bool parse_hunk_header(std::string_view line, HunkHeader& out);

struct SniffLine
{
  std::string path;
  std::uint64_t line = 0; // new-file line number
  std::string text;
  LineKind kind = LineKind::added;

  bool operator==(const SniffLine&) const = default;
};

std::vector<SniffLine> added_lines(const Revision& revision);

// Added lines, plus context lines when include_context is set.
std::vector<SniffLine> sniff_lines(const Revision& revision,
                                   bool include_context);

} // namespace secretsniff

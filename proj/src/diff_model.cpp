#include <secretsniff/diff_model.hpp>

#include <charconv>
#include <limits>
#include <optional>

namespace secretsniff {

DiffParseError::DiffParseError(Kind kind, std::size_t line, const std::string& what)
  : Error("diff line " + std::to_string(line) + ": " + what),
    kind_(kind),
    line_(line)
{
}

namespace {

std::vector<std::string_view>
split_lines(std::string_view text)
{
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) {
      nl = text.size();
    }
    std::string_view line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') {
      line.remove_suffix(1);
    }
    lines.push_back(line);
    pos = nl + 1;
  }
  return lines;
}

bool
consume_number(std::string_view& s, std::uint64_t& out)
{
  const auto* begin = s.data();
  const auto* end = s.data() + s.size();
  if (begin == end || *begin < '0' || *begin > '9') {
    return false;
  }
  auto [ptr, ec] = std::from_chars(begin, end, out);
  if (ec != std::errc()) {
    return false;
  }
  s.remove_prefix(static_cast<std::size_t>(ptr - begin));
  return true;
}

bool
consume(std::string_view& s, std::string_view prefix)
{
  if (!s.starts_with(prefix)) {
    return false;
  }
  s.remove_prefix(prefix.size());
  return true;
}

bool
parse_range(std::string_view& s, std::uint64_t& start, std::uint64_t& count)
{
  if (!consume_number(s, start)) {
    return false;
  }
  count = 1;
  if (consume(s, ",")) {
    return consume_number(s, count);
  }
  return true;
}

// Handles git's C-style quoting of unusual paths.
std::string
unquote_path(std::string_view raw)
{
  if (raw.size() < 2 || raw.front() != '"' || raw.back() != '"') {
    return std::string(raw);
  }
  std::string out;
  for (std::size_t i = 1; i + 1 < raw.size(); ++i) {
    char c = raw[i];
    if (c != '\\' || i + 2 >= raw.size()) {
      out += c;
      continue;
    }
    c = raw[++i];
    switch (c) {
    case 'n': out += '\n'; break;
    case 't': out += '\t'; break;
    case '"': out += '"'; break;
    case '\\': out += '\\'; break;
    default:
      if (c >= '0' && c <= '7' && i + 2 < raw.size() - 1) {
        out += static_cast<char>(((c - '0') << 6) | ((raw[i + 1] - '0') << 3)
                                 | (raw[i + 2] - '0'));
        i += 2;
      } else {
        out += c;
      }
    }
  }
  return out;
}

std::string
header_path(std::string_view line)
{
  line.remove_prefix(4); // "--- " or "+++ "
  if (line.empty() || line.front() != '"') {
    if (auto tab = line.find('\t'); tab != std::string_view::npos) {
      line = line.substr(0, tab);
    }
  } else if (auto close = line.find('"', 1); close != std::string_view::npos) {
    line = line.substr(0, close + 1);
  }
  while (!line.empty() && line.back() == ' ') {
    line.remove_suffix(1);
  }
  return unquote_path(line);
}

constexpr std::string_view dev_null = "/dev/null";

void
strip_git_prefixes(std::string& old_path, std::string& new_path)
{
  const bool old_ok = old_path == dev_null || old_path.starts_with("a/");
  const bool new_ok = new_path == dev_null || new_path.starts_with("b/");
  if (!old_ok || !new_ok || (old_path == dev_null && new_path == dev_null)) {
    return;
  }
  if (old_path != dev_null) {
    old_path.erase(0, 2);
  }
  if (new_path != dev_null) {
    new_path.erase(0, 2);
  }
}

// "Binary files a/x and b/y differ"
std::optional<std::pair<std::string, std::string>>
binary_files_line(std::string_view line)
{
  if (!consume(line, "Binary files ") || !line.ends_with(" differ")) {
    return std::nullopt;
  }
  line.remove_suffix(7);
  const auto sep = line.find(" and ");
  if (sep == std::string_view::npos) {
    return std::nullopt;
  }
  std::string a(line.substr(0, sep));
  std::string b(line.substr(sep + 5));
  strip_git_prefixes(a, b);
  return std::make_pair(std::move(a), std::move(b));
}

// "diff --git a/x b/y"; only unambiguous when both halves are equal length
// or prefixed, which covers the non-rename case.
std::optional<std::pair<std::string, std::string>>
git_header_paths(std::string_view line)
{
  if (!consume(line, "diff --git ")) {
    return std::nullopt;
  }
  const auto sep = line.find(" b/");
  if (!line.starts_with("a/") || sep == std::string_view::npos) {
    return std::nullopt;
  }
  std::string a(line.substr(0, sep));
  std::string b(line.substr(sep + 1));
  strip_git_prefixes(a, b);
  return std::make_pair(std::move(a), std::move(b));
}

} // namespace

bool
parse_hunk_header(std::string_view line, HunkHeader& out)
{
  HunkHeader h;
  if (!consume(line, "@@ -") || !parse_range(line, h.old_start, h.old_count)
      || !consume(line, " +") || !parse_range(line, h.new_start, h.new_count)
      || !consume(line, " @@")) {
    return false;
  }
  if (!line.empty() && line.front() != ' ' && line.front() != '\t') {
    return false;
  }
  out = h;
  return true;
}

Revision
parse_unified_diff(std::string_view text, std::string revision_id)
{
  using Kind = DiffParseError::Kind;

  Revision rev;
  rev.revision_id = std::move(revision_id);
  const auto lines = split_lines(text);

  FileDiff* current = nullptr;
  bool after_hunk = false;
  std::optional<std::pair<std::string, std::string>> pending_git_paths;

  std::size_t i = 0;
  while (i < lines.size()) {
    const std::string_view line = lines[i];
    const std::size_t lineno = i + 1;

    if (line.starts_with("--- ") && i + 1 < lines.size()
        && lines[i + 1].starts_with("+++ ")) {
      FileDiff file;
      file.old_path = header_path(line);
      file.new_path = header_path(lines[i + 1]);
      if (file.old_path.empty() || file.new_path.empty()) {
        throw DiffParseError(Kind::malformed_file_header, lineno,
                             "file header with empty path");
      }
      strip_git_prefixes(file.old_path, file.new_path);
      rev.files.push_back(std::move(file));
      current = &rev.files.back();
      pending_git_paths.reset();
      after_hunk = false;
      i += 2;
      continue;
    }

    if (line.starts_with("@@")) {
      HunkHeader header;
      if (!parse_hunk_header(line, header)) {
        throw DiffParseError(Kind::malformed_hunk_header, lineno,
                             "malformed hunk header");
      }
      if (current == nullptr) {
        throw DiffParseError(Kind::malformed_file_header, lineno,
                             "hunk without a preceding ---/+++ file header");
      }
      Hunk hunk;
      hunk.old_start = header.old_start;
      hunk.old_count = header.old_count;
      hunk.new_start = header.new_start;
      hunk.new_count = header.new_count;

      std::uint64_t old_left = header.old_count;
      std::uint64_t new_left = header.new_count;
      std::size_t j = i + 1;
      auto mismatch = [&](std::size_t at, const std::string& what) {
        return DiffParseError(
          Kind::count_mismatch,
          at,
          what + " (header declares -" + std::to_string(header.old_count) + " +"
            + std::to_string(header.new_count) + ", "
            + std::to_string(header.old_count - old_left) + " old and "
            + std::to_string(header.new_count - new_left) + " new lines seen)");
      };

      while (old_left > 0 || new_left > 0) {
        if (j >= lines.size()) {
          if (hunk.lines.empty()) {
            throw DiffParseError(Kind::truncated, lineno,
                                 "hunk header has no body");
          }
          throw mismatch(lineno, "hunk ends before its declared line counts");
        }
        const std::string_view body = lines[j];
        const char tag = body.empty() ? ' ' : body.front();
        const std::string_view content =
          body.empty() ? std::string_view{} : body.substr(1);
        switch (tag) {
        case ' ':
          if (old_left == 0 || new_left == 0) {
            throw mismatch(j + 1, "context line exceeds declared counts");
          }
          --old_left;
          --new_left;
          hunk.lines.push_back({LineKind::context, std::string(content)});
          break;
        case '+':
          if (new_left == 0) {
            throw mismatch(j + 1, "added line exceeds declared new count");
          }
          --new_left;
          hunk.lines.push_back({LineKind::added, std::string(content)});
          break;
        case '-':
          if (old_left == 0) {
            throw mismatch(j + 1, "removed line exceeds declared old count");
          }
          --old_left;
          hunk.lines.push_back({LineKind::removed, std::string(content)});
          break;
        case '\\':
          break;
        default:
          throw mismatch(j + 1, "hunk ends before its declared line counts");
        }
        ++j;
      }
      while (j < lines.size() && lines[j].starts_with("\\")) {
        ++j;
      }
      current->hunks.push_back(std::move(hunk));
      after_hunk = true;
      i = j;
      continue;
    }

    if (line.starts_with("diff ")) {
      current = nullptr;
      after_hunk = false;
      pending_git_paths = git_header_paths(line);
      ++i;
      continue;
    }

    if (auto paths = binary_files_line(line);
        paths || line.starts_with("GIT binary patch")) {
      if (current == nullptr) {
        FileDiff file;
        if (paths) {
          file.old_path = paths->first;
          file.new_path = paths->second;
        } else if (pending_git_paths) {
          file.old_path = pending_git_paths->first;
          file.new_path = pending_git_paths->second;
        } else {
          file.old_path = file.new_path = "<unknown>";
        }
        rev.files.push_back(std::move(file));
        current = &rev.files.back();
      }
      current->binary = true;
      rev.warnings.push_back("binary diff for " + current->new_path
                             + " skipped");
      ++i;
      if (line.starts_with("GIT binary patch")) {
        while (i < lines.size() && !lines[i].starts_with("diff ")) {
          ++i;
        }
      }
      current = nullptr;
      after_hunk = false;
      continue;
    }

    if (after_hunk && !line.empty()
        && (line.front() == '+' || line.front() == ' '
            || (line.front() == '-' && !line.starts_with("--- ")))) {
      throw DiffParseError(Kind::count_mismatch, lineno,
                           "hunk body line beyond the declared line counts");
    }

    // Commit headers, index lines, mode changes and other noise.
    ++i;
  }

  return rev;
}

std::vector<SniffLine>
sniff_lines(const Revision& revision, bool include_context)
{
  std::vector<SniffLine> out;
  for (const auto& file : revision.files) {
    if (file.binary) {
      continue;
    }
    for (const auto& hunk : file.hunks) {
      std::uint64_t new_line = hunk.new_start;
      for (const auto& l : hunk.lines) {
        switch (l.kind) {
        case LineKind::removed:
          break;
        case LineKind::context:
          if (include_context) {
            out.push_back({file.new_path, new_line, l.text, l.kind});
          }
          ++new_line;
          break;
        case LineKind::added:
          out.push_back({file.new_path, new_line, l.text, l.kind});
          ++new_line;
          break;
        }
      }
    }
  }
  return out;
}

std::vector<SniffLine>
added_lines(const Revision& revision)
{
  return sniff_lines(revision, false);
}

} // namespace secretsniff

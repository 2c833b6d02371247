#include <secretsniff/codebase_scanner.hpp>
#include <secretsniff/error.hpp>

#include <fnmatch.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <fstream>
#include <thread>

namespace secretsniff {

namespace fs = std::filesystem;

bool
glob_ignored(const fs::path& relative, std::span<const std::string> globs)
{
  const std::string full = relative.generic_string();
  const std::string name = relative.filename().string();
  for (std::string glob : globs) {
    while (glob.size() > 1 && glob.back() == '/') {
      glob.pop_back();
    }
    if (glob.empty()) {
      continue;
    }
    if (::fnmatch(glob.c_str(), full.c_str(), 0) == 0
        || ::fnmatch(glob.c_str(), name.c_str(), 0) == 0) {
      return true;
    }
  }
  return false;
}

namespace {

void
walk_dir(const fs::path& dir,
         const fs::path& rel,
         const ScanConfig& config,
         WalkResult& out)
{
  std::error_code ec;
  fs::directory_iterator it(dir, ec);
  if (ec) {
    out.skipped.push_back({rel.generic_string(), "unreadable directory: " + ec.message()});
    return;
  }
  for (; it != fs::directory_iterator(); it.increment(ec)) {
    if (ec) {
      out.skipped.push_back({rel.generic_string(), "directory listing failed: " + ec.message()});
      return;
    }
    const auto& entry = *it;
    const std::string name = entry.path().filename().string();
    const fs::path child = rel / name;
    std::error_code sec;
    const auto status = entry.symlink_status(sec);
    if (sec) {
      out.skipped.push_back({child.generic_string(), "stat failed: " + sec.message()});
      continue;
    }
    if (fs::is_symlink(status)) {
      out.skipped.push_back({child.generic_string(), "symlink"});
      continue;
    }
    if (fs::is_directory(status)) {
      if (std::find(config.ignored_dirs.begin(), config.ignored_dirs.end(), name)
            != config.ignored_dirs.end()
          || glob_ignored(child, config.ignore_globs)) {
        continue;
      }
      walk_dir(entry.path(), child, config, out);
      continue;
    }
    if (glob_ignored(child, config.ignore_globs)) {
      continue;
    }
    if (fs::is_regular_file(status)) {
      out.files.push_back(child);
    } else {
      out.skipped.push_back({child.generic_string(), "not a regular file"});
    }
  }
}

struct Window
{
  std::string_view bytes;
  std::uint64_t offset = 0;
};

std::string
clip_pre(Window w, std::uint64_t start)
{
  const std::uint64_t from =
    std::max<std::uint64_t>(w.offset, start >= excerpt_context ? start - excerpt_context : 0);
  std::string_view pre = w.bytes.substr(from - w.offset, start - from);
  if (auto nl = pre.find_last_of('\n'); nl != std::string_view::npos) {
    pre.remove_prefix(nl + 1);
  }
  return std::string(pre);
}

std::string
clip_post(Window w, std::uint64_t end)
{
  const std::uint64_t rel = end - w.offset;
  std::string_view post = w.bytes.substr(rel, std::min<std::uint64_t>(excerpt_context, w.bytes.size() - rel));
  if (auto nl = post.find('\n'); nl != std::string_view::npos) {
    post = post.substr(0, nl);
  }
  return std::string(post);
}

Finding
to_finding(const Match& m,
           Window w,
           const std::string& display_path,
           const CompiledSecrets& secrets)
{
  Finding f;
  f.secret_id = m.secret_id;
  f.path = display_path;
  f.byte_start = m.byte_start;
  f.byte_end = m.byte_end;
  f.rule = Rule::pattern;
  f.excerpt = make_excerpt(clip_pre(w, m.byte_start), clip_post(w, m.byte_end), secrets.redactor());
  f.correlation = secrets.correlation(m.secret_id);
  return f;
}

// Findings must be sorted by byte_start. `data` holds bytes starting at
// `offset`; line counting continues from (line, last_newline_end).
struct LineCursor
{
  std::uint64_t pos = 0;
  std::uint64_t line = 1;
  std::uint64_t line_start = 0;

  void advance(std::string_view data, std::uint64_t offset, std::uint64_t target)
  {
    const std::uint64_t limit = std::min<std::uint64_t>(target, offset + data.size());
    while (pos < limit) {
      const void* hit = std::memchr(data.data() + (pos - offset), '\n', limit - pos);
      if (hit == nullptr) {
        pos = limit;
        break;
      }
      const auto at = offset + static_cast<std::uint64_t>(
                                 static_cast<const char*>(hit) - data.data());
      ++line;
      line_start = at + 1;
      pos = at + 1;
    }
  }
};

void
resolve_lines_in_memory(std::string_view text, std::vector<Finding>& findings)
{
  LineCursor cursor;
  for (auto& f : findings) {
    cursor.advance(text, 0, f.byte_start);
    f.line = cursor.line;
    f.column = f.byte_start - cursor.line_start + 1;
  }
}

bool
resolve_lines_from_file(const fs::path& file, std::vector<Finding>& findings)
{
  std::ifstream in(file, std::ios::binary);
  if (!in) {
    return false;
  }
  std::vector<char> buf(1u << 20);
  LineCursor cursor;
  std::uint64_t offset = 0;
  std::size_t next = 0;
  while (next < findings.size()) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    const auto got = static_cast<std::size_t>(in.gcount());
    if (got == 0) {
      return false;
    }
    const std::string_view data(buf.data(), got);
    while (next < findings.size() && findings[next].byte_start < offset + got) {
      cursor.advance(data, offset, findings[next].byte_start);
      findings[next].line = cursor.line;
      findings[next].column = findings[next].byte_start - cursor.line_start + 1;
      ++next;
    }
    cursor.advance(data, offset, offset + got);
    offset += got;
  }
  return true;
}

bool
finding_less(const Finding& a, const Finding& b)
{
  if (a.path != b.path) {
    return a.path < b.path;
  }
  if (a.byte_start != b.byte_start) {
    return a.byte_start < b.byte_start;
  }
  if (a.secret_id != b.secret_id) {
    return a.secret_id < b.secret_id;
  }
  return a.byte_end < b.byte_end;
}

std::string
errno_reason(const char* what)
{
  return std::string(what) + ": " + std::strerror(errno);
}

} // namespace

WalkResult
walk_tree(const fs::path& root, const ScanConfig& config)
{
  std::error_code ec;
  if (!fs::is_directory(root, ec)) {
    throw ScanError("scan root " + root.string() + " is not a readable directory");
  }
  fs::directory_iterator probe(root, ec);
  if (ec) {
    throw ScanError("cannot read scan root " + root.string() + ": " + ec.message());
  }

  WalkResult out;
  walk_dir(root, fs::path(), config, out);
  std::sort(out.files.begin(), out.files.end(), [](const fs::path& a, const fs::path& b) {
    return a.generic_string() < b.generic_string();
  });
  std::sort(out.skipped.begin(), out.skipped.end(), [](const auto& a, const auto& b) {
    return a.path < b.path;
  });
  return out;
}

CompiledSecrets
CompiledSecrets::compile(const SecretStore& store, const ScanConfig& config)
{
  CompiledSecrets out;
  auto filtered = filter_by_min_length(store, std::max<std::size_t>(config.engine.min_secret_length, 1));
  out.excluded_ = std::move(filtered.excluded_ids);
  std::vector<std::string> values;
  for (const auto& secret : store.secrets()) {
    values.push_back(secret.value);
    if (config.pepper) {
      out.correlation_[secret.id] = config.pepper->correlation(secret.value);
    }
  }
  for (const auto& secret : filtered.kept.secrets()) {
    out.patterns_.push_back(build_pattern(secret, config.engine));
    out.max_span_ = std::max(out.max_span_, out.patterns_.back().max_span());
  }
  out.redactor_ = Redactor(std::move(values));
  return out;
}

std::string
CompiledSecrets::correlation(const std::string& secret_id) const
{
  const auto it = correlation_.find(secret_id);
  return it == correlation_.end() ? std::string() : it->second;
}

std::vector<Finding>
findings_for_text(std::string_view text,
                  const std::string& display_path,
                  const CompiledSecrets& secrets)
{
  std::vector<Finding> findings;
  for (const auto& m : find_all(secrets.patterns(), text)) {
    findings.push_back(to_finding(m, Window{text, 0}, display_path, secrets));
  }
  resolve_lines_in_memory(text, findings);
  return findings;
}

FileScan
scan_file(const fs::path& file,
          const std::string& display_path,
          const CompiledSecrets& secrets,
          const ScanConfig& config)
{
  FileScan result;
  std::ifstream in(file, std::ios::binary);
  if (!in) {
    result.skip_reason = errno_reason("unreadable");
    return result;
  }
  std::error_code ec;
  const std::uint64_t size = fs::file_size(file, ec);
  if (ec) {
    result.skip_reason = "unreadable: " + ec.message();
    return result;
  }

  std::string buffer(std::min<std::uint64_t>(size, binary_probe_bytes), '\0');
  in.read(buffer.data(), static_cast<std::streamsize>(buffer.size()));
  if (static_cast<std::size_t>(in.gcount()) != buffer.size()) {
    result.skip_reason = "read error";
    return result;
  }
  if (buffer.find('\0') != std::string::npos) {
    result.skip_reason = "binary";
    return result;
  }
  result.bytes = size;
  if (secrets.patterns().empty() || size == 0) {
    return result;
  }

  const std::uint64_t span = std::max<std::size_t>(secrets.max_span(), 1);
  const std::uint64_t chunk = std::max<std::uint64_t>(config.chunk_size, span);
  const std::uint64_t lookahead = span - 1 + excerpt_context;

  MatchScanner scanner(secrets.patterns());
  std::vector<Match> matches;
  bool single_window = false;
  for (std::uint64_t owned = 0; owned < size; owned += chunk) {
    const std::uint64_t owned_end = std::min(size, owned + chunk);
    const std::uint64_t win_begin = owned >= excerpt_context ? owned - excerpt_context : 0;
    const std::uint64_t win_end = std::min(size, owned_end + lookahead);
    buffer.resize(win_end - win_begin);
    in.clear();
    in.seekg(static_cast<std::streamoff>(win_begin));
    in.read(buffer.data(), static_cast<std::streamsize>(buffer.size()));
    if (static_cast<std::size_t>(in.gcount()) != buffer.size()) {
      result.skip_reason = "read error";
      result.findings.clear();
      return result;
    }
    single_window = win_begin == 0 && win_end == size;

    matches.clear();
    scanner.scan(buffer, win_begin, owned, owned_end, matches);
    const Window w{buffer, win_begin};
    for (const auto& m : matches) {
      result.findings.push_back(to_finding(m, w, display_path, secrets));
    }
  }

  std::sort(result.findings.begin(), result.findings.end(), finding_less);
  if (!result.findings.empty()) {
    if (single_window) {
      resolve_lines_in_memory(buffer, result.findings);
    } else if (!resolve_lines_from_file(file, result.findings)) {
      result.skip_reason = "read error";
      result.findings.clear();
    }
  }
  return result;
}

ScanReport
scan_tree(const fs::path& root, const SecretStore& store, const ScanConfig& config)
{
  const auto started = std::chrono::steady_clock::now();
  ScanReport report;
  report.root = root;

  const CompiledSecrets secrets = CompiledSecrets::compile(store, config);
  report.excluded_secret_ids = secrets.excluded_ids();
  if (!store.empty() && secrets.patterns().empty()) {
    throw ScanError("all " + std::to_string(store.size())
                    + " secrets are shorter than min_secret_length ("
                    + std::to_string(config.engine.min_secret_length) + ")");
  }

  WalkResult walk = walk_tree(root, config);
  std::vector<FileScan> results(walk.files.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < walk.files.size(); i = next++) {
      const std::string display = walk.files[i].generic_string();
      try {
        results[i] = scan_file(root / walk.files[i], display, secrets, config);
      } catch (const std::exception& e) {
        results[i] = FileScan{};
        results[i].skip_reason = std::string("error: ") + e.what();
      }
    }
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(config.workers, static_cast<unsigned>(walk.files.size())));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < workers; ++i) {
      pool.emplace_back(worker);
    }
  }

  report.files_skipped = std::move(walk.skipped);
  for (std::size_t i = 0; i < results.size(); ++i) {
    auto& r = results[i];
    if (r.skip_reason) {
      report.files_skipped.push_back({walk.files[i].generic_string(), *r.skip_reason});
      continue;
    }
    ++report.files_scanned;
    report.bytes_scanned += r.bytes;
    std::move(r.findings.begin(), r.findings.end(), std::back_inserter(report.findings));
  }
  std::sort(report.findings.begin(), report.findings.end(), finding_less);
  std::sort(report.files_skipped.begin(), report.files_skipped.end(),
            [](const auto& a, const auto& b) { return a.path < b.path; });
  report.duration_seconds =
    std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

} // namespace secretsniff

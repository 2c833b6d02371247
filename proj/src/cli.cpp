#include <secretsniff/cli.hpp>
#include <secretsniff/codebase_scanner.hpp>
#include <secretsniff/continuous.hpp>
#include <secretsniff/error.hpp>

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace secretsniff {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

std::atomic<bool>&
interrupt_requested()
{
  static std::atomic<bool> flag{false};
  return flag;
}

void
apply_config_document(Config& config, std::string_view document)
{
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ConfigError("config: malformed JSON at byte " + std::to_string(e.byte));
  }
  if (!doc.is_object()) {
    throw ConfigError("config: top level must be an object");
  }

  auto want = [](const json& v, bool ok, const std::string& key, const char* type) {
    if (!ok) {
      throw ConfigError("config: \"" + key + "\" must be " + type);
    }
    (void)v;
  };
  auto count = [&](const json& v, const std::string& key) -> std::size_t {
    want(v, v.is_number_unsigned(), key, "a non-negative integer");
    return v.get<std::size_t>();
  };

  for (const auto& [key, v] : doc.items()) {
    if (key == "secrets" || key == "cache" || key == "pepper_file" || key == "out") {
      want(v, v.is_string(), key, "a string");
      const fs::path p = v.get<std::string>();
      if (key == "secrets") {
        config.secrets = p;
      } else if (key == "cache") {
        config.cache = p;
      } else if (key == "pepper_file") {
        config.pepper_file = p;
      } else {
        config.out = p;
      }
    } else if (key == "format") {
      want(v, v.is_string(), key, "a string");
      config.format = format_from_string(v.get<std::string>());
    } else if (key == "ignore") {
      want(v, v.is_array(), key, "an array of strings");
      config.ignore.clear();
      for (const auto& g : v) {
        want(g, g.is_string(), key, "an array of strings");
        config.ignore.push_back(g.get<std::string>());
      }
    } else if (key == "min_secret_length") {
      config.engine.min_secret_length = count(v, key);
    } else if (key == "max_gap_ws") {
      config.engine.max_gap_ws = count(v, key);
    } else if (key == "max_gap_nonws") {
      config.engine.max_gap_nonws = count(v, key);
    } else if (key == "webhook") {
      want(v, v.is_string(), key, "a string");
      config.webhook = v.get<std::string>();
    } else if (key == "also_pattern" || key == "include_context") {
      want(v, v.is_boolean(), key, "a boolean");
      (key == "also_pattern" ? config.also_pattern : config.include_context) = v.get<bool>();
    } else if (key == "interval") {
      want(v, v.is_number() && v.get<double>() > 0, key, "a positive number");
      config.interval_seconds = v.get<double>();
    } else if (key == "workers") {
      config.workers = static_cast<unsigned>(count(v, key));
    } else {
      throw ConfigError("config: unknown key \"" + key + "\"");
    }
  }
}

ordered_json
describe_config(const Config& c, const std::optional<Pepper>& pepper)
{
  auto path_or_null = [](const std::optional<fs::path>& p) -> ordered_json {
    return p ? ordered_json(p->string()) : ordered_json(nullptr);
  };
  ordered_json j;
  j["secrets"] = path_or_null(c.secrets);
  j["cache"] = path_or_null(c.cache);
  j["pepper_file"] = path_or_null(c.pepper_file);
  if (pepper) {
    const char* env = std::getenv(std::string(pepper_env_var).c_str());
    const bool from_env = env != nullptr && *env != '\0';
    j["pepper"] = {{"source", from_env ? std::string("env:") + std::string(pepper_env_var)
                                       : std::string("file")},
                   {"pepper_id", pepper->id()}};
  } else {
    j["pepper"] = nullptr;
  }
  j["out"] = path_or_null(c.out);
  j["format"] = to_string(c.format);
  j["ignore"] = c.ignore;
  j["min_secret_length"] = c.engine.min_secret_length;
  j["max_gap_ws"] = c.engine.max_gap_ws;
  j["max_gap_nonws"] = c.engine.max_gap_nonws;
  j["webhook"] = c.webhook ? ordered_json(*c.webhook) : ordered_json(nullptr);
  j["also_pattern"] = c.also_pattern;
  j["include_context"] = c.include_context;
  j["interval"] = c.interval_seconds;
  j["workers"] = c.workers;
  return j;
}

namespace {

std::string
slurp(const fs::path& path, const char* what)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError(std::string("cannot read ") + what + " " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Flag values captured by CLI11 before merging with the config file.
struct Flags
{
  std::string config_file;
  std::string secrets, cache, pepper_file, out, format, webhook;
  std::vector<std::string> ignore;
  std::size_t min_secret_length = 0, max_gap_ws = 0, max_gap_nonws = 0;
  double interval = 0;
  unsigned workers = 0;
  bool also_pattern = false, include_context = false, print_config = false;

  std::vector<std::pair<std::string, CLI::Option*>> options;

  // Each subcommand registers its own copy of an option.
  bool given(const std::string& name) const
  {
    for (const auto& [n, opt] : options) {
      if (n == name && opt->count() > 0) {
        return true;
      }
    }
    return false;
  }
};

void
add_common(CLI::App& sub, Flags& f)
{
  auto add = [&](const std::string& name, CLI::Option* opt) { f.options.emplace_back(name, opt); };
  add("config", sub.add_option("--config", f.config_file, "Flat JSON config file"));
  add("secrets", sub.add_option("--secrets", f.secrets, "Secret store JSON file"));
  add("cache", sub.add_option("--cache", f.cache, "Hashed secret cache file"));
  add("pepper_file", sub.add_option("--pepper-file", f.pepper_file,
                                    "File with 32 raw pepper bytes (or set SECRETSNIFF_PEPPER)"));
  add("format", sub.add_option("--format", f.format, "human | json | jsonl"));
  add("out", sub.add_option("--out", f.out, "Write the report here instead of stdout"));
  add("ignore", sub.add_option("--ignore", f.ignore, "Glob of paths to skip (repeatable)"));
  add("min_secret_length", sub.add_option("--min-secret-length", f.min_secret_length));
  add("max_gap_ws", sub.add_option("--max-gap-ws", f.max_gap_ws));
  add("max_gap_nonws", sub.add_option("--max-gap-nonws", f.max_gap_nonws));
  add("webhook", sub.add_option("--webhook", f.webhook, "Alert webhook URL"));
  add("also_pattern", sub.add_flag("--also-pattern", f.also_pattern,
                                   "Also run gap-tolerant matching over added lines (needs --secrets)"));
  add("include_context", sub.add_flag("--include-context", f.include_context,
                                      "Sniff context lines as well as added lines"));
  add("interval", sub.add_option("--interval", f.interval, "Watch poll interval in seconds"));
  add("workers", sub.add_option("--workers", f.workers, "Worker threads"));
  add("print_config", sub.add_flag("--print-config", f.print_config,
                                   "Print the resolved configuration and exit"));
}

Config
resolve(const Flags& f)
{
  Config c;
  if (f.given("config")) {
    apply_config_document(c, slurp(f.config_file, "config file"));
  }
  if (f.given("secrets")) c.secrets = fs::path(f.secrets);
  if (f.given("cache")) c.cache = fs::path(f.cache);
  if (f.given("pepper_file")) c.pepper_file = fs::path(f.pepper_file);
  if (f.given("out")) c.out = fs::path(f.out);
  if (f.given("format")) c.format = format_from_string(f.format);
  if (f.given("ignore")) c.ignore = f.ignore;
  if (f.given("min_secret_length")) c.engine.min_secret_length = f.min_secret_length;
  if (f.given("max_gap_ws")) c.engine.max_gap_ws = f.max_gap_ws;
  if (f.given("max_gap_nonws")) c.engine.max_gap_nonws = f.max_gap_nonws;
  if (f.given("webhook")) c.webhook = f.webhook;
  if (f.given("also_pattern")) c.also_pattern = f.also_pattern;
  if (f.given("include_context")) c.include_context = f.include_context;
  if (f.given("interval")) c.interval_seconds = f.interval;
  if (f.given("workers")) c.workers = f.workers;
  if (c.engine.min_secret_length == 0) {
    throw ConfigError("min_secret_length must be at least 1");
  }
  if (c.interval_seconds <= 0) {
    throw ConfigError("interval must be positive");
  }
  if (c.workers == 0) {
    throw ConfigError("workers must be at least 1");
  }
  return c;
}

std::optional<Pepper>
optional_pepper(const Config& c)
{
  const char* env = std::getenv(std::string(pepper_env_var).c_str());
  if ((env != nullptr && *env != '\0') || c.pepper_file) {
    return Pepper::resolve(c.pepper_file);
  }
  return std::nullopt;
}

SecretStore
require_secrets(const Config& c)
{
  if (!c.secrets) {
    throw ConfigError("--secrets is required");
  }
  return load_secrets(*c.secrets);
}

void
write_output(const Config& c, const std::string& text, std::ostream& out)
{
  if (!c.out) {
    out << text;
    out.flush();
    return;
  }
  std::ofstream file(*c.out, std::ios::binary | std::ios::trunc);
  if (!file) {
    throw ConfigError("cannot write " + c.out->string());
  }
  file << text;
}

ScanConfig
scan_config(const Config& c, std::optional<Pepper> pepper)
{
  ScanConfig sc;
  sc.engine = c.engine;
  sc.ignore_globs = c.ignore;
  sc.workers = c.workers;
  sc.pepper = std::move(pepper);
  return sc;
}

int
cmd_build_cache(const Config& c, std::ostream& out, std::ostream& err)
{
  if (!c.cache) {
    throw ConfigError("--cache <path> is required for the output cache");
  }
  const SecretStore store = require_secrets(c);
  const Pepper pepper = Pepper::resolve(c.pepper_file);
  const CacheBuild built = build_cache(store, pepper);
  for (const auto& w : built.warnings) {
    err << "warning: " << w.message << "\n";
  }
  for (const auto& id : filter_by_min_length(store, c.engine.min_secret_length).excluded_ids) {
    err << "warning: secret \"" << id << "\" is shorter than min_secret_length ("
        << c.engine.min_secret_length << ") and is skipped by the pattern scanner\n";
  }
  save_cache(built.cache, *c.cache);
  out << "wrote " << c.cache->string() << ": " << built.cache.secret_count()
      << " digests from " << store.size() << " secrets (pepper " << pepper.id() << ")\n";
  return exit_clean;
}

int
cmd_scan(const Config& c, const std::string& root, std::ostream& out, std::ostream& err)
{
  const SecretStore store = require_secrets(c);
  const ScanReport report = scan_tree(root, store, scan_config(c, optional_pepper(c)));
  for (const auto& id : report.excluded_secret_ids) {
    err << "warning: secret \"" << id << "\" is shorter than min_secret_length ("
        << c.engine.min_secret_length << ") and was not scanned for\n";
  }
  write_output(c, emit_report(report, c.format), out);
  err << "scanned " << report.files_scanned << " files (" << report.bytes_scanned << " bytes), "
      << report.files_skipped.size() << " skipped, " << report.findings.size() << " findings\n";
  return report.findings.empty() ? exit_clean : exit_findings;
}

int
cmd_check_diff(const Config& c,
               const std::string& diff_arg,
               const std::string& revision_arg,
               std::istream& in,
               std::ostream& out,
               std::ostream& err)
{
  if (!c.cache) {
    throw ConfigError("--cache is required");
  }
  const HashedSecretCache cache = load_cache(*c.cache);
  const Pepper pepper = Pepper::resolve(c.pepper_file);

  std::optional<CompiledSecrets> compiled;
  if (c.also_pattern) {
    compiled = CompiledSecrets::compile(require_secrets(c), scan_config(c, pepper));
  }

  std::string text;
  std::string revision_id = revision_arg;
  if (diff_arg.empty() || diff_arg == "-") {
    std::ostringstream buf;
    buf << in.rdbuf();
    text = buf.str();
    if (revision_id.empty()) {
      revision_id = "stdin";
    }
  } else {
    text = slurp(diff_arg, "diff");
    if (revision_id.empty()) {
      revision_id = fs::path(diff_arg).stem().string();
    }
  }

  CheckContext ctx;
  ctx.cache = &cache;
  ctx.pepper = &pepper;
  ctx.pattern_secrets = compiled ? &*compiled : nullptr;
  ctx.detect.include_context = c.include_context;
  const RevisionReport report = check_revision(text, revision_id, ctx);
  write_output(c, emit_report(report, c.format), out);

  if (!report.findings.empty() && c.webhook) {
    AlertPayload payload;
    payload.subject_kind = "revision";
    payload.subject_id = report.revision_id;
    payload.findings = report.findings;
    const DeliveryResult r = send_alert(payload, *c.webhook);
    err << "alert " << to_string(r.status) << " after " << r.attempts << " attempt(s)";
    if (!r.error.empty()) {
      err << ": " << r.error;
    }
    err << "\n";
  }
  return report.findings.empty() ? exit_clean : exit_findings;
}

int
cmd_watch(const Config& c,
          const std::string& inbox,
          const std::string& log,
          bool once,
          std::ostream& out,
          std::ostream& err)
{
  if (!c.cache) {
    throw ConfigError("--cache is required");
  }
  const HashedSecretCache cache = load_cache(*c.cache);
  const Pepper pepper = Pepper::resolve(c.pepper_file);
  std::optional<CompiledSecrets> compiled;
  if (c.also_pattern) {
    compiled = CompiledSecrets::compile(require_secrets(c), scan_config(c, pepper));
  }

  WatchOptions options;
  options.inbox = inbox;
  options.log_path = log;
  options.workers = c.workers;
  options.interval = std::chrono::milliseconds(static_cast<long long>(c.interval_seconds * 1000));
  options.webhook = c.webhook;

  CheckContext ctx;
  ctx.cache = &cache;
  ctx.pepper = &pepper;
  ctx.pattern_secrets = compiled ? &*compiled : nullptr;
  ctx.detect.include_context = c.include_context;

  Watcher watcher(options, ctx);
  if (once) {
    const PollStats s = watcher.poll_once();
    out << "processed " << s.total() << " diffs: " << s.clean << " clean, " << s.flagged
        << " flagged, " << s.failed << " failed\n";
    return exit_clean;
  }
  err << "watching " << inbox << " every " << c.interval_seconds << "s with " << c.workers
      << " workers\n";
  watcher.run(std::stop_token{}, [] { return interrupt_requested().load(); });
  err << "stopped\n";
  return exit_clean;
}

} // namespace

int
run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err)
{
  CLI::App app{"Detect leaks of known secrets in codebases and diffs", "secretsniff"};
  app.set_version_flag("--version", std::string(tool_version()));
  app.require_subcommand(1);

  Flags flags;
  std::string root, diff_file, revision_id, inbox, log;
  bool once = false;

  auto* build = app.add_subcommand("build-cache", "Hash the secret store into a peppered cache");
  add_common(*build, flags);

  auto* scan = app.add_subcommand("scan", "Scan a directory tree for known secrets");
  add_common(*scan, flags);
  scan->add_option("root", root, "Directory to scan")->required();

  auto* check = app.add_subcommand("check-diff", "Check a unified diff against the cache");
  add_common(*check, flags);
  check->add_option("diff", diff_file, "Diff file (default: stdin)");
  check->add_option("--revision-id", revision_id, "Revision identifier for reports");

  auto* watch = app.add_subcommand("watch", "Continuously check diffs dropped into an inbox");
  add_common(*watch, flags);
  watch->add_option("inbox", inbox, "Inbox directory")->required();
  watch->add_option("--log", log, "JSONL result log (default: <inbox>/results.jsonl)");
  watch->add_flag("--once", once, "Process the current inbox once and exit");

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_clean;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return exit_clean;
  } catch (const CLI::CallForVersion&) {
    out << tool_version() << "\n";
    return exit_clean;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return exit_error;
  }

  try {
    const Config config = resolve(flags);
    if (flags.print_config) {
      out << dump_json(describe_config(config, optional_pepper(config)), 2) << "\n";
      return exit_clean;
    }
    if (build->parsed()) {
      return cmd_build_cache(config, out, err);
    }
    if (scan->parsed()) {
      return cmd_scan(config, root, out, err);
    }
    if (check->parsed()) {
      return cmd_check_diff(config, diff_file, revision_id, in, out, err);
    }
    if (watch->parsed()) {
      return cmd_watch(config, inbox, log, once, out, err);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_error;
  }
  return exit_error;
}

} // namespace secretsniff

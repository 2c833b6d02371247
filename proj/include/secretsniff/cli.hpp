#pragma once

#include <secretsniff/pattern_engine.hpp>
#include <secretsniff/report.hpp>
#include <secretsniff/token_hasher.hpp>

#include <atomic>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace secretsniff {

enum ExitCode : int { exit_clean = 0, exit_findings = 1, exit_error = 2 };

// Fully resolved settings: defaults, then the --config file, then flags.
struct Config
{
  std::optional<std::filesystem::path> secrets;
  std::optional<std::filesystem::path> cache;
  std::optional<std::filesystem::path> pepper_file;
  std::optional<std::filesystem::path> out;
  Format format = Format::human;
  std::vector<std::string> ignore;
  EngineConfig engine;
  std::optional<std::string> webhook;
  bool also_pattern = false;
  bool include_context = false;
  double interval_seconds = 2.0;
  unsigned workers = 4;
};

// Applies a flat JSON config document onto `config`. Unknown keys and
// mistyped values throw ConfigError.
void apply_config_document(Config& config, std::string_view document);

// Printable view; the pepper appears only as its source and id.
nlohmann::ordered_json describe_config(const Config& config,
                                       const std::optional<Pepper>& pepper);

// Set from a signal handler to stop watch mode.
std::atomic<bool>& interrupt_requested();

// Runs the command line; returns 0 (clean), 1 (findings) or 2 (error).
int run_cli(const std::vector<std::string>& args,
            std::istream& in,
            std::ostream& out,
            std::ostream& err);

} // namespace secretsniff

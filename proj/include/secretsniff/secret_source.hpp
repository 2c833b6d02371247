#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace secretsniff {

struct Secret
{
  std::string id;
  std::string value;
  std::vector<std::string> tags;

  bool operator==(const Secret&) const = default;
};

// Immutable set of known secrets. Safe to share between threads.
class SecretStore
{
public:
  using Clock = std::chrono::system_clock;

  SecretStore() = default;

  // Throws SecretStoreError on duplicate ids, empty values or values
  // containing line breaks.
  SecretStore(std::vector<Secret> secrets,
              std::string source_label,
              Clock::time_point loaded_at = Clock::now());

  std::span<const Secret> secrets() const { return secrets_; }
  std::size_t size() const { return secrets_.size(); }
  bool empty() const { return secrets_.empty(); }
  const std::string& source_label() const { return source_label_; }
  Clock::time_point loaded_at() const { return loaded_at_; }

  const Secret* find(std::string_view id) const;

private:
  std::vector<Secret> secrets_;
  std::string source_label_;
  Clock::time_point loaded_at_{};
};

// Boundary where a live secret-manager client would plug in.
class SecretSource
{
public:
  virtual ~SecretSource() = default;
  virtual SecretStore load() const = 0;
  virtual std::string label() const = 0;
};

// Reads the JSON store document:
//   {"secrets": [{"id": "...", "value": "...", "tags": ["..."]}]}
class FileSecretSource : public SecretSource
{
public:
  explicit FileSecretSource(std::filesystem::path path);

  SecretStore load() const override;
  std::string label() const override;

private:
  std::filesystem::path path_;
};

SecretStore load_secrets(const std::filesystem::path& path);

SecretStore parse_secret_store(std::string_view document,
                               std::string source_label);

struct FilteredStore
{
  SecretStore kept;
  std::vector<std::string> excluded_ids;
};

FilteredStore filter_by_min_length(const SecretStore& store,
                                   std::size_t min_len);

} // namespace secretsniff

#pragma once

#include <secretsniff/diff_model.hpp>
#include <secretsniff/finding.hpp>
#include <secretsniff/secret_source.hpp>
#include <secretsniff/timeutil.hpp>

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace secretsniff {

using Digest = std::array<std::uint8_t, 32>;

inline constexpr std::string_view cache_algorithm = "sha256-peppered-v1";
inline constexpr std::string_view pepper_env_var = "SECRETSNIFF_PEPPER";

Digest sha256(std::span<const std::uint8_t> data);
Digest sha256(std::string_view data);

std::string to_hex(std::span<const std::uint8_t> bytes);

// Returns std::nullopt on odd length or non-hex characters.
std::optional<std::vector<std::uint8_t>> from_hex(std::string_view hex);

// Deployment-wide 32-byte secret mixed into every digest. Never
// serialized; only its id (first 8 hex chars of SHA-256(bytes)) is.
class Pepper
{
public:
  static constexpr std::size_t size = 32;

  static Pepper from_bytes(std::span<const std::uint8_t> bytes);
  static Pepper from_hex(std::string_view hex);
  static Pepper from_file(const std::filesystem::path& path);

  // Env var first, then file. Throws PepperError naming SECRETSNIFF_PEPPER
  // when neither is available.
  static Pepper resolve(const std::optional<std::filesystem::path>& file);

  const std::string& id() const { return id_; }
  std::span<const std::uint8_t> bytes() const { return bytes_; }

  // SHA-256(pepper || value)
  Digest digest(std::string_view value) const;

  // First 8 hex chars of digest(value).
  std::string correlation(std::string_view value) const;

private:
  explicit Pepper(std::span<const std::uint8_t> bytes);

  std::array<std::uint8_t, size> bytes_{};
  std::string id_;
};

class HashedSecretCache
{
public:
  HashedSecretCache() = default;
  HashedSecretCache(std::string pepper_id,
                    std::vector<Digest> digests,
                    Timestamp built_at);

  const std::string& algorithm() const { return algorithm_; }
  const std::string& pepper_id() const { return pepper_id_; }
  // Sorted ascending, unique.
  std::span<const Digest> digests() const { return digests_; }
  std::size_t secret_count() const { return digests_.size(); }
  Timestamp built_at() const { return built_at_; }

  bool contains(const Digest& digest) const;

  bool operator==(const HashedSecretCache&) const = default;

private:
  std::string algorithm_{cache_algorithm};
  std::string pepper_id_;
  std::vector<Digest> digests_;
  Timestamp built_at_{};
};

struct CacheWarning
{
  enum class Kind { duplicate_value, untokenizable };

  Kind kind;
  std::vector<std::string> secret_ids;
  std::string message;
};

struct CacheBuild
{
  HashedSecretCache cache;
  std::vector<CacheWarning> warnings;
};

CacheBuild build_cache(const SecretStore& store, const Pepper& pepper);

std::string serialize_cache(const HashedSecretCache& cache);
HashedSecretCache parse_cache(std::string_view document);

void save_cache(const HashedSecretCache& cache,
                const std::filesystem::path& path);
HashedSecretCache load_cache(const std::filesystem::path& path);

// Bytes that may form tokens: A-Z a-z 0-9 _ - + / = . $ % @ ! # ~
bool is_token_char(unsigned char c);

struct Token
{
  std::string text;
  std::size_t column = 0; // 1-based

  bool operator==(const Token&) const = default;
};

// Maximal runs of token characters, their variants with leading/trailing
// '.', '=' and '-' stripped, and the pieces obtained by splitting each run
// at '=' (also stripped). Unique by position, ordered by column with
// longer tokens first.
std::vector<Token> tokenize(std::string_view line);

class PepperMismatchError : public PepperError
{
public:
  using PepperError::PepperError;
};

struct DetectConfig
{
  bool include_context = false;
};

// Tokenizes every sniffed line of the revision and reports tokens whose
// peppered digest is in the cache. Throws PepperMismatchError when the
// pepper did not build the cache.
std::vector<Finding> detect(const Revision& revision,
                            const HashedSecretCache& cache,
                            const Pepper& pepper,
                            const DetectConfig& config = {});

} // namespace secretsniff

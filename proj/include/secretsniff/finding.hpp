#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace secretsniff {

inline constexpr std::string_view redaction_mask = "«REDACTED»";

// Bytes of context kept on each side of a detection in excerpts.
inline constexpr std::size_t excerpt_context = 32;

enum class Rule { pattern, hash_token };

std::string_view to_string(Rule rule);
Rule rule_from_string(std::string_view text);

// A redacted detection record. For hash_token findings byte offsets are
// relative to the start of the added line.
struct Finding
{
  std::string secret_id;
  std::string path;
  std::uint64_t line = 0;
  std::uint64_t column = 0;
  std::uint64_t byte_start = 0;
  std::uint64_t byte_end = 0;
  Rule rule = Rule::pattern;
  std::string excerpt;
  std::string correlation;

  bool operator==(const Finding&) const = default;
};

// Replaces every occurrence of any known secret value with the mask.
class Redactor
{
public:
  Redactor() = default;
  explicit Redactor(std::vector<std::string> values);

  std::string scrub(std::string_view text) const;

private:
  std::vector<std::string> values_; // longest first
};

// Builds "<pre>«REDACTED»<post>" with the context already scrubbed.
std::string make_excerpt(std::string_view pre,
                         std::string_view post,
                         const Redactor& redactor);

} // namespace secretsniff

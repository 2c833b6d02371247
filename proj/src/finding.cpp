#include <secretsniff/error.hpp>
#include <secretsniff/finding.hpp>

#include <algorithm>

namespace secretsniff {

std::string_view
to_string(Rule rule)
{
  return rule == Rule::pattern ? "pattern" : "hash_token";
}

Rule
rule_from_string(std::string_view text)
{
  if (text == "pattern") {
    return Rule::pattern;
  }
  if (text == "hash_token") {
    return Rule::hash_token;
  }
  throw Error("unknown rule kind");
}

Redactor::Redactor(std::vector<std::string> values)
  : values_(std::move(values))
{
  std::erase_if(values_, [](const std::string& v) { return v.empty(); });
  std::sort(values_.begin(), values_.end(), [](const auto& a, const auto& b) {
    return a.size() != b.size() ? a.size() > b.size() : a < b;
  });
  values_.erase(std::unique(values_.begin(), values_.end()), values_.end());
}

std::string
Redactor::scrub(std::string_view text) const
{
  std::string out(text);
  for (const auto& value : values_) {
    if (value.size() > out.size()) {
      continue;
    }
    std::size_t pos = 0;
    while ((pos = out.find(value, pos)) != std::string::npos) {
      out.replace(pos, value.size(), redaction_mask);
      pos += redaction_mask.size();
    }
  }
  return out;
}

std::string
make_excerpt(std::string_view pre, std::string_view post, const Redactor& redactor)
{
  std::string out = redactor.scrub(pre);
  out += redaction_mask;
  out += redactor.scrub(post);
  return out;
}

} // namespace secretsniff

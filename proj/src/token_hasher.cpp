#include <secretsniff/error.hpp>
#include <secretsniff/token_hasher.hpp>

#include <json.hpp>

#include <openssl/evp.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <map>
#include <memory>
#include <sstream>

namespace secretsniff {

using nlohmann::json;

namespace {

struct MdCtxDeleter
{
  void operator()(EVP_MD_CTX* ctx) const { EVP_MD_CTX_free(ctx); }
};

EVP_MD_CTX*
thread_ctx()
{
  thread_local std::unique_ptr<EVP_MD_CTX, MdCtxDeleter> ctx(EVP_MD_CTX_new());
  if (!ctx) {
    throw Error("EVP_MD_CTX_new failed");
  }
  return ctx.get();
}

Digest
sha256_parts(std::span<const std::uint8_t> head, std::string_view tail)
{
  EVP_MD_CTX* ctx = thread_ctx();
  Digest out{};
  unsigned int len = 0;
  if (EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1
      || EVP_DigestUpdate(ctx, head.data(), head.size()) != 1
      || EVP_DigestUpdate(ctx, tail.data(), tail.size()) != 1
      || EVP_DigestFinal_ex(ctx, out.data(), &len) != 1 || len != out.size()) {
    throw Error("SHA-256 computation failed");
  }
  return out;
}

int
hex_value(char c)
{
  if (c >= '0' && c <= '9') {
    return c - '0';
  }
  if (c >= 'a' && c <= 'f') {
    return c - 'a' + 10;
  }
  if (c >= 'A' && c <= 'F') {
    return c - 'A' + 10;
  }
  return -1;
}

} // namespace

Digest
sha256(std::span<const std::uint8_t> data)
{
  return sha256_parts(data, {});
}

Digest
sha256(std::string_view data)
{
  return sha256_parts({}, data);
}

std::string
to_hex(std::span<const std::uint8_t> bytes)
{
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    out += digits[b >> 4];
    out += digits[b & 0xf];
  }
  return out;
}

std::optional<std::vector<std::uint8_t>>
from_hex(std::string_view hex)
{
  if (hex.size() % 2 != 0) {
    return std::nullopt;
  }
  std::vector<std::uint8_t> out;
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    const int hi = hex_value(hex[i]);
    const int lo = hex_value(hex[i + 1]);
    if (hi < 0 || lo < 0) {
      return std::nullopt;
    }
    out.push_back(static_cast<std::uint8_t>((hi << 4) | lo));
  }
  return out;
}

// Pepper

Pepper::Pepper(std::span<const std::uint8_t> bytes)
{
  std::copy(bytes.begin(), bytes.end(), bytes_.begin());
  id_ = to_hex(sha256(bytes_)).substr(0, 8);
}

Pepper
Pepper::from_bytes(std::span<const std::uint8_t> bytes)
{
  if (bytes.size() != size) {
    throw PepperError("pepper must be exactly 32 bytes, got "
                      + std::to_string(bytes.size()));
  }
  return Pepper(bytes);
}

Pepper
Pepper::from_hex(std::string_view hex)
{
  while (!hex.empty() && (hex.back() == '\n' || hex.back() == '\r'
                          || hex.back() == ' ')) {
    hex.remove_suffix(1);
  }
  const auto bytes = secretsniff::from_hex(hex);
  if (!bytes || bytes->size() != size) {
    throw PepperError(std::string(pepper_env_var)
                      + " must hold exactly 64 hex characters");
  }
  return Pepper(*bytes);
}

Pepper
Pepper::from_file(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw PepperError("cannot read pepper file " + path.string());
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (bytes.size() != size) {
    throw PepperError("pepper file " + path.string()
                      + " must contain exactly 32 raw bytes, got "
                      + std::to_string(bytes.size()));
  }
  return Pepper(bytes);
}

Pepper
Pepper::resolve(const std::optional<std::filesystem::path>& file)
{
  if (const char* env = std::getenv(std::string(pepper_env_var).c_str());
      env != nullptr && *env != '\0') {
    return from_hex(env);
  }
  if (file) {
    return from_file(*file);
  }
  throw PepperError("no pepper available: set " + std::string(pepper_env_var)
                    + " (64 hex chars) or pass --pepper-file");
}

Digest
Pepper::digest(std::string_view value) const
{
  return sha256_parts(bytes_, value);
}

std::string
Pepper::correlation(std::string_view value) const
{
  const Digest d = digest(value);
  return to_hex(std::span(d).first(4));
}

// Cache

HashedSecretCache::HashedSecretCache(std::string pepper_id,
                                     std::vector<Digest> digests,
                                     Timestamp built_at)
  : pepper_id_(std::move(pepper_id)),
    digests_(std::move(digests)),
    built_at_(built_at)
{
  std::sort(digests_.begin(), digests_.end());
  digests_.erase(std::unique(digests_.begin(), digests_.end()), digests_.end());
}

bool
HashedSecretCache::contains(const Digest& digest) const
{
  return std::binary_search(digests_.begin(), digests_.end(), digest);
}

bool
is_token_char(unsigned char c)
{
  if ((c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
    return true;
  }
  switch (c) {
  case '_': case '-': case '+': case '/': case '=': case '.':
  case '$': case '%': case '@': case '!': case '#': case '~':
    return true;
  default:
    return false;
  }
}

CacheBuild
build_cache(const SecretStore& store, const Pepper& pepper)
{
  CacheBuild result;
  std::map<Digest, std::vector<std::string>> ids_by_digest;
  for (const auto& secret : store.secrets()) {
    ids_by_digest[pepper.digest(secret.value)].push_back(secret.id);
    const bool tokenizable =
      std::all_of(secret.value.begin(), secret.value.end(), [](char c) {
        return is_token_char(static_cast<unsigned char>(c));
      });
    if (!tokenizable) {
      result.warnings.push_back(
        {CacheWarning::Kind::untokenizable,
         {secret.id},
         "secret \"" + secret.id
           + "\" contains characters outside the token alphabet; the diff "
             "sniffer cannot detect it"});
    }
  }

  std::vector<Digest> digests;
  digests.reserve(ids_by_digest.size());
  for (auto& [digest, ids] : ids_by_digest) {
    digests.push_back(digest);
    if (ids.size() > 1) {
      std::string names;
      for (const auto& id : ids) {
        names += (names.empty() ? "\"" : ", \"") + id + "\"";
      }
      result.warnings.push_back({CacheWarning::Kind::duplicate_value,
                                 ids,
                                 "secrets " + names + " share one value"});
    }
  }
  result.cache = HashedSecretCache(pepper.id(), std::move(digests), now_seconds());
  return result;
}

std::string
serialize_cache(const HashedSecretCache& cache)
{
  nlohmann::ordered_json digests = nlohmann::ordered_json::array();
  for (const auto& d : cache.digests()) {
    digests.push_back(to_hex(d));
  }
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  doc["algorithm"] = cache.algorithm();
  doc["pepper_id"] = cache.pepper_id();
  doc["built_at"] = format_rfc3339(cache.built_at());
  doc["digests"] = std::move(digests);
  return doc.dump(2) + "\n";
}

HashedSecretCache
parse_cache(std::string_view document)
{
  using Kind = CacheError::Kind;
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw CacheError(Kind::malformed,
                     "malformed cache JSON at byte " + std::to_string(e.byte));
  }
  if (!doc.is_object()) {
    throw CacheError(Kind::malformed, "cache document must be an object");
  }
  for (const auto& [key, _] : doc.items()) {
    if (key != "algorithm" && key != "pepper_id" && key != "built_at"
        && key != "digests") {
      throw CacheError(Kind::malformed, "unknown cache key \"" + key + "\"");
    }
  }
  auto string_field = [&](const char* key) {
    const auto it = doc.find(key);
    if (it == doc.end() || !it->is_string()) {
      throw CacheError(Kind::malformed,
                       std::string("cache field \"") + key
                         + "\" missing or not a string");
    }
    return it->get<std::string>();
  };

  const std::string algorithm = string_field("algorithm");
  if (algorithm != cache_algorithm) {
    throw CacheError(Kind::version_mismatch,
                     "cache algorithm \"" + algorithm + "\" is not \""
                       + std::string(cache_algorithm) + "\"");
  }
  std::string pepper_id = string_field("pepper_id");
  Timestamp built_at;
  try {
    built_at = parse_rfc3339(string_field("built_at"));
  } catch (const std::invalid_argument& e) {
    throw CacheError(Kind::malformed, std::string("cache built_at: ") + e.what());
  }

  const auto it = doc.find("digests");
  if (it == doc.end() || !it->is_array()) {
    throw CacheError(Kind::malformed, "cache field \"digests\" must be an array");
  }
  std::vector<Digest> digests;
  digests.reserve(it->size());
  std::size_t index = 0;
  for (const auto& entry : *it) {
    if (!entry.is_string()) {
      throw CacheError(Kind::malformed,
                       "digest " + std::to_string(index) + " is not a string");
    }
    const auto& hex = entry.get_ref<const std::string&>();
    const auto bytes = from_hex(hex);
    if (!bytes || bytes->size() != Digest{}.size()) {
      throw CacheError(Kind::corrupted,
                       "digest " + std::to_string(index)
                         + " is not 32 bytes of hex");
    }
    Digest d{};
    std::copy(bytes->begin(), bytes->end(), d.begin());
    digests.push_back(d);
    ++index;
  }
  return HashedSecretCache(std::move(pepper_id), std::move(digests), built_at);
}

void
save_cache(const HashedSecretCache& cache, const std::filesystem::path& path)
{
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw CacheError(CacheError::Kind::io, "cannot write " + tmp.string());
    }
    out << serialize_cache(cache);
    if (!out) {
      throw CacheError(CacheError::Kind::io, "error writing " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw CacheError(CacheError::Kind::io,
                     "cannot move cache into place at " + path.string());
  }
}

HashedSecretCache
load_cache(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw CacheError(CacheError::Kind::io, "cannot read cache " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_cache(buf.str());
}

// Tokenizer

namespace {

constexpr bool
is_edge_punct(char c)
{
  return c == '.' || c == '=' || c == '-';
}

void
add_stripped(std::string_view line,
             std::size_t begin,
             std::size_t end,
             std::vector<std::pair<std::size_t, std::size_t>>& spans)
{
  if (begin < end) {
    spans.emplace_back(begin, end);
  }
  while (begin < end && is_edge_punct(line[begin])) {
    ++begin;
  }
  while (end > begin && is_edge_punct(line[end - 1])) {
    --end;
  }
  if (begin < end) {
    spans.emplace_back(begin, end);
  }
}

} // namespace

std::vector<Token>
tokenize(std::string_view line)
{
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  std::size_t i = 0;
  while (i < line.size()) {
    if (!is_token_char(static_cast<unsigned char>(line[i]))) {
      ++i;
      continue;
    }
    const std::size_t run_begin = i;
    while (i < line.size() && is_token_char(static_cast<unsigned char>(line[i]))) {
      ++i;
    }
    const std::size_t run_end = i;
    add_stripped(line, run_begin, run_end, spans);

    std::size_t piece = run_begin;
    if (line.substr(run_begin, run_end - run_begin).find('=')
        != std::string_view::npos) {
      for (std::size_t k = run_begin; k <= run_end; ++k) {
        if (k == run_end || line[k] == '=') {
          add_stripped(line, piece, k, spans);
          piece = k + 1;
        }
      }
    }
  }

  std::sort(spans.begin(), spans.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first < b.first : a.second > b.second;
  });
  spans.erase(std::unique(spans.begin(), spans.end()), spans.end());

  std::vector<Token> tokens;
  tokens.reserve(spans.size());
  for (const auto& [b, e] : spans) {
    tokens.push_back({std::string(line.substr(b, e - b)), b + 1});
  }
  return tokens;
}

std::vector<Finding>
detect(const Revision& revision,
       const HashedSecretCache& cache,
       const Pepper& pepper,
       const DetectConfig& config)
{
  if (pepper.id() != cache.pepper_id()) {
    throw PepperMismatchError("pepper " + pepper.id()
                              + " did not build this cache (built with "
                              + cache.pepper_id() + ")");
  }

  std::vector<Finding> findings;
  for (const auto& line : sniff_lines(revision, config.include_context)) {
    struct Hit
    {
      std::size_t begin;
      std::size_t end;
      std::string correlation;
    };
    std::vector<Hit> hits;
    for (const auto& token : tokenize(line.text)) {
      const Digest d = pepper.digest(token.text);
      if (cache.contains(d)) {
        hits.push_back({token.column - 1,
                        token.column - 1 + token.text.size(),
                        to_hex(std::span(d).first(4))});
      }
    }
    if (hits.empty()) {
      continue;
    }

    // The cache holds no raw values, so other secrets on the line cannot be
    // recognised unless they happen to be whole tokens. Token characters
    // outside the hits are therefore starred out; only the line's shape
    // survives.
    std::vector<std::pair<std::size_t, std::size_t>> masked;
    for (const auto& h : hits) {
      masked.emplace_back(h.begin, h.end);
    }
    std::sort(masked.begin(), masked.end());
    std::vector<std::pair<std::size_t, std::size_t>> merged;
    for (const auto& m : masked) {
      if (!merged.empty() && m.first <= merged.back().second) {
        merged.back().second = std::max(merged.back().second, m.second);
      } else {
        merged.push_back(m);
      }
    }
    auto starred = [&](std::size_t from, std::size_t to) {
      std::string out = line.text.substr(from, to - from);
      for (auto& c : out) {
        if (is_token_char(static_cast<unsigned char>(c))) {
          c = '*';
        }
      }
      return out;
    };
    auto excerpt_for = [&](const Hit& hit) {
      const std::size_t from =
        hit.begin > excerpt_context ? hit.begin - excerpt_context : 0;
      const std::size_t to = std::min(line.text.size(), hit.end + excerpt_context);
      std::string out;
      std::size_t pos = from;
      for (const auto& [b, e] : merged) {
        if (e <= from || b >= to) {
          continue;
        }
        if (b > pos) {
          out += starred(pos, b);
        }
        out += redaction_mask;
        pos = e;
      }
      if (pos < to) {
        out += starred(pos, to);
      }
      return out;
    };

    for (const auto& h : hits) {
      Finding f;
      f.secret_id = "digest:" + h.correlation;
      f.path = line.path;
      f.line = line.line;
      f.column = h.begin + 1;
      f.byte_start = h.begin;
      f.byte_end = h.end;
      f.rule = Rule::hash_token;
      f.excerpt = excerpt_for(h);
      f.correlation = h.correlation;
      findings.push_back(std::move(f));
    }
  }
  return findings;
}

} // namespace secretsniff

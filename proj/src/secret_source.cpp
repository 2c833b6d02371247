#include <secretsniff/error.hpp>
#include <secretsniff/secret_source.hpp>

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <unordered_set>

namespace secretsniff {

using nlohmann::json;

namespace {

std::string
describe_entry(std::size_t index, const std::string& id)
{
  std::string out = "entry " + std::to_string(index);
  if (!id.empty()) {
    out += " (id \"" + id + "\")";
  }
  return out;
}

void
validate(const std::vector<Secret>& secrets)
{
  std::unordered_set<std::string_view> seen;
  for (std::size_t i = 0; i < secrets.size(); ++i) {
    const auto& s = secrets[i];
    if (s.id.empty()) {
      throw SecretStoreError(describe_entry(i, s.id) + ": empty id");
    }
    if (s.value.empty()) {
      throw SecretStoreError(describe_entry(i, s.id) + ": empty value");
    }
    if (s.value.find_first_of("\r\n") != std::string::npos) {
      throw SecretStoreError(describe_entry(i, s.id)
                             + ": value contains a line break");
    }
    if (!seen.insert(s.id).second) {
      throw SecretStoreError(describe_entry(i, s.id) + ": duplicate id \""
                             + s.id + "\"");
    }
  }
}

} // namespace

SecretStore::SecretStore(std::vector<Secret> secrets,
                         std::string source_label,
                         Clock::time_point loaded_at)
  : secrets_(std::move(secrets)),
    source_label_(std::move(source_label)),
    loaded_at_(loaded_at)
{
  validate(secrets_);
}

const Secret*
SecretStore::find(std::string_view id) const
{
  for (const auto& s : secrets_) {
    if (s.id == id) {
      return &s;
    }
  }
  return nullptr;
}

SecretStore
parse_secret_store(std::string_view document, std::string source_label)
{
  json root;
  try {
    root = json::parse(document);
  } catch (const json::parse_error& e) {
    // The library message quotes surrounding input, which may be a secret.
    throw SecretStoreError(source_label + ": malformed JSON at byte "
                           + std::to_string(e.byte));
  }

  if (!root.is_object()) {
    throw SecretStoreError(source_label + ": top level must be an object");
  }
  for (const auto& [key, _] : root.items()) {
    if (key != "secrets") {
      throw SecretStoreError(source_label + ": unknown key \"" + key + "\"");
    }
  }
  const auto it = root.find("secrets");
  if (it == root.end() || !it->is_array()) {
    throw SecretStoreError(source_label + ": \"secrets\" must be an array");
  }

  std::vector<Secret> secrets;
  secrets.reserve(it->size());
  std::size_t index = 0;
  for (const auto& entry : *it) {
    Secret s;
    if (!entry.is_object()) {
      throw SecretStoreError(describe_entry(index, "") + ": not an object");
    }
    if (auto id = entry.find("id"); id != entry.end() && id->is_string()) {
      s.id = id->get<std::string>();
    }
    for (const auto& [key, value] : entry.items()) {
      if (key == "id") {
        if (!value.is_string()) {
          throw SecretStoreError(describe_entry(index, "")
                                 + ": \"id\" must be a string");
        }
      } else if (key == "value") {
        if (!value.is_string()) {
          throw SecretStoreError(describe_entry(index, s.id)
                                 + ": \"value\" must be a string");
        }
        s.value = value.get<std::string>();
      } else if (key == "tags") {
        if (!value.is_array()) {
          throw SecretStoreError(describe_entry(index, s.id)
                                 + ": \"tags\" must be an array");
        }
        for (const auto& tag : value) {
          if (!tag.is_string()) {
            throw SecretStoreError(describe_entry(index, s.id)
                                   + ": tags must be strings");
          }
          s.tags.push_back(tag.get<std::string>());
        }
      } else {
        throw SecretStoreError(describe_entry(index, s.id) + ": unknown key \""
                               + key + "\"");
      }
    }
    if (entry.find("id") == entry.end()) {
      throw SecretStoreError(describe_entry(index, "") + ": missing \"id\"");
    }
    if (entry.find("value") == entry.end()) {
      throw SecretStoreError(describe_entry(index, s.id)
                             + ": missing \"value\"");
    }
    secrets.push_back(std::move(s));
    ++index;
  }

  try {
    return SecretStore(std::move(secrets), std::move(source_label));
  } catch (const SecretStoreError& e) {
    throw SecretStoreError(source_label + ": " + e.what());
  }
}

SecretStore
load_secrets(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw SecretStoreError("cannot read secret store " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) {
    throw SecretStoreError("error reading secret store " + path.string());
  }
  return parse_secret_store(buf.str(), path.string());
}

FileSecretSource::FileSecretSource(std::filesystem::path path)
  : path_(std::move(path))
{
}

SecretStore
FileSecretSource::load() const
{
  return load_secrets(path_);
}

std::string
FileSecretSource::label() const
{
  return "file:" + path_.string();
}

FilteredStore
filter_by_min_length(const SecretStore& store, std::size_t min_len)
{
  std::vector<Secret> kept;
  std::vector<std::string> excluded;
  for (const auto& s : store.secrets()) {
    if (s.value.size() >= min_len) {
      kept.push_back(s);
    } else {
      excluded.push_back(s.id);
    }
  }
  return {SecretStore(std::move(kept), store.source_label(), store.loaded_at()),
          std::move(excluded)};
}

} // namespace secretsniff

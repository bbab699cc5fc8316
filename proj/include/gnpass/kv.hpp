#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace gnpass::kv {

// Ordered key=value record. Manifests, sidecars and config files all use this
// line format: one `key=value` per line, '#' starts a comment line, blank
// lines ignored. Writing preserves insertion order so files are reproducible.
class Record {
 public:
  void set(std::string key, std::string value);
  std::optional<std::string> get(std::string_view key) const;
  // DataError when the key is absent.
  std::string require(std::string_view key) const;
  bool contains(std::string_view key) const { return get(key).has_value(); }

  const std::vector<std::pair<std::string, std::string>>& items() const { return items_; }
  std::string to_string() const;

 private:
  std::vector<std::pair<std::string, std::string>> items_;
};

// DataError on missing file or a line without '='.
Record read_file(const std::filesystem::path& path);

// Atomic: writes to a temp file in the same directory, then renames.
void write_file(const std::filesystem::path& path, const Record& record);

}  // namespace gnpass::kv

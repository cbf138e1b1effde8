#pragma once

// Byte-stable text output: every double goes through format_double (%.17g),
// files are written to a temporary sibling and renamed into place.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace ctflow {

/// %.17g; non-finite values print as nan / inf / -inf.
std::string format_double(double value);

/// Writes `content` to `path` through `path.tmp` + rename.
void write_atomic(const std::filesystem::path& path, const std::string& content);

using JsonValue = std::variant<std::nullptr_t, bool, std::int64_t, double, std::string>;
using JsonObject = std::vector<std::pair<std::string, JsonValue>>;

/// One flat JSON object, keys in the given order. Non-finite doubles become null.
std::string to_json(const JsonObject& object);

inline JsonValue json_number(std::optional<double> v) {
  if (!v) return nullptr;
  return *v;
}

/// Builds a CSV document: `# key = value` comment lines, then the header row.
class CsvDocument {
 public:
  CsvDocument(const std::vector<std::pair<std::string, std::string>>& echo,
              const std::vector<std::string>& columns);

  CsvDocument& cell(double value);
  CsvDocument& cell(std::size_t value);
  CsvDocument& cell(const std::string& value);
  CsvDocument& empty_cell();
  void end_row();

  const std::string& str() const { return text_; }

 private:
  void separator();

  std::string text_;
  bool row_started_ = false;
};

}  // namespace ctflow

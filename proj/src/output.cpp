#include "ctflow/output.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace ctflow {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

namespace {

std::string escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  out += '"';
  for (char c : s) {
    switch (c) {
      case '"':
        out += "\\\"";
        break;
      case '\\':
        out += "\\\\";
        break;
      case '\n':
        out += "\\n";
        break;
      case '\t':
        out += "\\t";
        break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += '"';
  return out;
}

struct ValueText {
  std::string operator()(std::nullptr_t) const { return "null"; }
  std::string operator()(bool b) const { return b ? "true" : "false"; }
  std::string operator()(std::int64_t i) const { return std::to_string(i); }
  std::string operator()(double d) const { return std::isfinite(d) ? format_double(d) : "null"; }
  std::string operator()(const std::string& s) const { return escape(s); }
};

}  // namespace

std::string to_json(const JsonObject& object) {
  std::string out = "{";
  bool first = true;
  for (const auto& [key, value] : object) {
    if (!first) out += ",";
    first = false;
    out += "\n  " + escape(key) + ": " + std::visit(ValueText{}, value);
  }
  out += object.empty() ? "}\n" : "\n}\n";
  return out;
}

CsvDocument::CsvDocument(const std::vector<std::pair<std::string, std::string>>& echo,
                         const std::vector<std::string>& columns) {
  for (const auto& [key, value] : echo) text_ += "# " + key + " = " + value + "\n";
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) text_ += ',';
    text_ += columns[i];
  }
  text_ += '\n';
}

void CsvDocument::separator() {
  if (row_started_) text_ += ',';
  row_started_ = true;
}

CsvDocument& CsvDocument::cell(double value) {
  separator();
  text_ += format_double(value);
  return *this;
}

CsvDocument& CsvDocument::cell(std::size_t value) {
  separator();
  text_ += std::to_string(value);
  return *this;
}

CsvDocument& CsvDocument::cell(const std::string& value) {
  separator();
  text_ += value;
  return *this;
}

CsvDocument& CsvDocument::empty_cell() {
  separator();
  return *this;
}

void CsvDocument::end_row() {
  text_ += '\n';
  row_started_ = false;
}

}  // namespace ctflow

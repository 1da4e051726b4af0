#pragma once

// Tabular sweep output and its CSV / JSON serializations.
//
// CSV layout:
//   # miisac sweep
//   # schema_version: 1
//   # <key>: <value>            one line per metadata key, config last as JSON
//   col_a,col_b,...             header, units in brackets
//   rows...                     absent values are empty cells

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <variant>
#include <vector>

#include "json.hpp"
#include "miisac/errors.hpp"

namespace miisac {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

using Cell = std::variant<std::monostate, double, std::int64_t, std::string>;

struct SweepResult {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  nlohmann::ordered_json metadata = nlohmann::ordered_json::object();

  int singular_rows = 0;
  int convergence_breaches = 0;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return i;
    throw std::out_of_range("no column '" + name + "'");
  }
};

/// Shortest round-trip decimal form; deterministic across runs.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string format_cell(const Cell& c) {
  struct Visitor {
    std::string operator()(std::monostate) const { return {}; }
    std::string operator()(double v) const { return format_double(v); }
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(const std::string& s) const {
      if (s.find_first_of(",\"\n") == std::string::npos) return s;
      std::string out = "\"";
      for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
      }
      return out + '"';
    }
  };
  return std::visit(Visitor{}, c);
}

inline std::string csv_body(const SweepResult& res) {
  std::string out;
  for (std::size_t i = 0; i < res.columns.size(); ++i) {
    if (i) out += ',';
    out += res.columns[i];
  }
  out += '\n';
  for (const auto& row : res.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_cell(row[i]);
    }
    out += '\n';
  }
  return out;
}

inline std::string to_csv(const SweepResult& res) {
  std::ostringstream os;
  os << "# miisac sweep\n";
  for (const auto& [key, value] : res.metadata.items())
    os << "# " << key << ": " << (value.is_string() ? value.get<std::string>() : value.dump()) << '\n';
  os << csv_body(res);
  return os.str();
}

inline std::string to_json_text(const SweepResult& res) {
  nlohmann::ordered_json doc;
  doc["metadata"] = res.metadata;
  doc["columns"] = res.columns;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& row : res.rows) {
    nlohmann::ordered_json obj;
    for (std::size_t i = 0; i < row.size(); ++i) {
      const auto& c = row[i];
      if (std::holds_alternative<double>(c))
        obj[res.columns[i]] = std::get<double>(c);
      else if (std::holds_alternative<std::int64_t>(c))
        obj[res.columns[i]] = std::get<std::int64_t>(c);
      else if (std::holds_alternative<std::string>(c))
        obj[res.columns[i]] = std::get<std::string>(c);
      else
        obj[res.columns[i]] = nullptr;
    }
    rows.push_back(std::move(obj));
  }
  doc["rows"] = std::move(rows);
  return doc.dump(2) + "\n";
}

/// Writes `text` to `path` through a sibling temporary and a rename, so a
/// reader never observes a partial file.
inline void write_atomically(const std::filesystem::path& path, const std::string& text) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << text;
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp);
      throw std::runtime_error("write failed for " + tmp.string());
    }
  }
  fs::rename(tmp, path);
}

enum class OutputFormat { csv, json };

inline void write_result(const SweepResult& res, const std::filesystem::path& path,
                         OutputFormat fmt = OutputFormat::csv) {
  write_atomically(path, fmt == OutputFormat::csv ? to_csv(res) : to_json_text(res));
}

/// Extracts the JSON config line from a CSV preamble; empty when absent.
inline std::string config_from_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  const std::string tag = "# config: ";
  while (std::getline(is, line)) {
    if (!line.starts_with("#")) break;
    if (line.starts_with(tag)) return line.substr(tag.size());
  }
  return {};
}

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  static constexpr char digits[] = "0123456789abcdef";
  for (int i = 15; i >= 0; --i) {
    buf[i] = digits[v & 0xf];
    v >>= 4;
  }
  buf[16] = '\0';
  return buf;
}

}  // namespace miisac

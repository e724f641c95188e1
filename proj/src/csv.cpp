#include "atlas/csv.hpp"

#include <charconv>
#include <cmath>

#include "atlas/error.hpp"

namespace atlas {

ReplayError::ReplayError(std::vector<std::string> missing)
    : Error([&] {
        std::string msg = "offline replay: " + std::to_string(missing.size()) +
                          " quer" + (missing.size() == 1 ? "y" : "ies") + " missing from cache";
        for (const auto& q : missing) msg += "\n  " + (q.empty() ? std::string("<total catalogue>") : q);
        return msg;
      }()),
      missing_(std::move(missing)) {}

namespace csv {

std::vector<std::string> split_line(std::string_view line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  bool field_was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current.push_back(c);
      }
    } else if (c == '"') {
      if (!current.empty() || field_was_quoted) throw ParseError(line_no, "stray quote inside field");
      quoted = true;
      field_was_quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
      field_was_quoted = false;
    } else {
      if (field_was_quoted) throw ParseError(line_no, "text after closing quote");
      current.push_back(c);
    }
  }
  if (quoted) throw ParseError(line_no, "unterminated quoted field");
  fields.push_back(std::move(current));
  return fields;
}

namespace {

void strip_cr(std::string& s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
}

}  // namespace

Reader::Reader(std::istream& in, std::string_view header) : in_(in) {
  std::string first;
  if (!std::getline(in_, first)) throw ParseError(1, "missing header, expected '" + std::string(header) + "'");
  strip_cr(first);
  if (first.rfind("\xEF\xBB\xBF", 0) == 0) first.erase(0, 3);
  if (first != header) {
    throw ParseError(1, "unexpected header '" + first + "', expected '" + std::string(header) + "'");
  }
  columns_ = split_line(header, 1).size();
}

std::optional<Row> Reader::next() {
  std::string text;
  while (std::getline(in_, text)) {
    ++line_;
    strip_cr(text);
    if (text.find_first_not_of(" \t") == std::string::npos) continue;
    Row row{line_, split_line(text, line_)};
    if (row.fields.size() != columns_) {
      throw ParseError(line_, "expected " + std::to_string(columns_) + " fields, found " +
                                  std::to_string(row.fields.size()));
    }
    return row;
  }
  return std::nullopt;
}

std::string quote(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string format_double(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, end);
}

double parse_double(std::string_view text, std::size_t line_no) {
  double value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value)) {
    throw ParseError(line_no, "not a number: '" + std::string(text) + "'");
  }
  return value;
}

long long parse_int(std::string_view text, std::size_t line_no) {
  long long value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ParseError(line_no, "not an integer: '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace csv
}  // namespace atlas

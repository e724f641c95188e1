#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace atlas::csv {

// One physical line split into fields. Quoted fields may contain commas and
// doubled quotes ("") but not line breaks.
struct Row {
  std::size_t line = 0;  // 1-based, header is line 1
  std::vector<std::string> fields;
};

std::vector<std::string> split_line(std::string_view line, std::size_t line_no);

// Reads a CSV document whose first line must equal `header` exactly (after a
// UTF-8 BOM and trailing CR are stripped). Blank lines are skipped.
class Reader {
 public:
  Reader(std::istream& in, std::string_view header);
  std::optional<Row> next();

 private:
  std::istream& in_;
  std::size_t line_ = 1;
  std::size_t columns_ = 0;
};

std::string quote(std::string_view field);

// Shortest decimal form that parses back to the same double.
std::string format_double(double value);
double parse_double(std::string_view text, std::size_t line_no);
long long parse_int(std::string_view text, std::size_t line_no);

}  // namespace atlas::csv

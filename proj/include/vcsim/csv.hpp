#pragma once

#include <cstddef>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

// Minimal CSV plumbing shared by the trace, RSU, delay-file and records
// formats. Fields never contain commas or quotes, so no quoting is handled.
namespace vcsim::csv {

std::vector<std::string_view> split(std::string_view line, char sep = ',');

/// Strips a trailing '\r' and surrounding blanks.
std::string_view trim(std::string_view s);

/// Parses a finite double; throws ParseError mentioning `line` and `field`.
double to_double(std::string_view s, std::size_t line, std::string_view field);
long long to_int(std::string_view s, std::size_t line, std::string_view field);

/// Shortest representation that parses back to the same double.
std::string shortest(double v);

/// Fixed notation with `digits` fractional digits.
std::string fixed(double v, int digits);

/// Reads lines, tracking 1-based line numbers.
class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}
  bool next(std::string& line);
  std::size_t line_no() const { return line_no_; }

 private:
  std::istream& in_;
  std::size_t line_no_ = 0;
};

/// Consumes the header line and checks it equals `expected`.
void expect_header(LineReader& reader, std::string_view expected);

}  // namespace vcsim::csv

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace metarec::csv {

using Record = std::vector<std::string>;

/// Parses comma-delimited text with RFC 4180 quoting. Blank lines are skipped.
/// Throws ParseError on an unterminated quote.
std::vector<Record> parse(std::string_view text);

/// Reads and parses a whole file. Throws ParseError if it cannot be opened.
std::vector<Record> read_file(const std::string& path);

/// Quotes a field only when it contains a delimiter, quote, or line break.
std::string escape(std::string_view field);

/// Joins escaped fields with commas (no trailing newline).
std::string join(const Record& fields);

/// Shortest decimal text that parses back to exactly the same double.
std::string format_double(double value);

/// Strict full-string number parse; nullopt unless the whole text is a finite number.
std::optional<double> parse_double(std::string_view text);

std::optional<long long> parse_int(std::string_view text);

}  // namespace metarec::csv

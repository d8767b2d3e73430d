#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace engagelab::csv {

using Row = std::vector<std::string>;

/// RFC-4180 reader: comma separated, CRLF or LF line ends, double-quoted
/// fields may hold commas, line breaks, and "" escapes. Throws
/// std::invalid_argument on an unterminated quote or stray quote.
std::vector<Row> parse(std::string_view text);

std::string quote(std::string_view field);
std::string format_row(const Row& row);

}  // namespace engagelab::csv

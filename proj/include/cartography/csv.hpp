#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace cartography::csv {

// Quotes a field only when it contains a comma, quote, CR or LF.
std::string escape(std::string_view field);

// Fixed 9-decimal rendering of a real; negative zero prints as zero.
std::string real(double v);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

// RFC 4180 reader. Rows keep their field order; a trailing newline is optional.
std::vector<std::vector<std::string>> parse(std::istream& in);

}  // namespace cartography::csv

#pragma once

#include <initializer_list>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>

namespace edlab {

/// Shortest decimal text that round-trips to the same double ('.' separator,
/// locale independent). Used for every number the library writes to disk so
/// output files are byte-stable.
std::string format_number(double value);

/// Comma-separated row terminated by '\n'.
void write_csv_row(std::ostream& os, std::span<double const> values);
void write_csv_header(std::ostream& os, std::initializer_list<std::string_view> names);

}  // namespace edlab

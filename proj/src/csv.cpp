#include "edlab/csv.hpp"

#include <array>
#include <charconv>
#include <ostream>

namespace edlab {

std::string format_number(double value)
{
    std::array<char, 32> buf{};
    auto const res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), res.ptr);
}

void write_csv_row(std::ostream& os, std::span<double const> values)
{
    for (std::size_t i = 0; i < values.size(); ++i)
    {
        if (i)
            os << ',';
        os << format_number(values[i]);
    }
    os << '\n';
}

void write_csv_header(std::ostream& os, std::initializer_list<std::string_view> names)
{
    bool first = true;
    for (auto name : names)
    {
        if (!first)
            os << ',';
        os << name;
        first = false;
    }
    os << '\n';
}

}  // namespace edlab

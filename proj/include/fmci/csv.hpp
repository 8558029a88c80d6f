#pragma once

// Minimal locale-independent CSV output.

#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace fmci::csv {

// Shortest round-trip decimal form; "inf", "-inf" and "nan" otherwise.
std::string field(double v);
std::string field(std::uint64_t v);
std::string field(bool v);
// Quoted when it contains a comma, quote or newline.
std::string field(std::string_view v);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace fmci::csv

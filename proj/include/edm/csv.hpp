#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace edm::csv {

// Parsed CSV with a mandatory header row. Row numbers reported in errors are
// 1-based file lines (header = line 1).
struct Table {
    std::string origin;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // -1 when the column is absent
    int column(const std::string& name) const;
    // throws when the column is absent, naming the file
    int require(const std::string& name) const;
};

Table read_file(const std::string& path);
Table parse(std::istream& in, const std::string& origin);

std::string escape(const std::string& field);
void write_row(std::ostream& out, const std::vector<std::string>& fields);

// shortest decimal form that round-trips; integers print without a fraction
std::string format_number(double v);

} // namespace edm::csv

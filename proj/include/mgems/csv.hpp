#pragma once

#include <istream>
#include <string>
#include <vector>

namespace mgems::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const;  // -1 if absent
};

/// Parses comma-separated text. First line is treated as a header when
/// `has_header` is set; blank lines and lines starting with '#' are skipped.
Table parse(std::istream& in, bool has_header = true);
Table parse_string(const std::string& text, bool has_header = true);
Table parse_file(const std::string& path, bool has_header = true);

double to_double(const std::string& field, const std::string& context);
long to_long(const std::string& field, const std::string& context);

}  // namespace mgems::csv

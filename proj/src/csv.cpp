#include "mgems/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mgems::csv {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    for (char c : line) {
        if (c == ',') {
            out.push_back(field);
            field.clear();
        } else if (c != '\r') {
            field += c;
        }
    }
    out.push_back(field);
    for (auto& f : out) {
        const auto a = f.find_first_not_of(" \t");
        const auto b = f.find_last_not_of(" \t");
        f = (a == std::string::npos) ? std::string{} : f.substr(a, b - a + 1);
    }
    return out;
}

}  // namespace

int Table::column(const std::string& name) const {
    for (size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

Table parse(std::istream& in, bool has_header) {
    Table t;
    std::string line;
    bool header_done = !has_header;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto fields = split_line(line);
        if (!header_done) {
            t.header = std::move(fields);
            header_done = true;
        } else {
            t.rows.push_back(std::move(fields));
        }
    }
    return t;
}

Table parse_string(const std::string& text, bool has_header) {
    std::istringstream in(text);
    return parse(in, has_header);
}

Table parse_file(const std::string& path, bool has_header) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open CSV file: " + path);
    return parse(in, has_header);
}

double to_double(const std::string& field, const std::string& context) {
    try {
        size_t pos = 0;
        double v = std::stod(field, &pos);
        if (pos != field.size()) throw std::invalid_argument(field);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("bad numeric field '" + field + "' in " + context);
    }
}

long to_long(const std::string& field, const std::string& context) {
    try {
        size_t pos = 0;
        long v = std::stol(field, &pos);
        if (pos != field.size()) throw std::invalid_argument(field);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("bad integer field '" + field + "' in " + context);
    }
}

}  // namespace mgems::csv

#include "survmine/csv.hpp"

#include <algorithm>

namespace survmine {

std::vector<std::string> split_fields(const std::string& line, char delimiter) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(delimiter, start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    // Strip a trailing carriage return from files with CRLF endings.
    if (!out.empty() && !out.back().empty() && out.back().back() == '\r') {
        out.back().pop_back();
    }
    return out;
}

void load_delimited(
    std::istream& in, char delimiter, const std::vector<std::string>& required_columns,
    std::vector<RowError>& row_errors,
    const std::function<void(std::size_t, const std::vector<std::string>&,
                             const std::vector<std::size_t>&)>& on_row) {
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw SchemaError("input is empty, expected a header row");
    ++line_no;
    const auto header = split_fields(line, delimiter);

    std::vector<std::size_t> indices;
    indices.reserve(required_columns.size());
    for (const auto& name : required_columns) {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) {
            throw SchemaError("required column '" + name + "' not found in header");
        }
        indices.push_back(static_cast<std::size_t>(it - header.begin()));
    }

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto fields = split_fields(line, delimiter);
        if (fields.size() != header.size()) {
            row_errors.push_back({line_no, "expected " + std::to_string(header.size()) +
                                               " fields, got " +
                                               std::to_string(fields.size())});
            continue;
        }
        on_row(line_no, fields, indices);
    }
}

}  // namespace survmine

#pragma once

#include <cstddef>
#include <functional>
#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

namespace survmine {

// Fatal: empty input or a required column missing from the header.
class SchemaError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct RowError {
    std::size_t line;  // 1-based physical line number in the input
    std::string message;
};

std::vector<std::string> split_fields(const std::string& line, char delimiter);

// Streams a delimiter-separated file with a header row. Resolves
// `required_columns` to indices (throwing SchemaError when absent), then
// calls on_row(line_number, fields, indices) for every data row. Rows with
// the wrong field count are recorded in row_errors and skipped, as are
// blank lines. Input files are plain UTF-8 with no quoting layer; fields
// never contain the delimiter.
void load_delimited(
    std::istream& in, char delimiter, const std::vector<std::string>& required_columns,
    std::vector<RowError>& row_errors,
    const std::function<void(std::size_t, const std::vector<std::string>&,
                             const std::vector<std::size_t>&)>& on_row);

}  // namespace survmine

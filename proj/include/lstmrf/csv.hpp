#pragma once

#include <string>
#include <vector>

namespace lstmrf::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Index of a header column, -1 when absent.
    int column_index(const std::string& name) const;
};

/// Reads a comma-separated file with a header row. Lines starting with '#'
/// and blank lines are skipped; a UTF-8 BOM on the first line is stripped.
/// Fields are trimmed of surrounding whitespace. Quoting is not supported.
Table read_file(const std::string& path);

/// Writes one CSV row, joining cells with commas.
std::string join_row(const std::vector<std::string>& cells);

/// Formats a double so that parsing the text recovers the exact same value.
std::string format_double(double v);

/// Returns true and sets `out` when the cell parses as a finite double.
bool parse_double(const std::string& cell, double& out);

/// Cells treated as missing: empty, "na", "nan", "null" (case-insensitive).
bool is_missing(const std::string& cell);

} // namespace lstmrf::csv

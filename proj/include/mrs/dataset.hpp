#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace mrs {

// n x p matrix of nonnegative integer counts, stored column-major.
struct Dataset {
    std::vector<std::string> columns;
    std::vector<std::vector<std::int64_t>> values;  // values[col][row]

    int p() const { return static_cast<int>(columns.size()); }
    std::int64_t n() const { return values.empty() ? 0 : static_cast<std::int64_t>(values[0].size()); }

    // Rectangular, entries >= 0, one name per column.
    void validate() const;
};

// Dataset CSV: one header line of comma-separated column names, then rows of
// nonnegative decimal integers; no quoting, LF line endings.
Dataset read_dataset_csv(const std::string& path);
void write_dataset_csv(const Dataset& data, const std::string& path);

// Loader for third-party CSVs: drops the named columns, then requires every
// remaining cell to be a nonnegative integer (errors carry row/column
// coordinates). Unknown drop names produce a warning on `warnings`.
// Surrounding double quotes and whitespace on fields are tolerated.
Dataset ingest_real_csv(const std::string& path, const std::vector<std::string>& drop_columns,
                        std::ostream* warnings = nullptr);

}  // namespace mrs

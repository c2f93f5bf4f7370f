#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>

#include "kmodels/series.hpp"

namespace kmodels::cli {

/// A file could not be opened or written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class CsvFormat { Wide, Long };

CsvFormat parse_format(const std::string& name);
const char* to_string(CsvFormat format);

struct Ingested {
    Dataset data;
    /// id -> label, filled only when a label column was requested.
    std::map<std::string, std::string> labels;
};

/**
 * Wide: one row per series, first cell the id, then observations. Trailing blank cells
 * pad unequal lengths; an interior blank is an error. A first row whose first cell is
 * "id" is a header, and `label_column` names one of its columns.
 *
 * Long: rows id,t,value (optional header, optional label column) with t strictly
 * increasing within each id. Series appear in order of first occurrence.
 *
 * Errors carry the 1-based line number.
 */
Ingested read_csv(std::istream& in, CsvFormat format, const std::optional<std::string>& label_column = {});
Ingested read_csv_file(const std::string& path, CsvFormat format,
                       const std::optional<std::string>& label_column = {});

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

void write_csv(std::ostream& out, const Dataset& data, CsvFormat format,
               const std::map<std::string, std::string>& labels = {});

}  // namespace kmodels::cli

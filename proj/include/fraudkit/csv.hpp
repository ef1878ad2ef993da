#pragma once

#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace fraudkit {

/// Streaming CSV reader. Handles quoted fields with embedded commas,
/// escaped quotes ("") and newlines, and both LF and CRLF line endings.
class CsvReader {
public:
    explicit CsvReader(std::istream& in) : in_(in) {}

    /// Reads the next record into `fields`. Returns false at end of input.
    bool next(std::vector<std::string>& fields);

    /// 1-based number of the record most recently returned.
    int record_number() const { return record_; }

private:
    std::istream& in_;
    int record_ = 0;
};

/// Quotes a field if it contains a comma, quote, or newline.
std::string csv_escape(std::string_view field);

/// Joins fields into one CSV line (no trailing newline).
std::string csv_join(const std::vector<std::string>& fields);

}  // namespace fraudkit

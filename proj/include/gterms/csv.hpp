#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace gterms::csv {

// One logical CSV record. `line` is the 1-based physical line on which the
// record starts; quoted fields may span several physical lines.
struct Row {
    std::size_t line = 0;
    std::vector<std::string> fields;
};

// RFC-4180 reader. Accepts LF and CRLF line endings, quoted fields with
// embedded separators, newlines and doubled quotes. A UTF-8 BOM at the start
// of input is skipped.
class Reader {
public:
    explicit Reader(std::istream& in, char separator = ',');

    // Returns std::nullopt at end of input. Throws DataError on an
    // unterminated quoted field.
    std::optional<Row> next();

private:
    std::istream& in_;
    char sep_;
    std::size_t line_ = 1;
    bool first_ = true;
};

std::vector<Row> read_all(std::istream& in, char separator = ',');

// Quotes a field only when it contains the separator, a quote, CR or LF.
std::string escape(std::string_view field, char separator = ',');

void write_row(std::ostream& out, const std::vector<std::string>& fields, char separator = ',');

std::string trim(std::string_view s);

std::vector<std::string> split(std::string_view s, char delimiter);

}  // namespace gterms::csv

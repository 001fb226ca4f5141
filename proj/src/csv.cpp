#include "gterms/csv.hpp"

#include "gterms/error.hpp"

#include <cctype>

namespace gterms::csv {

Reader::Reader(std::istream& in, char separator) : in_(in), sep_(separator) {}

std::optional<Row> Reader::next() {
    if (first_) {
        first_ = false;
        if (in_.peek() == 0xEF) {
            char bom[3];
            in_.read(bom, 3);
            if (!(static_cast<unsigned char>(bom[1]) == 0xBB && static_cast<unsigned char>(bom[2]) == 0xBF)) {
                in_.clear();
                in_.seekg(0);
            }
        }
    }
    if (in_.peek() == std::char_traits<char>::eof()) return std::nullopt;

    Row row;
    row.line = line_;
    std::string field;
    bool in_quotes = false;
    bool was_quoted = false;
    int ch;
    while ((ch = in_.get()) != std::char_traits<char>::eof()) {
        const char c = static_cast<char>(ch);
        if (in_quotes) {
            if (c == '"') {
                if (in_.peek() == '"') {
                    in_.get();
                    field.push_back('"');
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line_;
                field.push_back(c);
            }
            continue;
        }
        if (c == '"' && field.empty() && !was_quoted) {
            in_quotes = true;
            was_quoted = true;
        } else if (c == sep_) {
            row.fields.push_back(std::move(field));
            field.clear();
            was_quoted = false;
        } else if (c == '\r' && in_.peek() == '\n') {
            // CRLF: the LF ends the record on the next iteration.
        } else if (c == '\n') {
            ++line_;
            row.fields.push_back(std::move(field));
            return row;
        } else {
            field.push_back(c);
        }
    }
    if (in_quotes) {
        throw DataError("unterminated quoted field starting on line " + std::to_string(row.line));
    }
    row.fields.push_back(std::move(field));
    return row;
}

std::vector<Row> read_all(std::istream& in, char separator) {
    Reader reader(in, separator);
    std::vector<Row> rows;
    while (auto row = reader.next()) rows.push_back(std::move(*row));
    return rows;
}

std::string escape(std::string_view field, char separator) {
    const bool needs_quotes = field.find_first_of(std::string{separator, '"', '\r', '\n'}) != std::string_view::npos;
    if (!needs_quotes) return std::string(field);
    std::string out;
    out.reserve(field.size() + 2);
    out.push_back('"');
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields, char separator) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out << separator;
        out << escape(fields[i], separator);
    }
    out << '\n';
}

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::vector<std::string> split(std::string_view s, char delimiter) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(delimiter, start);
        std::string piece = trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (!piece.empty()) parts.push_back(std::move(piece));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

}  // namespace gterms::csv

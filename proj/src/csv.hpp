// Copyright (C) 2026 The claimstage Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <istream>
#include <string>
#include <vector>

namespace claimstage::detail {

// RFC 4180 reader: quoted fields may span lines, "" escapes a quote.
class CsvReader {
public:
    explicit CsvReader(std::istream& in, char delimiter = ',') : in_(in), delimiter_(delimiter) {}

    // Returns false at end of input. Blank lines are skipped.
    bool next(std::vector<std::string>& fields);

    // 1-based physical line on which the last returned record started.
    std::size_t line() const noexcept { return record_line_; }

private:
    std::istream& in_;
    char delimiter_;
    std::size_t current_line_ = 1;
    std::size_t record_line_ = 0;
    bool first_ = true;
};

inline bool CsvReader::next(std::vector<std::string>& fields) {
    for (;;) {
        fields.clear();
        if (in_.peek() == std::char_traits<char>::eof()) {
            return false;
        }
        if (first_) {
            first_ = false;
            // UTF-8 byte order mark
            if (in_.peek() == 0xEF) {
                char bom[3];
                in_.read(bom, 3);
                if (!(static_cast<unsigned char>(bom[1]) == 0xBB &&
                      static_cast<unsigned char>(bom[2]) == 0xBF)) {
                    for (int i = 2; i >= 0; --i) in_.putback(bom[i]);
                }
            }
        }
        record_line_ = current_line_;
        std::string field;
        bool quoted = false;
        bool field_was_quoted = false;
        bool any = false;
        int c;
        while ((c = in_.get()) != std::char_traits<char>::eof()) {
            any = true;
            const char ch = static_cast<char>(c);
            if (quoted) {
                if (ch == '"') {
                    if (in_.peek() == '"') {
                        in_.get();
                        field.push_back('"');
                    } else {
                        quoted = false;
                    }
                } else {
                    if (ch == '\n') ++current_line_;
                    field.push_back(ch);
                }
                continue;
            }
            if (ch == '"' && field.empty() && !field_was_quoted) {
                quoted = true;
                field_was_quoted = true;
            } else if (ch == delimiter_) {
                fields.push_back(std::move(field));
                field.clear();
                field_was_quoted = false;
            } else if (ch == '\n') {
                ++current_line_;
                break;
            } else if (ch == '\r' && in_.peek() == '\n') {
                // swallowed; the '\n' ends the record
            } else {
                field.push_back(ch);
            }
        }
        if (!any) return false;
        fields.push_back(std::move(field));
        if (fields.size() == 1 && fields[0].empty() && !field_was_quoted) {
            continue;
        }
        return true;
    }
}

}  // namespace claimstage::detail

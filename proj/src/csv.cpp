#include "fraudkit/csv.hpp"

namespace fraudkit {

bool CsvReader::next(std::vector<std::string>& fields) {
    fields.clear();
    int c = in_.get();
    if (c == EOF) return false;

    std::string field;
    bool quoted = false;
    bool any = false;
    while (true) {
        if (quoted) {
            if (c == EOF) break;  // unterminated quote: take what we have
            if (c == '"') {
                int peek = in_.peek();
                if (peek == '"') {
                    in_.get();
                    field.push_back('"');
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(char(c));
            }
        } else {
            if (c == EOF || c == '\n') break;
            if (c == '\r') {
                if (in_.peek() == '\n') in_.get();
                break;
            }
            if (c == '"' && field.empty() && !any) {
                quoted = true;
                any = true;
            } else if (c == ',') {
                fields.push_back(std::move(field));
                field.clear();
                any = false;
            } else {
                field.push_back(char(c));
                any = true;
            }
        }
        c = in_.get();
    }
    fields.push_back(std::move(field));
    ++record_;
    return true;
}

std::string csv_escape(std::string_view field) {
    bool needs = field.find_first_of(",\"\r\n") != std::string_view::npos;
    if (!needs) return std::string(field);
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

std::string csv_join(const std::vector<std::string>& fields) {
    std::string out;
    for (size_t i = 0; i < fields.size(); ++i) {
        if (i) out.push_back(',');
        out += csv_escape(fields[i]);
    }
    return out;
}

}  // namespace fraudkit

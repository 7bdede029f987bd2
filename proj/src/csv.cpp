#include "edm/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace edm::csv {

int Table::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

int Table::require(const std::string& name) const {
    const int i = column(name);
    if (i < 0)
        throw std::runtime_error(origin + ": missing required column '" + name + "'");
    return i;
}

namespace {

// RFC-4180 style: quoted fields may contain commas, quotes (doubled) and
// newlines. Returns false at end of input.
bool parse_record(std::istream& in, std::vector<std::string>& out, int& line_no) {
    out.clear();
    if (in.peek() == EOF) return false;
    std::string field;
    bool quoted = false;
    bool any = false;
    for (;;) {
        const int ci = in.get();
        if (ci == EOF) {
            if (!any && field.empty() && out.empty()) return false;
            out.push_back(field);
            return true;
        }
        const char c = static_cast<char>(ci);
        any = true;
        if (quoted) {
            if (c == '"') {
                if (in.peek() == '"') {
                    field.push_back('"');
                    in.get();
                } else {
                    quoted = false;
                }
            } else {
                if (c == '\n') ++line_no;
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
        case '"':
            quoted = true;
            break;
        case ',':
            out.push_back(field);
            field.clear();
            break;
        case '\r':
            if (in.peek() == '\n') in.get();
            ++line_no;
            out.push_back(field);
            return true;
        case '\n':
            ++line_no;
            out.push_back(field);
            return true;
        default:
            field.push_back(c);
        }
    }
}

} // namespace

Table parse(std::istream& in, const std::string& origin) {
    Table t;
    t.origin = origin;
    int line = 1;
    if (!parse_record(in, t.header, line))
        throw std::runtime_error(origin + ": empty file, header row is mandatory");
    std::vector<std::string> rec;
    while (parse_record(in, rec, line)) {
        if (rec.size() == 1 && rec[0].empty()) continue; // trailing blank line
        if (rec.size() != t.header.size()) {
            std::ostringstream msg;
            msg << origin << ": row " << (t.rows.size() + 2) << " has " << rec.size()
                << " fields, header has " << t.header.size();
            throw std::runtime_error(msg.str());
        }
        t.rows.push_back(rec);
    }
    return t;
}

Table read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return parse(in, path);
}

std::string escape(const std::string& field) {
    bool needs = false;
    for (char c : field)
        if (c == ',' || c == '"' || c == '\n' || c == '\r') { needs = true; break; }
    if (!needs) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += '"';
    return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out << ',';
        out << escape(fields[i]);
    }
    out << '\n';
}

std::string format_number(double v) {
    if (std::isfinite(v) && v == std::floor(v) && std::fabs(v) < 1e15) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.0f", v);
        return buf;
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    // prefer the shortest representation that round-trips
    for (int prec = 1; prec < 17; ++prec) {
        char cand[40];
        std::snprintf(cand, sizeof cand, "%.*g", prec, v);
        if (std::strtod(cand, nullptr) == v) return cand;
    }
    return buf;
}

} // namespace edm::csv

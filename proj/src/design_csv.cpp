#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "hdoe/design.hpp"
#include "hdoe/error.hpp"

namespace hdoe {

namespace {

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string quote(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields(1);
    bool quoted = false;
    for (std::size_t t = 0; t < line.size(); ++t) {
        const char c = line[t];
        if (quoted) {
            if (c == '"') {
                if (t + 1 < line.size() && line[t + 1] == '"') {
                    fields.back() += '"';
                    ++t;
                } else {
                    quoted = false;
                }
            } else {
                fields.back() += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.emplace_back();
        } else if (c != '\r') {
            fields.back() += c;
        }
    }
    if (quoted) throw FormatError("unterminated quote in CSV line");
    return fields;
}

bool parse_number(const std::string& text, double& out) {
    if (text.empty()) return false;
    char* end = nullptr;
    out = std::strtod(text.c_str(), &end);
    return end == text.c_str() + text.size();
}

Cell parse_cell(const std::string& text, const FlatDimension& d, std::size_t line) {
    if (text.empty()) return Cell::null();
    auto fail = [&]() -> Cell {
        throw FormatError("line " + std::to_string(line) + ": cannot parse '" + text + "' for '" +
                          d.id + "'");
    };
    if (d.kind == DimKind::categorical) {
        for (std::size_t j = 0; j < d.labels.size(); ++j)
            if (d.labels[j] == text) return Cell::level(j);
        return fail();
    }
    double v = 0.0;
    if (!parse_number(text, v)) return fail();
    if (d.kind == DimKind::continuous) return Cell::real(v);
    for (std::size_t j = 0; j < d.values.size(); ++j)
        if (d.values[j] == v) return Cell::level(j);
    return fail();
}

}  // namespace

std::string format_cell(const Cell& cell, const FlatDimension& dim) {
    if (cell.is_null()) return {};
    if (cell.is_real()) return format_number(cell.value());
    if (dim.kind == DimKind::categorical) return dim.labels.at(cell.level_index());
    return format_number(dim.values.at(cell.level_index()));
}

void write_csv(const Design& x, std::ostream& out) {
    const FlatSpace& s = x.space();
    for (std::size_t k = 0; k < s.size(); ++k) out << (k ? "," : "") << quote(s.dim(k).id);
    out << '\n';
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t k = 0; k < s.size(); ++k)
            out << (k ? "," : "") << quote(format_cell(x.at(i, k), s.dim(k)));
        out << '\n';
    }
}

void write_csv(const Design& x, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    write_csv(x, out);
}

Design read_csv(std::istream& in, std::shared_ptr<const FlatSpace> space) {
    std::string line;
    if (!std::getline(in, line)) throw FormatError("empty CSV");
    const auto header = split_csv_line(line);
    if (header.size() != space->size()) throw FormatError("CSV header does not match space width");
    for (std::size_t k = 0; k < header.size(); ++k)
        if (header[k] != space->dim(k).id)
            throw FormatError("CSV column " + std::to_string(k + 1) + " is '" + header[k] +
                              "', expected '" + space->dim(k).id + "'");

    std::vector<Cell> cells;
    std::size_t rows = 0;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const auto fields = split_csv_line(line);
        if (fields.size() != space->size())
            throw FormatError("line " + std::to_string(line_no) + ": wrong field count");
        for (std::size_t k = 0; k < fields.size(); ++k)
            cells.push_back(parse_cell(fields[k], space->dim(k), line_no));
        ++rows;
    }
    return Design(std::move(space), rows, std::move(cells));
}

Design read_csv(const std::filesystem::path& path, std::shared_ptr<const FlatSpace> space) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path.string() + "'");
    return read_csv(in, std::move(space));
}

}  // namespace hdoe

#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

namespace qrv::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // -1 if absent
    int column(const std::string& name) const;
    std::size_t require_column(const std::string& name, const std::string& file) const;
};

// Reads a delimited file with a header row. Handles CRLF and quoted fields.
Table read_file(const std::string& path, char delim = ',');

std::vector<std::string> split_line(const std::string& line, char delim);

// Writer: fixed header, rows appended as pre-formatted cells.
class Writer {
public:
    explicit Writer(std::vector<std::string> header);
    void add_row(std::vector<std::string> cells);
    void write(const std::string& path) const;
    std::string to_string() const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

// Canonical numeric formatting used for all emitted CSVs (shortest
// round-trippable representation, so reruns are byte-identical).
std::string format_double(double v);

}  // namespace qrv::csv

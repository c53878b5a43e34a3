#pragma once

// Minimal CSV table: header row, comma separated, LF line endings, numbers
// printed with 10 significant digits.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace chansel {

inline std::string format_number(double x)
{
    if (std::isnan(x))
        return "nan";
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

/// A cell is either text or a number.
struct CsvCell {
    std::string text;

    CsvCell(std::string s) : text(std::move(s)) {}
    CsvCell(const char* s) : text(s) {}
    CsvCell(double x) : text(format_number(x)) {}
    CsvCell(int x) : text(std::to_string(x)) {}
    CsvCell(long x) : text(std::to_string(x)) {}
    CsvCell(unsigned long x) : text(std::to_string(x)) {}
    CsvCell(unsigned long long x) : text(std::to_string(x)) {}
};

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    void add_row(std::vector<CsvCell> cells)
    {
        if (cells.size() != header_.size())
            throw std::logic_error("CSV row width does not match header");
        std::vector<std::string> row;
        row.reserve(cells.size());
        for (auto& c : cells)
            row.push_back(std::move(c.text));
        rows_.push_back(std::move(row));
    }

    const std::vector<std::string>& header() const { return header_; }
    const std::vector<std::vector<std::string>>& rows() const { return rows_; }

    /// Column index by name; throws if absent.
    std::size_t column(const std::string& name) const
    {
        for (std::size_t i = 0; i < header_.size(); ++i)
            if (header_[i] == name)
                return i;
        throw std::out_of_range("no CSV column '" + name + "'");
    }

    void write(std::ostream& os) const
    {
        write_line(os, header_);
        for (const auto& row : rows_)
            write_line(os, row);
    }

    std::string str() const
    {
        std::ostringstream os;
        write(os);
        return os.str();
    }

    void save(const std::string& path) const
    {
        std::ofstream out(path, std::ios::binary);
        if (!out)
            throw std::ios_base::failure("cannot open '" + path + "' for writing");
        write(out);
        if (!out)
            throw std::ios_base::failure("failed writing '" + path + "'");
    }

private:
    static void write_line(std::ostream& os, const std::vector<std::string>& cells)
    {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i)
                os << ',';
            os << cells[i];
        }
        os << '\n';
    }

    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

} // namespace chansel

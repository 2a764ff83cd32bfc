#pragma once

#include <charconv>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "rabi_darboux/errors.hpp"

namespace rabi_darboux {

// 17 significant digits, shortest %g-style form, '.' separator regardless of
// locale.
inline std::string format_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

struct Column {
    std::string name;
    std::vector<double> values;
};

class Table {
public:
    Table() = default;
    explicit Table(std::vector<Column> columns) : columns_(std::move(columns)) {
        for (const auto& c : columns_)
            detail::require(c.values.size() == columns_.front().values.size(), "table: ragged columns");
    }

    void add(Column c) {
        detail::require(columns_.empty() || c.values.size() == rows(), "table: ragged columns");
        columns_.push_back(std::move(c));
    }

    std::size_t rows() const noexcept { return columns_.empty() ? 0 : columns_.front().values.size(); }
    const std::vector<Column>& columns() const noexcept { return columns_; }

    const Column& column(const std::string& name) const {
        for (const auto& c : columns_)
            if (c.name == name) return c;
        throw ValidationError("table: no column named " + name);
    }

private:
    std::vector<Column> columns_;
};

inline void write_csv(std::ostream& os, const Table& table) {
    const auto& cols = table.columns();
    for (std::size_t j = 0; j < cols.size(); ++j) os << (j ? "," : "") << cols[j].name;
    os << '\n';
    for (std::size_t i = 0; i < table.rows(); ++i) {
        for (std::size_t j = 0; j < cols.size(); ++j) os << (j ? "," : "") << format_number(cols[j].values[i]);
        os << '\n';
    }
}

inline void write_csv_file(const std::string& path, const Table& table) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    write_csv(out, table);
    out.flush();
    if (!out) throw IoError("write failed for " + path);
}

} // namespace rabi_darboux

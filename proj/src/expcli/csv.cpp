#include "fdaloha/expcli.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace fdaloha::cli {

std::string format_number(double v)
{
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    if (v == 0.0) {
        return "0";  // also folds -0
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

void CsvTable::add_row(std::vector<std::string> row)
{
    if (row.size() != columns.size()) {
        throw std::logic_error("CSV row width does not match the header");
    }
    rows.push_back(std::move(row));
}

std::string CsvTable::str() const
{
    std::ostringstream os;
    os << "# fdaloha " << command << '\n';
    for (const auto& [k, v] : meta) {
        os << "# " << k << '=' << v << '\n';
    }
    for (std::size_t i = 0; i < columns.size(); ++i) {
        os << (i ? "," : "") << columns[i];
    }
    os << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            os << (i ? "," : "") << row[i];
        }
        os << '\n';
    }
    return os.str();
}

std::size_t CsvTable::column(std::string_view name) const
{
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (columns[i] == name) {
            return i;
        }
    }
    throw std::out_of_range("no CSV column " + std::string(name));
}

std::vector<double> CsvData::numbers(std::string_view column) const
{
    std::size_t idx = columns.size();
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (columns[i] == column) {
            idx = i;
        }
    }
    if (idx == columns.size()) {
        throw std::out_of_range("no CSV column " + std::string(column));
    }
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& row : rows) {
        out.push_back(std::strtod(row.at(idx).c_str(), nullptr));
    }
    return out;
}

CsvData parse_csv(std::string_view text)
{
    CsvData data;
    bool header = true;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line.front() == '#') {
            continue;
        }
        std::vector<std::string> fields;
        std::istringstream ls(line);
        std::string field;
        while (std::getline(ls, field, ',')) {
            fields.push_back(field);
        }
        if (header) {
            data.columns = std::move(fields);
            header = false;
        } else {
            if (fields.size() != data.columns.size()) {
                throw std::runtime_error("CSV row width does not match the header");
            }
            data.rows.push_back(std::move(fields));
        }
    }
    return data;
}

} // namespace fdaloha::cli

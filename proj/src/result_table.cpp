#include "wbloc/result_table.hpp"

#include "wbloc/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

namespace wbloc {

std::string format_number(double v)
{
    if (std::isnan(v)) throw NumericalError("attempt to format NaN");
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

ResultTable::ResultTable(std::string sweep_variable, std::vector<std::string> columns)
    : sweep_variable_(std::move(sweep_variable)), columns_(std::move(columns))
{
}

void ResultTable::add_row(double sweep_value, std::vector<Cell> cells)
{
    if (cells.size() != columns_.size()) throw NumericalError("result row has the wrong number of cells");
    for (Cell& c : cells) {
        if (const double* v = std::get_if<double>(&c); v && std::isnan(*v)) c = CellError{"nan"};
    }
    sweep_values_.push_back(sweep_value);
    cells_.push_back(std::move(cells));
}

std::size_t ResultTable::column_index(const std::string& name) const
{
    for (std::size_t i = 0; i < columns_.size(); ++i) {
        if (columns_[i] == name) return i;
    }
    throw ConfigError("no result column named " + name);
}

const Cell& ResultTable::cell(std::size_t row, const std::string& column) const
{
    return cells_.at(row).at(column_index(column));
}

double ResultTable::value(std::size_t row, const std::string& column) const
{
    const Cell& c = cell(row, column);
    if (const auto* e = std::get_if<CellError>(&c)) {
        throw NumericalError("cell " + column + "[" + std::to_string(row) + "] holds error " + e->reason);
    }
    return std::get<double>(c);
}

std::string ResultTable::to_csv() const
{
    std::string out = sweep_variable_;
    for (const auto& c : columns_) out += "," + c;
    out += "\n";
    for (std::size_t r = 0; r < rows(); ++r) {
        out += format_number(sweep_values_[r]);
        for (const Cell& c : cells_[r]) {
            out += ",";
            if (const auto* e = std::get_if<CellError>(&c)) {
                std::string reason = e->reason;
                for (char& ch : reason) {
                    if (ch == ',' || ch == '\n' || ch == '"') ch = ' ';
                }
                out += "ERR:" + reason;
            } else {
                out += format_number(std::get<double>(c));
            }
        }
        out += "\n";
    }
    return out;
}

void ResultTable::write_csv(const std::filesystem::path& path) const
{
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + path.string());
    f << to_csv();
    if (!f) throw ConfigError("failed writing " + path.string());
}

} // namespace wbloc

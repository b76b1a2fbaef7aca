#pragma once

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace wbloc {

// A table cell holds a number or an error marker; NaN is never stored.
struct CellError {
    std::string reason;
};
using Cell = std::variant<double, CellError>;

// Sweep results: the sweep variable is the first column, followed by the
// experiment's output columns in a fixed order.
class ResultTable {
public:
    ResultTable(std::string sweep_variable, std::vector<std::string> columns);

    void add_row(double sweep_value, std::vector<Cell> cells);

    const std::string& sweep_variable() const noexcept { return sweep_variable_; }
    const std::vector<std::string>& columns() const noexcept { return columns_; }
    std::size_t rows() const noexcept { return sweep_values_.size(); }
    double sweep_value(std::size_t row) const { return sweep_values_.at(row); }

    std::size_t column_index(const std::string& name) const;
    const Cell& cell(std::size_t row, const std::string& column) const;
    // Numeric value; throws NumericalError naming the marker if the cell holds an error.
    double value(std::size_t row, const std::string& column) const;

    // Header row then one line per sweep value. Numbers use a fixed
    // locale-independent format, so equal tables give identical bytes.
    std::string to_csv() const;
    void write_csv(const std::filesystem::path& path) const;

private:
    std::string sweep_variable_;
    std::vector<std::string> columns_;
    std::vector<double> sweep_values_;
    std::vector<std::vector<Cell>> cells_;
};

// Shortest round-trip decimal form of a double.
std::string format_number(double v);

} // namespace wbloc

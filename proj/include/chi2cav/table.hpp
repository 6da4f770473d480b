#pragma once

#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

namespace chi2cav {

using Cell = std::variant<double, long long, std::string>;

// Column-ordered numeric table. Footer rows are written to CSV as comment
// lines starting with '#', and to JSON under "footer".
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    std::vector<std::string> footer_columns;
    std::vector<std::vector<Cell>> footer;
    std::vector<std::string> notes;  // free text, emitted as "# ..." lines / "notes"
};

// Scientific notation, 15 significant digits, lowercase exponent.
std::string format_number(double v);

void write_csv(std::ostream& out, const Table& table);
nlohmann::json to_json(const Table& table);
void write_json(std::ostream& out, const Table& table);

}  // namespace chi2cav

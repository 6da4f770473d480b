#include "chi2cav/table.hpp"

#include <cmath>
#include <cstdio>

namespace chi2cav {

namespace {

std::string cell_text(const Cell& c) {
    if (const double* d = std::get_if<double>(&c)) return format_number(*d);
    if (const long long* i = std::get_if<long long>(&c)) return std::to_string(*i);
    return std::get<std::string>(c);
}

nlohmann::json cell_json(const Cell& c) {
    if (const double* d = std::get_if<double>(&c)) return std::isfinite(*d) ? nlohmann::json(*d) : nlohmann::json();
    if (const long long* i = std::get_if<long long>(&c)) return *i;
    return std::get<std::string>(c);
}

void write_row(std::ostream& out, const std::vector<Cell>& row) {
    for (std::size_t k = 0; k < row.size(); ++k) {
        if (k) out << ',';
        out << cell_text(row[k]);
    }
    out << '\n';
}

nlohmann::json rows_json(const std::vector<std::string>& cols, const std::vector<std::vector<Cell>>& rows) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& row : rows) {
        nlohmann::json obj = nlohmann::json::object();
        for (std::size_t k = 0; k < cols.size() && k < row.size(); ++k) obj[cols[k]] = cell_json(row[k]);
        arr.push_back(std::move(obj));
    }
    return arr;
}

}  // namespace

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.14e", v);
    return buf;
}

void write_csv(std::ostream& out, const Table& t) {
    for (const auto& note : t.notes) out << "# " << note << '\n';
    for (std::size_t k = 0; k < t.columns.size(); ++k) {
        if (k) out << ',';
        out << t.columns[k];
    }
    out << '\n';
    for (const auto& row : t.rows) write_row(out, row);
    if (!t.footer.empty()) {
        out << '#';
        for (std::size_t k = 0; k < t.footer_columns.size(); ++k) out << (k ? "," : "") << t.footer_columns[k];
        out << '\n';
        for (const auto& row : t.footer) {
            out << '#';
            write_row(out, row);
        }
    }
}

nlohmann::json to_json(const Table& t) {
    nlohmann::json j = {{"columns", t.columns}, {"rows", rows_json(t.columns, t.rows)}};
    if (!t.footer.empty()) j["footer"] = rows_json(t.footer_columns, t.footer);
    if (!t.notes.empty()) j["notes"] = t.notes;
    return j;
}

void write_json(std::ostream& out, const Table& t) { out << to_json(t).dump(2) << '\n'; }

}  // namespace chi2cav

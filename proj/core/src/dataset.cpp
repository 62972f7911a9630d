#include "caprecap/dataset.hpp"

#include <cmath>
#include <charconv>
#include <fstream>
#include <sstream>

#include "caprecap/errors.hpp"
#include "caprecap/math.hpp"

namespace caprecap {

CaptureDataset validate_dataset(const std::vector<RawRow>& rows) {
    if (rows.empty()) throw EmptyDataset();
    const std::size_t k = rows.front().first.size();
    const std::size_t d = rows.front().second.size();
    if (k == 0) throw InconsistentWidth("row 1: no capture indicator columns");

    CaptureDataset out;
    out.k_lists = static_cast<int>(k);
    out.dim = static_cast<int>(d);
    out.units.reserve(rows.size());

    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& [y, x] = rows[r];
        if (y.size() != k || x.size() != d) {
            throw InconsistentWidth("row " + std::to_string(r + 1) +
                                    ": expected " + std::to_string(k) + " y and " +
                                    std::to_string(d) + " x columns");
        }
        UnitRecord unit;
        unit.y.resize(k);
        bool any = false;
        for (std::size_t j = 0; j < k; ++j) {
            if (y[j] != 0.0 && y[j] != 1.0) throw NonBinaryIndicator(r + 1, j);
            unit.y[j] = static_cast<std::uint8_t>(y[j]);
            any = any || unit.y[j] != 0;
        }
        if (!any) throw AllZeroCaptureRow(r + 1);
        for (std::size_t j = 0; j < d; ++j) {
            if (!std::isfinite(x[j])) throw NonFiniteCovariate(r + 1, j);
        }
        unit.x = x;
        out.units.push_back(std::move(unit));
    }
    return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_number(const std::string& s, std::size_t row, const std::string& col) {
    const char* begin = s.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    // Trailing spaces tolerated, anything else is a schema error.
    while (end && *end == ' ') ++end;
    if (end == begin || (end && *end != '\0')) {
        throw ParseError("row " + std::to_string(row) + ", column " + col +
                         ": cannot parse '" + s + "' as a number");
    }
    return v;
}

}  // namespace

CsvData read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty file: missing header");
    const auto header = split_csv_line(line);

    std::size_t k = 0;
    while (k < header.size() && header[k] == "y" + std::to_string(k + 1)) ++k;
    if (k == 0) {
        throw ParseError("header: first column must be 'y1', got '" +
                         (header.empty() ? std::string() : header[0]) + "'");
    }
    std::size_t d = 0;
    std::size_t pos = k;
    while (pos < header.size() && header[pos] == "x" + std::to_string(d + 1)) {
        ++pos;
        ++d;
    }
    bool has_q = false;
    if (pos < header.size()) {
        if (header.size() - pos == 3 && header[pos] == "q1_hat" &&
            header[pos + 1] == "q2_hat" && header[pos + 2] == "q12_hat") {
            has_q = true;
        } else {
            throw ParseError("header: unexpected column '" + header[pos] +
                             "' (expected y1..yK, x1..xd, optional q1_hat,q2_hat,q12_hat)");
        }
    }

    std::vector<RawRow> rows;
    CsvData out;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != header.size()) {
            throw InconsistentWidth("row " + std::to_string(lineno - 1) + ": has " +
                                    std::to_string(fields.size()) + " fields, header has " +
                                    std::to_string(header.size()));
        }
        RawRow row;
        row.first.reserve(k);
        row.second.reserve(d);
        for (std::size_t j = 0; j < k; ++j) {
            row.first.push_back(parse_number(fields[j], lineno - 1, header[j]));
        }
        for (std::size_t j = 0; j < d; ++j) {
            row.second.push_back(parse_number(fields[k + j], lineno - 1, header[k + j]));
        }
        if (has_q) {
            out.q1_hat.push_back(parse_number(fields[k + d], lineno - 1, "q1_hat"));
            out.q2_hat.push_back(parse_number(fields[k + d + 1], lineno - 1, "q2_hat"));
            out.q12_hat.push_back(parse_number(fields[k + d + 2], lineno - 1, "q12_hat"));
        }
        rows.push_back(std::move(row));
    }
    out.dataset = validate_dataset(rows);
    return out;
}

CsvData read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file: " + path);
    return read_csv(in);
}

std::string write_csv(const CaptureDataset& data) {
    std::ostringstream out;
    for (int j = 0; j < data.k_lists; ++j) out << (j ? "," : "") << "y" << (j + 1);
    for (int j = 0; j < data.dim; ++j) out << ",x" << (j + 1);
    out << "\n";
    for (const auto& u : data.units) {
        for (int j = 0; j < data.k_lists; ++j) out << (j ? "," : "") << int(u.y[j]);
        for (int j = 0; j < data.dim; ++j) out << "," << fmt17(u.x[j]);
        out << "\n";
    }
    return out.str();
}

}  // namespace caprecap

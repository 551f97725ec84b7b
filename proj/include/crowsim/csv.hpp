// csv.hpp — CSV output with shortest round-trip double formatting.

#pragma once

#include <charconv>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace crowsim {

inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& columns)
        : out_(path, std::ios::binary), n_columns_(columns.size()) {
        if (!out_) throw std::runtime_error("CsvWriter: cannot open '" + path + "'");
        for (std::size_t i = 0; i < columns.size(); ++i) {
            if (i) out_ << ',';
            out_ << columns[i];
        }
        out_ << '\n';
    }

    void row(std::span<const double> values) {
        if (values.size() != n_columns_)
            throw std::invalid_argument("CsvWriter: row width does not match header");
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i) out_ << ',';
            out_ << format_double(values[i]);
        }
        out_ << '\n';
    }

    void row(std::initializer_list<double> values) {
        row(std::span<const double>(values.begin(), values.size()));
    }

private:
    std::ofstream out_;
    std::size_t n_columns_;
};

}  // namespace crowsim

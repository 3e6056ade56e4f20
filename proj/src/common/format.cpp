// SPDX-License-Identifier: Apache-2.0
#include "common/format.hpp"

#include "common/error.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>

namespace fbsde {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) return "0";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(std::vector<std::string> header) : columns_(header.size()) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) text_ += ',';
        text_ += header[i];
    }
    text_ += '\n';
}

CsvWriter& CsvWriter::cell(double v) { return cell(std::string_view(format_double(v))); }

CsvWriter& CsvWriter::cell(long long v) { return cell(std::string_view(std::to_string(v))); }

CsvWriter& CsvWriter::cell(std::string_view v) {
    if (in_row_++) text_ += ',';
    text_.append(v);
    return *this;
}

void CsvWriter::end_row() {
    if (in_row_ != columns_) {
        throw ArgumentError("csv row has " + std::to_string(in_row_) + " cells, header has " +
                            std::to_string(columns_));
    }
    text_ += '\n';
    in_row_ = 0;
}

void CsvWriter::write_file(const std::string& path) const { write_text_file(path, text_); }

void write_text_file(const std::string& path, std::string_view content) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("failed writing '" + path + "'");
}

}  // namespace fbsde

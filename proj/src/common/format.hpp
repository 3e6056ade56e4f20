// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace fbsde {

/// Shortest decimal text that parses back to exactly `v` ('.' decimal, no locale).
std::string format_double(double v);

/// Minimal CSV writer: header row, comma separated, '\n' line endings.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header);

    CsvWriter& cell(double v);
    CsvWriter& cell(long long v);
    CsvWriter& cell(std::string_view v);
    void end_row();

    const std::string& str() const noexcept { return text_; }
    void write_file(const std::string& path) const;

private:
    std::string text_;
    std::size_t columns_;
    std::size_t in_row_ = 0;
};

/// Writes `content` to `path`, creating parent directories.
void write_text_file(const std::string& path, std::string_view content);

}  // namespace fbsde

#pragma once

#include <string>
#include <vector>

namespace geophase {

// Decimal text with 17 significant digits; round-trips every finite double.
std::string format_double(double x);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;  // each row as wide as the header
};

// Comma-delimited table with one header row, LF line endings, and
// 17-significant-digit values. The file appears atomically: the content is
// staged in a sibling temp file that is renamed over the target.
void write_csv(const std::string& path, const CsvTable& table);

// Atomic whole-file write of already-serialized text (same temp + rename move).
void write_text_atomic(const std::string& path, const std::string& text);

// Whole-file read; throws ConfigError when the file cannot be opened.
std::string read_text(const std::string& path);

}  // namespace geophase

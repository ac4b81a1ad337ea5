#include "geophase/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <system_error>

#include "geophase/errors.hpp"

namespace geophase {

namespace fs = std::filesystem;

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void write_text_atomic(const std::string& path, const std::string& text) {
    const fs::path target(path);
    std::error_code ec;
    if (target.has_parent_path()) {
        fs::create_directories(target.parent_path(), ec);
        if (ec) {
            throw ConfigError("cannot create output directory '" +
                              target.parent_path().string() + "': " + ec.message());
        }
    }
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot open '" + tmp.string() + "' for writing");
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        out.flush();
        if (!out) throw ConfigError("short write to '" + tmp.string() + "'");
    }
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw ConfigError("cannot move '" + tmp.string() + "' to '" + target.string() +
                          "': " + ec.message());
    }
}

void write_csv(const std::string& path, const CsvTable& table) {
    if (table.header.empty()) throw DomainError("write_csv: empty header");
    std::string text;
    text.reserve(32 * (table.rows.size() + 1) * table.header.size());
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        if (c > 0) text += ',';
        text += table.header[c];
    }
    text += '\n';
    for (const std::vector<double>& row : table.rows) {
        if (row.size() != table.header.size()) {
            throw DomainError("write_csv: row width does not match the header");
        }
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c > 0) text += ',';
            text += format_double(row[c]);
        }
        text += '\n';
    }
    write_text_atomic(path, text);
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw ConfigError("error while reading '" + path + "'");
    return text;
}

}  // namespace geophase

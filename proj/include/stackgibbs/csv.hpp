#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sgp::csv {

/// A parsed CSV file with a header row. Cells are unquoted strings.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::filesystem::path source;

    std::optional<std::size_t> find(std::string_view name) const;
    /// Column index; ValidationError naming the file when absent.
    std::size_t column(std::string_view name) const;
};

Table read(const std::filesystem::path& path);
Table parse(std::string_view text, const std::filesystem::path& source = {});

/// Parses a double, reporting file row (1-based, header = row 1) on failure.
double to_double(std::string_view cell, const Table& t, std::size_t row);
long to_long(std::string_view cell, const Table& t, std::size_t row);

/// Shortest round-trip decimal representation.
std::string format(double v);

class Writer {
public:
    explicit Writer(const std::filesystem::path& path);
    void row(const std::vector<std::string>& cells);

private:
    std::ofstream out_;
    std::filesystem::path path_;
};

} // namespace sgp::csv

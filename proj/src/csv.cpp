#include "stackgibbs/csv.hpp"

#include "stackgibbs/error.hpp"

#include <charconv>
#include <sstream>

namespace sgp::csv {

namespace {

std::vector<std::string> split_line(std::string_view line) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cell.push_back('"');
                ++i;
            } else if (ch == '"') {
                quoted = false;
            } else {
                cell.push_back(ch);
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            cells.push_back(std::move(cell));
            cell.clear();
        } else {
            cell.push_back(ch);
        }
    }
    cells.push_back(std::move(cell));
    return cells;
}

std::string where(const Table& t, std::size_t row) {
    std::ostringstream os;
    os << (t.source.empty() ? std::string("<csv>") : t.source.string()) << " row " << row + 2;
    return os.str();
}

} // namespace

std::optional<std::size_t> Table::find(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) {
            return i;
        }
    }
    return std::nullopt;
}

std::size_t Table::column(std::string_view name) const {
    if (auto i = find(name)) {
        return *i;
    }
    throw ValidationError((source.empty() ? std::string("<csv>") : source.string()) +
                          ": missing column '" + std::string(name) + "'");
}

Table parse(std::string_view text, const std::filesystem::path& source) {
    Table t;
    t.source = source;
    std::size_t pos = 0;
    bool have_header = false;
    std::size_t line_no = 0;
    while (pos <= text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        if (line.empty()) {
            if (end == text.size()) {
                break;
            }
            continue;
        }
        auto cells = split_line(line);
        if (!have_header) {
            t.header = std::move(cells);
            have_header = true;
        } else {
            if (cells.size() != t.header.size()) {
                std::ostringstream os;
                os << (source.empty() ? std::string("<csv>") : source.string()) << " line "
                   << line_no << ": expected " << t.header.size() << " cells, found "
                   << cells.size();
                throw ValidationError(os.str());
            }
            t.rows.push_back(std::move(cells));
        }
        if (end == text.size()) {
            break;
        }
    }
    if (!have_header) {
        throw ValidationError((source.empty() ? std::string("<csv>") : source.string()) +
                              ": missing header row");
    }
    return t;
}

Table read(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path);
}

double to_double(std::string_view cell, const Table& t, std::size_t row) {
    double v = 0.0;
    const auto* first = cell.data();
    const auto* last = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || cell.empty()) {
        throw ValidationError(where(t, row) + ": non-numeric value '" + std::string(cell) + "'");
    }
    return v;
}

long to_long(std::string_view cell, const Table& t, std::size_t row) {
    long v = 0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty()) {
        throw ValidationError(where(t, row) + ": non-integer value '" + std::string(cell) + "'");
    }
    return v;
}

std::string format(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

Writer::Writer(const std::filesystem::path& path) : out_(path, std::ios::binary), path_(path) {
    if (!out_) {
        throw IoError("cannot write " + path.string());
    }
}

void Writer::row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i > 0) {
            out_ << ',';
        }
        const auto& c = cells[i];
        if (c.find_first_of(",\"\n") != std::string::npos) {
            out_ << '"';
            for (char ch : c) {
                out_ << ch;
                if (ch == '"') {
                    out_ << '"';
                }
            }
            out_ << '"';
        } else {
            out_ << c;
        }
    }
    out_ << '\n';
    if (!out_) {
        throw IoError("write failed: " + path_.string());
    }
}

} // namespace sgp::csv

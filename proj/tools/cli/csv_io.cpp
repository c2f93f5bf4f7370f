#include "cli/csv_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <vector>

#include "kmodels/errors.hpp"

namespace kmodels::cli {
namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

// Splits one record. Double quotes protect commas; "" inside quotes is a literal quote.
std::vector<std::string> split(const std::string& line, std::size_t lineno) {
    std::vector<std::string> cells;
    std::string cur;
    bool quoted = false;
    bool was_quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
            was_quoted = true;
        } else if (c == ',') {
            cells.push_back(was_quoted ? cur : trim(cur));
            cur.clear();
            was_quoted = false;
        } else {
            cur += c;
        }
    }
    if (quoted) throw ParseError("unterminated quote", lineno);
    cells.push_back(was_quoted ? cur : trim(cur));
    return cells;
}

double parse_number(const std::string& cell, std::size_t lineno, std::size_t column) {
    double v = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    if (first != last && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (cell.empty() || ec != std::errc() || ptr != last) {
        throw ParseError("column " + std::to_string(column) + ": '" + cell + "' is not a number", lineno);
    }
    if (!std::isfinite(v)) {
        throw ParseError("column " + std::to_string(column) + ": non-finite value '" + cell + "'", lineno);
    }
    return v;
}

struct Line {
    std::size_t number;
    std::vector<std::string> cells;
};

std::vector<Line> read_lines(std::istream& in) {
    std::vector<Line> lines;
    std::string raw;
    std::size_t n = 0;
    while (std::getline(in, raw)) {
        ++n;
        if (trim(raw).empty()) continue;
        lines.push_back(Line{n, split(raw, n)});
    }
    if (lines.empty()) throw ParseError("empty input", 0);
    return lines;
}

std::size_t find_column(const std::vector<std::string>& header, const std::string& name, std::size_t lineno) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ParseError("no column named '" + name + "' in header", lineno);
    return static_cast<std::size_t>(it - header.begin());
}

Ingested read_wide(const std::vector<Line>& lines, const std::optional<std::string>& label_column) {
    std::size_t start = 0;
    std::optional<std::size_t> label_idx;
    if (lines.front().cells.front() == "id") {
        start = 1;
        if (label_column) {
            label_idx = find_column(lines.front().cells, *label_column, lines.front().number);
            if (*label_idx == 0) throw ParseError("the label column cannot be the id column", lines.front().number);
        }
    } else if (label_column) {
        throw ParseError("--labels needs a header row starting with 'id'", lines.front().number);
    }

    std::vector<TimeSeries> series;
    std::map<std::string, std::string> labels;
    std::set<std::string> seen;
    for (std::size_t li = start; li < lines.size(); ++li) {
        const auto& [lineno, cells] = lines[li];
        const std::string& id = cells.front();
        if (id.empty()) throw ParseError("empty series id", lineno);
        if (!seen.insert(id).second) throw ParseError("duplicate id '" + id + "'", lineno);

        std::vector<double> values;
        std::size_t blank_at = 0;
        for (std::size_t c = 1; c < cells.size(); ++c) {
            if (label_idx && c == *label_idx) continue;
            if (cells[c].empty()) {
                if (blank_at == 0) blank_at = c + 1;
                continue;
            }
            if (blank_at != 0) throw ParseError("blank interior cell in column " + std::to_string(blank_at), lineno);
            values.push_back(parse_number(cells[c], lineno, c + 1));
        }
        if (values.empty()) throw ParseError("series '" + id + "' has no observations", lineno);
        if (label_idx) {
            if (*label_idx >= cells.size() || cells[*label_idx].empty()) {
                throw ParseError("missing label for series '" + id + "'", lineno);
            }
            labels.emplace(id, cells[*label_idx]);
        }
        series.emplace_back(id, std::move(values));
    }
    if (series.empty()) throw ParseError("no series after the header", lines.front().number);
    return Ingested{Dataset(std::move(series)), std::move(labels)};
}

Ingested read_long(const std::vector<Line>& lines, const std::optional<std::string>& label_column) {
    std::size_t start = 0;
    std::size_t id_col = 0, t_col = 1, v_col = 2;
    std::optional<std::size_t> label_idx;
    if (lines.front().cells.front() == "id") {
        start = 1;
        const auto& h = lines.front().cells;
        const auto hl = lines.front().number;
        t_col = find_column(h, "t", hl);
        v_col = find_column(h, "value", hl);
        if (label_column) label_idx = find_column(h, *label_column, hl);
    } else if (label_column) {
        throw ParseError("--labels needs a header row starting with 'id'", lines.front().number);
    }
    const std::size_t need = std::max({id_col, t_col, v_col, label_idx.value_or(0)}) + 1;

    struct Acc {
        std::vector<double> values;
        double last_t;
    };
    std::vector<std::string> order;
    std::map<std::string, Acc> acc;
    std::map<std::string, std::string> labels;
    for (std::size_t li = start; li < lines.size(); ++li) {
        const auto& [lineno, cells] = lines[li];
        if (cells.size() < need) {
            throw ParseError("expected at least " + std::to_string(need) + " columns, got " +
                                 std::to_string(cells.size()),
                             lineno);
        }
        const std::string& id = cells[id_col];
        if (id.empty()) throw ParseError("empty series id", lineno);
        const double t = parse_number(cells[t_col], lineno, t_col + 1);
        const double v = parse_number(cells[v_col], lineno, v_col + 1);
        auto it = acc.find(id);
        if (it == acc.end()) {
            order.push_back(id);
            acc.emplace(id, Acc{{v}, t});
        } else {
            if (!(t > it->second.last_t)) {
                throw ParseError("t is not strictly increasing for id '" + id + "'", lineno);
            }
            it->second.values.push_back(v);
            it->second.last_t = t;
        }
        if (label_idx) {
            const std::string& lab = cells[*label_idx];
            auto [pos, inserted] = labels.emplace(id, lab);
            if (!inserted && pos->second != lab) throw ParseError("label changes within id '" + id + "'", lineno);
        }
    }
    if (order.empty()) throw ParseError("no rows after the header", lines.front().number);
    std::vector<TimeSeries> series;
    series.reserve(order.size());
    for (const auto& id : order) series.emplace_back(id, std::move(acc.at(id).values));
    return Ingested{Dataset(std::move(series)), std::move(labels)};
}

std::string quote(const std::string& cell) {
    if (cell.find_first_of(",\"") == std::string::npos && trim(cell) == cell) return cell;
    std::string out = "\"";
    for (char c : cell) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

}  // namespace

CsvFormat parse_format(const std::string& name) {
    if (name == "wide") return CsvFormat::Wide;
    if (name == "long") return CsvFormat::Long;
    throw InvalidArgument("unknown format '" + name + "' (expected wide or long)");
}

const char* to_string(CsvFormat format) { return format == CsvFormat::Wide ? "wide" : "long"; }

Ingested read_csv(std::istream& in, CsvFormat format, const std::optional<std::string>& label_column) {
    const auto lines = read_lines(in);
    return format == CsvFormat::Wide ? read_wide(lines, label_column) : read_long(lines, label_column);
}

Ingested read_csv_file(const std::string& path, CsvFormat format, const std::optional<std::string>& label_column) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    return read_csv(in, format, label_column);
}

std::string format_double(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

void write_csv(std::ostream& out, const Dataset& data, CsvFormat format,
               const std::map<std::string, std::string>& labels) {
    const bool with_labels = !labels.empty();
    auto label_of = [&](const std::string& id) {
        const auto it = labels.find(id);
        return it == labels.end() ? std::string{} : it->second;
    };
    if (format == CsvFormat::Wide) {
        std::size_t width = 0;
        for (const auto& s : data) width = std::max(width, s.size());
        out << "id";
        if (with_labels) out << ",label";
        for (std::size_t t = 1; t <= width; ++t) out << ",x" << t;
        out << '\n';
        for (const auto& s : data) {
            out << quote(s.id());
            if (with_labels) out << ',' << quote(label_of(s.id()));
            for (double v : s.values()) out << ',' << format_double(v);
            out << '\n';
        }
        return;
    }
    out << "id,t,value";
    if (with_labels) out << ",label";
    out << '\n';
    for (const auto& s : data) {
        for (std::size_t t = 0; t < s.size(); ++t) {
            out << quote(s.id()) << ',' << (t + 1) << ',' << format_double(s[t]);
            if (with_labels) out << ',' << quote(label_of(s.id()));
            out << '\n';
        }
    }
}

}  // namespace kmodels::cli

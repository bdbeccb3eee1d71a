#include "fracheat/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fracheat::io {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

} // namespace

ConfigFile ConfigFile::parse_string(const std::string& text) {
    ConfigFile cfg;
    std::istringstream in(text);
    std::string line, section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config line " + std::to_string(line_no) +
                                  ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            cfg.data_[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
        cfg.data_[section][key] = value;
    }
    return cfg;
}

ConfigFile ConfigFile::parse_file(const std::string& path) {
    return parse_string(read_text(path));
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
    const auto s = data_.find(section);
    return s != data_.end() && s->second.count(key) > 0;
}

const std::string& ConfigFile::get(const std::string& section, const std::string& key) const {
    const auto s = data_.find(section);
    if (s == data_.end() || !s->second.count(key))
        throw ConfigError("config: missing required key [" + section + "] " + key);
    return s->second.at(key);
}

std::string ConfigFile::get_or(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
    return has(section, key) ? get(section, key) : fallback;
}

double ConfigFile::number(const std::string& section, const std::string& key) const {
    const std::string& v = get(section, key);
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config: [" + section + "] " + key + " = '" + v + "' is not a number");
    }
}

double ConfigFile::number_or(const std::string& section, const std::string& key,
                             double fallback) const {
    return has(section, key) ? number(section, key) : fallback;
}

int ConfigFile::integer(const std::string& section, const std::string& key) const {
    const double v = number(section, key);
    const int i = static_cast<int>(v);
    if (double(i) != v)
        throw ConfigError("config: [" + section + "] " + key + " must be an integer");
    return i;
}

int ConfigFile::integer_or(const std::string& section, const std::string& key,
                           int fallback) const {
    return has(section, key) ? integer(section, key) : fallback;
}

bool ConfigFile::flag_or(const std::string& section, const std::string& key,
                         bool fallback) const {
    if (!has(section, key)) return fallback;
    const std::string& v = get(section, key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config: [" + section + "] " + key + " must be a boolean");
}

std::vector<double> ConfigFile::numbers(const std::string& section,
                                        const std::string& key) const {
    std::istringstream in(get(section, key));
    std::vector<double> out;
    std::string tok;
    while (in >> tok) {
        try {
            out.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw ConfigError("config: [" + section + "] " + key + ": bad list entry '" + tok +
                              "'");
        }
    }
    if (out.empty()) throw ConfigError("config: [" + section + "] " + key + ": empty list");
    return out;
}

void ConfigFile::set(const std::string& section, const std::string& key,
                     const std::string& value) {
    data_[section][key] = value;
}

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

CsvWriter::CsvWriter(std::vector<std::string> columns) : columns_(columns.size()) {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (i) body_ += ',';
        body_ += columns[i];
    }
    body_ += '\n';
}

void CsvWriter::row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_)
        throw std::invalid_argument("CsvWriter: row width does not match header");
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) body_ += ',';
        body_ += cells[i];
    }
    body_ += '\n';
}

void CsvWriter::row_numbers(const std::vector<double>& values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(format_number(v));
    row(cells);
}

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string fnv1a_hex(const std::string& bytes) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(bytes)));
    return buf;
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

void write_text_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    write_text(tmp, content);
    std::filesystem::rename(tmp, path);
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_field(const Field& field, const std::string& path) {
    std::ostringstream out;
    out << "format = fracheat-field-1\n";
    out << "dim = " << field.grid.dim << "\n";
    out << "half_width = " << format_number(field.grid.half_width) << "\n";
    out << "points = " << field.grid.points << "\n";
    out << "time = " << format_number(field.time) << "\n";
    out << "values = " << field.values.size() << "\n";
    for (Eigen::Index i = 0; i < field.values.size(); ++i)
        out << format_number(field.values[i]) << "\n";
    write_text(path, out.str());
}

Field read_field(const std::string& path) {
    std::istringstream in(read_text(path));
    Field f;
    std::string line;
    Eigen::Index count = -1;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string key, eq;
        if (!(ls >> key >> eq)) continue;
        if (key == "format") {
            std::string fmt;
            ls >> fmt;
            if (fmt != "fracheat-field-1")
                throw std::runtime_error("read_field: unknown format " + fmt);
        } else if (key == "dim")
            ls >> f.grid.dim;
        else if (key == "half_width")
            ls >> f.grid.half_width;
        else if (key == "points")
            ls >> f.grid.points;
        else if (key == "time")
            ls >> f.time;
        else if (key == "values") {
            ls >> count;
            break;
        }
    }
    f.grid.validate();
    if (count != f.grid.node_count())
        throw std::runtime_error("read_field: value count does not match grid");
    f.values.resize(count);
    for (Eigen::Index i = 0; i < count; ++i)
        if (!(in >> f.values[i])) throw std::runtime_error("read_field: truncated values");
    return f;
}

std::string field_slice_csv(const Field& field) {
    CsvWriter csv({"x", "value"});
    const Grid& g = field.grid;
    for (int i = 0; i < g.points; ++i) {
        const Eigen::Index k =
            g.dim == 1 ? i : Eigen::Index(i) * g.points + g.points / 2; // y = 0 row
        csv.row_numbers({g.coord(i), field.values[k]});
    }
    return csv.str();
}

} // namespace fracheat::io

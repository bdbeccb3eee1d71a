#pragma once

#include "fracheat/grid.hpp"

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace fracheat::io {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// "[section]" headers with "key = value" lines; '#' starts a comment.
class ConfigFile {
public:
    static ConfigFile parse_file(const std::string& path);
    static ConfigFile parse_string(const std::string& text);

    bool has(const std::string& section, const std::string& key) const;
    const std::string& get(const std::string& section, const std::string& key) const;
    std::string get_or(const std::string& section, const std::string& key,
                       const std::string& fallback) const;

    double number(const std::string& section, const std::string& key) const;
    double number_or(const std::string& section, const std::string& key, double fallback) const;
    int integer(const std::string& section, const std::string& key) const;
    int integer_or(const std::string& section, const std::string& key, int fallback) const;
    bool flag_or(const std::string& section, const std::string& key, bool fallback) const;
    std::vector<double> numbers(const std::string& section, const std::string& key) const;

    void set(const std::string& section, const std::string& key, const std::string& value);
    const std::map<std::string, std::map<std::string, std::string>>& sections() const {
        return data_;
    }

private:
    std::map<std::string, std::map<std::string, std::string>> data_;
};

// fixed 17-significant-digit formatting used by every numeric output
std::string format_number(double v);

class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> columns);
    void row(const std::vector<std::string>& cells);
    void row_numbers(const std::vector<double>& values);
    const std::string& str() const { return body_; }

private:
    std::size_t columns_;
    std::string body_;
};

std::uint64_t fnv1a(const std::string& bytes);
std::string fnv1a_hex(const std::string& bytes);

void write_text(const std::string& path, const std::string& content);
// write to <path>.tmp then rename
void write_text_atomic(const std::string& path, const std::string& content);
std::string read_text(const std::string& path);

// field snapshot round trip (grid header + one value per line)
void write_field(const Field& field, const std::string& path);
Field read_field(const std::string& path);
// 1-D slice as x,value CSV (the y = 0 row for N = 2)
std::string field_slice_csv(const Field& field);

} // namespace fracheat::io

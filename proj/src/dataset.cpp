#include "mrs/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <ostream>
#include <sstream>

#include "mrs/errors.hpp"

namespace mrs {

void Dataset::validate() const {
    if (columns.size() != values.size())
        throw std::invalid_argument("Dataset: column name count does not match value columns");
    const std::int64_t rows = n();
    for (int c = 0; c < p(); ++c) {
        if (static_cast<std::int64_t>(values[c].size()) != rows)
            throw std::invalid_argument("Dataset: ragged columns");
        for (std::int64_t v : values[c])
            if (v < 0) throw std::invalid_argument("Dataset: negative entry");
    }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ls(line);
    while (std::getline(ls, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

std::string trim_field(std::string s) {
    auto issp = [](unsigned char c) { return std::isspace(c) != 0; };
    while (!s.empty() && issp(s.front())) s.erase(s.begin());
    while (!s.empty() && (issp(s.back()) || s.back() == '\r')) s.pop_back();
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return s;
}

bool parse_count(const std::string& field, std::int64_t* out) {
    if (field.empty()) return false;
    std::int64_t v = 0;
    for (char ch : field) {
        if (ch < '0' || ch > '9') return false;
        v = v * 10 + (ch - '0');
    }
    *out = v;
    return true;
}

}  // namespace

Dataset read_dataset_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open dataset: " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": empty file");
    Dataset data;
    for (auto& name : split_csv_line(line)) data.columns.push_back(trim_field(name));
    if (data.columns.empty()) throw DataError(path + ": no columns");
    data.values.resize(data.columns.size());

    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != data.columns.size())
            throw DataError(path + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(data.columns.size()) + " fields, got " +
                            std::to_string(fields.size()));
        for (size_t c = 0; c < fields.size(); ++c) {
            std::int64_t v = 0;
            if (!parse_count(trim_field(fields[c]), &v))
                throw DataError(path + ":" + std::to_string(line_no) + ": column '" +
                                data.columns[c] + "': not a nonnegative integer");
            data.values[c].push_back(v);
        }
    }
    if (data.n() == 0) throw DataError(path + ": no data rows");
    data.validate();
    return data;
}

void write_dataset_csv(const Dataset& data, const std::string& path) {
    data.validate();
    std::ofstream out(path);
    if (!out) throw DataError("cannot write dataset: " + path);
    for (int c = 0; c < data.p(); ++c) out << (c ? "," : "") << data.columns[c];
    out << "\n";
    const std::int64_t rows = data.n();
    for (std::int64_t i = 0; i < rows; ++i) {
        for (int c = 0; c < data.p(); ++c) out << (c ? "," : "") << data.values[c][i];
        out << "\n";
    }
}

Dataset ingest_real_csv(const std::string& path, const std::vector<std::string>& drop_columns,
                        std::ostream* warnings) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open csv: " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": empty file");

    std::vector<std::string> header;
    for (auto& name : split_csv_line(line)) header.push_back(trim_field(name));

    std::vector<bool> keep(header.size(), true);
    for (const auto& drop : drop_columns) {
        bool found = false;
        for (size_t c = 0; c < header.size(); ++c)
            if (header[c] == drop) {
                keep[c] = false;
                found = true;
            }
        if (!found && warnings) *warnings << "warning: drop column not found: " << drop << "\n";
    }

    Dataset data;
    for (size_t c = 0; c < header.size(); ++c)
        if (keep[c]) data.columns.push_back(header[c]);
    if (data.columns.empty()) throw DataError(path + ": all columns dropped");
    data.values.resize(data.columns.size());

    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != header.size())
            throw DataError(path + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(header.size()) + " fields, got " +
                            std::to_string(fields.size()));
        int out_c = 0;
        for (size_t c = 0; c < fields.size(); ++c) {
            if (!keep[c]) continue;
            std::int64_t v = 0;
            if (!parse_count(trim_field(fields[c]), &v))
                throw DataError(path + ": row " + std::to_string(line_no) + ", column '" +
                                header[c] + "': '" + trim_field(fields[c]) +
                                "' is not a nonnegative integer");
            data.values[out_c++].push_back(v);
        }
    }
    data.validate();
    return data;
}

}  // namespace mrs

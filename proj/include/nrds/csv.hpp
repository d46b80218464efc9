#pragma once
// Deterministic CSV writing: fixed %.17g formatting so identical runs
// produce byte-identical files.

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "nrds/errors.hpp"

namespace nrds {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

class CsvWriter {
  public:
    explicit CsvWriter(std::vector<std::string> columns)
        : columns_(std::move(columns)) {
        std::string head;
        for (std::size_t i = 0; i < columns_.size(); ++i) {
            if (i) head += ',';
            head += columns_[i];
        }
        body_ = head + "\n";
    }

    void row(const std::vector<double>& values) {
        std::string line;
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i) line += ',';
            line += format_double(values[i]);
        }
        body_ += line + "\n";
    }

    void row_mixed(const std::vector<std::string>& values) {
        std::string line;
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i) line += ',';
            line += values[i];
        }
        body_ += line + "\n";
    }

    const std::string& content() const { return body_; }

    void save(const std::string& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
        out << body_;
    }

  private:
    std::vector<std::string> columns_;
    std::string body_;
};

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

CsvTable read_csv(const std::string& path);

}  // namespace nrds

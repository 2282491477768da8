#include "ion/csv.hpp"

#include <cstdio>

namespace ion {

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : out_(path, std::ios::binary), path_(path), ncols_(header.size()) {
    if (!out_) throw Error("CsvWriter: cannot open " + path);
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out_ << ',';
        out_ << header[i];
    }
    out_ << '\n';
}

CsvWriter::~CsvWriter() = default;

void CsvWriter::sep() {
    if (col_) out_ << ',';
    ++col_;
}

void CsvWriter::put(double v) {
    sep();
    out_ << format_g17(v);
}

void CsvWriter::put(int v) {
    sep();
    out_ << v;
}

void CsvWriter::put(const std::string& s) {
    sep();
    bool quote = s.find_first_of(",\"\n") != std::string::npos;
    if (!quote) {
        out_ << s;
        return;
    }
    out_ << '"';
    for (char c : s) {
        if (c == '"') out_ << '"';
        out_ << c;
    }
    out_ << '"';
}

void CsvWriter::put(Cplx z) {
    put(z.real());
    put(z.imag());
}

void CsvWriter::end_row() {
    if (col_ != ncols_) throw Error("CsvWriter: column count mismatch in " + path_);
    out_ << '\n';
    col_ = 0;
}

} // namespace ion

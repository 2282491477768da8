#ifndef ION_CSV_HPP
#define ION_CSV_HPP

#include <fstream>
#include <string>
#include <vector>

#include "ion/types.hpp"

namespace ion {

// CSV writer, RFC-4180 style: header row, comma separation, LF line ends,
// quoting only when needed. Numbers render with 17 significant digits so
// that identical runs produce byte-identical files.
class CsvWriter {
  public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header);
    ~CsvWriter();

    void put(double v);
    void put(int v);
    void put(const std::string& s);
    void put(Cplx z); // two columns: re, im
    void end_row();
    const std::string& path() const { return path_; }

  private:
    std::ofstream out_;
    std::string path_;
    bool row_started_ = false;
    std::size_t ncols_, col_ = 0;
    void sep();
};

std::string format_g17(double v);

} // namespace ion

#endif

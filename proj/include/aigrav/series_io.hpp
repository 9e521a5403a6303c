#ifndef AIGRAV_SERIES_IO_HPP
#define AIGRAV_SERIES_IO_HPP

// TimeSeries persistence.
//
// CSV: header line `t_s,value`, one sample per line.
//
// Binary (little-endian, 32-byte header followed by `count` float64 samples):
//   offset  0  char[8]  magic "AIGRTS01"
//   offset  8  float64  fs (Hz)
//   offset 16  uint64   count
//   offset 24  float64  t0 (s)

#include <optional>
#include <utility>
#include <string>
#include <string_view>
#include <vector>

#include "aigrav/noise.hpp"

namespace aigrav {

inline constexpr char kSeriesMagic[8] = {'A', 'I', 'G', 'R', 'T', 'S', '0', '1'};

void write_series_csv(const std::string& path, const TimeSeries& series);
TimeSeries read_series_csv(const std::string& path);

void write_series_binary(const std::string& path, const TimeSeries& series);
TimeSeries read_series_binary(const std::string& path);

// Dispatches on the magic bytes.
TimeSeries read_series(const std::string& path);

// Shortest round-trip decimal form; identical across runs for identical input.
std::string format_number(double value);

// Comma-separated table with a one-line header. Blank lines are skipped and
// lines starting with '#' are read as "key=value" metadata. Columns listed in
// `text_columns` are kept verbatim, all others must parse as numbers.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;
  std::vector<std::vector<std::string>> text;
  std::vector<std::pair<std::string, std::string>> metadata;

  std::size_t rows() const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (!columns[i].empty()) return columns[i].size();
      if (!text[i].empty()) return text[i].size();
    }
    return 0;
  }
  const std::vector<double>& column(std::string_view name) const;
  const std::vector<std::string>& text_column(std::string_view name) const;
  std::optional<std::string> meta(std::string_view key) const;
};

CsvTable read_csv_table(const std::string& path, const std::vector<std::string>& text_columns = {});

}  // namespace aigrav

#endif  // AIGRAV_SERIES_IO_HPP

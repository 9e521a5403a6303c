#include "aigrav/series_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "aigrav/error.hpp"

namespace aigrav {

namespace {

template <typename T>
void put_le(std::ostream& out, T value) {
  static_assert(sizeof(T) == 8);
  auto bits = std::bit_cast<std::uint64_t>(value);
  std::array<char, 8> bytes{};
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xFF);
  out.write(bytes.data(), 8);
}

template <typename T>
T get_le(std::istream& in) {
  std::array<unsigned char, 8> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), 8);
  if (!in) throw ValidationError("truncated binary series", "input");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return std::bit_cast<T>(bits);
}

double parse_number(std::string_view text, const std::string& where) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r'))
    text.remove_suffix(1);
  double value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw ValidationError("not a number: '" + std::string(text) + "'", where);
  return value;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

const std::vector<double>& CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return columns[i];
  throw ValidationError("missing CSV column '" + std::string(name) + "'", "input");
}

const std::vector<std::string>& CsvTable::text_column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return text[i];
  throw ValidationError("missing CSV column '" + std::string(name) + "'", "input");
}

std::optional<std::string> CsvTable::meta(std::string_view key) const {
  for (const auto& [k, v] : metadata)
    if (k == key) return v;
  return std::nullopt;
}

CsvTable read_csv_table(const std::string& path, const std::vector<std::string>& text_columns) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path, "input");
  CsvTable table;
  std::vector<bool> is_text;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      // "# key=value" metadata
      const std::string body = line.substr(line.find_first_not_of("# "));
      const auto eq = body.find('=');
      if (eq != std::string::npos) table.metadata.emplace_back(body.substr(0, eq), body.substr(eq + 1));
      continue;
    }
    const auto fields = split(line);
    if (table.header.empty()) {
      for (auto f : fields) {
        table.header.emplace_back(f);
        is_text.push_back(std::find(text_columns.begin(), text_columns.end(), table.header.back()) !=
                          text_columns.end());
      }
      table.columns.resize(table.header.size());
      table.text.resize(table.header.size());
      continue;
    }
    const std::string where = path + ":" + std::to_string(line_no);
    if (fields.size() != table.header.size()) throw ValidationError("wrong field count", where);
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (is_text[i])
        table.text[i].emplace_back(fields[i]);
      else
        table.columns[i].push_back(parse_number(fields[i], where));
    }
  }
  if (table.header.empty()) throw ValidationError("empty CSV file", path);
  return table;
}

void write_series_csv(const std::string& path, const TimeSeries& series) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path, "output");
  out << "t_s,value\n";
  for (Eigen::Index i = 0; i < series.size(); ++i)
    out << format_number(series.time(i)) << ',' << format_number(series.samples[i]) << '\n';
}

TimeSeries read_series_csv(const std::string& path) {
  const CsvTable table = read_csv_table(path);
  const auto& t = table.column("t_s");
  const auto& v = table.column("value");
  if (v.size() < 2) throw ValidationError("need at least two samples to infer fs", path);
  TimeSeries series;
  series.t0 = t.front();
  series.fs = static_cast<double>(t.size() - 1) / (t.back() - t.front());
  series.samples = Eigen::Map<const Eigen::ArrayXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  series.validate();
  return series;
}

void write_series_binary(const std::string& path, const TimeSeries& series) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path, "output");
  out.write(kSeriesMagic, 8);
  put_le(out, series.fs);
  put_le(out, static_cast<std::uint64_t>(series.size()));
  put_le(out, series.t0);
  for (Eigen::Index i = 0; i < series.size(); ++i) put_le(out, series.samples[i]);
}

TimeSeries read_series_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path, "input");
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kSeriesMagic, 8) != 0)
    throw ValidationError("bad magic in binary series", path);
  TimeSeries series;
  series.fs = get_le<double>(in);
  const auto count = get_le<std::uint64_t>(in);
  series.t0 = get_le<double>(in);
  series.samples.resize(static_cast<Eigen::Index>(count));
  for (std::uint64_t i = 0; i < count; ++i) series.samples[static_cast<Eigen::Index>(i)] = get_le<double>(in);
  series.validate();
  return series;
}

TimeSeries read_series(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path, "input");
  char magic[8] = {};
  in.read(magic, 8);
  if (in && std::memcmp(magic, kSeriesMagic, 8) == 0) return read_series_binary(path);
  return read_series_csv(path);
}

}  // namespace aigrav

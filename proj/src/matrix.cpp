#include "notipkit/matrix.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "notipkit/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "binary container assumes a little-endian host");

namespace notip {

DataMatrix::DataMatrix(std::size_t n, std::size_t m, std::vector<double> values)
    : n_(n), m_(m), values_(std::move(values)) {
  if (n_ < 2) throw InvalidDesign("data matrix needs at least 2 subjects, got " + std::to_string(n_));
  if (m_ < 1) throw InvalidInput("data matrix needs at least 1 test");
  if (values_.size() != n_ * m_) {
    throw InvalidInput("data matrix holds " + std::to_string(values_.size()) +
                       " values, expected " + std::to_string(n_ * m_));
  }
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!std::isfinite(values_[k])) {
      throw InvalidInput("non-finite entry at subject " + std::to_string(k / m_) + ", test " +
                         std::to_string(k % m_));
    }
  }
}

DataMatrix DataMatrix::from_raw(RawMatrix raw) {
  return DataMatrix(raw.rows, raw.cols, std::move(raw.values));
}

namespace detail {

void write_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void write_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void write_f64(std::ostream& out, double v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

namespace {
void read_exact(std::istream& in, char* dst, std::size_t bytes, std::uint64_t& offset,
                const char* field) {
  in.read(dst, static_cast<std::streamsize>(bytes));
  const auto got = static_cast<std::uint64_t>(in.gcount());
  if (got != bytes) {
    throw FormatError(std::string("truncated input while reading ") + field, offset + got);
  }
  offset += bytes;
}
}  // namespace

std::uint32_t read_u32(std::istream& in, std::uint64_t& offset, const char* field) {
  std::uint32_t v = 0;
  read_exact(in, reinterpret_cast<char*>(&v), sizeof v, offset, field);
  return v;
}
std::uint64_t read_u64(std::istream& in, std::uint64_t& offset, const char* field) {
  std::uint64_t v = 0;
  read_exact(in, reinterpret_cast<char*>(&v), sizeof v, offset, field);
  return v;
}
void read_f64s(std::istream& in, std::uint64_t& offset, std::span<double> dst, const char* field) {
  read_exact(in, reinterpret_cast<char*>(dst.data()), dst.size_bytes(), offset, field);
}

}  // namespace detail

void write_matrix(std::ostream& out, std::size_t rows, std::size_t cols,
                  std::span<const double> values) {
  if (values.size() != rows * cols) throw InvalidInput("matrix shape does not match value count");
  out.write(kMatrixMagic, sizeof kMatrixMagic);
  detail::write_u64(out, rows);
  detail::write_u64(out, cols);
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size_bytes()));
}

RawMatrix read_matrix(std::istream& in) {
  std::uint64_t offset = 0;
  char magic[8];
  in.read(magic, sizeof magic);
  if (in.gcount() != static_cast<std::streamsize>(sizeof magic)) {
    throw FormatError("truncated input while reading magic", static_cast<std::uint64_t>(in.gcount()));
  }
  if (std::memcmp(magic, kMatrixMagic, sizeof magic) != 0) {
    throw FormatError("bad magic, not a matrix container", 0);
  }
  offset = sizeof magic;
  RawMatrix raw;
  raw.rows = detail::read_u64(in, offset, "row count");
  raw.cols = detail::read_u64(in, offset, "column count");
  if (raw.cols != 0 && raw.rows > (std::uint64_t{1} << 40) / raw.cols) {
    throw FormatError("implausible matrix dimensions", offset - 16);
  }
  raw.values.resize(raw.rows * raw.cols);
  detail::read_f64s(in, offset, raw.values, "matrix values");
  if (in.peek() != std::char_traits<char>::eof()) {
    throw FormatError("trailing bytes after matrix values", offset);
  }
  return raw;
}

void save_matrix(const std::string& path, std::size_t rows, std::size_t cols,
                 std::span<const double> values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot open " + path + " for writing");
  write_matrix(out, rows, cols, values);
  if (!out) throw InvalidInput("write failed for " + path);
}

RawMatrix load_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path);
  try {
    return read_matrix(in);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what(), e.offset());
  }
}

RawMatrix read_csv_matrix(std::istream& in) {
  RawMatrix raw;
  std::string line;
  std::uint64_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      while (end && (*end == ' ' || *end == '\t')) ++end;
      if (end == cell.c_str() || (end && *end != '\0')) {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (!numeric) {
      if (first) {
        first = false;
        continue;  // header
      }
      throw FormatError("non-numeric CSV cell on line " + std::to_string(line_no), line_no);
    }
    first = false;
    if (raw.rows == 0) {
      raw.cols = row.size();
    } else if (row.size() != raw.cols) {
      throw FormatError("CSV line " + std::to_string(line_no) + " has " + std::to_string(row.size()) +
                            " cells, expected " + std::to_string(raw.cols),
                        line_no);
    }
    raw.values.insert(raw.values.end(), row.begin(), row.end());
    ++raw.rows;
  }
  return raw;
}

RawMatrix load_csv_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path);
  try {
    return read_csv_matrix(in);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what(), e.offset());
  }
}

void write_csv_matrix(std::ostream& out, std::size_t rows, std::size_t cols,
                      std::span<const double> values) {
  const auto old_precision = out.precision(17);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      if (j) out << ',';
      out << values[i * cols + j];
    }
    out << '\n';
  }
  out.precision(old_precision);
}

RawMatrix load_any_matrix(const std::string& path) {
  if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0) return load_csv_matrix(path);
  return load_matrix(path);
}

}  // namespace notip

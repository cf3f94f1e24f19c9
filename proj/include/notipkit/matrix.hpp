#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace notip {

/// Dense row-major matrix of doubles, as stored in the binary container.
struct RawMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;
};

/// n subjects x m tests. Rows are subjects, columns are voxels.
class DataMatrix {
 public:
  DataMatrix() = default;
  /// Throws InvalidDesign when n < 2, InvalidInput on shape mismatch or non-finite entries.
  DataMatrix(std::size_t n, std::size_t m, std::vector<double> values);

  static DataMatrix from_raw(RawMatrix raw);

  std::size_t subjects() const noexcept { return n_; }
  std::size_t tests() const noexcept { return m_; }

  double operator()(std::size_t i, std::size_t j) const noexcept { return values_[i * m_ + j]; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {values_.data() + i * m_, m_};
  }
  std::span<const double> values() const noexcept { return values_; }

  friend bool operator==(const DataMatrix&, const DataMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::size_t m_ = 0;
  std::vector<double> values_;
};

// Binary container: 8-byte magic "NOTIPMAT", u64 rows, u64 cols, rows*cols f64, all
// little-endian, row-major.
inline constexpr char kMatrixMagic[8] = {'N', 'O', 'T', 'I', 'P', 'M', 'A', 'T'};

void write_matrix(std::ostream& out, std::size_t rows, std::size_t cols,
                  std::span<const double> values);
RawMatrix read_matrix(std::istream& in);

void save_matrix(const std::string& path, std::size_t rows, std::size_t cols,
                 std::span<const double> values);
RawMatrix load_matrix(const std::string& path);

/// CSV with one subject per line. A first line that does not parse as numbers is a header.
RawMatrix read_csv_matrix(std::istream& in);
RawMatrix load_csv_matrix(const std::string& path);
void write_csv_matrix(std::ostream& out, std::size_t rows, std::size_t cols,
                      std::span<const double> values);

/// Dispatches on extension: ".csv" is text, anything else the binary container.
RawMatrix load_any_matrix(const std::string& path);

namespace detail {
void write_u32(std::ostream& out, std::uint32_t v);
void write_u64(std::ostream& out, std::uint64_t v);
void write_f64(std::ostream& out, double v);
std::uint32_t read_u32(std::istream& in, std::uint64_t& offset, const char* field);
std::uint64_t read_u64(std::istream& in, std::uint64_t& offset, const char* field);
void read_f64s(std::istream& in, std::uint64_t& offset, std::span<double> dst, const char* field);
}  // namespace detail

}  // namespace notip

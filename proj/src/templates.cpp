#include "notipkit/templates.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>

#include "notipkit/errors.hpp"
#include "notipkit/parallel.hpp"

namespace notip {

ThresholdFamily::ThresholdFamily(std::vector<double> thresholds, std::string provenance)
    : t_(std::move(thresholds)), provenance_(std::move(provenance)) {
  for (std::size_t k = 0; k < t_.size(); ++k) {
    if (!(t_[k] >= 0.0 && t_[k] <= 1.0)) {
      throw InvalidInput("threshold t_" + std::to_string(k + 1) + " outside [0,1]");
    }
    if (k > 0 && t_[k] < t_[k - 1]) {
      throw InvalidInput("threshold family decreases at k=" + std::to_string(k + 1));
    }
  }
}

ThresholdFamily ThresholdFamily::truncated(std::size_t k_max) const {
  if (k_max > t_.size()) throw InvalidParameter("cannot truncate family beyond its length");
  return ThresholdFamily(std::vector<double>(t_.begin(), t_.begin() + static_cast<std::ptrdiff_t>(k_max)),
                         provenance_);
}

double simes_threshold(double lambda, std::size_t k, std::size_t m) {
  return std::min(1.0, lambda * static_cast<double>(k) / static_cast<double>(m));
}

ThresholdFamily simes_family(std::size_t m, double lambda, std::size_t k_max) {
  if (k_max > m) throw InvalidParameter("k_max exceeds the number of tests");
  if (!(lambda >= 0.0)) throw InvalidParameter("lambda must be >= 0");
  std::vector<double> t(k_max);
  for (std::size_t k = 1; k <= k_max; ++k) t[k - 1] = simes_threshold(lambda, k, m);
  return ThresholdFamily(std::move(t), "simes");
}

LearnedTemplate::LearnedTemplate(std::size_t B_train, std::size_t m, std::size_t k_max,
                                 std::vector<double> curves)
    : B_(B_train), m_(m), k_max_(k_max), curves_(std::move(curves)) {
  if (B_ == 0 || k_max_ == 0) throw InvalidInput("learned template must be non-empty");
  if (k_max_ > m_) throw InvalidInput("template k_max exceeds its test count");
  if (curves_.size() != B_ * k_max_) throw InvalidInput("template curve storage shape mismatch");
  for (std::size_t b = 0; b < B_; ++b) {
    for (std::size_t k = 0; k < k_max_; ++k) {
      const double v = curves_[b * k_max_ + k];
      if (!(v >= 0.0 && v <= 1.0)) throw InvalidInput("template value outside [0,1]");
      if (k > 0 && v < curves_[b * k_max_ + k - 1]) {
        throw InvalidInput("template curve " + std::to_string(b + 1) + " decreases in k");
      }
      if (b > 0 && v < curves_[(b - 1) * k_max_ + k]) {
        throw InvalidInput("template curves are not ordered in b at k=" + std::to_string(k + 1));
      }
    }
  }
}

ThresholdFamily LearnedTemplate::family(std::size_t b) const {
  if (b < 1 || b > B_) throw InvalidParameter("template curve index out of range");
  const auto c = curve(b);
  return ThresholdFamily(std::vector<double>(c.begin(), c.end()), "learned:" + std::to_string(b));
}

LearnedTemplate learn_template(const NullPValueMatrix& train_nulls, std::size_t k_max) {
  const std::size_t B = train_nulls.rows();
  const std::size_t m = train_nulls.tests();
  if (B == 0 || m == 0) throw InvalidInput("empty training null matrix");
  if (k_max < 1 || k_max > m) throw InvalidParameter("k_max must lie in [1, m]");

  std::vector<double> curves(B * k_max);
  parallel_for(k_max, [&](std::size_t k) {
    std::vector<double> column(B);
    for (std::size_t b = 0; b < B; ++b) column[b] = train_nulls.row(b)[k];
    std::sort(column.begin(), column.end());
    for (std::size_t b = 0; b < B; ++b) curves[b * k_max + k] = column[b];
  });
  return LearnedTemplate(B, m, k_max, std::move(curves));
}

void write_template(std::ostream& out, const LearnedTemplate& tpl) {
  out.write(kTemplateMagic, sizeof kTemplateMagic);
  detail::write_u32(out, kTemplateVersion);
  detail::write_u64(out, tpl.curve_count());
  detail::write_u64(out, tpl.tests());
  detail::write_u64(out, tpl.k_max());
  const auto v = tpl.values();
  out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size_bytes()));
}

LearnedTemplate read_template(std::istream& in) {
  char magic[8];
  in.read(magic, sizeof magic);
  if (in.gcount() != static_cast<std::streamsize>(sizeof magic)) {
    throw FormatError("truncated input while reading magic", static_cast<std::uint64_t>(in.gcount()));
  }
  if (std::memcmp(magic, kTemplateMagic, sizeof magic) != 0) {
    throw FormatError("bad magic, not a template file", 0);
  }
  std::uint64_t offset = sizeof magic;
  const std::uint32_t version = detail::read_u32(in, offset, "version");
  if (version != kTemplateVersion) throw UnsupportedVersion(version, kTemplateVersion, offset - 4);
  const std::uint64_t B = detail::read_u64(in, offset, "B_train");
  const std::uint64_t m = detail::read_u64(in, offset, "m");
  const std::uint64_t k_max = detail::read_u64(in, offset, "k_max");
  if (B == 0 || k_max == 0 || k_max > m || B > (std::uint64_t{1} << 40) / k_max) {
    throw FormatError("implausible template header", offset - 24);
  }
  std::vector<double> curves(B * k_max);
  detail::read_f64s(in, offset, curves, "template curves");
  if (in.peek() != std::char_traits<char>::eof()) {
    throw FormatError("trailing bytes after template curves", offset);
  }
  try {
    return LearnedTemplate(B, m, k_max, std::move(curves));
  } catch (const InvalidInput& e) {
    throw FormatError(std::string("template content invalid: ") + e.what(), offset);
  }
}

void save_template(const std::string& path, const LearnedTemplate& tpl) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot open " + path + " for writing");
  write_template(out, tpl);
  if (!out) throw InvalidInput("write failed for " + path);
}

LearnedTemplate load_template(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path);
  try {
    return read_template(in);
  } catch (const UnsupportedVersion&) {
    throw;
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what(), e.offset());
  }
}

void export_template_csv(std::ostream& out, const LearnedTemplate& tpl, std::size_t n_curves) {
  const std::size_t B = tpl.curve_count();
  std::vector<std::size_t> picks;
  if (n_curves == 0 || n_curves >= B) {
    for (std::size_t b = 1; b <= B; ++b) picks.push_back(b);
  } else {
    // evenly spaced quantile levels b / B, always including the last curve
    for (std::size_t i = 1; i <= n_curves; ++i) picks.push_back((i * B + n_curves - 1) / n_curves);
  }
  const auto old_precision = out.precision(17);
  out << "curve,quantile,k,threshold\n";
  for (const std::size_t b : picks) {
    const auto c = tpl.curve(b);
    const double level = static_cast<double>(b) / static_cast<double>(B);
    for (std::size_t k = 0; k < c.size(); ++k) {
      out << b << ',' << level << ',' << (k + 1) << ',' << c[k] << '\n';
    }
  }
  out.precision(old_precision);
}

}  // namespace notip

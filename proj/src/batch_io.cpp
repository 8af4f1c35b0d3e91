#include "onebit/batch_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "onebit/error.hpp"

namespace onebit {

namespace {

constexpr std::array<char, 4> kMagic = {'O', 'B', 'I', 'T'};
constexpr std::uint16_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "batch serialization assumes a little-endian host");

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw UsageError("batch file: unexpected end of data");
  return value;
}

void put_plane(std::ostream& out, const std::vector<std::int8_t>& plane, int m,
               std::int64_t n) {
  const auto row_bytes = static_cast<std::size_t>((n + 7) / 8);
  std::vector<std::uint8_t> row(row_bytes);
  for (int i = 0; i < m; ++i) {
    std::fill(row.begin(), row.end(), 0);
    for (std::int64_t t = 0; t < n; ++t) {
      if (plane[static_cast<std::size_t>(i * n + t)] > 0) {
        row[static_cast<std::size_t>(t / 8)] |= static_cast<std::uint8_t>(1u << (t % 8));
      }
    }
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size()));
  }
}

std::vector<std::int8_t> get_plane(std::istream& in, int m, std::int64_t n) {
  const auto row_bytes = static_cast<std::size_t>((n + 7) / 8);
  std::vector<std::uint8_t> row(row_bytes);
  std::vector<std::int8_t> plane(static_cast<std::size_t>(m * n));
  for (int i = 0; i < m; ++i) {
    in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row_bytes));
    if (!in) throw UsageError("batch file: truncated sign plane");
    for (std::int64_t t = 0; t < n; ++t) {
      const bool bit = (row[static_cast<std::size_t>(t / 8)] >> (t % 8)) & 1u;
      plane[static_cast<std::size_t>(i * n + t)] = bit ? 1 : -1;
    }
  }
  return plane;
}

void put_schedule(std::ostream& out, const ThresholdSchedule& s) {
  put<std::uint8_t>(out, static_cast<std::uint8_t>(s.kind()));
  switch (s.kind()) {
    case ScheduleKind::kZero: break;
    case ScheduleKind::kConstant: put<double>(out, s.value()); break;
    case ScheduleKind::kStaircase:
      put<std::uint32_t>(out, static_cast<std::uint32_t>(s.levels().size()));
      for (double v : s.levels()) put<double>(out, v);
      break;
    case ScheduleKind::kGaussianDither:
      put<double>(out, s.value());
      for (double sd : s.dither_stddev()) put<double>(out, sd);
      break;
    case ScheduleKind::kSine:
      put<double>(out, s.amplitude());
      put<double>(out, s.period());
      put<double>(out, s.value());
      break;
    case ScheduleKind::kExplicit:
      for (Eigen::Index i = 0; i < s.explicit_matrix().rows(); ++i) {
        for (Eigen::Index t = 0; t < s.explicit_matrix().cols(); ++t) {
          put<double>(out, s.explicit_matrix()(i, t));
        }
      }
      break;
  }
  for (double sc : s.scale()) put<double>(out, sc);
}

ThresholdSchedule get_schedule(std::istream& in, int m, std::int64_t n) {
  const auto raw_kind = get<std::uint8_t>(in);
  if (raw_kind > static_cast<std::uint8_t>(ScheduleKind::kExplicit)) {
    throw UsageError("batch file: unknown schedule kind " + std::to_string(raw_kind));
  }
  const auto kind = static_cast<ScheduleKind>(raw_kind);
  double value = 0.0, amplitude = 0.0, period = 1.0;
  std::vector<double> levels, stddev;
  Eigen::MatrixXd values;
  switch (kind) {
    case ScheduleKind::kZero: break;
    case ScheduleKind::kConstant: value = get<double>(in); break;
    case ScheduleKind::kStaircase: {
      const auto l = get<std::uint32_t>(in);
      if (l == 0 || l > static_cast<std::uint64_t>(n)) {
        throw UsageError("batch file: bad staircase level count");
      }
      for (std::uint32_t k = 0; k < l; ++k) levels.push_back(get<double>(in));
      break;
    }
    case ScheduleKind::kGaussianDither:
      value = get<double>(in);
      for (int i = 0; i < m; ++i) stddev.push_back(get<double>(in));
      break;
    case ScheduleKind::kSine:
      amplitude = get<double>(in);
      period = get<double>(in);
      value = get<double>(in);
      break;
    case ScheduleKind::kExplicit:
      values.resize(m, n);
      for (int i = 0; i < m; ++i) {
        for (std::int64_t t = 0; t < n; ++t) values(i, t) = get<double>(in);
      }
      break;
  }
  std::vector<double> scale;
  for (int i = 0; i < m; ++i) scale.push_back(get<double>(in));
  return ThresholdSchedule::from_parts(kind, m, n, value, std::move(levels), amplitude,
                                       period, std::move(stddev), std::move(scale),
                                       std::move(values));
}

}  // namespace

void write_batch_binary(std::ostream& out, const OneBitBatch& batch) {
  batch.validate();
  out.write(kMagic.data(), kMagic.size());
  put<std::uint16_t>(out, kVersion);
  put<std::uint8_t>(out, batch.is_complex() ? 1 : 0);
  put<std::uint8_t>(out, 0);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(batch.channels));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(batch.samples));
  put<std::uint64_t>(out, batch.seed);
  put_schedule(out, batch.schedule);
  put_plane(out, batch.re, batch.channels, batch.samples);
  if (batch.is_complex()) put_plane(out, batch.im, batch.channels, batch.samples);
  if (!out) throw Error("batch file: write failed");
}

OneBitBatch read_batch_binary(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw UsageError("batch file: bad magic bytes");
  const auto version = get<std::uint16_t>(in);
  if (version != kVersion) {
    throw UsageError("batch file: unsupported version " + std::to_string(version));
  }
  const auto flags = get<std::uint8_t>(in);
  get<std::uint8_t>(in);
  OneBitBatch batch;
  batch.channels = static_cast<int>(get<std::uint32_t>(in));
  batch.samples = static_cast<std::int64_t>(get<std::uint64_t>(in));
  batch.seed = get<std::uint64_t>(in);
  if (batch.channels < 1 || batch.samples < 1) {
    throw UsageError("batch file: empty dimensions");
  }
  batch.schedule = get_schedule(in, batch.channels, batch.samples);
  batch.re = get_plane(in, batch.channels, batch.samples);
  if (flags & 1u) batch.im = get_plane(in, batch.channels, batch.samples);
  return batch;
}

void save_batch(const std::string& path, const OneBitBatch& batch) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot open '" + path + "' for writing");
  write_batch_binary(out, batch);
}

OneBitBatch load_batch(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open '" + path + "'");
  return read_batch_binary(in);
}

void write_batch_csv(std::ostream& out, const OneBitBatch& batch) {
  const int m = batch.channels;
  out << "t";
  for (int i = 1; i <= m; ++i) out << ",x" << i;
  if (batch.is_complex()) {
    for (int i = 1; i <= m; ++i) out << ",xi" << i;
  }
  for (int i = 1; i <= m; ++i) out << ",v" << i;
  out << '\n';
  for (std::int64_t t = 0; t < batch.samples; ++t) {
    out << t;
    for (int i = 0; i < m; ++i) out << ',' << static_cast<int>(batch.sign(i, t));
    if (batch.is_complex()) {
      for (int i = 0; i < m; ++i) out << ',' << static_cast<int>(batch.sign_im(i, t));
    }
    for (int i = 0; i < m; ++i) out << ',' << batch.schedule.nominal(i, t);
    out << '\n';
  }
}

}  // namespace onebit

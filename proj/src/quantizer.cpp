#include "onebit/quantizer.hpp"

#include <cmath>
#include <string>

#include "onebit/error.hpp"
#include "onebit/rng.hpp"

namespace onebit {

namespace {

// Stream ids reserved for dither draws so they never alias signal streams.
constexpr std::uint64_t kDitherStreamRe = 0xD1'0000'0000ull;
constexpr std::uint64_t kDitherStreamIm = 0xD2'0000'0000ull;

std::vector<std::int8_t> quantize_plane(const Eigen::MatrixXd& y,
                                        const ThresholdSchedule& schedule,
                                        std::uint64_t dither_seed, std::uint64_t stream) {
  if (y.rows() != schedule.channels() || y.cols() != schedule.samples()) {
    throw UsageError("quantize: data is " + std::to_string(y.rows()) + "x" +
                     std::to_string(y.cols()) + " but schedule is " +
                     std::to_string(schedule.channels()) + "x" +
                     std::to_string(schedule.samples()));
  }
  const int m = static_cast<int>(y.rows());
  const std::int64_t n = y.cols();
  std::vector<std::int8_t> out(static_cast<std::size_t>(m * n));
  const bool dither = schedule.is_random();
  for (int i = 0; i < m; ++i) {
    Rng rng(dither_seed, stream + static_cast<std::uint64_t>(i));
    const double sd = dither ? schedule.dither_stddev()[static_cast<std::size_t>(i)] : 0.0;
    for (std::int64_t t = 0; t < n; ++t) {
      double v = schedule.nominal(i, t);
      if (dither) v += sd * rng.normal();
      out[static_cast<std::size_t>(i * n + t)] = y(i, t) - v >= 0.0 ? 1 : -1;
    }
  }
  return out;
}

Eigen::MatrixXd standard_normals(Eigen::Index rows, std::int64_t cols, std::uint64_t seed,
                                 std::uint64_t stream) {
  Rng rng(seed, stream);
  Eigen::MatrixXd z(rows, cols);
  for (std::int64_t t = 0; t < cols; ++t) {
    for (Eigen::Index i = 0; i < rows; ++i) z(i, t) = rng.normal();
  }
  return z;
}

}  // namespace

Eigen::Matrix2d PairParams::covariance() const {
  Eigen::Matrix2d c;
  c << sigma1 * sigma1, sigma12, sigma12, sigma2 * sigma2;
  return c;
}

void PairParams::validate() const {
  if (!(sigma1 > 0.0) || !(sigma2 > 0.0) || !std::isfinite(sigma1) ||
      !std::isfinite(sigma2)) {
    throw UsageError("PairParams: standard deviations must be positive and finite");
  }
  if (!std::isfinite(sigma12) || !(std::abs(sigma12) < sigma1 * sigma2)) {
    throw UsageError("PairParams: |sigma12| must be < sigma1*sigma2");
  }
}

OneBitBatch OneBitBatch::widely_linear() const {
  if (!is_complex()) throw UsageError("widely_linear: batch is real-valued");
  OneBitBatch out;
  out.channels = 2 * channels;
  out.samples = samples;
  out.re = re;
  out.re.insert(out.re.end(), im.begin(), im.end());
  out.schedule = schedule.stacked_real_imag();
  out.seed = seed;
  return out;
}

OneBitBatch OneBitBatch::select(const std::vector<int>& idx) const {
  if (is_complex()) throw UsageError("select: expects a real batch");
  OneBitBatch out;
  out.channels = static_cast<int>(idx.size());
  out.samples = samples;
  out.schedule = schedule.select(idx);
  out.seed = seed;
  out.re.reserve(static_cast<std::size_t>(out.channels * samples));
  for (int c : idx) {
    const auto begin = re.begin() + static_cast<std::ptrdiff_t>(c * samples);
    out.re.insert(out.re.end(), begin, begin + static_cast<std::ptrdiff_t>(samples));
  }
  return out;
}

void OneBitBatch::validate() const {
  const auto expected = static_cast<std::size_t>(channels * samples);
  if (channels < 1 || samples < 1 || re.size() != expected ||
      (!im.empty() && im.size() != expected)) {
    throw UsageError("OneBitBatch: sign planes do not match M x N");
  }
  if (schedule.channels() != channels || schedule.samples() != samples) {
    throw UsageError("OneBitBatch: schedule shape does not match the data");
  }
  for (auto s : re) {
    if (s != 1 && s != -1) throw UsageError("OneBitBatch: entries must be +-1");
  }
  for (auto s : im) {
    if (s != 1 && s != -1) throw UsageError("OneBitBatch: entries must be +-1");
  }
}

Eigen::MatrixXd sample_gaussian(const Eigen::MatrixXd& covariance, std::int64_t samples,
                                std::uint64_t seed, std::uint64_t stream) {
  if (samples < 1) throw UsageError("sample_gaussian: samples must be >= 1");
  if (covariance.rows() != covariance.cols() || covariance.rows() < 1) {
    throw UsageError("sample_gaussian: covariance must be square");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(covariance);
  if (llt.info() != Eigen::Success) {
    throw MatrixError("sample_gaussian: covariance is not positive definite");
  }
  const Eigen::MatrixXd z = standard_normals(covariance.rows(), samples, seed, stream);
  return llt.matrixL() * z;
}

Eigen::MatrixXd sample_gaussian(const PairParams& params, std::int64_t samples,
                                std::uint64_t seed, std::uint64_t stream) {
  params.validate();
  return sample_gaussian(Eigen::MatrixXd(params.covariance()), samples, seed, stream);
}

Eigen::MatrixXcd sample_complex_gaussian(const Eigen::MatrixXcd& covariance,
                                         std::int64_t samples, std::uint64_t seed,
                                         std::uint64_t stream) {
  if (samples < 1) throw UsageError("sample_complex_gaussian: samples must be >= 1");
  Eigen::LLT<Eigen::MatrixXcd> llt(covariance);
  if (llt.info() != Eigen::Success) {
    throw MatrixError("sample_complex_gaussian: covariance is not positive definite");
  }
  const Eigen::Index m = covariance.rows();
  const Eigen::MatrixXd z = standard_normals(2 * m, samples, seed, stream);
  Eigen::MatrixXcd w(m, samples);
  const double s = std::sqrt(0.5);
  for (std::int64_t t = 0; t < samples; ++t) {
    for (Eigen::Index i = 0; i < m; ++i) {
      w(i, t) = {s * z(2 * i, t), s * z(2 * i + 1, t)};
    }
  }
  return llt.matrixL() * w;
}

OneBitBatch quantize_real(const Eigen::MatrixXd& y, const ThresholdSchedule& schedule,
                          std::uint64_t dither_seed) {
  OneBitBatch out;
  out.channels = static_cast<int>(y.rows());
  out.samples = y.cols();
  out.re = quantize_plane(y, schedule, dither_seed, kDitherStreamRe);
  out.schedule = schedule;
  out.seed = dither_seed;
  return out;
}

OneBitBatch quantize_complex(const Eigen::MatrixXcd& y, const ThresholdSchedule& schedule,
                             std::uint64_t dither_seed) {
  OneBitBatch out;
  out.channels = static_cast<int>(y.rows());
  out.samples = y.cols();
  out.re = quantize_plane(y.real(), schedule, dither_seed, kDitherStreamRe);
  out.im = quantize_plane(y.imag(), schedule, dither_seed, kDitherStreamIm);
  out.schedule = schedule;
  out.seed = dither_seed;
  return out;
}

}  // namespace onebit

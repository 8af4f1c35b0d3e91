#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace onebit {

enum class ScheduleKind : std::uint8_t {
  kZero = 0,
  kConstant = 1,
  kStaircase = 2,
  kGaussianDither = 3,
  kSine = 4,
  kExplicit = 5,
};

std::string to_string(ScheduleKind kind);
ScheduleKind schedule_kind_from_string(const std::string& name);

// Threshold values v_i(t) for M channels over N samples.
//
// Every kind except kGaussianDither is deterministic and recorded exactly;
// nominal() is then the threshold the quantizer used. For dither only the
// mean and per-channel standard deviation are recorded, and nominal()
// returns the mean.
//
// A per-channel scale multiplies thresholds (and dither deviations), which
// is how channel-dependent thresholds v_1(t) != v_2(t) are expressed.
class ThresholdSchedule {
 public:
  static ThresholdSchedule zero(int channels, std::int64_t samples);
  static ThresholdSchedule constant(int channels, std::int64_t samples, double value);
  // `levels.size()` equal sub-intervals; samples must be divisible by it.
  static ThresholdSchedule staircase(int channels, std::int64_t samples,
                                     std::vector<double> levels);
  static ThresholdSchedule gaussian_dither(int channels, std::int64_t samples,
                                           double mean, std::vector<double> stddev);
  // offset + amplitude * sin(2 pi t / period)
  static ThresholdSchedule sine(int channels, std::int64_t samples, double amplitude,
                                double period, double offset = 0.0);
  // Arbitrary M x N threshold matrix.
  static ThresholdSchedule explicit_values(Eigen::MatrixXd values);

  ScheduleKind kind() const { return kind_; }
  int channels() const { return channels_; }
  std::int64_t samples() const { return samples_; }

  double nominal(int channel, std::int64_t t) const;
  Eigen::MatrixXd materialize() const;

  bool is_random() const { return kind_ == ScheduleKind::kGaussianDither; }
  // True when every recorded threshold is exactly zero and no dither is applied.
  bool is_zero() const;
  // Shared constant value for kConstant and the dither mean for
  // kGaussianDither, when the per-channel scale is uniform.
  std::optional<double> constant_value() const;

  // Per-channel dither standard deviation (empty unless kGaussianDither).
  const std::vector<double>& dither_stddev() const { return dither_stddev_; }

  // Returns a copy with thresholds (and dither deviations) of channel i
  // multiplied by scale[i].
  ThresholdSchedule scaled(const std::vector<double>& scale) const;

  // Restriction to a subset of channels, in the given order.
  ThresholdSchedule select(const std::vector<int>& channels) const;

  // Schedule for the widely linear stacking [Re; Im]: 2M channels, where
  // channel i and i + M share the thresholds of channel i.
  ThresholdSchedule stacked_real_imag() const;

  // Kind-specific payload, for serialization.
  double value() const { return value_; }
  const std::vector<double>& levels() const { return levels_; }
  double amplitude() const { return amplitude_; }
  double period() const { return period_; }
  const std::vector<double>& scale() const { return scale_; }
  const Eigen::MatrixXd& explicit_matrix() const { return explicit_; }

  // Reassembles a schedule from its serialized fields; validates them.
  static ThresholdSchedule from_parts(ScheduleKind kind, int channels,
                                      std::int64_t samples, double value,
                                      std::vector<double> levels, double amplitude,
                                      double period, std::vector<double> dither_stddev,
                                      std::vector<double> scale,
                                      Eigen::MatrixXd explicit_values);

  bool operator==(const ThresholdSchedule& other) const;

 private:
  ThresholdSchedule(ScheduleKind kind, int channels, std::int64_t samples);
  double base(std::int64_t t, int channel) const;

  ScheduleKind kind_;
  int channels_;
  std::int64_t samples_;
  double value_ = 0.0;  // constant value, dither mean, or sine offset
  std::vector<double> levels_;
  double amplitude_ = 0.0;
  double period_ = 1.0;
  std::vector<double> dither_stddev_;
  std::vector<double> scale_;
  Eigen::MatrixXd explicit_;
};

}  // namespace onebit

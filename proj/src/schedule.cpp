#include "onebit/schedule.hpp"

#include <cmath>
#include <utility>

#include "onebit/error.hpp"
#include "onebit/gauss.hpp"

namespace onebit {

std::string to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::kZero: return "zero";
    case ScheduleKind::kConstant: return "constant";
    case ScheduleKind::kStaircase: return "staircase";
    case ScheduleKind::kGaussianDither: return "gaussian_dither";
    case ScheduleKind::kSine: return "sine";
    case ScheduleKind::kExplicit: return "explicit";
  }
  return "unknown";
}

ScheduleKind schedule_kind_from_string(const std::string& name) {
  if (name == "zero") return ScheduleKind::kZero;
  if (name == "constant") return ScheduleKind::kConstant;
  if (name == "staircase") return ScheduleKind::kStaircase;
  if (name == "gaussian_dither" || name == "dither") return ScheduleKind::kGaussianDither;
  if (name == "sine") return ScheduleKind::kSine;
  if (name == "explicit") return ScheduleKind::kExplicit;
  throw UsageError("unknown schedule kind '" + name + "'");
}

ThresholdSchedule::ThresholdSchedule(ScheduleKind kind, int channels, std::int64_t samples)
    : kind_(kind), channels_(channels), samples_(samples),
      scale_(static_cast<std::size_t>(channels > 0 ? channels : 0), 1.0) {
  if (channels < 1) throw UsageError("schedule: channels must be >= 1");
  if (samples < 1) throw UsageError("schedule: samples must be >= 1");
}

ThresholdSchedule ThresholdSchedule::zero(int channels, std::int64_t samples) {
  return ThresholdSchedule(ScheduleKind::kZero, channels, samples);
}

ThresholdSchedule ThresholdSchedule::constant(int channels, std::int64_t samples,
                                              double value) {
  if (!std::isfinite(value)) throw UsageError("constant schedule: non-finite value");
  ThresholdSchedule s(ScheduleKind::kConstant, channels, samples);
  s.value_ = value;
  return s;
}

ThresholdSchedule ThresholdSchedule::staircase(int channels, std::int64_t samples,
                                               std::vector<double> levels) {
  if (levels.empty()) throw UsageError("staircase schedule: no levels");
  if (samples % static_cast<std::int64_t>(levels.size()) != 0) {
    throw UsageError("staircase schedule: N=" + std::to_string(samples) +
                     " not divisible by l=" + std::to_string(levels.size()));
  }
  for (double v : levels) {
    if (!std::isfinite(v)) throw UsageError("staircase schedule: non-finite level");
  }
  ThresholdSchedule s(ScheduleKind::kStaircase, channels, samples);
  s.levels_ = std::move(levels);
  return s;
}

ThresholdSchedule ThresholdSchedule::gaussian_dither(int channels, std::int64_t samples,
                                                     double mean,
                                                     std::vector<double> stddev) {
  if (stddev.size() == 1 && channels > 1) stddev.assign(channels, stddev.front());
  if (static_cast<int>(stddev.size()) != channels) {
    throw UsageError("dither schedule: need one standard deviation per channel");
  }
  for (double sd : stddev) {
    if (!(sd >= 0.0) || !std::isfinite(sd)) {
      throw UsageError("dither schedule: standard deviation must be finite and >= 0");
    }
  }
  ThresholdSchedule s(ScheduleKind::kGaussianDither, channels, samples);
  s.value_ = mean;
  s.dither_stddev_ = std::move(stddev);
  return s;
}

ThresholdSchedule ThresholdSchedule::sine(int channels, std::int64_t samples,
                                          double amplitude, double period, double offset) {
  if (!(period > 0.0)) throw UsageError("sine schedule: period must be > 0");
  ThresholdSchedule s(ScheduleKind::kSine, channels, samples);
  s.amplitude_ = amplitude;
  s.period_ = period;
  s.value_ = offset;
  return s;
}

ThresholdSchedule ThresholdSchedule::explicit_values(Eigen::MatrixXd values) {
  if (!values.allFinite()) throw UsageError("explicit schedule: non-finite value");
  ThresholdSchedule s(ScheduleKind::kExplicit, static_cast<int>(values.rows()),
                      values.cols());
  s.explicit_ = std::move(values);
  return s;
}

double ThresholdSchedule::base(std::int64_t t, int channel) const {
  switch (kind_) {
    case ScheduleKind::kZero: return 0.0;
    case ScheduleKind::kConstant:
    case ScheduleKind::kGaussianDither: return value_;
    case ScheduleKind::kStaircase: {
      const std::int64_t n = samples_ / static_cast<std::int64_t>(levels_.size());
      return levels_[static_cast<std::size_t>(t / n)];
    }
    case ScheduleKind::kSine:
      return value_ + amplitude_ * std::sin(2.0 * kPi * static_cast<double>(t) / period_);
    case ScheduleKind::kExplicit: return explicit_(channel, t);
  }
  return 0.0;
}

double ThresholdSchedule::nominal(int channel, std::int64_t t) const {
  if (channel < 0 || channel >= channels_ || t < 0 || t >= samples_) {
    throw UsageError("schedule: index out of range");
  }
  return scale_[static_cast<std::size_t>(channel)] * base(t, channel);
}

Eigen::MatrixXd ThresholdSchedule::materialize() const {
  Eigen::MatrixXd out(channels_, samples_);
  for (std::int64_t t = 0; t < samples_; ++t) {
    for (int i = 0; i < channels_; ++i) out(i, t) = nominal(i, t);
  }
  return out;
}

bool ThresholdSchedule::is_zero() const {
  switch (kind_) {
    case ScheduleKind::kZero: return true;
    case ScheduleKind::kConstant: return value_ == 0.0;
    case ScheduleKind::kStaircase:
      for (double v : levels_) {
        if (v != 0.0) return false;
      }
      return true;
    case ScheduleKind::kGaussianDither: return false;
    case ScheduleKind::kSine: return value_ == 0.0 && amplitude_ == 0.0;
    case ScheduleKind::kExplicit: return (explicit_.array() == 0.0).all();
  }
  return false;
}

std::optional<double> ThresholdSchedule::constant_value() const {
  if (kind_ != ScheduleKind::kConstant && kind_ != ScheduleKind::kGaussianDither) {
    return std::nullopt;
  }
  for (double s : scale_) {
    if (s != scale_.front()) return std::nullopt;
  }
  return scale_.front() * value_;
}

ThresholdSchedule ThresholdSchedule::scaled(const std::vector<double>& scale) const {
  if (static_cast<int>(scale.size()) != channels_) {
    throw UsageError("schedule: scale vector must have one entry per channel");
  }
  ThresholdSchedule out = *this;
  for (int i = 0; i < channels_; ++i) {
    const auto k = static_cast<std::size_t>(i);
    out.scale_[k] *= scale[k];
    if (!out.dither_stddev_.empty()) out.dither_stddev_[k] *= std::abs(scale[k]);
  }
  return out;
}

ThresholdSchedule ThresholdSchedule::select(const std::vector<int>& channels) const {
  if (channels.empty()) throw UsageError("schedule: empty channel selection");
  ThresholdSchedule out = *this;
  out.channels_ = static_cast<int>(channels.size());
  out.scale_.clear();
  out.dither_stddev_.clear();
  if (kind_ == ScheduleKind::kExplicit) out.explicit_.resize(out.channels_, samples_);
  for (std::size_t j = 0; j < channels.size(); ++j) {
    const int c = channels[j];
    if (c < 0 || c >= channels_) throw UsageError("schedule: channel out of range");
    out.scale_.push_back(scale_[static_cast<std::size_t>(c)]);
    if (!dither_stddev_.empty()) {
      out.dither_stddev_.push_back(dither_stddev_[static_cast<std::size_t>(c)]);
    }
    if (kind_ == ScheduleKind::kExplicit) {
      out.explicit_.row(static_cast<Eigen::Index>(j)) = explicit_.row(c);
    }
  }
  return out;
}

ThresholdSchedule ThresholdSchedule::stacked_real_imag() const {
  std::vector<int> idx;
  for (int rep = 0; rep < 2; ++rep) {
    for (int i = 0; i < channels_; ++i) idx.push_back(i);
  }
  return select(idx);
}

ThresholdSchedule ThresholdSchedule::from_parts(
    ScheduleKind kind, int channels, std::int64_t samples, double value,
    std::vector<double> levels, double amplitude, double period,
    std::vector<double> dither_stddev, std::vector<double> scale,
    Eigen::MatrixXd explicit_values) {
  ThresholdSchedule s = [&] {
    switch (kind) {
      case ScheduleKind::kZero: return zero(channels, samples);
      case ScheduleKind::kConstant: return constant(channels, samples, value);
      case ScheduleKind::kStaircase: return staircase(channels, samples, std::move(levels));
      case ScheduleKind::kGaussianDither:
        return gaussian_dither(channels, samples, value, std::move(dither_stddev));
      case ScheduleKind::kSine: return sine(channels, samples, amplitude, period, value);
      case ScheduleKind::kExplicit:
        if (explicit_values.rows() != channels || explicit_values.cols() != samples) {
          throw UsageError("explicit schedule: matrix shape mismatch");
        }
        return ThresholdSchedule::explicit_values(std::move(explicit_values));
    }
    throw UsageError("schedule: unknown kind");
  }();
  if (static_cast<int>(scale.size()) != channels) {
    throw UsageError("schedule: scale vector must have one entry per channel");
  }
  s.scale_ = std::move(scale);
  return s;
}

bool ThresholdSchedule::operator==(const ThresholdSchedule& o) const {
  return kind_ == o.kind_ && channels_ == o.channels_ && samples_ == o.samples_ &&
         value_ == o.value_ && levels_ == o.levels_ && amplitude_ == o.amplitude_ &&
         period_ == o.period_ && dither_stddev_ == o.dither_stddev_ &&
         scale_ == o.scale_ && explicit_ == o.explicit_;
}

}  // namespace onebit

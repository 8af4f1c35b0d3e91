#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "onebit/bench.hpp"
#include "onebit/recovery.hpp"

namespace onebit {

// Uniform linear array with far-field narrowband sources. Element m has
// steering phase exp(i 2 pi spacing m sin(theta)), spacing in wavelengths.
struct ArrayScenario {
  int sensors = 6;
  std::vector<double> angles_deg{15.0, 45.0, 75.0};
  double snr_db = 20.0;  // per-sensor total source power / noise power
  std::int64_t snapshots = 10000;
  bool coherent = true;  // one waveform, unit-modulus gains per source
  double spacing = 0.5;

  void validate() const;
  int sources() const { return static_cast<int>(angles_deg.size()); }
  double noise_power() const;
  // Standard deviation of each real component of the received data.
  double component_rms() const;
};

Eigen::MatrixXcd steering_matrix(const ArrayScenario& scenario);

// Unit-modulus source gains of one trial (all ones when incoherent).
Eigen::VectorXcd source_gains(const ArrayScenario& scenario, std::uint64_t seed);

// Population covariance E[y y^H] for the given gains.
Eigen::MatrixXcd population_covariance(const ArrayScenario& scenario,
                                       const Eigen::VectorXcd& gains);

// y(t) = A s(t) + n(t), M x N.
Eigen::MatrixXcd gen_snapshots(const ArrayScenario& scenario, std::uint64_t seed);

struct DoaOptions {
  int subarray = 0;             // 0: M - 1
  bool forward_backward = true;
  double spacing = 0.5;
  // sensor_order[k] is the array element index of covariance row k;
  // empty for the natural order.
  std::vector<int> sensor_order;
};

// Spatial smoothing followed by root-MUSIC. Angles in degrees, ascending.
// Throws NumericalError when the smoothed signal subspace has collapsed.
std::vector<double> doa_estimate(const Eigen::MatrixXcd& covariance, int n_sources,
                                 const DoaOptions& options = {});

struct DoaMethod {
  std::string label;
  Method method = Method::kTimeVarying;
  ScheduleSpec schedule;  // thresholds in units of ArrayScenario::component_rms()
  bool unquantized = false;
};

// Default front-ends: staircase, constant, dither and the unquantized
// sample covariance.
std::vector<DoaMethod> default_doa_methods();

struct DoaTrial {
  int trial = 0;
  std::string method;
  bool ok = false;
  std::vector<double> angles;
  std::string error;
};

struct DoaResult {
  ArrayScenario scenario;
  std::vector<DoaMethod> methods;
  std::vector<DoaTrial> trials;
  std::vector<ResultRow> rows;  // per method and source: mse in deg^2
  std::uint64_t base_seed = 0;

  // Root-mean-square angle error of `method` for source k (degrees).
  double rmse(const std::string& method, int source) const;
};

DoaResult doa_pipeline(const ArrayScenario& scenario, const std::vector<DoaMethod>& methods,
                       int trials, std::uint64_t seed, int threads = 0);

void write_doa_csv(std::ostream& out, const DoaResult& result);
void write_doa_angles_csv(std::ostream& out, const DoaResult& result);

}  // namespace onebit

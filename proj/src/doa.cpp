#include "onebit/doa.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <ostream>
#include <thread>

#include <unsupported/Eigen/Polynomials>

#include "onebit/error.hpp"
#include "onebit/gauss.hpp"
#include "onebit/report_io.hpp"
#include "onebit/rng.hpp"

namespace onebit {

namespace {

constexpr double kDeg = kPi / 180.0;

std::complex<double> circular_normal(Rng& rng) {
  const double re = rng.normal();
  const double im = rng.normal();
  return {re / std::sqrt(2.0), im / std::sqrt(2.0)};
}

ScheduleSpec scaled_spec(ScheduleSpec s, double scale) {
  s.value *= scale;
  for (double& v : s.levels) v *= scale;
  s.amplitude *= scale;
  s.dither_variance *= scale * scale;
  return s;
}

Eigen::MatrixXcd smooth(const Eigen::MatrixXcd& r, int l, bool fb) {
  const int m = static_cast<int>(r.rows());
  const int j = m - l + 1;
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(l, l);
  for (int k = 0; k < j; ++k) out += r.block(k, k, l, l);
  out /= static_cast<double>(j);
  if (fb) {
    const Eigen::MatrixXcd flipped = out.conjugate().reverse();
    out = 0.5 * (out + flipped);
  }
  return out;
}

}  // namespace

void ArrayScenario::validate() const {
  if (sensors < 2) throw UsageError("scenario: need at least two sensors");
  if (angles_deg.empty()) throw UsageError("scenario: no sources");
  if (sources() >= sensors) throw UsageError("scenario: need more sensors than sources");
  if (snapshots < 1) throw UsageError("scenario: snapshots must be >= 1");
  if (!(spacing > 0.0)) throw UsageError("scenario: spacing must be positive");
  for (std::size_t a = 0; a < angles_deg.size(); ++a) {
    if (std::abs(angles_deg[a]) > 90.0) throw UsageError("scenario: angle outside [-90, 90]");
    for (std::size_t b = a + 1; b < angles_deg.size(); ++b) {
      if (angles_deg[a] == angles_deg[b]) throw UsageError("scenario: angles must be distinct");
    }
  }
}

double ArrayScenario::noise_power() const {
  return static_cast<double>(sources()) / std::pow(10.0, snr_db / 10.0);
}

double ArrayScenario::component_rms() const {
  return std::sqrt((static_cast<double>(sources()) + noise_power()) / 2.0);
}

Eigen::MatrixXcd steering_matrix(const ArrayScenario& s) {
  Eigen::MatrixXcd a(s.sensors, s.sources());
  for (int k = 0; k < s.sources(); ++k) {
    const double phase = 2.0 * kPi * s.spacing * std::sin(s.angles_deg[k] * kDeg);
    for (int m = 0; m < s.sensors; ++m) a(m, k) = std::polar(1.0, phase * m);
  }
  return a;
}

Eigen::VectorXcd source_gains(const ArrayScenario& s, std::uint64_t seed) {
  Eigen::VectorXcd g = Eigen::VectorXcd::Ones(s.sources());
  if (!s.coherent) return g;
  Rng rng(seed, 2);
  for (int k = 0; k < s.sources(); ++k) g[k] = std::polar(1.0, 2.0 * kPi * rng.uniform());
  return g;
}

Eigen::MatrixXcd population_covariance(const ArrayScenario& s, const Eigen::VectorXcd& gains) {
  s.validate();
  const Eigen::MatrixXcd a = steering_matrix(s);
  Eigen::MatrixXcd cov;
  if (s.coherent) {
    const Eigen::VectorXcd b = a * gains;
    cov = b * b.adjoint();
  } else {
    cov = a * a.adjoint();
  }
  cov.diagonal().array() += s.noise_power();
  return cov;
}

Eigen::MatrixXcd gen_snapshots(const ArrayScenario& s, std::uint64_t seed) {
  s.validate();
  const Eigen::MatrixXcd a = steering_matrix(s);
  const Eigen::VectorXcd g = source_gains(s, seed);
  const std::int64_t n = s.snapshots;
  const int k = s.sources();
  Eigen::MatrixXcd src(s.coherent ? 1 : k, n);
  Rng sig(seed, 0);
  for (std::int64_t t = 0; t < n; ++t) {
    for (Eigen::Index r = 0; r < src.rows(); ++r) src(r, t) = circular_normal(sig);
  }
  Eigen::MatrixXcd y = s.coherent ? Eigen::MatrixXcd((a * g) * src) : Eigen::MatrixXcd(a * src);
  Rng noise(seed, 1);
  const double sd = std::sqrt(s.noise_power());
  for (std::int64_t t = 0; t < n; ++t) {
    for (int m = 0; m < s.sensors; ++m) y(m, t) += sd * circular_normal(noise);
  }
  return y;
}

std::vector<double> doa_estimate(const Eigen::MatrixXcd& covariance, int n_sources,
                                 const DoaOptions& options) {
  const int m = static_cast<int>(covariance.rows());
  if (covariance.cols() != m) throw UsageError("doa_estimate: covariance must be square");
  if (n_sources < 1) throw UsageError("doa_estimate: need at least one source");
  if (!covariance.allFinite()) throw NumericalError("doa_estimate: non-finite covariance");

  Eigen::MatrixXcd r = covariance;
  if (!options.sensor_order.empty()) {
    if (static_cast<int>(options.sensor_order.size()) != m) {
      throw UsageError("doa_estimate: sensor_order must list every sensor");
    }
    std::vector<int> seen(static_cast<std::size_t>(m), 0);
    for (int k = 0; k < m; ++k) {
      const int e = options.sensor_order[static_cast<std::size_t>(k)];
      if (e < 0 || e >= m || seen[static_cast<std::size_t>(e)]++) {
        throw UsageError("doa_estimate: sensor_order is not a permutation");
      }
    }
    for (int a = 0; a < m; ++a) {
      for (int b = 0; b < m; ++b) {
        r(options.sensor_order[static_cast<std::size_t>(a)],
          options.sensor_order[static_cast<std::size_t>(b)]) = covariance(a, b);
      }
    }
  }
  r = 0.5 * (r + r.adjoint()).eval();

  const int l = options.subarray > 0 ? options.subarray : m - 1;
  if (l > m || l < 2) throw UsageError("doa_estimate: invalid subarray length");
  if (n_sources >= l) {
    throw UsageError("doa_estimate: " + std::to_string(n_sources) +
                     " sources need a subarray longer than " + std::to_string(l));
  }
  const Eigen::MatrixXcd rs = smooth(r, l, options.forward_backward);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rs);
  const Eigen::VectorXd ev = es.eigenvalues();  // ascending
  const double top = ev[l - 1];
  if (!(top > 0.0) || !(ev[l - n_sources] > 1e-12 * top)) {
    throw NumericalError("doa_estimate: signal subspace collapsed after smoothing");
  }
  const Eigen::MatrixXcd en = es.eigenvectors().leftCols(l - n_sources);
  const Eigen::MatrixXcd c = en * en.adjoint();

  // P(z) = sum_{p,q} C_pq z^{q-p}, times z^{l-1}; coefficient index d + l - 1.
  Eigen::VectorXcd coeffs = Eigen::VectorXcd::Zero(2 * l - 1);
  for (int p = 0; p < l; ++p) {
    for (int q = 0; q < l; ++q) coeffs[q - p + l - 1] += c(p, q);
  }
  Eigen::PolynomialSolver<std::complex<double>, Eigen::Dynamic> solver;
  solver.compute(coeffs);
  std::vector<std::complex<double>> inside;
  for (Eigen::Index k = 0; k < solver.roots().size(); ++k) {
    const auto z = solver.roots()[k];
    if (std::abs(z) <= 1.0) inside.push_back(z);
  }
  std::sort(inside.begin(), inside.end(), [](const auto& a, const auto& b) {
    return 1.0 - std::abs(a) < 1.0 - std::abs(b);
  });
  if (static_cast<int>(inside.size()) < n_sources) {
    throw NumericalError("doa_estimate: not enough roots inside the unit circle");
  }
  std::vector<double> angles;
  for (int k = 0; k < n_sources; ++k) {
    const double s = std::arg(inside[static_cast<std::size_t>(k)]) / (2.0 * kPi * options.spacing);
    angles.push_back(std::asin(std::clamp(s, -1.0, 1.0)) / kDeg);
  }
  std::sort(angles.begin(), angles.end());
  return angles;
}

std::vector<DoaMethod> default_doa_methods() {
  ScheduleSpec stair;
  stair.kind = ScheduleKind::kStaircase;
  for (int k = 1; k <= 10; ++k) stair.levels.push_back(k / 10.0);
  ScheduleSpec constant;
  constant.kind = ScheduleKind::kConstant;
  constant.value = 0.5;
  ScheduleSpec dither;
  dither.kind = ScheduleKind::kGaussianDither;
  dither.value = 0.5;
  dither.dither_variance = 0.15;
  return {{"time_varying", Method::kTimeVarying, stair, false},
          {"constant", Method::kConstant, constant, false},
          {"dither", Method::kDither, dither, false},
          {"unquantized", Method::kTimeVarying, {}, true}};
}

double DoaResult::rmse(const std::string& method, int source) const {
  double sum = 0.0;
  int count = 0;
  const double truth = scenario.angles_deg[static_cast<std::size_t>(source)];
  std::vector<double> sorted = scenario.angles_deg;
  std::sort(sorted.begin(), sorted.end());
  const auto pos = std::find(sorted.begin(), sorted.end(), truth) - sorted.begin();
  for (const auto& t : trials) {
    if (t.method != method || !t.ok) continue;
    const double e = t.angles[static_cast<std::size_t>(pos)] - truth;
    sum += e * e;
    ++count;
  }
  if (count == 0) return std::numeric_limits<double>::quiet_NaN();
  return std::sqrt(sum / count);
}

DoaResult doa_pipeline(const ArrayScenario& scenario, const std::vector<DoaMethod>& methods,
                       int trials, std::uint64_t seed, int threads) {
  scenario.validate();
  if (trials < 1) throw UsageError("doa: trials must be >= 1");
  if (methods.empty()) throw UsageError("doa: no methods");
  DoaResult result;
  result.scenario = scenario;
  result.methods = methods;
  result.base_seed = seed;
  const auto nm = methods.size();
  std::vector<DoaTrial> slots(static_cast<std::size_t>(trials) * nm);
  const double rms = scenario.component_rms();

  auto one_trial = [&](int trial) {
    const std::uint64_t s = seed + static_cast<std::uint64_t>(trial);
    const Eigen::MatrixXcd y = gen_snapshots(scenario, s);
    for (std::size_t k = 0; k < nm; ++k) {
      DoaTrial& out = slots[static_cast<std::size_t>(trial) * nm + k];
      out.trial = trial;
      out.method = methods[k].label;
      try {
        Eigen::MatrixXcd cov;
        if (methods[k].unquantized) {
          cov = y * y.adjoint() / static_cast<double>(scenario.snapshots);
        } else {
          const ThresholdSchedule sched = scaled_spec(methods[k].schedule, rms)
                                              .build(scenario.sensors, scenario.snapshots);
          const OneBitBatch batch = quantize_complex(y, sched, s);
          RecoveryOptions opts;
          opts.method = methods[k].method;
          cov = recover_complex(batch, opts).covariance;
        }
        DoaOptions dopt;
        dopt.spacing = scenario.spacing;
        out.angles = doa_estimate(cov, scenario.sources(), dopt);
        out.ok = true;
      } catch (const Error& e) {
        out.ok = false;
        out.error = e.what();
      }
    }
  };

  int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, trials);
  if (workers == 1) {
    for (int t = 0; t < trials; ++t) one_trial(t);
  } else {
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex mu;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int t = next++; t < trials; t = next++) {
          try {
            one_trial(t);
          } catch (...) {
            std::lock_guard<std::mutex> lock(mu);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }
  result.trials = std::move(slots);

  std::vector<double> sorted = scenario.angles_deg;
  std::sort(sorted.begin(), sorted.end());
  for (const auto& m : methods) {
    int failed = 0;
    for (const auto& t : result.trials) failed += (t.method == m.label && !t.ok) ? 1 : 0;
    for (std::size_t k = 0; k < sorted.size(); ++k) {
      double sum = 0.0, sum_sq = 0.0;
      int count = 0;
      for (const auto& t : result.trials) {
        if (t.method != m.label || !t.ok) continue;
        const double e2 = std::pow(t.angles[k] - sorted[k], 2);
        sum += e2;
        sum_sq += e2 * e2;
        ++count;
      }
      ResultRow row;
      row.experiment = "doa";
      row.method = m.label;
      row.sweep = "source_deg";
      row.sweep_value = sorted[k];
      row.parameter = "theta";
      row.samples = scenario.snapshots;
      row.trials = count;
      row.failed = failed;
      row.mse = count ? sum / count : std::numeric_limits<double>::quiet_NaN();
      row.se = count > 1 ? std::sqrt(std::max(0.0, (sum_sq - count * row.mse * row.mse) /
                                                       (count - 1)) /
                                     count)
                         : std::numeric_limits<double>::quiet_NaN();
      row.base_seed = seed;
      result.rows.push_back(row);
    }
  }
  return result;
}

void write_doa_csv(std::ostream& out, const DoaResult& r) {
  const ArrayScenario& s = r.scenario;
  out << "# scenario: sensors=" << s.sensors << " snr_db=" << format_double(s.snr_db)
      << " snr_definition=per_sensor_total_source_power_over_noise_power"
      << " snapshots=" << s.snapshots << " coherent=" << (s.coherent ? 1 : 0)
      << " spacing_wavelengths=" << format_double(s.spacing) << " angles_deg=";
  for (std::size_t k = 0; k < s.angles_deg.size(); ++k) {
    out << (k ? ";" : "") << format_double(s.angles_deg[k]);
  }
  out << "\n# threshold_unit=" << format_double(s.component_rms())
      << " (population rms of one real component)\n";
  for (const auto& m : r.methods) {
    out << "# method " << m.label << ": "
        << (m.unquantized ? std::string("sample covariance, no quantization")
                          : to_string(m.method) + " schedule=" + to_string(m.schedule.kind))
        << '\n';
  }
  out << "experiment,method,sweep,sweep_value,parameter,N,trials,failed,mse,se,theory_mse,"
         "ratio,base_seed,rmse_deg\n";
  for (const auto& row : r.rows) {
    out << row.experiment << ',' << row.method << ',' << row.sweep << ','
        << format_double(row.sweep_value) << ',' << row.parameter << ',' << row.samples
        << ',' << row.trials << ',' << row.failed << ',' << format_double(row.mse) << ','
        << format_double(row.se) << ",nan,nan," << row.base_seed << ','
        << format_double(std::sqrt(row.mse)) << '\n';
  }
}

void write_doa_angles_csv(std::ostream& out, const DoaResult& r) {
  out << "trial,method,ok";
  for (int k = 1; k <= r.scenario.sources(); ++k) out << ",theta" << k;
  out << '\n';
  for (const auto& t : r.trials) {
    out << t.trial << ',' << t.method << ',' << (t.ok ? 1 : 0);
    for (int k = 0; k < r.scenario.sources(); ++k) {
      out << ',' << (t.ok ? format_double(t.angles[static_cast<std::size_t>(k)]) : "nan");
    }
    out << '\n';
  }
}

}  // namespace onebit

#include "onebit/report_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "onebit/error.hpp"

namespace onebit {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, r.ptr);
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw UsageError("cannot open '" + tmp + "' for writing");
    out << contents;
    out.flush();
    if (!out) throw Error("write to '" + tmp + "' failed");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw Error("cannot rename '" + tmp + "' to '" + path + "'");
  }
}

namespace {

void write_header(std::ostream& out, Eigen::Index m, Method method, bool projected,
                  bool clipped) {
  out << "# M=" << m << "\n# method=" << to_string(method)
      << "\n# psd_projected=" << (projected ? 1 : 0) << "\n# psd_clipped=" << (clipped ? 1 : 0)
      << '\n';
}

nlohmann::json vec3(const Eigen::Vector3d& v) { return {v[0], v[1], v[2]}; }

}  // namespace

void write_matrix_csv(std::ostream& out, const MatrixEstimate& e) {
  write_header(out, e.covariance.rows(), e.method, e.psd_projected, e.psd_clipped);
  for (Eigen::Index i = 0; i < e.covariance.rows(); ++i) {
    for (Eigen::Index j = 0; j < e.covariance.cols(); ++j) {
      if (j) out << ',';
      out << format_double(e.covariance(i, j));
    }
    out << '\n';
  }
}

void write_matrix_csv(std::ostream& out, const ComplexMatrixEstimate& e) {
  write_header(out, e.covariance.rows(), e.method, e.psd_projected, e.psd_clipped);
  out << "# hermitian_enforced=" << (e.hermitian_enforced ? 1 : 0) << '\n';
  for (Eigen::Index i = 0; i < e.covariance.rows(); ++i) {
    for (Eigen::Index j = 0; j < e.covariance.cols(); ++j) {
      if (j) out << ',';
      out << format_double(e.covariance(i, j).real()) << ','
          << format_double(e.covariance(i, j).imag());
    }
    out << '\n';
  }
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

nlohmann::json to_json(const PairParams& p) {
  return {{"sigma1", p.sigma1}, {"sigma2", p.sigma2}, {"sigma12", p.sigma12}};
}

nlohmann::json to_json(const NewtonResult& r) {
  return {{"estimate", r.estimate},
          {"iterations", r.iterations},
          {"converged", r.converged},
          {"used_bisection", r.used_bisection}};
}

nlohmann::json to_json(const PairEstimate& e) {
  nlohmann::json j = {{"params", to_json(e.params)},
                      {"method", to_string(e.method)},
                      {"iterations", e.iterations},
                      {"converged", e.converged},
                      {"used_bisection", e.used_bisection},
                      {"used_series_fallback", e.used_series_fallback}};
  if (e.method == Method::kTimeVaryingJoint) {
    j["joint_iterations"] = e.joint_iterations;
    j["line_search_failed"] = e.line_search_failed;
    j["initial_gradient"] = vec3(e.initial_gradient);
    j["final_gradient"] = vec3(e.final_gradient);
  }
  return j;
}

nlohmann::json to_json(const MatrixEstimate& e) {
  nlohmann::json j = {{"M", e.covariance.rows()},
                      {"method", to_string(e.method)},
                      {"psd_projected", e.psd_projected},
                      {"psd_clipped", e.psd_clipped},
                      {"covariance", matrix_to_json(e.covariance)}};
  nlohmann::json channels = nlohmann::json::array();
  for (const auto& c : e.channels) channels.push_back(to_json(c));
  j["channels"] = channels;
  nlohmann::json pairs = nlohmann::json::array();
  for (std::size_t k = 0; k < e.pairs.size(); ++k) {
    nlohmann::json p = to_json(e.pairs[k]);
    p["pair"] = e.pair_index[k];
    pairs.push_back(p);
  }
  j["pairs"] = pairs;
  return j;
}

nlohmann::json to_json(const ComplexMatrixEstimate& e) {
  return {{"M", e.covariance.rows()},
          {"method", to_string(e.method)},
          {"hermitian_enforced", e.hermitian_enforced},
          {"psd_projected", e.psd_projected},
          {"psd_clipped", e.psd_clipped},
          {"real", matrix_to_json(e.covariance.real())},
          {"imag", matrix_to_json(e.covariance.imag())}};
}

nlohmann::json to_json(const TheoryReport& r) {
  auto num = [](double x) -> nlohmann::json {
    if (std::isfinite(x)) return x;
    return nullptr;
  };
  nlohmann::json j = {{"source", to_string(r.source)},
                      {"method", to_string(r.method)},
                      {"samples", r.samples},
                      {"mse_sigma1", num(r.mse_sigma1)},
                      {"mse_sigma2", num(r.mse_sigma2)},
                      {"mse_sigma12", num(r.mse_sigma12)}};
  if (r.source == TheorySource::kTaylor) {
    j["l_vector"] = {r.l_vector[0], r.l_vector[1], r.l_vector[2]};
    j["r_matrix"] = matrix_to_json(r.r_matrix);
  } else {
    j["fim"] = matrix_to_json(r.fim);
    j["fim_condition"] = num(r.fim_condition);
    j["rank_deficient"] = r.rank_deficient;
  }
  if (r.shifted) j["effective_params"] = to_json(r.effective_params);
  return j;
}

}  // namespace onebit

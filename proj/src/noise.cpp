#include "llb/noise.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace llb {

CovarianceSpec::CovarianceSpec(int mode_count, double decay_exponent)
    : alpha_(decay_exponent) {
  if (mode_count < 1) {
    throw std::invalid_argument("covariance: mode_count must be >= 1");
  }
  if (!(decay_exponent > 3.0)) {
    throw std::invalid_argument(
        "covariance: decay exponent must exceed 3 for the H^1 trace "
        "condition sum_k ||G_k||_{H^1}^2 < infinity");
  }
  sqrt_lambda_.resize(mode_count);
  h1_trace_ = 0;
  for (int k = 1; k <= mode_count; ++k) {
    const double lam = std::pow(double(k), -alpha_);
    sqrt_lambda_(k - 1) = std::sqrt(lam);
    const double kpi = k * std::numbers::pi;
    h1_trace_ += 3.0 * lam * (1.0 + kpi * kpi);
  }
}

double CovarianceSpec::lambda(int k) const {
  if (k < 1 || k > mode_count()) {
    throw std::out_of_range("covariance: mode index out of range");
  }
  return sqrt_lambda_(k - 1) * sqrt_lambda_(k - 1);
}

CovarianceSpec CovarianceSpec::with_amplitudes(
    const Eigen::VectorXd& sqrt_lambda) const {
  if (sqrt_lambda.size() != sqrt_lambda_.size()) {
    throw std::invalid_argument("covariance: amplitude count mismatch");
  }
  CovarianceSpec out = *this;
  out.sqrt_lambda_ = sqrt_lambda;
  out.h1_trace_ = 0;
  for (int k = 1; k <= mode_count(); ++k) {
    const double kpi = k * std::numbers::pi;
    out.h1_trace_ +=
        3.0 * sqrt_lambda(k - 1) * sqrt_lambda(k - 1) * (1.0 + kpi * kpi);
  }
  return out;
}

CovarianceSpec make_covariance(int mode_count, double decay_exponent) {
  return CovarianceSpec(mode_count, decay_exponent);
}

WienerIncrement sample_increment(const CovarianceSpec& spec, double dt,
                                 RngStream& rng) {
  if (!(dt > 0)) throw std::invalid_argument("sample_increment: dt must be > 0");
  WienerIncrement incr;
  incr.dt = dt;
  incr.coefficients.resize(spec.mode_count(), 3);
  const double sd = std::sqrt(dt);
  for (int k = 0; k < spec.mode_count(); ++k) {
    for (int j = 0; j < 3; ++j) incr.coefficients(k, j) = sd * rng.normal();
  }
  return incr;
}

ModeSynthesis::ModeSynthesis(const CovarianceSpec& spec, const Grid& grid)
    : grid_(grid), basis_(grid.n_interior(), spec.mode_count()) {
  for (int k = 1; k <= spec.mode_count(); ++k) {
    const double amp = spec.sqrt_lambda()(k - 1) * std::numbers::sqrt2;
    for (Eigen::Index i = 0; i < grid.n_interior(); ++i) {
      basis_(i, k - 1) = amp * std::sin(k * std::numbers::pi * grid.node(i));
    }
  }
}

FieldXd ModeSynthesis::synthesize(const ModeMatrix& coefficients) const {
  if (coefficients.rows() > basis_.cols()) {
    throw std::invalid_argument("synthesize: more modes than the covariance");
  }
  FieldXd out(grid_.n_interior(), 3);
  out.noalias() = basis_.leftCols(coefficients.rows()) * coefficients;
  return out;
}

FieldXd noise_field(const CovarianceSpec& spec, const WienerIncrement& incr,
                    const Grid& grid) {
  if (incr.coefficients.rows() != spec.mode_count()) {
    throw std::invalid_argument("noise_field: increment dimension mismatch");
  }
  return ModeSynthesis(spec, grid).synthesize(incr.coefficients);
}

ControlPath::ControlPath(int steps, double dt, int mode_count)
    : mode_count_(mode_count), dt_(dt) {
  if (steps < 1 || mode_count < 1 || !(dt > 0)) {
    throw std::invalid_argument("ControlPath: invalid dimensions");
  }
  coefficients_.assign(steps, ModeMatrix::Zero(mode_count, 3));
}

ModeMatrix& ControlPath::at(int step) {
  if (step < 0 || step >= steps()) {
    throw std::out_of_range("ControlPath: step out of range");
  }
  return coefficients_[step];
}

const ModeMatrix& ControlPath::at(int step) const {
  if (step < 0 || step >= steps()) {
    throw std::out_of_range("ControlPath: step out of range");
  }
  return coefficients_[step];
}

double ControlPath::h0_cost() const {
  double sum = 0;
  for (const auto& c : coefficients_) sum += c.squaredNorm();
  return 0.5 * dt_ * sum;
}

ControlPath ControlPath::scaled(double factor) const {
  ControlPath out = *this;
  for (auto& c : out.coefficients_) c *= factor;
  return out;
}

bool ControlPath::is_zero() const {
  for (const auto& c : coefficients_) {
    if (!c.isZero(0.0)) return false;
  }
  return true;
}

FieldXd control_field(const CovarianceSpec& spec, const ControlPath& ctrl,
                      int step, const Grid& grid) {
  if (ctrl.mode_count() > spec.mode_count()) {
    throw std::invalid_argument("control_field: control has more modes than Q");
  }
  return ModeSynthesis(spec, grid).synthesize(ctrl.at(step));
}

ControlPath project_to_ball(const ControlPath& ctrl, double M) {
  if (!(M > 0)) throw std::invalid_argument("project_to_ball: M must be > 0");
  const double energy = 2.0 * ctrl.h0_cost();
  if (energy <= M) return ctrl;
  return ctrl.scaled(std::sqrt(M / energy));
}

void write_control_csv(std::ostream& os, const ControlPath& ctrl) {
  os << "step,k,j,coefficient\n";
  os.precision(17);
  for (int n = 0; n < ctrl.steps(); ++n) {
    const auto& c = ctrl.at(n);
    for (int k = 0; k < ctrl.mode_count(); ++k) {
      for (int j = 0; j < 3; ++j) {
        os << n << ',' << k + 1 << ',' << j + 1 << ',' << c(k, j) << '\n';
      }
    }
  }
}

ControlPath read_control_csv(std::istream& is, int steps, double dt) {
  std::string line;
  if (!std::getline(is, line)) {
    throw std::runtime_error("control csv: missing header");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "step,k,j,coefficient") {
    throw std::runtime_error("control csv: header must be step,k,j,coefficient");
  }
  struct Entry {
    int n, k, j;
    double c;
  };
  std::vector<Entry> entries;
  int max_k = 1;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::istringstream row(line);
    Entry e{};
    char c1 = 0, c2 = 0, c3 = 0;
    if (!(row >> e.n >> c1 >> e.k >> c2 >> e.j >> c3 >> e.c) || c1 != ',' ||
        c2 != ',' || c3 != ',') {
      throw std::runtime_error("control csv: malformed row at line " +
                               std::to_string(lineno));
    }
    if (e.n < 0 || e.n >= steps || e.k < 1 || e.j < 1 || e.j > 3) {
      throw std::runtime_error("control csv: index out of range at line " +
                               std::to_string(lineno));
    }
    max_k = std::max(max_k, e.k);
    entries.push_back(e);
  }
  ControlPath ctrl(steps, dt, max_k);
  for (const auto& e : entries) ctrl.at(e.n)(e.k - 1, e.j - 1) = e.c;
  return ctrl;
}

std::uint64_t NoisePath::digest() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const auto& m : increments) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(m.data());
    const std::size_t len = std::size_t(m.size()) * sizeof(double);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= bytes[i];
      h *= 0x100000001b3ull;
    }
  }
  return h;
}

NoisePath draw_noise_path(const CovarianceSpec& spec, double dt, int steps,
                          RngStream& rng) {
  NoisePath path;
  path.dt = dt;
  path.increments.reserve(steps);
  for (int n = 0; n < steps; ++n) {
    path.increments.push_back(sample_increment(spec, dt, rng).coefficients);
  }
  return path;
}

}  // namespace llb

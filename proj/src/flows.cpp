#include "roughlab/flows.hpp"

#include "roughlab/errors.hpp"

#include <cmath>

namespace roughlab {

using detail::require;

namespace {

double op_norm(const Eigen::MatrixXd& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  return svd.singularValues()(0);
}

double field_beta(const std::vector<Eigen::MatrixXd>& fields) {
  double beta = 0.0;
  for (const auto& a : fields) {
    const double n = op_norm(a);
    beta = std::max({beta, n, n * n});
  }
  return beta;
}

void check_square(const Eigen::MatrixXd& a, std::size_t m, const char* what) {
  require(static_cast<std::size_t>(a.rows()) == m && static_cast<std::size_t>(a.cols()) == m,
          std::string("VectorFieldSpec: ") + what + " must be m x m");
}

Eigen::VectorXd tanh_of(const Eigen::VectorXd& z) { return z.array().tanh().matrix(); }

}  // namespace

std::string to_string(VectorFieldSpec::Kind kind) {
  switch (kind) {
    case VectorFieldSpec::Kind::Linear: return "linear";
    case VectorFieldSpec::Kind::Contractive1D: return "contractive";
    case VectorFieldSpec::Kind::TanhLinear: return "tanh";
    case VectorFieldSpec::Kind::Constant: return "constant";
  }
  return "?";
}

VectorFieldSpec VectorFieldSpec::linear(Eigen::MatrixXd a0, std::vector<Eigen::MatrixXd> fields) {
  VectorFieldSpec s;
  s.kind = Kind::Linear;
  s.state_dim = static_cast<std::size_t>(a0.rows());
  s.driver_dim = fields.size();
  check_square(a0, s.state_dim, "drift matrix");
  for (const auto& a : fields) check_square(a, s.state_dim, "field matrix");
  s.lipschitz_L = op_norm(a0);
  s.lip_theta_beta = field_beta(fields);
  s.drift_matrix = std::move(a0);
  s.field_matrices = std::move(fields);
  return s;
}

VectorFieldSpec VectorFieldSpec::contractive_1d(double lambda) {
  require(lambda < 0.0, "contractive preset needs lambda < 0");
  VectorFieldSpec s;
  s.kind = Kind::Contractive1D;
  s.lambda = lambda;
  s.state_dim = s.driver_dim = 1;
  s.lipschitz_L = std::abs(lambda);
  s.lip_theta_beta = 0.0;
  return s;
}

VectorFieldSpec VectorFieldSpec::tanh_linear(Eigen::MatrixXd a0, std::vector<Eigen::MatrixXd> fields) {
  VectorFieldSpec s = linear(std::move(a0), std::move(fields));
  s.kind = Kind::TanhLinear;
  return s;
}

VectorFieldSpec VectorFieldSpec::constant(std::vector<Eigen::VectorXd> c) {
  require(!c.empty(), "constant preset needs at least one field");
  VectorFieldSpec s;
  s.kind = Kind::Constant;
  s.state_dim = static_cast<std::size_t>(c.front().size());
  for (const auto& v : c) require(static_cast<std::size_t>(v.size()) == s.state_dim, "constant fields: size mismatch");
  s.driver_dim = c.size();
  s.constants = std::move(c);
  return s;
}

VectorFieldSpec VectorFieldSpec::zero_drift(std::size_t m) {
  std::vector<Eigen::VectorXd> c;
  for (std::size_t i = 0; i < m; ++i) c.push_back(Eigen::VectorXd::Unit(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(i)));
  return constant(std::move(c));
}

Eigen::VectorXd VectorFieldSpec::drift(const Eigen::VectorXd& y) const {
  switch (kind) {
    case Kind::Linear: return drift_matrix * y;
    case Kind::Contractive1D: return lambda * y;
    case Kind::TanhLinear: return tanh_of(drift_matrix * y);
    case Kind::Constant: return Eigen::VectorXd::Zero(y.size());
  }
  return {};
}

Eigen::VectorXd VectorFieldSpec::field(std::size_t i, const Eigen::VectorXd& y) const {
  switch (kind) {
    case Kind::Linear: return field_matrices[i] * y;
    case Kind::Contractive1D: return Eigen::VectorXd::Ones(1);
    case Kind::TanhLinear: return tanh_of(field_matrices[i] * y);
    case Kind::Constant: return constants[i];
  }
  return {};
}

Eigen::VectorXd VectorFieldSpec::field_derivative(std::size_t j, const Eigen::VectorXd& y,
                                                  const Eigen::VectorXd& v) const {
  switch (kind) {
    case Kind::Linear: return field_matrices[j] * v;
    case Kind::TanhLinear: {
      const Eigen::ArrayXd t = (field_matrices[j] * y).array().tanh();
      return ((1.0 - t * t) * (field_matrices[j] * v).array()).matrix();
    }
    case Kind::Contractive1D:
    case Kind::Constant: return Eigen::VectorXd::Zero(y.size());
  }
  return {};
}

SampledPath ode_additive_solve(const SampledPath& x, const VectorFieldSpec& b, const Eigen::VectorXd& xi) {
  require(x.dim() == b.state_dim, "ode_additive_solve: driver and state dimension differ");
  require(static_cast<std::size_t>(xi.size()) == b.state_dim, "ode_additive_solve: initial value has wrong size");
  require(x.point(0).cwiseAbs().maxCoeff() == 0.0, "ode_additive_solve: driver must start at 0");
  const std::size_t n = x.size();
  Matrix y(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(x.dim()));
  Eigen::VectorXd cur = xi;
  y.row(0) = cur.transpose();
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double dt = x.time(k + 1) - x.time(k);
    const Eigen::VectorXd dx = (x.point(k + 1) - x.point(k)).transpose();
    const Eigen::VectorXd b0 = b.drift(cur);
    const Eigen::VectorXd pred = cur + dx + dt * b0;
    cur = cur + dx + 0.5 * dt * (b0 + b.drift(pred));
    if (!cur.allFinite()) throw NumericalError("ode_additive_solve: state became non-finite at step " + std::to_string(k));
    y.row(static_cast<Eigen::Index>(k + 1)) = cur.transpose();
  }
  return SampledPath(x.times(), std::move(y));
}

AdditiveLipschitzReport additive_lipschitz_ratio(const SampledPath& x, const SampledPath& h,
                                                 const VectorFieldSpec& b, const Eigen::VectorXd& xi, double q) {
  require(x.same_grid(h), "additive_lipschitz_ratio: grid mismatch");
  AdditiveLipschitzReport r;
  const SampledPath y0 = ode_additive_solve(x, b, xi);
  const SampledPath y1 = ode_additive_solve(x + h, b, xi);
  r.num = p_variation(y1 - y0, q);
  r.den = p_variation(h, q);
  r.bound = std::exp(b.lipschitz_L * x.horizon());
  r.holds = r.num <= r.bound * r.den * (1.0 + kIntegratorSlack);
  return r;
}

double additive_sobolev_ratio(const SampledPath& x, const SampledPath& h, const VectorFieldSpec& b,
                              const Eigen::VectorXd& xi, const SobolevParams& params) {
  require(x.same_grid(h), "additive_sobolev_ratio: grid mismatch");
  const double den = sobolev_norm(h, params);
  if (den == 0.0) return 0.0;
  const SampledPath y0 = ode_additive_solve(x, b, xi);
  const SampledPath y1 = ode_additive_solve(x + h, b, xi);
  return sobolev_norm(y1 - y0, params) / den;
}

SampledPath rde_solve(const RoughPath2& rp, const VectorFieldSpec& f, const Eigen::VectorXd& xi) {
  require(rp.dim() == f.driver_dim, "rde_solve: driver dimension does not match the fields");
  require(static_cast<std::size_t>(xi.size()) == f.state_dim, "rde_solve: initial value has wrong size");
  const std::size_t n = rp.size(), d = rp.dim();
  Matrix y(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(f.state_dim));
  Eigen::VectorXd cur = xi;
  y.row(0) = cur.transpose();
  std::vector<Eigen::VectorXd> fi(d);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const Eigen::VectorXd dx = rp.increment(k, k + 1);
    const Eigen::MatrixXd& area = rp.segment(k);
    Eigen::VectorXd next = cur;
    for (std::size_t i = 0; i < d; ++i) {
      fi[i] = f.field(i, cur);
      next += fi[i] * dx(static_cast<Eigen::Index>(i));
    }
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        const double xij = area(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        if (xij != 0.0) next += xij * f.field_derivative(j, cur, fi[i]);
      }
    if (!next.allFinite()) throw NumericalError("rde_solve: state became non-finite at step " + std::to_string(k));
    cur = std::move(next);
    y.row(static_cast<Eigen::Index>(k + 1)) = cur.transpose();
  }
  return SampledPath(rp.base().times(), std::move(y));
}

RdeShiftReport rde_shift_response(const RoughPath2& rp, const SampledPath& h, const VectorFieldSpec& f,
                                  const Eigen::VectorXd& xi, double p, double q) {
  RdeShiftReport r;
  const SampledPath y1 = rde_solve(rp, f, xi);
  const SampledPath y2 = rde_solve(translate(rp, h), f, xi);
  r.d = p_variation(y1 - y2, p);
  const double hv = p_variation(h, q);
  r.hq = std::max(hv, std::pow(hv, q));
  r.n1 = n_alpha(rp, 1.0, p);
  r.ratio = r.hq > 0.0 ? r.d / r.hq : 0.0;
  return r;
}

}  // namespace roughlab

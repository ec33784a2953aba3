#include "roughlab/assignment.hpp"
#include "roughlab/concentration.hpp"
#include "roughlab/experiments.hpp"
#include "roughlab/gaussian.hpp"
#include "roughlab/paths.hpp"
#include "roughlab/roughlift.hpp"
#include "roughlab/transport.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

namespace py = pybind11;
using namespace roughlab;

namespace {

// Rows are samples; times default to a uniform grid on [0, 1].
SampledPath as_path(const Matrix& values, const std::optional<std::vector<double>>& times) {
  if (times) return SampledPath(*times, values);
  return SampledPath::on_uniform_grid(1.0, values);
}

VectorMeasure as_measure(const Eigen::MatrixXd& points) {
  VectorMeasure m;
  for (Eigen::Index i = 0; i < points.rows(); ++i) m.points.emplace_back(points.row(i).transpose());
  return m;
}

py::dict tail_dict(const TailFit& f) {
  py::dict d;
  d["sigma2"] = f.sigma2;
  d["r1"] = f.r1;
  d["amplitude"] = f.amplitude;
  d["r2"] = f.r2;
  d["curvature"] = f.curvature;
  d["curvature_se"] = f.curvature_se;
  d["verdict"] = to_string(f.verdict);
  d["gaussian_tailed"] = f.gaussian_tailed();
  return d;
}

}  // namespace

PYBIND11_MODULE(_roughlab, m) {
  m.doc() = "Numerical core of roughlab";

  m.def("version", &version_string);

  m.def("p_variation", [](const Matrix& x, double p, std::optional<std::vector<double>> t) {
    return p_variation(as_path(x, t), p);
  }, py::arg("values"), py::arg("p"), py::arg("times") = py::none());
  m.def("p_variation_bruteforce", [](const Matrix& x, double p, std::optional<std::vector<double>> t) {
    return p_variation_bruteforce(as_path(x, t), p);
  }, py::arg("values"), py::arg("p"), py::arg("times") = py::none());
  m.def("sobolev_norm", [](const Matrix& x, double delta, double p, std::optional<std::vector<double>> t) {
    return sobolev_norm(as_path(x, t), {delta, p});
  }, py::arg("values"), py::arg("delta"), py::arg("p"), py::arg("times") = py::none());

  m.def("lift_level2", [](const Matrix& x, std::size_t s, std::size_t t) {
    const RoughPath2 rp = chen_lift(as_path(x, {}));
    if (s > t || t >= rp.size()) throw ArgumentError("lift_level2: need s <= t < n");
    return rp.level2(s, t);
  }, py::arg("values"), py::arg("s"), py::arg("t"));
  m.def("translated_level2", [](const Matrix& x, const Matrix& h, std::size_t s, std::size_t t) {
    const RoughPath2 rp = translate(chen_lift(as_path(x, {})), as_path(h, {}));
    if (s > t || t >= rp.size()) throw ArgumentError("translated_level2: need s <= t < n");
    return rp.level2(s, t);
  }, py::arg("values"), py::arg("h"), py::arg("s"), py::arg("t"));
  m.def("homog_pvar_norm", [](const Matrix& x, double p) { return homog_pvar_norm(chen_lift(as_path(x, {})), p); },
        py::arg("values"), py::arg("p"));
  m.def("rho_pvar", [](const Matrix& x, const Matrix& y, double p) {
    return rho_pvar(chen_lift(as_path(x, {})), chen_lift(as_path(y, {})), p);
  }, py::arg("x"), py::arg("y"), py::arg("p"));
  m.def("n_alpha", [](const Matrix& x, double alpha, double p) { return n_alpha(chen_lift(as_path(x, {})), alpha, p); },
        py::arg("values"), py::arg("alpha"), py::arg("p"));

  m.def("sample_brownian", [](std::size_t n, double horizon, std::size_t dim, std::uint64_t seed, std::uint64_t stream) {
    SeededRng rng(seed, stream);
    return Matrix(sample_path(GaussianSpec::brownian(horizon, n, dim), rng).values());
  }, py::arg("n"), py::arg("horizon") = 1.0, py::arg("dim") = 1, py::arg("seed") = 0, py::arg("stream") = 0);
  m.def("cm_norm", [](const Matrix& h, std::optional<std::vector<double>> t) { return cm_norm(as_path(h, t)); },
        py::arg("values"), py::arg("times") = py::none());

  m.def("gaussian_w2", [](const Vector& m1, const Eigen::MatrixXd& s1, const Vector& m2, const Eigen::MatrixXd& s2) {
    return gaussian_w2(GaussianSpec::finite_dim(m1, s1), GaussianSpec::finite_dim(m2, s2));
  }, py::arg("mean1"), py::arg("cov1"), py::arg("mean2"), py::arg("cov2"));
  m.def("gaussian_kl", [](const Vector& m1, const Eigen::MatrixXd& s1, const Vector& m2, const Eigen::MatrixXd& s2) {
    const KlResult r = gaussian_kl(GaussianSpec::finite_dim(m1, s1), GaussianSpec::finite_dim(m2, s2));
    return r.finite ? r.value : std::numeric_limits<double>::infinity();
  }, py::arg("mean_nu"), py::arg("cov_nu"), py::arg("mean_mu"), py::arg("cov_mu"));
  m.def("t2_check", [](const Vector& m1, const Eigen::MatrixXd& s1, const Vector& m2, const Eigen::MatrixXd& s2,
                       double c) {
    const T2Report r = t2_check_finite_dim(GaussianSpec::finite_dim(m1, s1), GaussianSpec::finite_dim(m2, s2), c);
    py::dict d;
    d["lhs"] = r.lhs;
    d["rhs"] = r.rhs;
    d["holds"] = r.holds;
    d["equality_gap"] = r.equality_gap;
    return d;
  }, py::arg("mean_nu"), py::arg("cov_nu"), py::arg("mean_mu"), py::arg("cov_mu"), py::arg("C") = 2.0);

  m.def("solve_assignment", [](const Eigen::MatrixXd& c) {
    const Assignment a = solve_assignment(c);
    return py::make_tuple(a.row_to_col, a.cost);
  }, py::arg("cost"));
  m.def("wasserstein", [](const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, double p) {
    return empirical_wasserstein(as_measure(x), as_measure(y), GroundCost::euclidean(), p);
  }, py::arg("x"), py::arg("y"), py::arg("p") = 2.0);

  m.def("tail_fit", [](std::vector<double> samples, double quantile_lo) {
    return tail_dict(tail_fit(std::move(samples), quantile_lo));
  }, py::arg("samples"), py::arg("quantile_lo") = 0.5);

  m.def("list_experiments", [] {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& e : list_experiments()) out.emplace_back(e.name, e.description);
    return out;
  });
  m.def("_run_experiment_json", [](const std::string& config) {
    ExperimentResult r;
    {
      py::gil_scoped_release release;
      r = run_experiment(parse_config_text(config));
    }
    return py::make_tuple(r.table.str(), r.holds, r.summary.dump());
  }, py::arg("config"));
}

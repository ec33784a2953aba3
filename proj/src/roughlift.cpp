#include "roughlab/roughlift.hpp"

#include "roughlab/csv.hpp"
#include "roughlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

namespace roughlab {

using detail::require;
using detail::VariationAccumulator;

RoughPath2::RoughPath2(SampledPath base, std::vector<Eigen::MatrixXd> segments)
    : base_(std::move(base)), segments_(std::move(segments)) {
  const std::size_t n = base_.size(), d = base_.dim();
  require(n >= 2, "RoughPath2: need at least two grid points");
  require(segments_.size() == n - 1, "RoughPath2: need one level-2 tensor per segment");
  for (const auto& m : segments_) {
    require(static_cast<std::size_t>(m.rows()) == d && static_cast<std::size_t>(m.cols()) == d,
            "RoughPath2: level-2 tensor must be d x d");
    require(m.allFinite(), "RoughPath2: non-finite level-2 entry");
  }
  prefix_.assign(n * d * d, 0.0);
  const Matrix& v = base_.values();
  for (std::size_t k = 1; k < n; ++k) {
    // X_{0,k} = X_{0,k-1} + X_{k-1,k} + x_{0,k-1} (x) x_{k-1,k}
    const double* prev = &prefix_[(k - 1) * d * d];
    double* cur = &prefix_[k * d * d];
    for (std::size_t a = 0; a < d; ++a) {
      const double xa = v(static_cast<Eigen::Index>(k - 1), static_cast<Eigen::Index>(a)) - v(0, static_cast<Eigen::Index>(a));
      for (std::size_t b = 0; b < d; ++b) {
        const double db = v(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(b)) -
                          v(static_cast<Eigen::Index>(k - 1), static_cast<Eigen::Index>(b));
        cur[a * d + b] = prev[a * d + b] +
                         segments_[k - 1](static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) + xa * db;
      }
    }
  }
}

Eigen::VectorXd RoughPath2::increment(std::size_t s, std::size_t t) const {
  return (base_.point(t) - base_.point(s)).transpose();
}

Eigen::MatrixXd RoughPath2::level2(std::size_t s, std::size_t t) const {
  require(s <= t && t < size(), "RoughPath2::level2: bad index pair");
  const auto d = static_cast<Eigen::Index>(dim());
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t k = s; k < t; ++k) {
    const Eigen::VectorXd left = increment(s, k);
    const Eigen::VectorXd step = increment(k, k + 1);
    acc += segments_[k] + left * step.transpose();
  }
  return acc;
}

void RoughPath2::level2_fast(std::size_t s, std::size_t t, double* out) const {
  // X_{s,t} = X_{0,t} - X_{0,s} - x_{0,s} (x) x_{s,t}
  const std::size_t d = dim();
  const double* ps = &prefix_[s * d * d];
  const double* pt = &prefix_[t * d * d];
  const double* v = base_.values().data();
  for (std::size_t a = 0; a < d; ++a) {
    const double xa = v[s * d + a] - v[a];
    for (std::size_t b = 0; b < d; ++b)
      out[a * d + b] = pt[a * d + b] - ps[a * d + b] - xa * (v[t * d + b] - v[s * d + b]);
  }
}

RoughPath2 chen_lift(const SampledPath& x) {
  require(x.size() >= 2, "chen_lift: need at least two grid points");
  std::vector<Eigen::MatrixXd> segs;
  segs.reserve(x.size() - 1);
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const Eigen::VectorXd dx = (x.point(i + 1) - x.point(i)).transpose();
    segs.push_back(0.5 * dx * dx.transpose());
  }
  return RoughPath2(x, std::move(segs));
}

RoughPath2 translate(const RoughPath2& rp, const SampledPath& h) {
  require(rp.base().same_grid(h) && rp.dim() == h.dim(), "translate: grid or dimension mismatch");
  std::vector<Eigen::MatrixXd> segs;
  segs.reserve(rp.size() - 1);
  for (std::size_t i = 0; i + 1 < rp.size(); ++i) {
    const Eigen::VectorXd dx = rp.increment(i, i + 1);
    const Eigen::VectorXd dh = (h.point(i + 1) - h.point(i)).transpose();
    // Both paths are linear on the segment: each cross integral is half the
    // tensor product of the increments.
    segs.push_back(rp.segment(i) + 0.5 * (dh * dx.transpose() + dx * dh.transpose()) +
                   0.5 * dh * dh.transpose());
  }
  return RoughPath2(rp.base() + h, std::move(segs));
}

double chen_residual(const RoughPath2& rp, std::size_t s, std::size_t t, std::size_t u) {
  require(s <= t && t <= u && u < rp.size(), "chen_residual: need s <= t <= u in range");
  const Eigen::MatrixXd r = rp.level2(s, u) - rp.level2(s, t) - rp.level2(t, u) -
                            rp.increment(s, t) * rp.increment(t, u).transpose();
  return r.cwiseAbs().maxCoeff();
}

double geometric_residual(const RoughPath2& rp, std::size_t s, std::size_t t) {
  const Eigen::MatrixXd x2 = rp.level2(s, t);
  const Eigen::VectorXd inc = rp.increment(s, t);
  const Eigen::MatrixXd r = 0.5 * (x2 + x2.transpose()) - 0.5 * inc * inc.transpose();
  return r.cwiseAbs().maxCoeff();
}

namespace {

void check_rough_p(double p) {
  require(p >= 2.0 && p < 3.0, "rough path p-variation: p must lie in [2, 3), got " + std::to_string(p));
}

// Incremental homogeneous control omega(start, u) for one rough path.
class LiftControl {
 public:
  LiftControl(const RoughPath2& rp, double p, std::size_t start)
      : rp_(rp), p_(p), d_(rp.dim()), lvl1_(start), lvl2_(start), buf_(d_ * d_) {}

  std::size_t end() const { return lvl1_.end(); }

  double extend() {
    const double* v = rp_.base().values().data();
    const double half_p = 0.5 * p_, quarter_p = 0.25 * p_;
    const std::size_t d = d_;
    lvl1_.extend([&](std::size_t j, std::size_t u) {
      double sq = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double diff = v[u * d + k] - v[j * d + k];
        sq += diff * diff;
      }
      return std::pow(sq, half_p);
    });
    lvl2_.extend([&](std::size_t j, std::size_t u) {
      rp_.level2_fast(j, u, buf_.data());
      double sq = 0.0;
      for (double e : buf_) sq += e * e;
      return std::pow(sq, quarter_p);
    });
    return omega();
  }

  double norm() const { return std::pow(lvl1_.value(), 1.0 / p_) + std::pow(lvl2_.value(), 1.0 / p_); }
  double omega() const { return std::pow(norm(), p_); }

 private:
  const RoughPath2& rp_;
  double p_;
  std::size_t d_;
  VariationAccumulator lvl1_, lvl2_;
  std::vector<double> buf_;
};

}  // namespace

double homog_pvar_norm(const RoughPath2& rp, double p, IndexInterval sub) {
  check_rough_p(p);
  detail::check_interval(rp.base(), sub);
  LiftControl ctl(rp, p, sub.first);
  while (ctl.end() < sub.last) ctl.extend();
  return ctl.norm();
}

double homog_pvar_norm(const RoughPath2& rp, double p) {
  return homog_pvar_norm(rp, p, full_interval(rp.base()));
}

double rho_pvar(const RoughPath2& a, const RoughPath2& b, double p, IndexInterval sub) {
  check_rough_p(p);
  require(a.base().same_grid(b.base()) && a.dim() == b.dim(), "rho_pvar: grid or dimension mismatch");
  detail::check_interval(a.base(), sub);
  const std::size_t d = a.dim();
  const double* va = a.base().values().data();
  const double* vb = b.base().values().data();
  const double v1 = detail::variation_sup(sub.first, sub.last, [&](std::size_t j, std::size_t u) {
    double sq = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double diff = (va[u * d + k] - va[j * d + k]) - (vb[u * d + k] - vb[j * d + k]);
      sq += diff * diff;
    }
    return std::pow(sq, 0.5 * p);
  });
  std::vector<double> xa(d * d), xb(d * d);
  const double v2 = detail::variation_sup(sub.first, sub.last, [&](std::size_t j, std::size_t u) {
    a.level2_fast(j, u, xa.data());
    b.level2_fast(j, u, xb.data());
    double sq = 0.0;
    for (std::size_t k = 0; k < d * d; ++k) sq += (xa[k] - xb[k]) * (xa[k] - xb[k]);
    return std::pow(sq, 0.25 * p);
  });
  return std::pow(v1, 1.0 / p) + std::pow(v2, 2.0 / p);
}

double rho_pvar(const RoughPath2& a, const RoughPath2& b, double p) {
  return rho_pvar(a, b, p, full_interval(a.base()));
}

std::size_t n_alpha(const RoughPath2& rp, double alpha, double p, IndexInterval sub) {
  check_rough_p(p);
  require(alpha > 0.0, "n_alpha: alpha must be positive");
  detail::check_interval(rp.base(), sub);
  std::size_t count = 0;
  std::size_t tau = sub.first;
  while (tau < sub.last) {
    LiftControl ctl(rp, p, tau);
    double w = 0.0;
    do {
      w = ctl.extend();
    } while (ctl.end() < sub.last && w < alpha);
    if (ctl.end() >= sub.last) break;
    ++count;
    tau = ctl.end();
  }
  return count;
}

std::size_t n_alpha(const RoughPath2& rp, double alpha, double p) {
  return n_alpha(rp, alpha, p, full_interval(rp.base()));
}

double translation_bound_ratio(const RoughPath2& rp, const SampledPath& h, double p, double q) {
  const double hq = p_variation(h, q);
  if (hq == 0.0) return 0.0;
  const double num = rho_pvar(translate(rp, h), rp, p);
  return num / (std::max(1.0, homog_pvar_norm(rp, p)) * (hq + hq * hq));
}

double translation_control_constant(const RoughPath2& rp, const SampledPath& h, double p, double q) {
  check_rough_p(p);
  const RoughPath2 shifted = translate(rp, h);
  const std::size_t n = rp.size(), d = h.dim();
  const double* vh = h.values().data();
  double worst = 0.0;
  for (std::size_t s = 0; s + 1 < n; ++s) {
    LiftControl cx(rp, p, s), ct(shifted, p, s);
    VariationAccumulator hv(s);
    while (cx.end() + 1 < n) {
      const double wx = cx.extend();
      const double wt = ct.extend();
      const double vq = hv.extend([&](std::size_t j, std::size_t u) {
        double sq = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
          const double diff = vh[u * d + k] - vh[j * d + k];
          sq += diff * diff;
        }
        return std::pow(sq, 0.5 * q);
      });
      const double hp = std::pow(vq, p / q);
      const double den = wx + hp;
      if (den > 0.0) worst = std::max(worst, wt / den);
    }
  }
  return worst;
}

ShiftCountReport n_alpha_shift_bound_check(const RoughPath2& rp, const SampledPath& h, double p, double q,
                                           double alpha) {
  require(q >= 1.0 && q <= p && 1.0 / p + 1.0 / q > 1.0, "shift count check: need 1 <= q <= p, 1/p + 1/q > 1");
  ShiftCountReport r;
  r.lhs = n_alpha(translate(rp, h), alpha, p);
  r.n1 = n_alpha(rp, 1.0, p);
  r.norm_p = std::pow(homog_pvar_norm(rp, p), p);
  r.h_q = std::pow(p_variation(h, q), q);
  r.rhs = std::max(r.norm_p, 2.0 * static_cast<double>(r.n1) + 1.0) + r.h_q;
  r.holds = static_cast<double>(r.lhs) <= r.rhs;
  return r;
}

void write_roughpath_csv(const RoughPath2& rp, std::ostream& out) {
  const std::size_t d = rp.dim();
  std::vector<std::string> header{"t"};
  for (std::size_t k = 0; k < d; ++k) header.push_back("x" + std::to_string(k + 1));
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = 0; b < d; ++b) header.push_back("X" + std::to_string(a + 1) + std::to_string(b + 1));
  CsvTable table(header);
  for (std::size_t i = 0; i < rp.size(); ++i) {
    std::vector<CsvCell> row{rp.base().time(i)};
    for (std::size_t k = 0; k < d; ++k) row.emplace_back(rp.base().value(i, k));
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b)
        row.emplace_back(i == 0 ? 0.0
                                : rp.segment(i - 1)(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)));
    table.add_row(std::move(row));
  }
  table.write(out);
}

RoughPath2 read_roughpath_csv(std::istream& in) {
  const auto rows = parse_csv(in);
  require(rows.size() >= 3, "rough path CSV: need a header and at least two rows");
  const std::size_t cols = rows.front().size();
  // cols = 1 + d + d^2
  std::size_t d = 1;
  while (1 + d + d * d < cols) ++d;
  require(1 + d + d * d == cols && rows.front()[0] == "t", "rough path CSV: header must be t,x1..xd,X11..Xdd");
  std::vector<double> t;
  Matrix v(static_cast<Eigen::Index>(rows.size() - 1), static_cast<Eigen::Index>(d));
  std::vector<Eigen::MatrixXd> segs;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    require(rows[i].size() == cols, "rough path CSV: ragged row " + std::to_string(i));
    t.push_back(parse_real(rows[i][0]));
    for (std::size_t k = 0; k < d; ++k)
      v(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(k)) = parse_real(rows[i][1 + k]);
    if (i > 1) {
      Eigen::MatrixXd m(d, d);
      for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b < d; ++b)
          m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = parse_real(rows[i][1 + d + a * d + b]);
      segs.push_back(std::move(m));
    }
  }
  return RoughPath2(SampledPath(std::move(t), std::move(v)), std::move(segs));
}

}  // namespace roughlab

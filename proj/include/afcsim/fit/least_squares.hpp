#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "afcsim/error.hpp"

namespace afcsim::fit {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// A curve model y = f(theta, x) in its fitting coordinates theta. Models whose natural
/// parameters differ from the fitted ones (e.g. ordered lifetimes) supply a mapping to
/// the reported parameters and its Jacobian for error propagation.
struct ParametricModel {
  std::string name;
  std::vector<std::string> param_names;  // reported parameters
  std::vector<std::string> param_units;
  std::function<double(const Vec&, double)> evaluate;
  // Optional analytic gradient of f with respect to theta at x.
  std::function<void(const Vec&, double, Eigen::Ref<Vec>)> gradient;
  std::function<Vec(const Vec&)> to_reported;        // identity when empty
  std::function<Vec(const Vec&)> from_reported;      // identity when empty
  std::function<Mat(const Vec&)> reported_jacobian;  // d reported / d theta; identity when empty
  std::function<Vec(const std::vector<double>&, const std::vector<double>&)> initial_guess;  // optional, theta
  Vec default_theta;
  Vec lower;  // bounds on theta
  Vec upper;

  std::size_t size() const noexcept { return static_cast<std::size_t>(default_theta.size()); }
  Vec reported(const Vec& theta) const { return to_reported ? to_reported(theta) : theta; }
  Vec internal(const Vec& params) const { return from_reported ? from_reported(params) : params; }
};

struct DataSeries {
  std::vector<double> x, y, sigma;

  std::size_t size() const noexcept { return x.size(); }
  static DataSeries unit_sigma(std::vector<double> x, std::vector<double> y) {
    std::vector<double> s(x.size(), 1.0);
    return {std::move(x), std::move(y), std::move(s)};
  }
};

struct FitOptions {
  std::optional<Vec> theta0;  // start in fitting coordinates; defaults to the model's guess
  std::optional<Vec> lower;   // override model bounds (fitting coordinates)
  std::optional<Vec> upper;
  double gtol = 1e-10;
  double xtol = 1e-12;
  double ftol = 1e-14;
  int max_iterations = 200;
  bool numeric_jacobian = false;  // force finite differences even when a gradient exists
};

struct FitResult {
  std::vector<std::string> names;
  Vec params;      // reported parameters
  Vec std_errors;  // reported parameters, from (J^T W J)^-1
  Vec theta;       // fitting coordinates
  Vec theta_std_errors;
  Mat covariance;  // fitting coordinates
  double chi2 = 0.0;
  double residual_norm = 0.0;  // sqrt(chi2)
  double gradient_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<bool> degenerate;       // parameter not constrained by the data
  std::vector<double> cost_history;   // chi2 after each accepted iteration, starting with the initial cost
};

namespace detail {

inline double cost_of(const Vec& r) { return r.squaredNorm(); }

inline bool residuals(const ParametricModel& m, const DataSeries& d, const Vec& th, Vec& r) {
  r.resize(static_cast<Eigen::Index>(d.size()));
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double f = m.evaluate(th, d.x[i]);
    r[static_cast<Eigen::Index>(i)] = (d.y[i] - f) / d.sigma[i];
    if (!std::isfinite(r[static_cast<Eigen::Index>(i)])) return false;
  }
  return true;
}

// Jacobian of the model values (not residuals), weighted by 1/sigma.
inline Mat jacobian(const ParametricModel& m, const DataSeries& d, const Vec& th, const Vec& lo, const Vec& hi,
                    bool numeric) {
  const auto n = static_cast<Eigen::Index>(d.size());
  const auto k = th.size();
  Mat J(n, k);
  if (m.gradient && !numeric) {
    Vec g(k);
    for (Eigen::Index i = 0; i < n; ++i) {
      m.gradient(th, d.x[static_cast<std::size_t>(i)], g);
      J.row(i) = g.transpose() / d.sigma[static_cast<std::size_t>(i)];
    }
    return J;
  }
  for (Eigen::Index j = 0; j < k; ++j) {
    const double h = 1e-6 * std::max(std::abs(th[j]), 1e-6);
    Vec a = th, b = th;
    a[j] = std::min(th[j] + h, hi[j]);
    b[j] = std::max(th[j] - h, lo[j]);
    const double span = a[j] - b[j];
    for (Eigen::Index i = 0; i < n; ++i) {
      const double x = d.x[static_cast<std::size_t>(i)];
      J(i, j) = (m.evaluate(a, x) - m.evaluate(b, x)) / span / d.sigma[static_cast<std::size_t>(i)];
    }
  }
  return J;
}

inline Vec clamp(const Vec& v, const Vec& lo, const Vec& hi) { return v.cwiseMax(lo).cwiseMin(hi); }

}  // namespace detail

/// Finite-difference gradient of the model at x, for checking analytic gradients.
inline Vec numeric_gradient(const ParametricModel& m, const Vec& th, double x, double rel_step = 1e-6) {
  Vec g(th.size());
  for (Eigen::Index j = 0; j < th.size(); ++j) {
    const double h = rel_step * std::max(std::abs(th[j]), 1e-6);
    Vec a = th, b = th;
    a[j] += h;
    b[j] -= h;
    g[j] = (m.evaluate(a, x) - m.evaluate(b, x)) / (2.0 * h);
  }
  return g;
}

/// Weighted nonlinear least squares by a Levenberg-Marquardt trust region with
/// Jacobian column scaling and box bounds (steps are projected onto the box).
inline FitResult fit_curve(const ParametricModel& m, const DataSeries& data, const FitOptions& opt = {}) {
  const std::size_t k = m.size();
  require(data.x.size() == data.y.size() && data.sigma.size() == data.x.size(), ErrorCode::InvalidParameter,
          "x, y and sigma must have equal length");
  require(data.size() >= k && k > 0, ErrorCode::InsufficientData, "fewer data points than free parameters");
  for (std::size_t i = 0; i < data.size(); ++i) {
    require(data.sigma[i] > 0.0 && std::isfinite(data.sigma[i]), ErrorCode::InvalidParameter, "sigmas must be > 0");
    require(std::isfinite(data.x[i]) && std::isfinite(data.y[i]), ErrorCode::InvalidParameter, "data must be finite");
  }
  const Vec lo = opt.lower.value_or(m.lower);
  const Vec hi = opt.upper.value_or(m.upper);
  require(static_cast<std::size_t>(lo.size()) == k && static_cast<std::size_t>(hi.size()) == k,
          ErrorCode::InvalidBounds, "bounds have the wrong dimension");
  for (std::size_t j = 0; j < k; ++j)
    require(lo[static_cast<Eigen::Index>(j)] < hi[static_cast<Eigen::Index>(j)], ErrorCode::InvalidBounds,
            "lower bound must be below upper bound for " + m.param_names[j]);

  Vec th = opt.theta0 ? *opt.theta0 : (m.initial_guess ? m.initial_guess(data.x, data.y) : m.default_theta);
  require(static_cast<std::size_t>(th.size()) == k, ErrorCode::InvalidParameter, "initial guess has wrong dimension");
  th = detail::clamp(th, lo, hi);

  Vec r;
  if (!detail::residuals(m, data, th, r)) fail(ErrorCode::FitDiverged, "model is not finite at the initial guess");
  double cost = detail::cost_of(r);
  const double cost0 = cost;

  FitResult res;
  res.names = m.param_names;
  res.cost_history.push_back(cost);

  Mat J = detail::jacobian(m, data, th, lo, hi, opt.numeric_jacobian);
  if (!J.allFinite()) fail(ErrorCode::SingularJacobian, "Jacobian is not finite");
  Vec diag = J.colwise().norm().transpose();
  if (diag.maxCoeff() <= 0.0) fail(ErrorCode::SingularJacobian, "model does not depend on any parameter");
  for (Eigen::Index j = 0; j < diag.size(); ++j)
    if (diag[j] <= 0.0) diag[j] = 1.0;

  auto projected_gradient = [&](const Mat& Jm, const Vec& rv) {
    const Vec g = Jm.transpose() * rv;  // descent direction for theta
    double worst = 0.0;
    const double rn = rv.norm();
    for (Eigen::Index j = 0; j < g.size(); ++j) {
      if ((th[j] <= lo[j] && g[j] < 0.0) || (th[j] >= hi[j] && g[j] > 0.0)) continue;
      const double cn = Jm.col(j).norm();
      if (cn > 0.0 && rn > 0.0) worst = std::max(worst, std::abs(g[j]) / (cn * rn));
    }
    return worst;
  };

  double lambda = 1e-3;  // relative to the column-scaled normal matrix
  double nu = 2.0;
  int it = 0;
  bool converged = false;
  res.gradient_norm = projected_gradient(J, r);
  if (cost <= 1e-30 * std::max(1.0, static_cast<double>(data.size())) || res.gradient_norm <= opt.gtol) converged = true;

  while (!converged) {
    if (it >= opt.max_iterations) fail(ErrorCode::MaxIterations, "fit did not converge in " + std::to_string(opt.max_iterations) + " iterations");
    ++it;
    bool accepted = false;
    for (int inner = 0; inner < 60 && !accepted; ++inner) {
      // Scaled damped step from the stacked system [J D^-1; sqrt(lambda) I] ds = [r; 0].
      // Parameters held at a bound by the gradient are frozen for this step.
      const Eigen::Index kk = J.cols(), nn = J.rows();
      const Vec g = J.transpose() * r;
      Vec free_mask = Vec::Ones(kk);
      for (Eigen::Index j = 0; j < kk; ++j)
        if ((th[j] <= lo[j] && g[j] <= 0.0) || (th[j] >= hi[j] && g[j] >= 0.0)) free_mask[j] = 0.0;
      Mat Aug(nn + kk, kk);
      Aug.topRows(nn) = J * diag.cwiseInverse().cwiseProduct(free_mask).asDiagonal();
      Aug.bottomRows(kk) = std::sqrt(lambda) * Mat::Identity(kk, kk);
      Vec rhs = Vec::Zero(nn + kk);
      rhs.head(nn) = r;
      const Vec delta = diag.cwiseInverse().cwiseProduct(free_mask).cwiseProduct(Aug.colPivHouseholderQr().solve(rhs));
      const Vec cand = detail::clamp(th + delta, lo, hi);
      const Vec step = cand - th;
      const double step_norm = diag.cwiseProduct(step).norm();
      const double x_norm = diag.cwiseProduct(th).norm();
      if (step_norm <= opt.xtol * (x_norm + opt.xtol)) {
        converged = true;
        break;
      }
      Vec rc;
      const bool finite = detail::residuals(m, data, cand, rc);
      const double new_cost = finite ? detail::cost_of(rc) : std::numeric_limits<double>::infinity();
      const double predicted = cost - (r - J * step).squaredNorm();
      const double rho = predicted > 0.0 ? (cost - new_cost) / predicted : -1.0;
      if (finite && new_cost < cost && rho > 0.0) {
        const double rel_actual = (cost - new_cost) / cost;
        const double rel_pred = predicted / cost;
        th = cand;
        r = rc;
        cost = new_cost;
        res.cost_history.push_back(cost);
        lambda *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
        nu = 2.0;
        accepted = true;
        J = detail::jacobian(m, data, th, lo, hi, opt.numeric_jacobian);
        if (!J.allFinite()) fail(ErrorCode::SingularJacobian, "Jacobian became non-finite");
        const Vec cn = J.colwise().norm().transpose();
        diag = diag.cwiseMax(cn);
        res.gradient_norm = projected_gradient(J, r);
        if (res.gradient_norm <= opt.gtol || cost <= 1e-30 * cost0 ||
            (rel_actual <= opt.ftol && rel_pred <= opt.ftol && rho <= 2.0))
          converged = true;
      } else {
        lambda *= nu;
        nu *= 2.0;
        if (!std::isfinite(lambda) || lambda > 1e200) {
          converged = true;  // no productive step remains at this point
          break;
        }
      }
    }
    if (!accepted && !converged) converged = true;
  }

  res.theta = th;
  res.iterations = it;
  res.converged = converged;
  res.chi2 = cost;
  res.residual_norm = std::sqrt(cost);

  // Covariance from the column-normalised normal matrix, so conditioning reflects
  // correlations rather than parameter units.
  Vec cn = J.colwise().norm().transpose();
  for (Eigen::Index j = 0; j < cn.size(); ++j)
    if (!(cn[j] > 0.0)) cn[j] = 0.0;
  const Eigen::Index kk = J.cols();
  Vec sc(kk);
  for (Eigen::Index j = 0; j < kk; ++j) sc[j] = cn[j] > 0.0 ? 1.0 / cn[j] : 0.0;
  const Mat Js = J * sc.asDiagonal();
  const Mat N = Js.transpose() * Js;
  Eigen::SelfAdjointEigenSolver<Mat> es(N);
  const Vec ev = es.eigenvalues();
  const double evmax = std::max(ev.maxCoeff(), 0.0);
  const double cut = evmax * 1e-13;
  Mat ninv = Mat::Zero(kk, kk);
  for (Eigen::Index e = 0; e < ev.size(); ++e)
    if (ev[e] > cut) ninv += es.eigenvectors().col(e) * es.eigenvectors().col(e).transpose() / ev[e];
  const Mat inv = sc.asDiagonal() * ninv * sc.asDiagonal();
  res.covariance = inv;
  res.degenerate.assign(k, false);
  res.theta_std_errors = Vec(kk);
  for (std::size_t j = 0; j < k; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    bool degen = !(cn[jj] > 0.0);
    for (Eigen::Index e = 0; e < ev.size(); ++e)
      if (ev[e] <= cut && std::abs(es.eigenvectors()(jj, e)) > 1e-3) degen = true;
    res.degenerate[j] = degen;
    res.theta_std_errors[jj] = degen ? std::numeric_limits<double>::infinity() : std::sqrt(std::max(inv(jj, jj), 0.0));
  }
  res.params = m.reported(th);
  if (m.reported_jacobian) {
    const Mat G = m.reported_jacobian(th);
    const Mat C = G * inv * G.transpose();
    res.std_errors = C.diagonal().cwiseMax(0.0).cwiseSqrt();
    for (std::size_t j = 0; j < k; ++j)
      for (std::size_t q = 0; q < k; ++q)
        if (res.degenerate[q] && std::abs(G(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(q))) > 0.0)
          res.std_errors[static_cast<Eigen::Index>(j)] = std::numeric_limits<double>::infinity();
  } else {
    res.std_errors = res.theta_std_errors;
  }
  return res;
}

}  // namespace afcsim::fit

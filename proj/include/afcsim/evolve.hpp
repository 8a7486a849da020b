#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <complex>
#include <functional>
#include <map>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <unsupported/Eigen/MatrixFunctions>

#include "afcsim/constants.hpp"
#include "afcsim/ensemble.hpp"
#include "afcsim/error.hpp"
#include "afcsim/material.hpp"
#include "afcsim/pump_rate.hpp"
#include "afcsim/pump_sequence.hpp"
#include "afcsim/relaxation.hpp"

namespace afcsim {

/// Every segment is solved exactly (matrix exponentials), so the step only limits the
/// length of a single solve; 0 means whole intervals between record times.
struct EvolveOptions {
  double step = 0.0;          // s
  double min_step = 1e-9;     // s
  int quadrature_nodes = 28;  // contour nodes for segments with spectral diffusion
};

struct Trajectory {
  std::vector<double> times;
  std::vector<EnsembleState> states;
  double absorbed_energy = 0.0;  // J launched over the full sequence
};

namespace detail {

using Mat5 = Eigen::Matrix<double, 5, 5>;

// State ordering (g, e, z, h, 1). Within a segment all coefficients are constant,
// so the per-bin affine system is advanced exactly by a matrix exponential.
struct RateCoefficients {
  double T1, beta_z, beta_h, t_long, t_short, fill, n_z_eq;
};

inline Mat5 generator(double R, const RateCoefficients& c) {
  const double ge = 1.0 / c.T1;
  const double back = 1.0 - c.beta_z - c.beta_h;
  const double rz = 1.0 / c.t_long + c.fill;
  const double rh = 1.0 / c.t_short;
  Mat5 A = Mat5::Zero();
  A(0, 0) = -R;
  A(0, 1) = R + back * ge;
  A(0, 2) = rz;
  A(0, 3) = rh;
  A(0, 4) = -rz * c.n_z_eq;
  A(1, 0) = R;
  A(1, 1) = -R - ge;
  A(2, 1) = c.beta_z * ge;
  A(2, 2) = -rz;
  A(2, 4) = rz * c.n_z_eq;
  A(3, 1) = c.beta_h * ge;
  A(3, 3) = -rh;
  return A;
}

// Conserving coordinates (e, z, h, 1): n_g = 1 - n_e - n_z - n_h is eliminated, so the
// propagated system keeps the total exactly even when pump rates make the generator stiff.
using Mat4 = Eigen::Matrix4d;

inline Mat4 reduced_generator(double R, const RateCoefficients& c) {
  const Mat5 A = generator(R, c);
  Eigen::Matrix<double, 5, 4> T = Eigen::Matrix<double, 5, 4>::Zero();
  T.row(0) << -1.0, -1.0, -1.0, 1.0;
  T(1, 0) = T(2, 1) = T(3, 2) = T(4, 3) = 1.0;
  return A.bottomRows<4>() * T;
}

struct Propagator {
  Eigen::Matrix3d M;
  Eigen::Vector3d q;
};

inline Propagator propagator(double R, const RateCoefficients& c, double h) {
  const Mat4 E = (reduced_generator(R, c) * h).exp();
  return {E.topLeftCorner<3, 3>(), E.topRightCorner<3, 1>()};
}

inline void store(EnsembleState& s, std::size_t i, double e, double z, double h) {
  e = std::clamp(e, 0.0, 1.0);
  z = std::clamp(z, 0.0, 1.0);
  h = std::clamp(h, 0.0, 1.0);
  const double shelved = e + z + h;
  if (shelved > 1.0) {
    e /= shelved;
    z /= shelved;
    h /= shelved;
  }
  s.n_e[i] = e;
  s.n_z[i] = z;
  s.n_h[i] = h;
  s.n_g[i] = std::max(1.0 - (e + z + h), 0.0);
}

inline void apply(const Propagator& P, EnsembleState& s, std::size_t i) {
  const Eigen::Vector3d y(s.n_e[i], s.n_z[i], s.n_h[i]);
  const Eigen::Vector3d y1 = P.M * y + P.q;
  store(s, i, y1[0], y1[1], y1[2]);
}

// Sparse generator of one pumped segment with spectral diffusion, in the conserving
// coordinates (e, z, h, 1) per bin. Diffusion is the three-point Laplacian with reflecting
// edges (n_g follows, the total being uniform); its rate makes the variance grow by
// kappa_diff * P per second.
inline Eigen::SparseMatrix<double> coupled_generator(const std::vector<double>& rates, const RateCoefficients& c,
                                                     double diffusion_per_bin2) {
  const auto n = static_cast<Eigen::Index>(rates.size());
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(n) * 16);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Mat4 A = reduced_generator(rates[static_cast<std::size_t>(i)], c);
    for (int r = 0; r < 4; ++r)
      for (int q = 0; q < 4; ++q) {
        double v = A(r, q);
        if (r == q && r < 3) {
          const int neighbours = (i > 0) + (i + 1 < n);
          v -= diffusion_per_bin2 * neighbours;
        }
        if (v != 0.0) t.emplace_back(4 * i + r, 4 * i + q, v);
      }
    for (int r = 0; r < 3 && diffusion_per_bin2 > 0.0; ++r) {
      if (i > 0) t.emplace_back(4 * i + r, 4 * (i - 1) + r, diffusion_per_bin2);
      if (i + 1 < n) t.emplace_back(4 * i + r, 4 * (i + 1) + r, diffusion_per_bin2);
    }
  }
  Eigen::SparseMatrix<double> G(4 * n, 4 * n);
  G.setFromTriplets(t.begin(), t.end());
  return G;
}

// exp(tau G) y by the Bromwich integral on an optimised cotangent (Talbot) contour with
// `nodes` midpoint nodes; conjugate symmetry halves the number of complex solves.
inline Eigen::VectorXd contour_expm_apply(const Eigen::SparseMatrix<double>& G, const Eigen::VectorXd& y, double tau,
                                          int nodes) {
  using cd = std::complex<double>;
  const Eigen::SparseMatrix<cd> Gc = G.cast<cd>();
  Eigen::SparseMatrix<cd> I(G.rows(), G.cols());
  I.setIdentity();
  const Eigen::VectorXcd yc = y.cast<cd>();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(y.size());
  const double N = static_cast<double>(nodes);
  Eigen::SparseLU<Eigen::SparseMatrix<cd>> lu;
  bool analysed = false;
  for (int k = 0; k < nodes / 2; ++k) {
    const double th = (k + 0.5) * 2.0 * constants::pi / N;
    const double a = 0.6407 * th;
    const cd z = N / tau * cd(0.5017 * th / std::tan(a) - 0.6122, 0.2645 * th);
    const cd dz = N / tau * cd(0.5017 / std::tan(a) - 0.5017 * a / (std::sin(a) * std::sin(a)), 0.2645);
    const Eigen::SparseMatrix<cd> M = z * I - Gc;
    if (!analysed) {
      lu.analyzePattern(M);
      analysed = true;
    }
    lu.factorize(M);
    if (lu.info() != Eigen::Success) fail(ErrorCode::NonFiniteState, "contour solve failed");
    const Eigen::VectorXcd x = lu.solve(yc);
    out += (std::exp(z * tau) * dz / cd(0.0, 1.0) * x).real();
  }
  return out * (2.0 / N);
}

inline void apply_coupled(const Eigen::SparseMatrix<double>& G, EnsembleState& s, double tau, int nodes) {
  const std::size_t n = s.size();
  Eigen::VectorXd y(static_cast<Eigen::Index>(4 * n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto b = static_cast<Eigen::Index>(4 * i);
    y[b] = s.n_e[i];
    y[b + 1] = s.n_z[i];
    y[b + 2] = s.n_h[i];
    y[b + 3] = 1.0;
  }
  const Eigen::VectorXd r = contour_expm_apply(G, y, tau, nodes);
  for (std::size_t i = 0; i < n; ++i) {
    const auto b = static_cast<Eigen::Index>(4 * i);
    store(s, i, r[b], r[b + 1], r[b + 2]);
  }
}

class SegmentStepper {
 public:
  SegmentStepper(std::vector<double> rates, RateCoefficients c) : rates_(std::move(rates)), c_(c) {
    uniform_ = std::all_of(rates_.begin(), rates_.end(), [&](double r) { return r == rates_.front(); });
  }

  void advance(EnsembleState& s, double h) {
    auto it = cache_.find(h);
    if (it == cache_.end()) {
      std::vector<Propagator> props;
      if (uniform_) {
        props.push_back(propagator(rates_.empty() ? 0.0 : rates_.front(), c_, h));
      } else {
        props.reserve(rates_.size());
        for (double r : rates_) props.push_back(propagator(r, c_, h));
      }
      if (cache_.size() > 4) cache_.clear();
      it = cache_.emplace(h, std::move(props)).first;
    }
    const auto& props = it->second;
    for (std::size_t i = 0; i < s.size(); ++i) apply(props[uniform_ ? 0 : i], s, i);
  }

 private:
  std::vector<double> rates_;
  RateCoefficients c_;
  bool uniform_ = false;
  std::map<double, std::vector<Propagator>> cache_;
};

}  // namespace detail

/// Integrates the rate equations through the sequence and returns the state at each
/// requested time (seconds from the start of the first segment).
inline Trajectory evolve(const EnsembleState& initial, const PumpSequence& seq, const MaterialParams& p,
                         const TlsParams& tls, const std::vector<double>& record_times,
                         const EvolveOptions& opt = {}) {
  seq.validate();
  p.validate();
  tls.validate();
  initial.check_finite();
  const double total = seq.total_duration();
  require(std::is_sorted(record_times.begin(), record_times.end()), ErrorCode::PreconditionViolated,
          "record times must be sorted");
  for (double t : record_times)
    require(t >= 0.0 && t <= total * (1.0 + 1e-12), ErrorCode::PreconditionViolated,
            "record times must lie within the sequence");
  const double step = opt.step;
  if (step < 0.0 || (step > 0.0 && step < opt.min_step))
    fail(ErrorCode::StepSizeUnderflow, "integrator step below the minimum");
  require(opt.quadrature_nodes >= 8 && opt.quadrature_nodes % 2 == 0, ErrorCode::InvalidParameter,
          "quadrature nodes must be even and >= 8");

  detail::RateCoefficients base{p.T1_opt, p.beta_zeeman, p.beta_shf,
                                flipflop_lifetime(p.B_field, p.temperature, p), p.t_short, 0.0,
                                initial.n_z_eq};

  Trajectory out;
  EnsembleState s = initial;
  std::size_t next = 0;
  auto record_until = [&](double t) {
    while (next < record_times.size() && record_times[next] <= t + 1e-15) {
      out.times.push_back(record_times[next]);
      out.states.push_back(s);
      ++next;
    }
  };

  double t = 0.0;
  record_until(t);

  // Advances [t, t + dur] with constant coefficients, stopping at record times and,
  // when a step is set, at most `step` per exact solve.
  auto run_interval = [&](double dur, const std::function<void(double)>& advance, double power) {
    const double end = t + dur;
    while (t < end) {
      double stop = end;
      if (step > 0.0) stop = std::min(stop, t + step);
      if (next < record_times.size() && record_times[next] > t && record_times[next] < stop) stop = record_times[next];
      const double dt = stop - t;
      if (dt > 0.0) advance(dt);
      out.absorbed_energy += power * dt;
      t = stop;
      s.check_finite();
      record_until(t);
      if (stop == end) break;
    }
    t = end;
    record_until(t);
  };

  for (const auto& seg : seq.segments) {
    auto c = base;
    c.fill = tls_fill_rate(seg.incident_power, tls);
    auto rates = pump_rate_profile(seg, s.grid, p);
    const double variance_rate = tls.kappa_diff * seg.incident_power;  // Hz^2 per second
    if (variance_rate > 0.0) {
      const double bw = s.grid.bin_width();
      const auto G = detail::coupled_generator(rates, c, 0.5 * variance_rate / (bw * bw));
      run_interval(seg.duration, [&](double dt) { detail::apply_coupled(G, s, dt, opt.quadrature_nodes); },
                   seg.incident_power);
    } else {
      detail::SegmentStepper stepper(std::move(rates), c);
      run_interval(seg.duration, [&](double dt) { stepper.advance(s, dt); }, seg.incident_power);
    }
  }
  if (seq.idle_duration > 0.0) {
    detail::SegmentStepper dark(std::vector<double>(s.size(), 0.0), base);
    run_interval(seq.idle_duration, [&](double dt) { dark.advance(s, dt); }, 0.0);
  }
  record_until(total * (1.0 + 1e-12));
  return out;
}

/// Final state after the whole sequence.
inline EnsembleState evolve_final(const EnsembleState& initial, const PumpSequence& seq, const MaterialParams& p,
                                  const TlsParams& tls, const EvolveOptions& opt = {}) {
  auto tr = evolve(initial, seq, p, tls, {seq.total_duration()}, opt);
  return tr.states.back();
}

}  // namespace afcsim

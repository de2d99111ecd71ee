#include "fit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace qbeat {

namespace {

double wrap_phase(double phi) {
  phi = std::fmod(phi, kTwoPi);
  if (phi <= -0.5 * kTwoPi) phi += kTwoPi;
  if (phi > 0.5 * kTwoPi) phi -= kTwoPi;
  return phi;
}

struct Series {
  std::vector<double> t, y, w;  // w = 1/sigma^2
};

// model and 5-parameter Jacobian; beta = (c, A, Gamma, f_MHz, phi)
double model(const Eigen::VectorXd& b, double t) {
  return b[0] + b[1] * std::exp(-b[2] * t) * std::cos(kTwoPi * b[3] * t + b[4]);
}

void jacobian_row(const Eigen::VectorXd& b, double t, Eigen::VectorXd& row) {
  const double e = std::exp(-b[2] * t);
  const double arg = kTwoPi * b[3] * t + b[4];
  const double c = std::cos(arg), s = std::sin(arg);
  row[0] = 1.0;
  row[1] = e * c;
  row[2] = -t * b[1] * e * c;
  row[3] = -kTwoPi * t * b[1] * e * s;
  row[4] = -b[1] * e * s;
}

double chi2(const Series& d, const Eigen::VectorXd& b) {
  double acc = 0.0;
  for (size_t i = 0; i < d.t.size(); ++i) {
    const double r = d.y[i] - model(b, d.t[i]);
    acc += d.w[i] * r * r;
  }
  return acc;
}

Eigen::VectorXd initial_guess(const Series& d) {
  const size_t n = d.t.size();
  Eigen::VectorXd b(5);
  double wsum = 0.0, mean = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mean += d.w[i] * d.y[i];
    wsum += d.w[i];
  }
  mean /= wsum;
  b[0] = mean;

  // DFT peak over a frequency grid bounded by the window and sample spacing
  const double span = d.t.back() - d.t.front();
  double dt_min = span;
  for (size_t i = 1; i < n; ++i) dt_min = std::min(dt_min, d.t[i] - d.t[i - 1]);
  const double f_lo = 0.5 / span;
  const double f_hi = 0.5 / std::max(dt_min, 1e-9);
  const double df = 0.25 / span;
  double best_f = f_lo, best_p = -1.0;
  for (double f = f_lo; f <= f_hi; f += df) {
    cxd z = 0.0;
    for (size_t i = 0; i < n; ++i) {
      const double ph = kTwoPi * f * d.t[i];
      z += (d.y[i] - mean) * cxd(std::cos(ph), -std::sin(ph));
    }
    if (std::norm(z) > best_p) {
      best_p = std::norm(z);
      best_f = f;
    }
  }
  b[3] = best_f;

  // quadrature projection at the peak frequency for amplitude and phase
  cxd z = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double ph = kTwoPi * best_f * d.t[i];
    z += (d.y[i] - mean) * cxd(std::cos(ph), -std::sin(ph));
  }
  b[1] = 2.0 * std::abs(z) / static_cast<double>(n);
  b[4] = std::arg(z);

  // split-window RMS envelope for the decay rate
  const double t_mid = 0.5 * (d.t.front() + d.t.back());
  double a1 = 0.0, a2 = 0.0, t1 = 0.0, t2 = 0.0;
  int n1 = 0, n2 = 0;
  for (size_t i = 0; i < n; ++i) {
    const double r = d.y[i] - mean;
    if (d.t[i] < t_mid) {
      a1 += r * r;
      t1 += d.t[i];
      ++n1;
    } else {
      a2 += r * r;
      t2 += d.t[i];
      ++n2;
    }
  }
  b[2] = 0.0;
  if (n1 > 4 && n2 > 4 && a1 > 0.0 && a2 > 0.0) {
    a1 = std::sqrt(a1 / n1);
    a2 = std::sqrt(a2 / n2);
    const double dt = t2 / n2 - t1 / n1;
    if (dt > 0.0) b[2] = std::clamp(std::log(a1 / a2) / dt, -2.0 / dt, 2.0 / dt);
  }
  return b;
}

void canonicalize(Eigen::VectorXd& b) {
  if (b[1] < 0.0) {
    b[1] = -b[1];
    b[4] += 0.5 * kTwoPi;
  }
  if (b[3] < 0.0) {
    b[3] = -b[3];
    b[4] = -b[4];
  }
  b[4] = wrap_phase(b[4]);
}

}  // namespace

double BeatFit::amp_at(double tau_us) const {
  return amplitude * std::exp(-decay * tau_us);
}

BeatFit fit_damped_sinusoid(const std::vector<double>& tau,
                            const std::vector<double>& y,
                            const std::vector<double>& sigma,
                            double window_lo, double window_hi,
                            const BeatFit* guess) {
  Series d;
  for (size_t i = 0; i < tau.size(); ++i) {
    if (tau[i] < window_lo || tau[i] > window_hi) continue;
    const double s = i < sigma.size() ? sigma[i] : 1.0;
    if (!(s > 0.0) || !std::isfinite(s) || !std::isfinite(y[i])) continue;
    d.t.push_back(tau[i]);
    d.y.push_back(y[i]);
    d.w.push_back(1.0 / (s * s));
  }

  BeatFit fit;
  fit.window_lo = window_lo;
  fit.window_hi = window_hi;
  fit.n_points = static_cast<int>(d.t.size());
  if (d.t.size() < 8) {
    fit.converged = false;
    fit.freq_identifiable = false;
    return fit;
  }

  Eigen::VectorXd b(5);
  if (guess) {
    b << guess->offset, guess->amplitude, guess->decay, guess->freq_mhz,
        guess->phase;
  } else {
    b = initial_guess(d);
  }

  double lambda = 1e-3;
  double cur = chi2(d, b);
  bool converged = false;
  Eigen::VectorXd row(5);
  for (int iter = 0; iter < 200; ++iter) {
    Eigen::MatrixXd jtj = Eigen::MatrixXd::Zero(5, 5);
    Eigen::VectorXd jtr = Eigen::VectorXd::Zero(5);
    for (size_t i = 0; i < d.t.size(); ++i) {
      jacobian_row(b, d.t[i], row);
      const double r = d.y[i] - model(b, d.t[i]);
      jtj.noalias() += d.w[i] * row * row.transpose();
      jtr.noalias() += d.w[i] * r * row;
    }
    if (jtr.norm() < 1e-12 * std::max(1.0, cur)) {
      converged = true;
      break;
    }
    bool improved = false;
    for (int attempt = 0; attempt < 16; ++attempt) {
      Eigen::MatrixXd damped = jtj;
      for (int k = 0; k < 5; ++k)
        damped(k, k) += lambda * std::max(jtj(k, k), 1e-12);
      const Eigen::VectorXd step = damped.ldlt().solve(jtr);
      const Eigen::VectorXd trial = b + step;
      const double trial_chi2 = chi2(d, trial);
      if (trial_chi2 <= cur) {
        const double rel = step.norm() / std::max(1.0, b.norm());
        b = trial;
        const double gain = cur - trial_chi2;
        cur = trial_chi2;
        lambda = std::max(lambda / 3.0, 1e-12);
        improved = true;
        if (rel < 1e-10 || gain < 1e-14 * std::max(cur, 1.0)) {
          converged = true;
        }
        break;
      }
      lambda *= 4.0;
    }
    if (!improved) {
      converged = true;  // damping ladder exhausted: at a local minimum
      break;
    }
    if (converged) break;
  }

  canonicalize(b);
  fit.offset = b[0];
  fit.amplitude = b[1];
  fit.decay = b[2];
  fit.freq_mhz = b[3];
  fit.phase = b[4];
  fit.converged = converged;
  fit.residual_norm = std::sqrt(cur);

  // covariance from the weighted normal equations at the optimum
  Eigen::MatrixXd jtj = Eigen::MatrixXd::Zero(5, 5);
  Eigen::VectorXd row2(5);
  for (size_t i = 0; i < d.t.size(); ++i) {
    jacobian_row(b, d.t[i], row2);
    jtj.noalias() += d.w[i] * row2 * row2.transpose();
  }
  const Eigen::MatrixXd cov =
      jtj.ldlt().solve(Eigen::MatrixXd::Identity(5, 5));
  fit.err_offset = std::sqrt(std::max(0.0, cov(0, 0)));
  fit.err_amplitude = std::sqrt(std::max(0.0, cov(1, 1)));
  fit.err_decay = std::sqrt(std::max(0.0, cov(2, 2)));
  fit.err_freq = std::sqrt(std::max(0.0, cov(3, 3)));
  fit.err_phase = std::sqrt(std::max(0.0, cov(4, 4)));

  // a vanishing amplitude leaves frequency and phase unconstrained
  if (!(fit.amplitude > 2.0 * fit.err_amplitude) || fit.amplitude < 1e-14)
    fit.freq_identifiable = false;
  return fit;
}

BeatFit fit_damped_sinusoid(const CorrelationEstimate& trace, double window_lo,
                            double window_hi, const BeatFit* guess) {
  std::vector<double> sigma = trace.stderr_;
  bool all_exact = true;
  for (size_t k = 0; k < sigma.size(); ++k) {
    if (sigma[k] > 0.0) all_exact = false;
  }
  if (all_exact) sigma.assign(trace.g2.size(), 1.0);
  return fit_damped_sinusoid(trace.tau_us, trace.g2, sigma, window_lo,
                             window_hi, guess);
}

BeatFit post_revival_fit(const CorrelationEstimate& trace, double t_on_us,
                         double guard_us, double span_us) {
  return fit_damped_sinusoid(trace, t_on_us + guard_us,
                             t_on_us + guard_us + span_us);
}

}  // namespace qbeat

#include "airybeta/rng.hpp"

#include <cmath>
#include <random>
#include <string>

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "airybeta/errors.hpp"

namespace airybeta {

namespace {

constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ULL;
constexpr std::uint64_t kMul1 = 0xCA5A826395121157ULL;
constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;
constexpr double kTwoPi = 6.283185307179586476925286766559;

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi, std::uint64_t& lo) {
  const unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
  hi = static_cast<std::uint64_t>(p >> 64);
  lo = static_cast<std::uint64_t>(p);
}

}  // namespace

std::array<std::uint64_t, 4> philox4x64(const std::array<std::uint64_t, 4>& counter,
                                        std::uint64_t key0, std::uint64_t key1) {
  std::array<std::uint64_t, 4> c = counter;
  for (int round = 0; round < 10; ++round) {
    std::uint64_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, c[0], hi0, lo0);
    mulhilo(kMul1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ key0, lo1, hi0 ^ c[3] ^ key1, lo0};
    key0 += kWeyl0;
    key1 += kWeyl1;
  }
  return c;
}

Stream::Stream(Seed seed, Tag tag, std::uint64_t index, std::uint64_t sub)
    : seed_(seed), index_(index), tag_(static_cast<std::uint64_t>(tag)), sub_(sub) {}

void Stream::refill() {
  buf_ = philox4x64({block_, index_, tag_, sub_}, seed_.value, seed_.stream_id);
  ++block_;
  pos_ = 0;
}

Stream::result_type Stream::operator()() {
  if (pos_ == 4) refill();
  return buf_[pos_++];
}

double Stream::uniform() {
  const std::uint64_t bits = (*this)() >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double Stream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = kTwoPi * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

double sample_gaussian(Stream& stream, double mean, double sd) {
  if (!std::isfinite(sd) || sd < 0.0) throw DomainError("sample_gaussian: sd must be finite and >= 0");
  if (sd == 0.0) return mean;
  return mean + sd * stream.normal();
}

double sample_chi(Stream& stream, double alpha) {
  if (!(alpha > 0.0)) throw DomainError("sample_chi: alpha must be positive");
  std::gamma_distribution<double> gamma(0.5 * alpha, 2.0);
  return std::sqrt(gamma(stream));
}

bool BrownianPath::contains(double t) const {
  const double slack = 1e-9 * dt;
  return t >= t0 - slack && t <= t_end() + slack;
}

double BrownianPath::operator()(double t) const {
  if (!contains(t)) {
    throw RangeError("BrownianPath: time " + std::to_string(t) + " outside [" +
                     std::to_string(t0) + ", " + std::to_string(t_end()) + "]");
  }
  double x = (t - t0) / dt;
  // Snap to a node when t is a grid time up to rounding.
  const double nearest = std::round(x);
  if (std::fabs(x - nearest) < 1e-9) x = nearest;
  const std::size_t last = values.size() - 1;
  if (x <= 0.0) return values[0];
  auto k = static_cast<std::size_t>(x);
  if (k >= last) return values[last];
  const double w = x - static_cast<double>(k);
  return values[k] + w * (values[k + 1] - values[k]);
}

BrownianPath brownian_from_increments(double t0, double dt, const std::vector<double>& increments,
                                      double beta) {
  if (!(dt > 0.0) || !(beta > 0.0)) throw DomainError("brownian path: dt and beta must be positive");
  BrownianPath p;
  p.t0 = t0;
  p.dt = dt;
  p.beta = beta;
  p.values.resize(increments.size() + 1);
  p.values[0] = 0.0;
  for (std::size_t k = 0; k < increments.size(); ++k) p.values[k + 1] = p.values[k] + increments[k];
  return p;
}

BrownianPath sample_brownian_path(Seed seed, double t0, double dt, int n_steps, double beta) {
  if (!(dt > 0.0) || !(beta > 0.0)) throw DomainError("brownian path: dt and beta must be positive");
  if (n_steps < 1) throw DomainError("brownian path: n_steps must be >= 1");
  Stream s(seed, Tag::brownian);
  const double sd = std::sqrt(4.0 / beta * dt);
  BrownianPath p;
  p.t0 = t0;
  p.dt = dt;
  p.beta = beta;
  p.refine_seed = seed;
  p.values.resize(static_cast<std::size_t>(n_steps) + 1);
  p.values[0] = 0.0;
  for (int k = 0; k < n_steps; ++k) p.values[k + 1] = p.values[k] + sd * s.normal();
  return p;
}

BrownianPath zero_path(double t0, double dt, int n_steps, double beta) {
  if (!(dt > 0.0) || !(beta > 0.0)) throw DomainError("brownian path: dt and beta must be positive");
  BrownianPath p;
  p.t0 = t0;
  p.dt = dt;
  p.beta = beta;
  p.values.assign(static_cast<std::size_t>(n_steps) + 1, 0.0);
  return p;
}

double bridge_midpoint(const BrownianPath& path, double ta, double ba, double tb, double bb,
                       std::uint64_t step, std::uint64_t level) {
  Stream s(path.refine_seed, Tag::riccati_bridge, step, level);
  const double var = 4.0 / path.beta * (tb - ta) / 4.0;
  return 0.5 * (ba + bb) + std::sqrt(var) * s.normal();
}

BrownianPath edge_brownian_from_walk(const std::vector<double>& xhat,
                                     const std::vector<double>& yhat, long offset, long N_p,
                                     double beta, double dt_out, double t_lo, double t_hi,
                                     Seed bridge_seed, double z0_sign, FillIn fill) {
  if (!(dt_out > 0.0) || !(beta > 0.0)) throw DomainError("edge path: dt_out and beta must be positive");
  if (t_lo > 0.0 || t_hi < 0.0) throw DomainError("edge path: time range must contain 0");
  if (xhat.size() != yhat.size()) throw ContractError("edge path: walk arrays differ in length");
  const double h = std::cbrt(1.0 / static_cast<double>(N_p));
  const long j_min = static_cast<long>(std::floor(t_lo / h + 1e-12));
  const long j_max = static_cast<long>(std::ceil(t_hi / h - 1e-12));
  const long n_lo = N_p - j_max;
  const long n_hi = N_p - j_min;
  const long size = static_cast<long>(xhat.size());
  if (n_lo < offset || n_hi >= offset + size || N_p < offset || N_p >= offset + size) {
    throw RangeError("edge path: requested time range exceeds the available walk data");
  }
  const int m = std::max(1, static_cast<int>(std::ceil(h / dt_out - 1e-9)));
  const double dt = h / m;
  const double scale = std::sqrt(2.0 / beta) * std::pow(static_cast<double>(N_p), -1.0 / 6.0);
  const double xN = xhat[static_cast<std::size_t>(N_p - offset)];
  const double yN = yhat[static_cast<std::size_t>(N_p - offset)];
  auto walk = [&](long j) {
    const auto i = static_cast<std::size_t>(N_p - j - offset);
    return scale * (z0_sign * (xhat[i] - xN) + (yhat[i] - yN));
  };

  BrownianPath p;
  p.t0 = static_cast<double>(j_min) * h;
  p.dt = dt;
  p.beta = beta;
  p.orientation = Orientation::two_sided;
  p.origin = static_cast<std::size_t>(-j_min) * static_cast<std::size_t>(m);
  p.refine_seed = bridge_seed;
  p.values.resize(static_cast<std::size_t>(j_max - j_min) * m + 1);
  const double sigma2 = 4.0 / beta;
  for (long j = j_min; j <= j_max; ++j) {
    const auto base = static_cast<std::size_t>(j - j_min) * m;
    p.values[base] = walk(j);
    if (j == j_max) break;
    const double b_end = walk(j + 1);
    Stream s(bridge_seed, Tag::walk_bridge, static_cast<std::uint64_t>(j));
    double b = p.values[base];
    for (int i = 1; i < m; ++i) {
      const int r = m - i + 1;
      const double mean = b + (b_end - b) / r;
      const double var = fill == FillIn::bridge ? sigma2 * dt * (r - 1) / r : 0.0;
      b = var > 0.0 ? mean + std::sqrt(var) * s.normal() : mean;
      p.values[base + i] = b;
    }
  }
  p.values[p.origin] = 0.0;
  return p;
}

CoupledPair quantile_couple_from_uniform(double u, long k, double beta) {
  if (k < 2) throw DomainError("quantile coupling: k must be >= 2");
  if (!(beta > 0.0)) throw DomainError("quantile coupling: beta must be positive");
  const double m = static_cast<double>(k - 1);
  const double shape = 0.5 * beta * m;
  double gam;
  if (u <= 0.5) {
    gam = boost::math::gamma_p_inv(shape, u);
  } else {
    gam = boost::math::gamma_q_inv(shape, 1.0 - u);
  }
  CoupledPair out;
  out.Y = (2.0 * gam - beta * m) / std::sqrt(2.0 * beta * m);
  out.g = -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * u);
  return out;
}

CoupledPair quantile_couple_gamma(Seed seed, long k, double beta) {
  if (k < 2) throw DomainError("quantile coupling: k must be >= 2");
  Stream s(seed, Tag::jacobi_a, static_cast<std::uint64_t>(k - 1));
  return quantile_couple_from_uniform(s.uniform(), k, beta);
}

}  // namespace airybeta

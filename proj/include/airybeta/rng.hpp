#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

namespace airybeta {

struct Seed {
  std::uint64_t value = 0;
  std::uint64_t stream_id = 0;
};

// Domain tags keep the counter spaces of different consumers disjoint.
enum class Tag : std::uint64_t {
  generic = 0,
  jacobi_b = 1,
  jacobi_a = 2,
  brownian = 3,
  walk_bridge = 4,
  riccati_bridge = 5,
  test = 99,
};

// Philox4x64-10 block function. Keyed by (seed.value, seed.stream_id).
std::array<std::uint64_t, 4> philox4x64(const std::array<std::uint64_t, 4>& counter,
                                        std::uint64_t key0, std::uint64_t key1);

// A sequential draw stream addressed by (seed, tag, index). Each stream owns
// a private counter space, so per-entry streams make every sampled entry a
// pure function of its address. Satisfies UniformRandomBitGenerator.
class Stream {
 public:
  using result_type = std::uint64_t;

  Stream(Seed seed, Tag tag = Tag::generic, std::uint64_t index = 0, std::uint64_t sub = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

  // Uniform on the open interval (0, 1) with 53 random bits.
  double uniform();
  double normal();

 private:
  void refill();

  Seed seed_;
  std::uint64_t index_;
  std::uint64_t tag_;
  std::uint64_t sub_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 4> buf_{};
  int pos_ = 4;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

double sample_gaussian(Stream& stream, double mean, double sd);
double sample_chi(Stream& stream, double alpha);

enum class Orientation { forward, two_sided };

// Piecewise linear Brownian path on a uniform grid with variance rate 4/beta.
// values[origin] == 0, where origin is 0 for forward paths.
struct BrownianPath {
  double t0 = 0.0;
  double dt = 1.0;
  std::vector<double> values;
  double beta = 2.0;
  Orientation orientation = Orientation::forward;
  std::size_t origin = 0;
  Seed refine_seed{};

  double t_end() const { return t0 + dt * static_cast<double>(values.size() - 1); }
  std::size_t size() const { return values.size(); }
  double time(std::size_t k) const { return t0 + dt * static_cast<double>(k); }
  bool contains(double t) const;
  double operator()(double t) const;
};

BrownianPath sample_brownian_path(Seed seed, double t0, double dt, int n_steps, double beta);
BrownianPath brownian_from_increments(double t0, double dt, const std::vector<double>& increments,
                                      double beta);
BrownianPath zero_path(double t0, double dt, int n_steps, double beta);

// Midpoint of a Brownian bridge between (ta, ba) and (tb, bb), keyed by
// (seed, step, level) so refinements are reproducible.
double bridge_midpoint(const BrownianPath& path, double ta, double ba, double tb, double bb,
                       std::uint64_t step, std::uint64_t level);

// Two-sided edge Brownian motion from cumulative walks. xhat[i] and yhat[i]
// hold the partial sums up to matrix index offset + i. Walk points sit at
// multiples of h = N_p^{-1/3}; the output mesh is h / ceil(h / dt_out) so that
// every walk point is a grid node. The gaps are filled by Brownian bridges,
// or linearly for noise-free surrogates.
enum class FillIn { bridge, linear };

BrownianPath edge_brownian_from_walk(const std::vector<double>& xhat,
                                     const std::vector<double>& yhat, long offset, long N_p,
                                     double beta, double dt_out, double t_lo, double t_hi,
                                     Seed bridge_seed, double z0_sign = 1.0,
                                     FillIn fill = FillIn::bridge);

struct CoupledPair {
  double Y = 0.0;
  double g = 0.0;
};

// Comonotone coupling of the normalized chi-square entry Y_k with a standard
// Gaussian through a shared uniform quantile.
CoupledPair quantile_couple_gamma(Seed seed, long k, double beta);
CoupledPair quantile_couple_from_uniform(double u, long k, double beta);

}  // namespace airybeta

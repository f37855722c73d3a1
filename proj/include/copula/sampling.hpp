#pragma once

// Synthetic bivariate samples from the generative models, used as oracles.
//
// Streams: Rng{seed, stream} seeds a std::mt19937_64 from
// std::seed_seq{seed_lo, seed_hi, stream_lo, stream_hi}. Distinct stream ids
// give independent sequences; a stream is reproduced exactly no matter which
// thread draws it.

#include <cstdint>
#include <random>
#include <vector>

namespace copula::sampling {

struct RngSpec {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

class Rng {
 public:
  explicit Rng(RngSpec spec);

  const RngSpec& spec() const { return spec_; }
  // Independent generator for another stream under the same seed.
  Rng split(std::uint64_t stream) const { return Rng({spec_.seed, stream}); }

  double normal();
  double gamma(double shape);  // unit scale
  std::mt19937_64& engine() { return engine_; }

 private:
  RngSpec spec_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

struct PairSample {
  std::vector<double> x;
  std::vector<double> y;
};

PairSample sample_bivariate_gaussian(double c, std::size_t t, Rng& rng);

enum class KMethod { kGammaMixture, kWishart };

// 2 x N factor with i.i.d. Normal(0, Sigma) columns.
struct WishartFactor {
  int n = 0;
  std::vector<double> row0;
  std::vector<double> row1;
};

WishartFactor draw_wishart_factor(double c, int n, Rng& rng);

// gamma mixture: z ~ Gamma(N/2), r ~ Normal(0, (2z/N) Sigma).
// wishart: r ~ Normal(0, A A^T / N) with A from draw_wishart_factor; N must be
// a positive integer.
PairSample sample_k_bivariate(double c, double n, std::size_t t, Rng& rng,
                              KMethod method = KMethod::kGammaMixture);

// Z = gamma W (1, 1) + sqrt(W) Q, W = (nu/2) / Gamma(nu/2), Q ~ Normal(0, Sigma).
PairSample sample_skewed_t_bivariate(double c, double nu, double gamma, std::size_t t, Rng& rng);

// The W stream of the skewed t sampler on its own.
std::vector<double> sample_inverse_gamma_mixing(double nu, std::size_t t, Rng& rng);

}  // namespace copula::sampling

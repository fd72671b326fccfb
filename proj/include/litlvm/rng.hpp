#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace litlvm::rng {

// Every random quantity in the library is a pure function of
// (seed, domain, a, b). Nothing carries hidden state, so streams are
// reproducible across platforms and independent of evaluation order.
inline constexpr std::string_view kGeneratorName = "philox4x32-10/box-muller";
inline constexpr int kGeneratorVersion = 1;

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

// Philox4x32 with 10 rounds (Salmon et al., SC'11).
Counter philox4x32_10(Counter counter, Key key);

enum class Domain : std::uint32_t {
  features = 1,
  true_beta = 2,
  true_latent = 3,
  true_alpha = 4,
  theta_noise = 5,
  response_noise = 6,
  labels = 7,
  sparsify = 8,
  init_intercept = 16,
  init_beta = 17,
  init_theta = 18,
  init_latent = 19,
  split = 32,
  folds = 33,
};

class Stream {
 public:
  Stream(std::uint64_t seed, Domain domain) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        domain_(static_cast<std::uint32_t>(domain)) {}

  // Uniform on the open interval (0, 1) with 53 random bits.
  double uniform(std::uint32_t a, std::uint64_t b) const noexcept;

  // Standard normal via Box-Muller on the first two 64-bit words of the block.
  double normal(std::uint32_t a, std::uint64_t b) const noexcept;

  Counter block(std::uint32_t a, std::uint64_t b) const noexcept {
    return philox4x32_10(
        {static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32), a, domain_}, key_);
  }

 private:
  Key key_;
  std::uint32_t domain_;
};

}  // namespace litlvm::rng

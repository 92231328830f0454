#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wlanips/types.hpp"

namespace wlanips {

enum class EqLevel { Chip, Symbol };

const char* to_string(EqLevel level);
/// Accepts "chip" or "symbol"; throws std::invalid_argument otherwise.
EqLevel parse_eq_level(const std::string& text);

/// Relative diagonal loading: lambda = kDiagonalLoading x trace(R) / n.
inline constexpr double kDiagonalLoading = 1e-3;

struct ChannelEstimate {
  std::vector<cf64> taps;       // least-squares channel fit h, one per chip (or symbol)
  std::vector<cf64> equalizer;  // Wiener taps w, output = sum conj(w_j) r[k + delay - j]
  int delay = 0;                // decision delay of the equalizer
  double mse = 0.0;             // Wiener residual per reference element
  EqLevel level = EqLevel::Chip;
};

/// Solves (A + lambda I) x = b for Hermitian A by Cholesky, with lambda =
/// loading x trace(A) / n. Row-major A. Returns none if the factor or the
/// solution is not finite.
std::optional<std::vector<cf64>> solve_loaded_hermitian(std::vector<cf64> a, std::vector<cf64> b,
                                                        double loading = kDiagonalLoading);

/// Least-squares fit h = argmin sum_k |r_k - sum_d h_d c_{k-d}|^2 over
/// k = n_taps-1 .. N-1, via loaded normal equations.
std::optional<std::vector<cf64>> ls_channel_fit(std::span<const cf32> received,
                                                std::span<const float> known, int n_taps);

/// Wiener-Hopf: R w = p with R the received autocorrelation and p its
/// cross-correlation with the known sequence, for every decision delay in
/// [0, n_taps); keeps the delay with the lowest residual.
std::optional<ChannelEstimate> estimate_channel(std::span<const cf32> received,
                                                std::span<const float> known, int n_taps,
                                                EqLevel level = EqLevel::Chip);

/// Applies the Wiener taps; output[k] estimates known[k]. Same length as input.
std::vector<cf32> equalize(std::span<const cf32> received, const ChannelEstimate& estimate);

}  // namespace wlanips

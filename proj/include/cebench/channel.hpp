// SPDX-License-Identifier: Apache-2.0
//
// Synthetic MIMO-OFDM channel generation in the per-RE frequency domain.
//
// A channel realization is a tapped delay line per (rx, tx) antenna pair:
// tap l has linear power p_l and delay tau_l taken from the selected TDL
// profile, and a complex gain that evolves over symbol time through a
// 32-sinusoid Jakes process with maximum Doppler doppler_hz (doppler 0
// gives taps that are exactly constant in time). The frequency response at
// subcarrier f is sum_l g_l * exp(-j 2 pi f df tau_l). Rx/Tx spatial
// correlation is applied per RE as R_R^{1/2} * H_iid * R_T^{1/2}. Profiles
// are normalized so the generated tensor has unit average power per entry
// in expectation.
//
// Built-in TDL-A..E power/delay tables are patterned on the 3GPP TR 38.901
// tapped-delay-line profiles (external-standard values, not produced by
// this project). Tap delays are stated at the 100 ns reference rms delay
// spread; generation rescales them by delay_spread_ns / 100. LOS-dominated
// profiles (D, E) model every tap as Rayleigh fading, including the strong
// first tap.

#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cebench/grid.hpp"
#include "cebench/linalg.hpp"

namespace cebench {

enum class FadingModel { TdlA, TdlB, TdlC, TdlD, TdlE };
enum class CorrelationLevel { Low, Medium, High };

const char* to_string(FadingModel m);
const char* to_string(CorrelationLevel c);
FadingModel fading_model_from_string(const std::string& s);
CorrelationLevel correlation_from_string(const std::string& s);

struct TdlTap {
  double delay_ns = 0.0;  // at the 100 ns reference delay spread
  double power_db = 0.0;
};

struct TdlProfile {
  std::string name;
  std::vector<TdlTap> taps;
};

const TdlProfile& builtin_profile(FadingModel m);

/// Plain-text profile file: header line `profile <name>`, then one line per
/// tap: `tap delay_ns power_db`.
TdlProfile load_tdl_profile(const std::string& path);

struct ChannelConfig {
  FadingModel fading_model = FadingModel::TdlA;
  double doppler_hz = 0.0;
  CorrelationLevel correlation = CorrelationLevel::Low;
  double snr_db = 10.0;
  std::uint64_t seed = 0;
  double subcarrier_spacing_hz = 15e3;
  double symbol_duration_s = 1e-3 / 14;
  double delay_spread_ns = 100.0;
  std::optional<TdlProfile> custom_profile;  // overrides fading_model when set
};

/// 4D channel response over (subcarrier, symbol, rx, tx), tx fastest.
struct ChannelTensor {
  GridDims dims;
  std::vector<std::complex<double>> h;

  std::complex<double>& at(int f, int s, int r, int t) {
    return h[((static_cast<std::size_t>(f) * dims.n_symb + s) * dims.n_rx + r) * dims.n_tx + t];
  }
  const std::complex<double>& at(int f, int s, int r, int t) const {
    return h[((static_cast<std::size_t>(f) * dims.n_symb + s) * dims.n_rx + r) * dims.n_tx + t];
  }
};

/// Transmitted grid X over (subcarrier, symbol, tx), tx fastest.
struct TxGrid {
  int n_sc = 0, n_symb = 0, n_tx = 0;
  std::vector<std::complex<double>> x;

  std::complex<double>& at(int f, int s, int t) {
    return x[(static_cast<std::size_t>(f) * n_symb + s) * n_tx + t];
  }
  const std::complex<double>& at(int f, int s, int t) const {
    return x[(static_cast<std::size_t>(f) * n_symb + s) * n_tx + t];
  }
};

/// Received grid Y over (subcarrier, symbol, rx), rx fastest.
struct RxGrid {
  int n_sc = 0, n_symb = 0, n_rx = 0;
  std::vector<std::complex<double>> y;

  std::complex<double>& at(int f, int s, int r) {
    return y[(static_cast<std::size_t>(f) * n_symb + s) * n_rx + r];
  }
  const std::complex<double>& at(int f, int s, int r) const {
    return y[(static_cast<std::size_t>(f) * n_symb + s) * n_rx + r];
  }
};

TxGrid make_tx_grid(const GridDims& dims);
RxGrid make_rx_grid(const GridDims& dims);

struct CorrelationPair {
  CMat r_rx;  // n_rx x n_rx, Hermitian PSD, unit diagonal
  CMat r_tx;  // n_tx x n_tx
};

/// Exponential-model correlation (R)_ij = a^|i-j| on the Rx side with
/// a = 0.0 / 0.3 / 0.9 for low / medium / high; the Tx side is identity.
CorrelationPair correlation_matrices(CorrelationLevel level, int n_rx, int n_tx);

/// Hermitian PSD square root via eigendecomposition; eigenvalues below zero
/// are clamped to zero. Throws on non-Hermitian input.
CMat matrix_sqrt(const CMat& r);

ChannelTensor gen_channel(const ChannelConfig& cfg, const GridDims& dims);

/// Per RE: y = H x + w. Noise is circularly symmetric complex Gaussian with
/// variance chosen so that the realized mean |Hx|^2 over the grid divided by
/// E|w|^2 equals 10^(snr_db/10); the SNR is defined per Rx antenna per RE.
/// snr_db = +infinity disables noise.
RxGrid transmit(const ChannelTensor& h, const TxGrid& x, double snr_db, std::uint64_t seed);

}  // namespace cebench

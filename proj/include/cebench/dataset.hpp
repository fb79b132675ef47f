// SPDX-License-Identifier: Apache-2.0
//
// Channel-estimation datasets: in-memory representation, random generation
// over a grid of channel conditions, and the CEDS binary file format.
//
// A sample stores the channel-condition scalars, the sample seed, the true
// channel tensor, the received signal at pilot REs and the pilot symbol
// values. Tensor data is quantized to 32-bit floats at generation time, so
// save/load round trips are bit-exact. Everything else about a sample
// (full received grid, payload bits) is reproducible from its seed; the
// detection path regenerates those on the fly.

#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "cebench/channel.hpp"
#include "cebench/classical.hpp"
#include "cebench/grid.hpp"

namespace cebench {

enum class PatternKind : std::uint32_t { Custom = 0, Dense = 1, Sparse = 2 };

const char* to_string(PatternKind k);

struct Sample {
  FadingModel fading = FadingModel::TdlA;
  CorrelationLevel correlation = CorrelationLevel::Low;
  double doppler_hz = 0.0;
  double snr_db = 0.0;
  std::uint64_t seed = 0;

  // Quantized to float32 values; canonical orders: h is (f,s,r,t) t fastest,
  // y_pilots is (tx asc, position asc, rx asc), pilot_values (tx, position).
  std::vector<std::complex<float>> h;
  std::vector<std::complex<float>> y_pilots;
  std::vector<std::complex<float>> pilot_values;
};

struct Dataset {
  GridDims dims;
  PatternKind pattern_kind = PatternKind::Sparse;
  std::vector<std::vector<std::pair<int, int>>> positions;  // pilot REs per tx
  double delay_spread_ns = 100.0;
  double subcarrier_spacing_hz = 15e3;
  double symbol_duration_s = 1e-3 / 14;
  std::vector<Sample> samples;

  /// The sample's pilot pattern (shared positions, per-sample values).
  RsPattern pattern_for(const Sample& s) const;

  /// True channel of one sample as a double tensor.
  ChannelTensor channel_of(const Sample& s) const;

  /// Sparse LS grid of one sample from its stored pilot observations.
  LsGrid ls_of(const Sample& s) const;

  /// Channel config to regenerate this sample's realization bit-exactly.
  ChannelConfig config_of(const Sample& s) const;
};

struct DatasetGenConfig {
  GridDims dims{72, 14, 2, 2};
  PatternKind pattern = PatternKind::Sparse;
  std::string pattern_file;  // used when pattern == Custom
  int n_samples = 0;
  std::uint64_t seed = 0;
  std::vector<FadingModel> models{FadingModel::TdlA, FadingModel::TdlB, FadingModel::TdlC,
                                  FadingModel::TdlD, FadingModel::TdlE};
  std::vector<CorrelationLevel> correlations{CorrelationLevel::Low, CorrelationLevel::Medium,
                                             CorrelationLevel::High};
  std::vector<double> dopplers{0, 30, 60, 90, 120};
  std::vector<double> snrs{-10, -5, 0, 5, 10, 15, 20, 25, 30};
  double delay_spread_ns = 100.0;
  double subcarrier_spacing_hz = 15e3;
  double symbol_duration_s = 1e-3 / 14;
};

/// Draws n_samples independent samples; each sample's condition is chosen
/// uniformly at random over the cross product of the axis lists, and its
/// seed derives from (seed, sample index), so generation is reproducible
/// and order-independent.
Dataset generate_dataset(const DatasetGenConfig& cfg);

/// Builds the full transmit grid of a sample: pilot values on the owning
/// Tx (other antennas silent on pilot REs), QPSK payload on every Tx for
/// all other REs. Returns the payload bits through data_bits (bit order:
/// f, s, tx ascending, 2 bits per symbol).
TxGrid build_tx_grid(const Dataset& ds, const Sample& s, std::vector<int>* data_bits);

void save_dataset(const std::string& path, const Dataset& ds);
Dataset load_dataset(const std::string& path);

struct DatasetInfo {
  GridDims dims;
  PatternKind pattern_kind = PatternKind::Sparse;
  std::uint64_t n_samples = 0;
  std::size_t pilots_per_tx = 0;
};
DatasetInfo inspect_dataset(const std::string& path);

}  // namespace cebench

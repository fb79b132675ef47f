// SPDX-License-Identifier: Apache-2.0
//
// QPSK modulation and per-RE MIMO detection: exhaustive maximum likelihood,
// zero forcing through the pseudo-inverse, and V-BLAST ordered successive
// interference cancellation. Detectors take the received vector y (n_rx)
// and a channel matrix estimate h (n_rx x n_tx) and return one QPSK symbol
// index in [0,4) per Tx stream.
//
// Canonical constellation: bit pair (b0, b1) maps to
// ((1-2*b0) + j(1-2*b1)) / sqrt(2); symbol index = 2*b0 + b1.

#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "cebench/linalg.hpp"

namespace cebench {

std::complex<double> qpsk_point(int symbol_index);

/// Maps bit pairs to symbols; rejects odd-length input.
std::vector<std::complex<double>> qpsk_mod(const std::vector<int>& bits);

/// Hard slicing back to bits (2 per symbol).
std::vector<int> qpsk_demod(const std::vector<std::complex<double>>& symbols);

int qpsk_slice_index(const std::complex<double>& z);
void symbol_indices_to_bits(const std::vector<int>& symbols, std::vector<int>& bits);

/// argmin over all QPSK^n_tx candidates of ||y - H x||^2, ties broken by
/// lexicographic candidate order. Guarded at n_tx <= 8; larger setups are
/// rejected with a message advising ZF/V-BLAST.
std::vector<int> ml_detect(const std::vector<std::complex<double>>& y, const CMat& h);

/// x_hat = per-stream nearest QPSK symbol of pinv(H) y. A rank-deficient H
/// (pivot below tolerance) sets erasure and returns symbol 0 on all
/// streams.
std::vector<int> zf_detect(const std::vector<std::complex<double>>& y, const CMat& h,
                           bool* erasure);

/// Ordered successive interference cancellation: repeatedly detect the
/// stream with the smallest pseudo-inverse row norm (highest post-ZF SNR),
/// subtract its contribution and deflate H. noise_var is accepted for
/// interface stability with MMSE-style orderings; the classic ZF ordering
/// used here does not consume it.
std::vector<int> vblast_detect(const std::vector<std::complex<double>>& y, const CMat& h,
                               double noise_var, bool* erasure);

/// Hamming distance / length; rejects length mismatch.
double ber(const std::vector<int>& tx_bits, const std::vector<int>& rx_bits);

struct DetectionReport {
  std::string detector;
  std::string estimator;
  double ber = 0.0;
  std::uint64_t bit_errors = 0;
  std::uint64_t total_bits = 0;
  std::uint64_t symbol_errors = 0;
  std::uint64_t re_count = 0;
  std::uint64_t erasures = 0;
};

}  // namespace cebench

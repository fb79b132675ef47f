// SPDX-License-Identifier: Apache-2.0

#include "cebench/detect.hpp"

#include <cmath>
#include <stdexcept>

namespace cebench {

namespace {
constexpr double kInvSqrt2 = 0.7071067811865475244;
constexpr double kZfPivotTol = 1e-10;
}  // namespace

std::complex<double> qpsk_point(int symbol_index) {
  const int b0 = (symbol_index >> 1) & 1;
  const int b1 = symbol_index & 1;
  return {(1 - 2 * b0) * kInvSqrt2, (1 - 2 * b1) * kInvSqrt2};
}

std::vector<std::complex<double>> qpsk_mod(const std::vector<int>& bits) {
  if (bits.size() % 2 != 0) throw std::invalid_argument("qpsk_mod: bit count must be even");
  std::vector<std::complex<double>> out;
  out.reserve(bits.size() / 2);
  for (std::size_t i = 0; i < bits.size(); i += 2)
    out.push_back(qpsk_point(2 * (bits[i] & 1) + (bits[i + 1] & 1)));
  return out;
}

std::vector<int> qpsk_demod(const std::vector<std::complex<double>>& symbols) {
  std::vector<int> bits;
  bits.reserve(symbols.size() * 2);
  for (const auto& z : symbols) {
    bits.push_back(z.real() < 0.0 ? 1 : 0);
    bits.push_back(z.imag() < 0.0 ? 1 : 0);
  }
  return bits;
}

int qpsk_slice_index(const std::complex<double>& z) {
  return 2 * (z.real() < 0.0 ? 1 : 0) + (z.imag() < 0.0 ? 1 : 0);
}

void symbol_indices_to_bits(const std::vector<int>& symbols, std::vector<int>& bits) {
  bits.clear();
  bits.reserve(symbols.size() * 2);
  for (int s : symbols) {
    bits.push_back((s >> 1) & 1);
    bits.push_back(s & 1);
  }
}

std::vector<int> ml_detect(const std::vector<std::complex<double>>& y, const CMat& h) {
  const int n_rx = h.rows, n_tx = h.cols;
  if (static_cast<int>(y.size()) != n_rx) throw std::invalid_argument("ml_detect: y size mismatch");
  if (n_tx > 8)
    throw std::invalid_argument(
        "ml_detect: exhaustive search guarded at n_tx <= 8; use zf_detect or vblast_detect");

  std::uint64_t n_cand = 1;
  for (int t = 0; t < n_tx; ++t) n_cand *= 4;

  std::vector<int> best(n_tx, 0), cand(n_tx, 0);
  double best_metric = 0.0;
  bool first = true;
  std::vector<std::complex<double>> hx(n_rx);

  for (std::uint64_t c = 0; c < n_cand; ++c) {
    std::uint64_t rem = c;
    // tx 0 is the most significant digit: candidates enumerate in
    // lexicographic (cand[0], cand[1], ...) order.
    for (int t = n_tx - 1; t >= 0; --t) {
      cand[t] = static_cast<int>(rem % 4);
      rem /= 4;
    }
    double metric = 0.0;
    for (int r = 0; r < n_rx; ++r) {
      std::complex<double> acc{};
      for (int t = 0; t < n_tx; ++t) acc += h.at(r, t) * qpsk_point(cand[t]);
      metric += std::norm(y[r] - acc);
    }
    if (first || metric < best_metric) {
      first = false;
      best_metric = metric;
      best = cand;
    }
  }
  return best;
}

std::vector<int> zf_detect(const std::vector<std::complex<double>>& y, const CMat& h,
                           bool* erasure) {
  const int n_rx = h.rows, n_tx = h.cols;
  if (static_cast<int>(y.size()) != n_rx) throw std::invalid_argument("zf_detect: y size mismatch");
  bool rank_ok = false;
  const CMat g = pinv(h, kZfPivotTol, rank_ok);
  if (erasure) *erasure = !rank_ok;
  std::vector<int> out(n_tx, 0);
  if (!rank_ok) return out;
  for (int t = 0; t < n_tx; ++t) {
    std::complex<double> acc{};
    for (int r = 0; r < n_rx; ++r) acc += g.at(t, r) * y[r];
    out[t] = qpsk_slice_index(acc);
  }
  return out;
}

std::vector<int> vblast_detect(const std::vector<std::complex<double>>& y, const CMat& h,
                               double noise_var, bool* erasure) {
  (void)noise_var;  // ZF ordering; kept for MMSE-style orderings
  const int n_rx = h.rows, n_tx = h.cols;
  if (static_cast<int>(y.size()) != n_rx)
    throw std::invalid_argument("vblast_detect: y size mismatch");

  std::vector<int> out(n_tx, 0);
  std::vector<int> active(n_tx);
  for (int t = 0; t < n_tx; ++t) active[t] = t;
  std::vector<std::complex<double>> resid = y;
  if (erasure) *erasure = false;

  while (!active.empty()) {
    const int n_act = static_cast<int>(active.size());
    CMat ha(n_rx, n_act);
    for (int r = 0; r < n_rx; ++r)
      for (int c = 0; c < n_act; ++c) ha.at(r, c) = h.at(r, active[c]);
    bool rank_ok = false;
    const CMat g = pinv(ha, kZfPivotTol, rank_ok);
    if (!rank_ok) {
      if (erasure) *erasure = true;
      return out;  // remaining streams left at symbol 0
    }
    // Highest post-equalization SNR = smallest pseudo-inverse row norm.
    int pick = 0;
    double best = -1.0;
    for (int c = 0; c < n_act; ++c) {
      double norm = 0.0;
      for (int r = 0; r < n_rx; ++r) norm += std::norm(g.at(c, r));
      if (best < 0.0 || norm < best) {
        best = norm;
        pick = c;
      }
    }
    std::complex<double> est{};
    for (int r = 0; r < n_rx; ++r) est += g.at(pick, r) * resid[r];
    const int sym = qpsk_slice_index(est);
    const int stream = active[pick];
    out[stream] = sym;
    const std::complex<double> point = qpsk_point(sym);
    for (int r = 0; r < n_rx; ++r) resid[r] -= h.at(r, stream) * point;
    active.erase(active.begin() + pick);
  }
  return out;
}

double ber(const std::vector<int>& tx_bits, const std::vector<int>& rx_bits) {
  if (tx_bits.size() != rx_bits.size())
    throw std::invalid_argument("ber: bit stream lengths differ");
  if (tx_bits.empty()) throw std::invalid_argument("ber: empty bit streams");
  std::size_t errors = 0;
  for (std::size_t i = 0; i < tx_bits.size(); ++i)
    if ((tx_bits[i] & 1) != (rx_bits[i] & 1)) ++errors;
  return static_cast<double>(errors) / static_cast<double>(tx_bits.size());
}

}  // namespace cebench

// SPDX-License-Identifier: Apache-2.0

#include "cebench/classical.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cebench {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Direct O(N^2) DFT; grids here are at most a few thousand subcarriers and
// the transforms run once per antenna pair.
void dft(const std::vector<std::complex<double>>& in, std::vector<std::complex<double>>& out,
         bool inverse) {
  const int n = static_cast<int>(in.size());
  out.assign(n, {});
  const double sign = inverse ? 1.0 : -1.0;
  for (int k = 0; k < n; ++k) {
    std::complex<double> acc{};
    const double base = sign * kTwoPi * k / n;
    for (int f = 0; f < n; ++f) acc += in[f] * std::polar(1.0, base * f);
    out[k] = inverse ? acc / static_cast<double>(n) : acc;
  }
}

// Linear interpolation of (index, value) knots onto [0, n) with constant
// hold outside the outermost knots. Knot indices must be strictly
// increasing.
void interp_hold(const std::vector<int>& idx, const std::vector<std::complex<double>>& val, int n,
                 std::vector<std::complex<double>>& out) {
  out.assign(n, {});
  const int m = static_cast<int>(idx.size());
  for (int i = 0; i < idx[0]; ++i) out[i] = val[0];
  for (int k = 0; k + 1 < m; ++k) {
    const int a = idx[k], b = idx[k + 1];
    const std::complex<double> va = val[k], vb = val[k + 1];
    for (int i = a; i < b; ++i) {
      const double w = static_cast<double>(i - a) / (b - a);
      out[i] = va + w * (vb - va);
    }
  }
  for (int i = idx[m - 1]; i < n; ++i) out[i] = val[m - 1];
}

// Pilot subcarriers of one Tx antenna (sorted, unique) and per-subcarrier
// pilot symbol lists.
struct TxPilotIndex {
  std::vector<int> subcarriers;
  std::vector<std::vector<int>> symbols_at;  // parallel to subcarriers
  std::vector<int> pilot_symbols;            // sorted unique symbols with pilots
};

TxPilotIndex index_pilots(const LsGrid& ls, int t) {
  TxPilotIndex out;
  std::vector<std::vector<int>> by_f(ls.dims.n_sc);
  std::vector<std::uint8_t> symb_seen(ls.dims.n_symb, 0);
  for (int f = 0; f < ls.dims.n_sc; ++f)
    for (int s = 0; s < ls.dims.n_symb; ++s)
      if (ls.defined(f, s, t)) {
        by_f[f].push_back(s);
        symb_seen[s] = 1;
      }
  for (int f = 0; f < ls.dims.n_sc; ++f)
    if (!by_f[f].empty()) {
      out.subcarriers.push_back(f);
      out.symbols_at.push_back(by_f[f]);
    }
  for (int s = 0; s < ls.dims.n_symb; ++s)
    if (symb_seen[s]) out.pilot_symbols.push_back(s);
  return out;
}

ChannelTensor make_output(const GridDims& dims) {
  ChannelTensor out;
  out.dims = dims;
  out.h.assign(static_cast<std::size_t>(dims.n_sc) * dims.n_symb * dims.n_rx * dims.n_tx, {});
  return out;
}

// Time-averaged LS values of (r, t) at the indexed pilot subcarriers.
std::vector<std::complex<double>> time_averaged(const LsGrid& ls, const TxPilotIndex& pi, int r,
                                                int t) {
  std::vector<std::complex<double>> avg(pi.subcarriers.size());
  for (std::size_t k = 0; k < pi.subcarriers.size(); ++k) {
    std::complex<double> acc{};
    for (int s : pi.symbols_at[k]) acc += ls.at(pi.subcarriers[k], s, r, t);
    avg[k] = acc / static_cast<double>(pi.symbols_at[k].size());
  }
  return avg;
}

void truncate_delay(std::vector<std::complex<double>>& freq, int max_delay_taps) {
  std::vector<std::complex<double>> taps;
  dft(freq, taps, /*inverse=*/true);
  for (int k = max_delay_taps; k < static_cast<int>(taps.size()); ++k) taps[k] = {};
  dft(taps, freq, /*inverse=*/false);
}

}  // namespace

LsGrid ls_estimate(const RxGrid& y, const RsPattern& pattern) {
  GridDims dims{y.n_sc, y.n_symb, y.n_rx, pattern.n_tx()};
  validate_dims(dims);
  check_pattern(pattern, dims);

  LsGrid out;
  out.dims = dims;
  out.values.assign(static_cast<std::size_t>(dims.n_sc) * dims.n_symb * dims.n_rx * dims.n_tx,
                    {});
  out.mask.assign(static_cast<std::size_t>(dims.n_sc) * dims.n_symb * dims.n_tx, 0);

  for (int t = 0; t < dims.n_tx; ++t) {
    for (std::size_t k = 0; k < pattern.positions[t].size(); ++k) {
      const auto [f, s] = pattern.positions[t][k];
      const std::complex<double> x = pattern.values[t][k];
      if (std::abs(x) < 1e-9)
        throw std::invalid_argument("ls_estimate: pilot value magnitude below 1e-9");
      for (int r = 0; r < dims.n_rx; ++r) out.at(f, s, r, t) = y.at(f, s, r) / x;
      out.mask[(static_cast<std::size_t>(f) * dims.n_symb + s) * dims.n_tx + t] = 1;
    }
  }
  return out;
}

int default_max_delay_taps(int n_sc) { return std::max(1, n_sc / 8); }

ChannelTensor li_interpolate(const LsGrid& ls) {
  ChannelTensor out = make_output(ls.dims);
  std::vector<std::complex<double>> freq;
  for (int t = 0; t < ls.dims.n_tx; ++t) {
    const TxPilotIndex pi = index_pilots(ls, t);
    if (pi.subcarriers.size() < 2)
      throw std::invalid_argument("li_interpolate: need >= 2 pilot subcarriers per Tx");
    for (int r = 0; r < ls.dims.n_rx; ++r) {
      const auto avg = time_averaged(ls, pi, r, t);
      interp_hold(pi.subcarriers, avg, ls.dims.n_sc, freq);
      for (int f = 0; f < ls.dims.n_sc; ++f)
        for (int s = 0; s < ls.dims.n_symb; ++s) out.at(f, s, r, t) = freq[f];
    }
  }
  return out;
}

ChannelTensor dfti(const LsGrid& ls, int max_delay_taps) {
  if (max_delay_taps < 1) throw std::invalid_argument("dfti: max_delay_taps must be >= 1");
  if (max_delay_taps >= ls.dims.n_sc)
    throw std::invalid_argument("dfti: max_delay_taps must be < n_sc");

  ChannelTensor out = make_output(ls.dims);
  std::vector<std::complex<double>> freq;
  for (int t = 0; t < ls.dims.n_tx; ++t) {
    const TxPilotIndex pi = index_pilots(ls, t);
    if (pi.subcarriers.size() < 2)
      throw std::invalid_argument("dfti: need >= 2 pilot subcarriers per Tx");
    for (int r = 0; r < ls.dims.n_rx; ++r) {
      const auto avg = time_averaged(ls, pi, r, t);
      interp_hold(pi.subcarriers, avg, ls.dims.n_sc, freq);
      truncate_delay(freq, max_delay_taps);
      for (int f = 0; f < ls.dims.n_sc; ++f)
        for (int s = 0; s < ls.dims.n_symb; ++s) out.at(f, s, r, t) = freq[f];
    }
  }
  return out;
}

ChannelTensor dftli(const LsGrid& ls, int max_delay_taps) {
  if (max_delay_taps < 1) throw std::invalid_argument("dftli: max_delay_taps must be >= 1");
  if (max_delay_taps >= ls.dims.n_sc)
    throw std::invalid_argument("dftli: max_delay_taps must be < n_sc");

  ChannelTensor out = make_output(ls.dims);
  const int S = ls.dims.n_symb;
  std::vector<std::complex<double>> freq;
  for (int t = 0; t < ls.dims.n_tx; ++t) {
    const TxPilotIndex pi = index_pilots(ls, t);
    if (pi.pilot_symbols.empty())
      throw std::invalid_argument("dftli: need >= 1 pilot-bearing symbol per Tx");
    for (int r = 0; r < ls.dims.n_rx; ++r) {
      // DFTI per pilot-bearing symbol, then linear interpolation over time.
      std::vector<std::vector<std::complex<double>>> columns;
      columns.reserve(pi.pilot_symbols.size());
      for (int s : pi.pilot_symbols) {
        std::vector<int> idx;
        std::vector<std::complex<double>> val;
        for (std::size_t k = 0; k < pi.subcarriers.size(); ++k) {
          const int f = pi.subcarriers[k];
          if (ls.defined(f, s, t)) {
            idx.push_back(f);
            val.push_back(ls.at(f, s, r, t));
          }
        }
        if (idx.size() < 2)
          throw std::invalid_argument("dftli: need >= 2 pilot subcarriers in each pilot symbol");
        interp_hold(idx, val, ls.dims.n_sc, freq);
        truncate_delay(freq, max_delay_taps);
        columns.push_back(freq);
      }
      for (int f = 0; f < ls.dims.n_sc; ++f) {
        std::vector<std::complex<double>> knots(columns.size());
        for (std::size_t k = 0; k < columns.size(); ++k) knots[k] = columns[k][f];
        std::vector<std::complex<double>> row;
        interp_hold(pi.pilot_symbols, knots, S, row);
        for (int s = 0; s < S; ++s) out.at(f, s, r, t) = row[s];
      }
    }
  }
  return out;
}

}  // namespace cebench

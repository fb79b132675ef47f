// SPDX-License-Identifier: Apache-2.0
//
// Model-driven channel estimators: per-pilot least squares, then three
// interpolators used as baselines.
//
//   li    : average LS over time per pilot subcarrier, linear interpolation
//           across frequency, constant hold outside the outermost pilots,
//           replicate over all symbols.
//   dfti  : as li up to the full-length frequency vector, then IDFT to the
//           delay domain, zero every tap with index >= max_delay_taps
//           (including the wrap-around negative-delay bins), DFT back,
//           replicate over symbols.
//   dftli : dfti applied independently per pilot-bearing symbol (no time
//           averaging), then per-RE linear interpolation across time with
//           constant hold at the edges.
//
// All three are linear operators for a fixed pilot mask.

#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "cebench/channel.hpp"
#include "cebench/grid.hpp"

namespace cebench {

/// Sparse per-pilot LS estimates. values has the ChannelTensor layout;
/// entries are defined only where the owning Tx has a pilot (mask is per
/// (subcarrier, symbol, tx) since a pilot RE defines the estimate for every
/// Rx antenna at once). Undefined entries hold 0 with mask false.
struct LsGrid {
  GridDims dims;
  std::vector<std::complex<double>> values;  // (f, s, r, t), t fastest
  std::vector<std::uint8_t> mask;            // (f, s, t), t fastest

  std::complex<double>& at(int f, int s, int r, int t) {
    return values[((static_cast<std::size_t>(f) * dims.n_symb + s) * dims.n_rx + r) * dims.n_tx +
                  t];
  }
  const std::complex<double>& at(int f, int s, int r, int t) const {
    return values[((static_cast<std::size_t>(f) * dims.n_symb + s) * dims.n_rx + r) * dims.n_tx +
                  t];
  }
  bool defined(int f, int s, int t) const {
    return mask[(static_cast<std::size_t>(f) * dims.n_symb + s) * dims.n_tx + t] != 0;
  }
};

/// Eq. y = H x + w restricted to pilot REs: with exclusive per-Tx pilots the
/// LS inverse degenerates to a scalar division y / x at each pilot. Rejects
/// pilot values with |x| < 1e-9.
LsGrid ls_estimate(const RxGrid& y, const RsPattern& pattern);

ChannelTensor li_interpolate(const LsGrid& ls);

/// Default delay-domain cutoff: n_sc / 8 (at least 1).
int default_max_delay_taps(int n_sc);

ChannelTensor dfti(const LsGrid& ls, int max_delay_taps);
ChannelTensor dftli(const LsGrid& ls, int max_delay_taps);

}  // namespace cebench

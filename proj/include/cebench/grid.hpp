// SPDX-License-Identifier: Apache-2.0
//
// OFDM resource-grid bookkeeping and reference-signal (pilot) allocation.
//
// Two built-in allocations tile a 24-subcarrier x 14-symbol base block
// across frequency; both give every Tx antenna an exclusive set of resource
// elements (no RE is shared between antennas):
//
//   dense : 16 REs per Tx per block. Tx antennas are grouped four per
//           symbol set; group g uses symbols {2+g, 5+g, 8+g, 11+g} and
//           within the group Tx t occupies subcarriers {o, o+6, o+12, o+18},
//           o = t mod 4. Capacity: 12 Tx per block.
//   sparse: 6 REs per Tx per block (14.3% overhead at 8 Tx). Groups of
//           eight; group g uses symbols {3+g, 10+g} and Tx t occupies
//           subcarriers {o, o+8, o+16}, o = t mod 8. Capacity: 32 Tx.
//
// Pilot symbol values are unit-modulus QPSK drawn from the pattern seed.

#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace cebench {

struct GridDims {
  int n_sc = 0;    // subcarriers
  int n_symb = 0;  // OFDM symbols per subframe
  int n_rx = 0;    // receive antennas
  int n_tx = 0;    // transmit antennas
};

/// Throws std::invalid_argument unless all extents are >= 1.
void validate_dims(const GridDims& dims);

/// Pilot RE positions and symbol values, one list per Tx antenna.
/// positions[t][k] = (subcarrier, symbol); values[t][k] has |x| = 1.
struct RsPattern {
  std::vector<std::vector<std::pair<int, int>>> positions;
  std::vector<std::vector<std::complex<double>>> values;

  int n_tx() const { return static_cast<int>(positions.size()); }
  std::size_t total_pilots() const;
};

RsPattern build_dense_pattern(const GridDims& dims, std::uint64_t seed);
RsPattern build_sparse_pattern(const GridDims& dims, std::uint64_t seed);

/// Fraction of the grid's REs carrying pilots: total pilots / (n_sc * n_symb).
double overhead(const RsPattern& pattern, const GridDims& dims);

/// Throws if any position is out of bounds, any value is not unit modulus,
/// or any RE appears in more than one Tx list.
void check_pattern(const RsPattern& pattern, const GridDims& dims);

/// Plain-text pattern config. Header line `dims n_sc n_symb n_rx n_tx`,
/// then one line per pilot: `tx f s re im`.
void save_pattern(const std::string& path, const RsPattern& pattern, const GridDims& dims);

struct LoadedPattern {
  GridDims dims;
  RsPattern pattern;
};
LoadedPattern load_pattern(const std::string& path);

}  // namespace cebench

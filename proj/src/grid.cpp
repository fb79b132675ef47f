// SPDX-License-Identifier: Apache-2.0

#include "cebench/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "cebench/rng.hpp"

namespace cebench {

void validate_dims(const GridDims& dims) {
  if (dims.n_sc < 1 || dims.n_symb < 1 || dims.n_rx < 1 || dims.n_tx < 1)
    throw std::invalid_argument("grid dims: all extents must be >= 1");
}

std::size_t RsPattern::total_pilots() const {
  std::size_t n = 0;
  for (const auto& p : positions) n += p.size();
  return n;
}

namespace {

constexpr int kBlockSc = 24;
constexpr int kBlockSymb = 14;

struct StaggerSpec {
  int group_size;                 // Tx antennas sharing one symbol set
  std::vector<int> base_symbols;  // symbols for group 0; group g adds +g
  std::vector<int> sc_offsets;    // subcarrier offsets within the block for o=0
};

RsPattern build_pattern(const GridDims& dims, std::uint64_t seed, const StaggerSpec& spec,
                        const char* name) {
  validate_dims(dims);
  if (dims.n_sc < kBlockSc || dims.n_sc % kBlockSc != 0)
    throw std::invalid_argument(std::string(name) +
                                ": n_sc must be a positive multiple of 24 (base block width)");
  if (dims.n_symb < kBlockSymb)
    throw std::invalid_argument(std::string(name) + ": n_symb must be >= 14 (base block height)");

  const int n_groups = (dims.n_tx + spec.group_size - 1) / spec.group_size;
  const int max_symbol = spec.base_symbols.back() + (n_groups - 1);
  if (max_symbol >= kBlockSymb)
    throw std::invalid_argument(std::string(name) + ": too many Tx antennas for the base block");

  const int tiles = dims.n_sc / kBlockSc;
  RsPattern out;
  out.positions.resize(dims.n_tx);
  out.values.resize(dims.n_tx);

  for (int t = 0; t < dims.n_tx; ++t) {
    const int g = t / spec.group_size;
    const int o = t % spec.group_size;
    auto& pos = out.positions[t];
    for (int sym : spec.base_symbols) {
      for (int tile = 0; tile < tiles; ++tile) {
        for (int off : spec.sc_offsets) {
          pos.emplace_back(tile * kBlockSc + off + o, sym + g);
        }
      }
    }
    std::sort(pos.begin(), pos.end(), [](const auto& a, const auto& b) {
      return a.second != b.second ? a.second < b.second : a.first < b.first;
    });
  }

  // Pilot values: unit-power QPSK in canonical (tx, position) order.
  Rng rng(derive_seed(seed, seed_tag::kPilot));
  for (int t = 0; t < dims.n_tx; ++t) {
    out.values[t].reserve(out.positions[t].size());
    for (std::size_t k = 0; k < out.positions[t].size(); ++k) out.values[t].push_back(rng.qpsk());
  }

  check_pattern(out, dims);
  return out;
}

}  // namespace

RsPattern build_dense_pattern(const GridDims& dims, std::uint64_t seed) {
  StaggerSpec spec;
  spec.group_size = 4;
  spec.base_symbols = {2, 5, 8, 11};
  spec.sc_offsets = {0, 6, 12, 18};
  return build_pattern(dims, seed, spec, "dense pattern");
}

RsPattern build_sparse_pattern(const GridDims& dims, std::uint64_t seed) {
  StaggerSpec spec;
  spec.group_size = 8;
  spec.base_symbols = {3, 10};
  spec.sc_offsets = {0, 8, 16};
  return build_pattern(dims, seed, spec, "sparse pattern");
}

double overhead(const RsPattern& pattern, const GridDims& dims) {
  validate_dims(dims);
  return static_cast<double>(pattern.total_pilots()) /
         (static_cast<double>(dims.n_sc) * dims.n_symb);
}

void check_pattern(const RsPattern& pattern, const GridDims& dims) {
  validate_dims(dims);
  if (pattern.positions.size() != pattern.values.size())
    throw std::invalid_argument("pattern: positions/values antenna count mismatch");
  std::set<std::pair<int, int>> seen;
  for (std::size_t t = 0; t < pattern.positions.size(); ++t) {
    if (pattern.positions[t].size() != pattern.values[t].size())
      throw std::invalid_argument("pattern: positions/values length mismatch");
    for (std::size_t k = 0; k < pattern.positions[t].size(); ++k) {
      const auto [f, s] = pattern.positions[t][k];
      if (f < 0 || f >= dims.n_sc || s < 0 || s >= dims.n_symb)
        throw std::invalid_argument("pattern: pilot position out of grid bounds");
      if (!seen.insert({f, s}).second)
        throw std::invalid_argument("pattern: RE allocated to more than one Tx");
      if (std::abs(std::abs(pattern.values[t][k]) - 1.0) > 1e-12)
        throw std::invalid_argument("pattern: pilot value is not unit modulus");
    }
  }
}

void save_pattern(const std::string& path, const RsPattern& pattern, const GridDims& dims) {
  check_pattern(pattern, dims);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open pattern file for writing: " + path);
  out.precision(17);
  out << "dims " << dims.n_sc << " " << dims.n_symb << " " << dims.n_rx << " " << dims.n_tx
      << "\n";
  for (std::size_t t = 0; t < pattern.positions.size(); ++t) {
    for (std::size_t k = 0; k < pattern.positions[t].size(); ++k) {
      const auto [f, s] = pattern.positions[t][k];
      const auto v = pattern.values[t][k];
      out << t << " " << f << " " << s << " " << v.real() << " " << v.imag() << "\n";
    }
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

LoadedPattern load_pattern(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open pattern file: " + path);
  std::string word;
  LoadedPattern loaded;
  if (!(in >> word) || word != "dims")
    throw std::runtime_error("pattern file missing 'dims' header: " + path);
  if (!(in >> loaded.dims.n_sc >> loaded.dims.n_symb >> loaded.dims.n_rx >> loaded.dims.n_tx))
    throw std::runtime_error("pattern file: malformed dims header: " + path);
  validate_dims(loaded.dims);
  loaded.pattern.positions.resize(loaded.dims.n_tx);
  loaded.pattern.values.resize(loaded.dims.n_tx);

  int tx, f, s;
  double re, im;
  while (in >> tx >> f >> s >> re >> im) {
    if (tx < 0 || tx >= loaded.dims.n_tx)
      throw std::runtime_error("pattern file: tx index out of range: " + path);
    loaded.pattern.positions[tx].emplace_back(f, s);
    loaded.pattern.values[tx].emplace_back(re, im);
  }
  if (!in.eof() && in.fail())
    throw std::runtime_error("pattern file: malformed pilot line: " + path);
  check_pattern(loaded.pattern, loaded.dims);
  return loaded;
}

}  // namespace cebench

// SPDX-License-Identifier: Apache-2.0

#include "cebench/dataset.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

#include "cebench/rng.hpp"

namespace cebench {

const char* to_string(PatternKind k) {
  switch (k) {
    case PatternKind::Custom: return "custom";
    case PatternKind::Dense: return "dense";
    case PatternKind::Sparse: return "sparse";
  }
  return "?";
}

RsPattern Dataset::pattern_for(const Sample& s) const {
  RsPattern p;
  p.positions = positions;
  p.values.resize(positions.size());
  std::size_t k = 0;
  for (std::size_t t = 0; t < positions.size(); ++t) {
    p.values[t].reserve(positions[t].size());
    for (std::size_t i = 0; i < positions[t].size(); ++i) {
      if (k >= s.pilot_values.size())
        throw std::runtime_error("dataset: sample pilot values shorter than pattern");
      p.values[t].push_back(std::complex<double>(s.pilot_values[k]));
      ++k;
    }
  }
  return p;
}

ChannelTensor Dataset::channel_of(const Sample& s) const {
  ChannelTensor h;
  h.dims = dims;
  h.h.resize(s.h.size());
  for (std::size_t i = 0; i < s.h.size(); ++i) h.h[i] = std::complex<double>(s.h[i]);
  return h;
}

LsGrid Dataset::ls_of(const Sample& s) const {
  RxGrid y = make_rx_grid(dims);
  std::size_t k = 0;
  for (std::size_t t = 0; t < positions.size(); ++t)
    for (const auto& [f, sym] : positions[t])
      for (int r = 0; r < dims.n_rx; ++r) {
        y.at(f, sym, r) = std::complex<double>(s.y_pilots[k]);
        ++k;
      }
  return ls_estimate(y, pattern_for(s));
}

ChannelConfig Dataset::config_of(const Sample& s) const {
  ChannelConfig cfg;
  cfg.fading_model = s.fading;
  cfg.doppler_hz = s.doppler_hz;
  cfg.correlation = s.correlation;
  cfg.snr_db = s.snr_db;
  cfg.seed = s.seed;
  cfg.subcarrier_spacing_hz = subcarrier_spacing_hz;
  cfg.symbol_duration_s = symbol_duration_s;
  cfg.delay_spread_ns = delay_spread_ns;
  return cfg;
}

TxGrid build_tx_grid(const Dataset& ds, const Sample& s, std::vector<int>* data_bits) {
  TxGrid x = make_tx_grid(ds.dims);
  // Pilot ownership map: -1 free RE, otherwise the owning tx.
  std::vector<int> owner(static_cast<std::size_t>(ds.dims.n_sc) * ds.dims.n_symb, -1);
  std::size_t k = 0;
  for (std::size_t t = 0; t < ds.positions.size(); ++t)
    for (const auto& [f, sym] : ds.positions[t]) {
      owner[static_cast<std::size_t>(f) * ds.dims.n_symb + sym] = static_cast<int>(t);
      x.at(f, sym, static_cast<int>(t)) = std::complex<double>(s.pilot_values[k]);
      ++k;
    }

  Rng rng(derive_seed(s.seed, seed_tag::kData));
  if (data_bits) data_bits->clear();
  for (int f = 0; f < ds.dims.n_sc; ++f)
    for (int sym = 0; sym < ds.dims.n_symb; ++sym) {
      if (owner[static_cast<std::size_t>(f) * ds.dims.n_symb + sym] >= 0) continue;
      for (int t = 0; t < ds.dims.n_tx; ++t) {
        const int b0 = static_cast<int>(rng.bounded(2));
        const int b1 = static_cast<int>(rng.bounded(2));
        const double a = b0 ? -0.7071067811865475244 : 0.7071067811865475244;
        const double b = b1 ? -0.7071067811865475244 : 0.7071067811865475244;
        x.at(f, sym, t) = {a, b};
        if (data_bits) {
          data_bits->push_back(b0);
          data_bits->push_back(b1);
        }
      }
    }
  return x;
}

namespace {

std::vector<std::vector<std::pair<int, int>>> resolve_positions(const DatasetGenConfig& cfg) {
  switch (cfg.pattern) {
    case PatternKind::Dense: return build_dense_pattern(cfg.dims, cfg.seed).positions;
    case PatternKind::Sparse: return build_sparse_pattern(cfg.dims, cfg.seed).positions;
    case PatternKind::Custom: {
      if (cfg.pattern_file.empty())
        throw std::invalid_argument("generate_dataset: custom pattern requires pattern_file");
      LoadedPattern lp = load_pattern(cfg.pattern_file);
      if (lp.dims.n_sc != cfg.dims.n_sc || lp.dims.n_symb != cfg.dims.n_symb ||
          lp.dims.n_tx != cfg.dims.n_tx)
        throw std::invalid_argument("generate_dataset: pattern file dims do not match");
      return lp.pattern.positions;
    }
  }
  throw std::invalid_argument("generate_dataset: unknown pattern kind");
}

}  // namespace

Dataset generate_dataset(const DatasetGenConfig& cfg) {
  validate_dims(cfg.dims);
  if (cfg.n_samples < 1) throw std::invalid_argument("generate_dataset: n_samples must be >= 1");
  if (cfg.models.empty() || cfg.correlations.empty() || cfg.dopplers.empty() || cfg.snrs.empty())
    throw std::invalid_argument("generate_dataset: all condition axes must be nonempty");

  Dataset ds;
  ds.dims = cfg.dims;
  ds.pattern_kind = cfg.pattern;
  ds.positions = resolve_positions(cfg);
  ds.delay_spread_ns = cfg.delay_spread_ns;
  ds.subcarrier_spacing_hz = cfg.subcarrier_spacing_hz;
  ds.symbol_duration_s = cfg.symbol_duration_s;
  ds.samples.resize(cfg.n_samples);

  std::size_t total_pilots = 0;
  for (const auto& p : ds.positions) total_pilots += p.size();

#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < cfg.n_samples; ++i) {
    Sample& s = ds.samples[i];
    s.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(i));

    Rng axes(derive_seed(s.seed, seed_tag::kAxes));
    s.fading = cfg.models[axes.bounded(cfg.models.size())];
    s.correlation = cfg.correlations[axes.bounded(cfg.correlations.size())];
    s.doppler_hz = cfg.dopplers[axes.bounded(cfg.dopplers.size())];
    s.snr_db = cfg.snrs[axes.bounded(cfg.snrs.size())];

    Rng pilot_rng(derive_seed(s.seed, seed_tag::kPilot));
    s.pilot_values.reserve(total_pilots);
    for (const auto& pos : ds.positions)
      for (std::size_t k = 0; k < pos.size(); ++k)
        s.pilot_values.push_back(std::complex<float>(pilot_rng.qpsk()));

    const ChannelTensor h = gen_channel(ds.config_of(s), ds.dims);
    const TxGrid x = build_tx_grid(ds, s, nullptr);
    const RxGrid y = transmit(h, x, s.snr_db, s.seed);

    s.h.resize(h.h.size());
    for (std::size_t k = 0; k < h.h.size(); ++k) s.h[k] = std::complex<float>(h.h[k]);
    s.y_pilots.reserve(total_pilots * ds.dims.n_rx);
    for (const auto& pos : ds.positions)
      for (const auto& [f, sym] : pos)
        for (int r = 0; r < ds.dims.n_rx; ++r)
          s.y_pilots.push_back(std::complex<float>(y.at(f, sym, r)));
  }
  return ds;
}

namespace {

constexpr char kMagic[4] = {'C', 'E', 'D', 'S'};
constexpr std::uint16_t kVersion = 1;

template <typename T>
void write_pod(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("dataset: unexpected end of file");
  return v;
}

void write_cfloats(std::ostream& out, const std::vector<std::complex<float>>& v) {
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(std::complex<float>)));
}

void read_cfloats(std::istream& in, std::vector<std::complex<float>>& v, std::size_t n) {
  v.resize(n);
  in.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(n * sizeof(std::complex<float>)));
  if (!in) throw std::runtime_error("dataset: truncated sample data");
}

struct FileHeader {
  GridDims dims;
  PatternKind kind;
  std::uint64_t n_samples;
  std::vector<std::vector<std::pair<int, int>>> positions;
  double delay_spread_ns, scs_hz, symb_s;
};

FileHeader read_header(std::istream& in, const std::string& path) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("not a CEDS dataset file (bad magic): " + path);
  if (read_pod<std::uint16_t>(in) != kVersion)
    throw std::runtime_error("unsupported dataset version in " + path);
  FileHeader h;
  h.kind = static_cast<PatternKind>(read_pod<std::uint32_t>(in));
  h.dims.n_sc = static_cast<int>(read_pod<std::uint32_t>(in));
  h.dims.n_symb = static_cast<int>(read_pod<std::uint32_t>(in));
  h.dims.n_rx = static_cast<int>(read_pod<std::uint32_t>(in));
  h.dims.n_tx = static_cast<int>(read_pod<std::uint32_t>(in));
  validate_dims(h.dims);
  h.n_samples = read_pod<std::uint64_t>(in);
  h.delay_spread_ns = read_pod<double>(in);
  h.scs_hz = read_pod<double>(in);
  h.symb_s = read_pod<double>(in);
  h.positions.resize(h.dims.n_tx);
  for (int t = 0; t < h.dims.n_tx; ++t) {
    const auto n = read_pod<std::uint32_t>(in);
    h.positions[t].reserve(n);
    for (std::uint32_t k = 0; k < n; ++k) {
      const int f = static_cast<int>(read_pod<std::uint32_t>(in));
      const int s = static_cast<int>(read_pod<std::uint32_t>(in));
      h.positions[t].emplace_back(f, s);
    }
  }
  return h;
}

}  // namespace

void save_dataset(const std::string& path, const Dataset& ds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open dataset for writing: " + path);
  out.write(kMagic, 4);
  write_pod<std::uint16_t>(out, kVersion);
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(ds.pattern_kind));
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(ds.dims.n_sc));
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(ds.dims.n_symb));
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(ds.dims.n_rx));
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(ds.dims.n_tx));
  write_pod<std::uint64_t>(out, ds.samples.size());
  write_pod<double>(out, ds.delay_spread_ns);
  write_pod<double>(out, ds.subcarrier_spacing_hz);
  write_pod<double>(out, ds.symbol_duration_s);
  for (const auto& pos : ds.positions) {
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(pos.size()));
    for (const auto& [f, s] : pos) {
      write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(f));
      write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(s));
    }
  }
  for (const Sample& s : ds.samples) {
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(s.fading));
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(s.correlation));
    write_pod<double>(out, s.doppler_hz);
    write_pod<double>(out, s.snr_db);
    write_pod<std::uint64_t>(out, s.seed);
    write_cfloats(out, s.h);
    write_cfloats(out, s.y_pilots);
    write_cfloats(out, s.pilot_values);
  }
  if (!out) throw std::runtime_error("dataset write failed: " + path);
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open dataset: " + path);
  const FileHeader h = read_header(in, path);

  Dataset ds;
  ds.dims = h.dims;
  ds.pattern_kind = h.kind;
  ds.positions = h.positions;
  ds.delay_spread_ns = h.delay_spread_ns;
  ds.subcarrier_spacing_hz = h.scs_hz;
  ds.symbol_duration_s = h.symb_s;

  std::size_t total_pilots = 0;
  for (const auto& p : ds.positions) total_pilots += p.size();
  const std::size_t h_len =
      static_cast<std::size_t>(h.dims.n_sc) * h.dims.n_symb * h.dims.n_rx * h.dims.n_tx;

  ds.samples.resize(h.n_samples);
  for (auto& s : ds.samples) {
    s.fading = static_cast<FadingModel>(read_pod<std::uint32_t>(in));
    s.correlation = static_cast<CorrelationLevel>(read_pod<std::uint32_t>(in));
    s.doppler_hz = read_pod<double>(in);
    s.snr_db = read_pod<double>(in);
    s.seed = read_pod<std::uint64_t>(in);
    read_cfloats(in, s.h, h_len);
    read_cfloats(in, s.y_pilots, total_pilots * h.dims.n_rx);
    read_cfloats(in, s.pilot_values, total_pilots);
  }
  return ds;
}

DatasetInfo inspect_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open dataset: " + path);
  const FileHeader h = read_header(in, path);
  DatasetInfo info;
  info.dims = h.dims;
  info.pattern_kind = h.kind;
  info.n_samples = h.n_samples;
  info.pilots_per_tx = h.positions.empty() ? 0 : h.positions[0].size();
  return info;
}

}  // namespace cebench

// SPDX-License-Identifier: Apache-2.0

#include "cebench/nn.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace cebench {

const char* to_string(Connectivity c) {
  switch (c) {
    case Connectivity::FeedForward: return "feed-forward";
    case Connectivity::UNet: return "u-net";
    case Connectivity::ResNet: return "res-net";
    case Connectivity::DenseNet: return "dense-net";
  }
  return "?";
}

ModelSpec build_2du() {
  ModelSpec spec;
  spec.conv_dims = 2;
  spec.connectivity = Connectivity::UNet;
  spec.layers = {
      {7, 5, 1, 2, 10, true},  {7, 5, 1, 10, 10, true}, {7, 5, 1, 10, 10, true},
      {7, 5, 1, 10, 10, true}, {5, 5, 1, 20, 20, true}, {5, 5, 1, 30, 5, true},
      {3, 3, 1, 15, 2, false},
  };
  // 0-based: out(2) + out(3) -> in(4); out(1) + out(4) -> in(5);
  // out(0) + out(5) -> in(6).
  spec.skips = {{2, 4}, {1, 5}, {0, 6}};
  validate_spec(spec);
  return spec;
}

ModelSpec build_3dff() {
  ModelSpec spec;
  spec.conv_dims = 3;
  spec.connectivity = Connectivity::FeedForward;
  spec.layers = {
      {7, 5, 5, 2, 10, true},  {7, 5, 5, 10, 10, true}, {7, 5, 5, 10, 10, true},
      {7, 5, 5, 10, 10, true}, {5, 5, 5, 10, 20, true}, {5, 5, 5, 20, 5, true},
      {3, 3, 3, 5, 2, false},
  };
  validate_spec(spec);
  return spec;
}

void validate_spec(const ModelSpec& spec) {
  if (spec.conv_dims != 2 && spec.conv_dims != 3)
    throw std::invalid_argument("model spec: conv_dims must be 2 or 3");
  if (spec.layers.empty()) throw std::invalid_argument("model spec: no layers");
  const int n = static_cast<int>(spec.layers.size());
  for (const SkipEdge& e : spec.skips) {
    if (e.src < 0 || e.dst <= e.src || e.dst >= n)
      throw std::invalid_argument("model spec: malformed skip edge");
  }
  for (int k = 0; k < n; ++k) {
    const LayerSpec& l = spec.layers[k];
    if (l.k_f < 1 || l.k_t < 1 || l.k_a < 1 || l.in_ch < 1 || l.out_ch < 1)
      throw std::invalid_argument("model spec: layer extents must be >= 1");
    if (spec.conv_dims == 2 && l.k_a != 1)
      throw std::invalid_argument("model spec: 2D layer with antenna kernel extent");
    if (k == 0) continue;
    int expected = spec.layers[k - 1].out_ch;
    for (const SkipEdge& e : spec.skips)
      if (e.dst == k) expected += spec.layers[e.src].out_ch;
    if (l.in_ch != expected)
      throw std::invalid_argument("model spec: channel bookkeeping imbalance at layer " +
                                  std::to_string(k + 1));
  }
}

std::int64_t count_params(const ModelSpec& spec) {
  std::int64_t total = 0;
  for (const LayerSpec& l : spec.layers) {
    const std::int64_t k = static_cast<std::int64_t>(l.k_f) * l.k_t * l.k_a;
    total += k * l.in_ch * l.out_ch + l.out_ch;
  }
  return total;
}

std::int64_t count_macs(const ModelSpec& spec, int n_sc, int n_symb, int n_rx) {
  if (n_sc < 1 || n_symb < 1 || n_rx < 1)
    throw std::invalid_argument("count_macs: extents must be >= 1");
  const std::int64_t positions = static_cast<std::int64_t>(n_sc) * n_symb *
                                 (spec.conv_dims == 3 ? n_rx : 1);
  std::int64_t per_position = 0;
  for (const LayerSpec& l : spec.layers) {
    const std::int64_t k = static_cast<std::int64_t>(l.k_f) * l.k_t * l.k_a;
    per_position += k * l.in_ch * l.out_ch;
  }
  return per_position * positions;
}

namespace {

constexpr char kMagic[4] = {'M', 'C', 'N', 'N'};
constexpr std::uint16_t kVersion = 1;

template <typename T>
void write_pod(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("checkpoint: unexpected end of file");
  return v;
}

void write_header(std::ostream& out, const ModelSpec& spec, const GridDims& dims) {
  out.write(kMagic, 4);
  write_pod<std::uint16_t>(out, kVersion);
  write_pod<std::uint16_t>(out, static_cast<std::uint16_t>(spec.conv_dims));
  write_pod<std::uint16_t>(out, static_cast<std::uint16_t>(spec.connectivity));
  write_pod<std::uint16_t>(out, static_cast<std::uint16_t>(spec.layers.size()));
  for (const LayerSpec& l : spec.layers) {
    write_pod<std::uint16_t>(out, static_cast<std::uint16_t>(l.k_f));
    write_pod<std::uint16_t>(out, static_cast<std::uint16_t>(l.k_t));
    write_pod<std::uint16_t>(out, static_cast<std::uint16_t>(l.k_a));
    write_pod<std::uint16_t>(out, static_cast<std::uint16_t>(l.in_ch));
    write_pod<std::uint16_t>(out, static_cast<std::uint16_t>(l.out_ch));
    write_pod<std::uint16_t>(out, l.gelu ? 1 : 0);
  }
  write_pod<std::uint16_t>(out, static_cast<std::uint16_t>(spec.skips.size()));
  for (const SkipEdge& e : spec.skips) {
    write_pod<std::uint16_t>(out, static_cast<std::uint16_t>(e.src));
    write_pod<std::uint16_t>(out, static_cast<std::uint16_t>(e.dst));
  }
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(dims.n_sc));
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(dims.n_symb));
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(dims.n_rx));
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(dims.n_tx));
}

struct Header {
  ModelSpec spec;
  GridDims dims;
};

Header read_header(std::istream& in, const std::string& path) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("not a checkpoint file (bad magic): " + path);
  const auto version = read_pod<std::uint16_t>(in);
  if (version != kVersion)
    throw std::runtime_error("unsupported checkpoint version in " + path);
  Header h;
  h.spec.conv_dims = read_pod<std::uint16_t>(in);
  h.spec.connectivity = static_cast<Connectivity>(read_pod<std::uint16_t>(in));
  const int n_layers = read_pod<std::uint16_t>(in);
  for (int k = 0; k < n_layers; ++k) {
    LayerSpec l;
    l.k_f = read_pod<std::uint16_t>(in);
    l.k_t = read_pod<std::uint16_t>(in);
    l.k_a = read_pod<std::uint16_t>(in);
    l.in_ch = read_pod<std::uint16_t>(in);
    l.out_ch = read_pod<std::uint16_t>(in);
    l.gelu = read_pod<std::uint16_t>(in) != 0;
    h.spec.layers.push_back(l);
  }
  const int n_skips = read_pod<std::uint16_t>(in);
  for (int k = 0; k < n_skips; ++k) {
    SkipEdge e;
    e.src = read_pod<std::uint16_t>(in);
    e.dst = read_pod<std::uint16_t>(in);
    h.spec.skips.push_back(e);
  }
  h.dims.n_sc = static_cast<int>(read_pod<std::uint32_t>(in));
  h.dims.n_symb = static_cast<int>(read_pod<std::uint32_t>(in));
  h.dims.n_rx = static_cast<int>(read_pod<std::uint32_t>(in));
  h.dims.n_tx = static_cast<int>(read_pod<std::uint32_t>(in));
  validate_spec(h.spec);
  return h;
}

}  // namespace

void save_checkpoint(const std::string& path, const Model<float>& model,
                     const GridDims& train_dims) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);
  write_header(out, model.spec, train_dims);
  for (std::size_t k = 0; k < model.weights.size(); ++k) {
    const auto& w = model.weights[k]->data;
    const auto& b = model.biases[k]->data;
    out.write(reinterpret_cast<const char*>(w.data()),
              static_cast<std::streamsize>(w.size() * sizeof(float)));
    out.write(reinterpret_cast<const char*>(b.data()),
              static_cast<std::streamsize>(b.size() * sizeof(float)));
  }
  if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  const Header h = read_header(in, path);

  LoadedCheckpoint loaded;
  loaded.train_dims = h.dims;
  loaded.model.spec = h.spec;
  for (const LayerSpec& l : h.spec.layers) {
    std::vector<int> wsh = h.spec.conv_dims == 2
                               ? std::vector<int>{l.out_ch, l.in_ch, l.k_t, l.k_f}
                               : std::vector<int>{l.out_ch, l.in_ch, l.k_a, l.k_t, l.k_f};
    auto w = make_tensor<float>(wsh, true);
    auto b = make_tensor<float>({l.out_ch}, true);
    in.read(reinterpret_cast<char*>(w->data.data()),
            static_cast<std::streamsize>(w->data.size() * sizeof(float)));
    in.read(reinterpret_cast<char*>(b->data.data()),
            static_cast<std::streamsize>(b->data.size() * sizeof(float)));
    if (!in) throw std::runtime_error("checkpoint: truncated parameter data: " + path);
    loaded.model.weights.push_back(w);
    loaded.model.biases.push_back(b);
  }
  return loaded;
}

CheckpointInfo inspect_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  const Header h = read_header(in, path);
  return {h.spec, h.dims, count_params(h.spec)};
}

}  // namespace cebench

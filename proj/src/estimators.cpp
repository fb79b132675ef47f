// SPDX-License-Identifier: Apache-2.0

#include "cebench/estimators.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <stdexcept>

#include "cebench/rng.hpp"

namespace cebench {

namespace {

double pilot_rms_normalizer(const LsGrid& ls, int rx_lo, int rx_hi, int tx) {
  double sum = 0.0;
  std::size_t n = 0;
  for (int f = 0; f < ls.dims.n_sc; ++f)
    for (int s = 0; s < ls.dims.n_symb; ++s) {
      if (!ls.defined(f, s, tx)) continue;
      for (int r = rx_lo; r < rx_hi; ++r) {
        sum += std::norm(ls.at(f, s, r, tx));
        ++n;
      }
    }
  if (n == 0) throw std::invalid_argument("assemble input: no pilot REs for this Tx antenna");
  if (sum <= 0.0) return 1.0;  // all-zero LS: fall back to identity scaling
  return 1.0 / std::sqrt(sum / static_cast<double>(n));
}

bool same_layers(const ModelSpec& a, const ModelSpec& b) {
  if (a.conv_dims != b.conv_dims || a.connectivity != b.connectivity ||
      a.layers.size() != b.layers.size() || a.skips.size() != b.skips.size())
    return false;
  for (std::size_t k = 0; k < a.layers.size(); ++k) {
    const LayerSpec &x = a.layers[k], &y = b.layers[k];
    if (x.k_f != y.k_f || x.k_t != y.k_t || x.k_a != y.k_a || x.in_ch != y.in_ch ||
        x.out_ch != y.out_ch || x.gelu != y.gelu)
      return false;
  }
  for (std::size_t k = 0; k < a.skips.size(); ++k)
    if (a.skips[k].src != b.skips[k].src || a.skips[k].dst != b.skips[k].dst) return false;
  return true;
}

}  // namespace

template <typename T>
TensorPtr<T> assemble_2d_input(const LsGrid& ls, int rx, int tx, double* normalizer) {
  if (rx < 0 || rx >= ls.dims.n_rx || tx < 0 || tx >= ls.dims.n_tx)
    throw std::invalid_argument("assemble_2d_input: antenna index out of range");
  const double nu = pilot_rms_normalizer(ls, rx, rx + 1, tx);
  if (normalizer) *normalizer = nu;

  const int S = ls.dims.n_symb, F = ls.dims.n_sc;
  auto in = make_tensor<T>({2, S, F});
  for (int f = 0; f < F; ++f)
    for (int s = 0; s < S; ++s) {
      if (!ls.defined(f, s, tx)) continue;
      const std::complex<double> v = ls.at(f, s, rx, tx) * nu;
      in->data[(static_cast<std::size_t>(0) * S + s) * F + f] = static_cast<T>(v.real());
      in->data[(static_cast<std::size_t>(1) * S + s) * F + f] = static_cast<T>(v.imag());
    }
  return in;
}

template <typename T>
TensorPtr<T> assemble_3d_input(const LsGrid& ls, int tx, double* normalizer) {
  if (tx < 0 || tx >= ls.dims.n_tx)
    throw std::invalid_argument("assemble_3d_input: antenna index out of range");
  const double nu = pilot_rms_normalizer(ls, 0, ls.dims.n_rx, tx);
  if (normalizer) *normalizer = nu;

  const int A = ls.dims.n_rx, S = ls.dims.n_symb, F = ls.dims.n_sc;
  auto in = make_tensor<T>({2, A, S, F});
  const std::size_t plane = static_cast<std::size_t>(A) * S * F;
  for (int f = 0; f < F; ++f)
    for (int s = 0; s < S; ++s) {
      if (!ls.defined(f, s, tx)) continue;
      for (int r = 0; r < A; ++r) {
        const std::complex<double> v = ls.at(f, s, r, tx) * nu;
        const std::size_t base = (static_cast<std::size_t>(r) * S + s) * F + f;
        in->data[base] = static_cast<T>(v.real());
        in->data[plane + base] = static_cast<T>(v.imag());
      }
    }
  return in;
}

template TensorPtr<float> assemble_2d_input<float>(const LsGrid&, int, int, double*);
template TensorPtr<double> assemble_2d_input<double>(const LsGrid&, int, int, double*);
template TensorPtr<float> assemble_3d_input<float>(const LsGrid&, int, double*);
template TensorPtr<double> assemble_3d_input<double>(const LsGrid&, int, double*);

EstimateResult estimate_2du(const Model<float>& model, const GridDims& train_dims,
                            const LsGrid& ls) {
  if (!same_layers(model.spec, build_2du()))
    throw std::invalid_argument("estimate_2du: model is not the 2du architecture");
  if (ls.dims.n_sc != train_dims.n_sc || ls.dims.n_symb != train_dims.n_symb)
    throw std::invalid_argument("estimate_2du: grid dims differ from the model's training dims");

  const auto t0 = std::chrono::steady_clock::now();
  EstimateResult res;
  res.h_hat.dims = ls.dims;
  res.h_hat.h.assign(
      static_cast<std::size_t>(ls.dims.n_sc) * ls.dims.n_symb * ls.dims.n_rx * ls.dims.n_tx, {});

  const int S = ls.dims.n_symb, F = ls.dims.n_sc;
  for (int r = 0; r < ls.dims.n_rx; ++r) {
    for (int t = 0; t < ls.dims.n_tx; ++t) {
      double nu = 1.0;
      auto in = assemble_2d_input<float>(ls, r, t, &nu);
      Graph<float> g(/*recording=*/false);
      auto out = model.forward(g, in);
      ++res.invocations;
      const double denorm = 1.0 / nu;
      for (int f = 0; f < F; ++f)
        for (int s = 0; s < S; ++s) {
          const double re = out->data[(static_cast<std::size_t>(0) * S + s) * F + f];
          const double im = out->data[(static_cast<std::size_t>(1) * S + s) * F + f];
          res.h_hat.at(f, s, r, t) = std::complex<double>(re, im) * denorm;
        }
    }
  }
  res.inference_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

EstimateResult estimate_3dff(const Model<float>& model, const GridDims& train_dims,
                             const LsGrid& ls) {
  if (!same_layers(model.spec, build_3dff()))
    throw std::invalid_argument("estimate_3dff: model is not the 3dff architecture");
  if (ls.dims.n_rx != train_dims.n_rx)
    throw std::invalid_argument("estimate_3dff: Rx extent differs from the model's training dims");

  const auto t0 = std::chrono::steady_clock::now();
  EstimateResult res;
  res.h_hat.dims = ls.dims;
  res.h_hat.h.assign(
      static_cast<std::size_t>(ls.dims.n_sc) * ls.dims.n_symb * ls.dims.n_rx * ls.dims.n_tx, {});

  const int A = ls.dims.n_rx, S = ls.dims.n_symb, F = ls.dims.n_sc;
  const std::size_t plane = static_cast<std::size_t>(A) * S * F;
  for (int t = 0; t < ls.dims.n_tx; ++t) {
    double nu = 1.0;
    auto in = assemble_3d_input<float>(ls, t, &nu);
    Graph<float> g(/*recording=*/false);
    auto out = model.forward(g, in);
    ++res.invocations;
    const double denorm = 1.0 / nu;
    for (int r = 0; r < A; ++r)
      for (int f = 0; f < F; ++f)
        for (int s = 0; s < S; ++s) {
          const std::size_t base = (static_cast<std::size_t>(r) * S + s) * F + f;
          const double re = out->data[base];
          const double im = out->data[plane + base];
          res.h_hat.at(f, s, r, t) = std::complex<double>(re, im) * denorm;
        }
  }
  res.inference_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

namespace {

struct SliceRef {
  int sample = 0;
  int rx = 0;  // unused for 3D slabs
  int tx = 0;
};

// Normalized training target with the model's output layout.
TensorPtr<float> make_target(const Dataset& ds, const Sample& smp, const SliceRef& sl, bool is3d,
                             double nu) {
  const int A = ds.dims.n_rx, S = ds.dims.n_symb, F = ds.dims.n_sc, T = ds.dims.n_tx;
  const auto h_at = [&](int f, int s, int r) {
    return std::complex<double>(
        smp.h[((static_cast<std::size_t>(f) * S + s) * A + r) * T + sl.tx]);
  };
  if (!is3d) {
    auto target = make_tensor<float>({2, S, F});
    for (int f = 0; f < F; ++f)
      for (int s = 0; s < S; ++s) {
        const std::complex<double> v = h_at(f, s, sl.rx) * nu;
        target->data[(static_cast<std::size_t>(0) * S + s) * F + f] = static_cast<float>(v.real());
        target->data[(static_cast<std::size_t>(1) * S + s) * F + f] = static_cast<float>(v.imag());
      }
    return target;
  }
  auto target = make_tensor<float>({2, A, S, F});
  const std::size_t plane = static_cast<std::size_t>(A) * S * F;
  for (int r = 0; r < A; ++r)
    for (int f = 0; f < F; ++f)
      for (int s = 0; s < S; ++s) {
        const std::complex<double> v = h_at(f, s, r) * nu;
        const std::size_t base = (static_cast<std::size_t>(r) * S + s) * F + f;
        target->data[base] = static_cast<float>(v.real());
        target->data[plane + base] = static_cast<float>(v.imag());
      }
  return target;
}

std::vector<std::vector<float>> snapshot_params(const std::vector<TensorPtr<float>>& params) {
  std::vector<std::vector<float>> snap;
  snap.reserve(params.size());
  for (const auto& p : params) snap.push_back(p->data);
  return snap;
}

void restore_params(const std::vector<TensorPtr<float>>& params,
                    const std::vector<std::vector<float>>& snap) {
  for (std::size_t k = 0; k < params.size(); ++k) params[k]->data = snap[k];
}

}  // namespace

TrainResult train(const ModelSpec& spec, const Dataset& ds, const TrainConfig& cfg) {
  validate_spec(spec);
  if (ds.samples.empty()) throw std::invalid_argument("train: dataset is empty");
  if (cfg.epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
  if (cfg.batch_size < 1) throw std::invalid_argument("train: batch size must be >= 1");
  if (cfg.val_split < 0.0 || cfg.val_split >= 1.0)
    throw std::invalid_argument("train: val_split must be in [0, 1)");
  const bool is3d = spec.conv_dims == 3;

  const int n_samples = static_cast<int>(ds.samples.size());
  int n_val = static_cast<int>(cfg.val_split * n_samples);
  if (n_val >= n_samples) n_val = n_samples - 1;
  const int n_train = n_samples - n_val;

  std::vector<SliceRef> train_slices, val_slices;
  for (int i = 0; i < n_samples; ++i) {
    auto& dst = i < n_train ? train_slices : val_slices;
    for (int t = 0; t < ds.dims.n_tx; ++t) {
      if (is3d) {
        dst.push_back({i, 0, t});
      } else {
        for (int r = 0; r < ds.dims.n_rx; ++r) dst.push_back({i, r, t});
      }
    }
  }

  TrainResult res;
  res.train_dims = ds.dims;
  res.model = Model<float>::random_init(spec, cfg.seed);
  const auto params = res.model.parameters();
  const auto reg_weights = res.model.weight_tensors();

  AdamW<float> opt;
  opt.lr = cfg.lr;
  opt.weight_decay = cfg.weight_decay;

  Rng shuffle_rng(derive_seed(cfg.seed, 0x5hu77_placeholder));

  const float lambda = static_cast<float>(cfg.lambda);
  auto slice_pass = [&](const SliceRef& sl, bool training, Graph<float>& g) -> double {
    const Sample& smp = ds.samples[sl.sample];
    const LsGrid ls = ds.ls_of(smp);
    double nu = 1.0;
    TensorPtr<float> in = is3d ? assemble_3d_input<float>(ls, sl.tx, &nu)
                               : assemble_2d_input<float>(ls, sl.rx, sl.tx, &nu);
    TensorPtr<float> target = make_target(ds, smp, sl, is3d, nu);
    TensorPtr<float> out = res.model.forward(g, in);
    TensorPtr<float> loss = g.mse_l2_loss(out, target, reg_weights, lambda);
    const double value = loss->data[0];
    if (training && std::isfinite(value)) g.backward(loss);
    return value;
  };

  std::vector<std::vector<float>> last_good = snapshot_params(params);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(train_slices);
    double train_sum = 0.0;
    for (std::size_t start = 0; start < train_slices.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(train_slices.size(), start + cfg.batch_size);
      res.model.zero_grad();
      for (std::size_t k = start; k < stop; ++k) {
        Graph<float> g;
        const double value = slice_pass(train_slices[k], true, g);
        if (!std::isfinite(value)) {
          restore_params(params, last_good);
          res.halted_non_finite = true;
          res.halt_message = "non-finite training loss at epoch " + std::to_string(epoch + 1) +
                             ", slice " + std::to_string(k) +
                             "; parameters restored to the last completed epoch";
          return res;
        }
        train_sum += value;
      }
      const float inv_batch = 1.0f / static_cast<float>(stop - start);
      for (const auto& p : params)
        for (float& gv : p->grad) gv *= inv_batch;
      opt.step(params);
    }

    double val_sum = 0.0;
    for (const SliceRef& sl : val_slices) {
      Graph<float> g(/*recording=*/false);
      val_sum += slice_pass(sl, false, g);
    }

    EpochLoss el;
    el.train = train_slices.empty() ? 0.0 : train_sum / static_cast<double>(train_slices.size());
    el.val = val_slices.empty() ? std::nan("") : val_sum / static_cast<double>(val_slices.size());
    res.history.push_back(el);
    last_good = snapshot_params(params);
  }
  return res;
}

void write_loss_csv(const std::string& path, const std::vector<EpochLoss>& history) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open loss log for writing: " + path);
  out << "epoch,train_loss,val_loss\n";
  out.precision(10);
  for (std::size_t e = 0; e < history.size(); ++e)
    out << (e + 1) << "," << history[e].train << "," << history[e].val << "\n";
  if (!out) throw std::runtime_error("loss log write failed: " + path);
}

}  // namespace cebench

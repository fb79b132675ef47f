// SPDX-License-Identifier: Apache-2.0
//
// The CNN channel estimators: sparse-LS input assembly with per-sample
// normalization, per-antenna instancing for inference, and the AdamW
// training loop.
//
// Input conditioning: pilot LS values are scaled by the inverse RMS of
// their magnitudes before entering the network (recorded and undone on the
// output), and training targets are scaled by the same factor, so one model
// serves the whole -10..30 dB SNR range. Non-pilot REs are zero-filled.
//
// The 2D U-net estimates each (rx, tx) pair separately - n_rx * n_tx
// forward passes per subframe through one shared model. The 3D estimator
// consumes all Rx antennas of one Tx at a time - n_tx forward passes.

#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "cebench/classical.hpp"
#include "cebench/dataset.hpp"
#include "cebench/nn.hpp"
#include "cebench/tensor.hpp"

namespace cebench {

struct TrainConfig {
  int epochs = 4;
  int batch_size = 32;
  double lr = 1e-3;
  double lambda = 1e-4;       // L2 weight inside the loss
  double weight_decay = 0.0;  // AdamW decoupled decay (off by default)
  double val_split = 0.1;     // fraction of samples held out for validation
  std::uint64_t seed = 0;
};

struct EpochLoss {
  double train = 0.0;
  double val = 0.0;
};

struct TrainResult {
  Model<float> model;
  GridDims train_dims;
  std::vector<EpochLoss> history;
  bool halted_non_finite = false;
  std::string halt_message;
};

struct EstimateResult {
  ChannelTensor h_hat;
  double nmse_db = std::nan("");  // filled by the bench layer when truth is known
  double inference_seconds = 0.0;
  int invocations = 0;
};

/// {2, n_symb, n_sc} tensor: channel 0 = Re, 1 = Im of the normalized LS
/// values of (rx, tx) at pilot REs, zero elsewhere. normalizer receives the
/// applied scale factor (1 when all pilot values are zero). Rejects an
/// empty pilot mask.
template <typename T>
TensorPtr<T> assemble_2d_input(const LsGrid& ls, int rx, int tx, double* normalizer);

/// {2, n_rx, n_symb, n_sc} tensor for one Tx antenna over all Rx antennas;
/// one shared normalizer across the Rx axis.
template <typename T>
TensorPtr<T> assemble_3d_input(const LsGrid& ls, int tx, double* normalizer);

extern template TensorPtr<float> assemble_2d_input<float>(const LsGrid&, int, int, double*);
extern template TensorPtr<double> assemble_2d_input<double>(const LsGrid&, int, int, double*);
extern template TensorPtr<float> assemble_3d_input<float>(const LsGrid&, int, double*);
extern template TensorPtr<double> assemble_3d_input<double>(const LsGrid&, int, double*);

/// Runs the shared 2D U-net once per (rx, tx) pair and assembles the 4D
/// estimate. Rejects a model whose spec is not the 2du architecture or
/// whose training grid (n_sc, n_symb) differs from the input's.
EstimateResult estimate_2du(const Model<float>& model, const GridDims& train_dims,
                            const LsGrid& ls);

/// Runs the shared 3D model once per Tx antenna. Rejects an Rx extent
/// different from the one the model was trained with.
EstimateResult estimate_3dff(const Model<float>& model, const GridDims& train_dims,
                             const LsGrid& ls);

/// Mini-batch AdamW training of either architecture on a dataset. Training
/// units are (rx, tx) slices for 2D specs and per-Tx slabs for 3D specs, so
/// every antenna pair/slab contributes to the single shared model. The
/// validation split holds out whole samples from the end of the dataset.
/// A non-finite loss halts training and returns the parameters from the
/// last completed epoch.
TrainResult train(const ModelSpec& spec, const Dataset& ds, const TrainConfig& cfg);

/// Training log: `epoch,train_loss,val_loss` rows.
void write_loss_csv(const std::string& path, const std::vector<EpochLoss>& history);

}  // namespace cebench

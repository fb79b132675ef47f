// SPDX-License-Identifier: Apache-2.0
//
// Minimal reverse-mode autodiff engine: N-d real tensors plus the handful
// of operations the CNN estimators need (same-padded 2D/3D convolution,
// GELU, channel concatenation, summed-square loss with L2 regularization).
//
// A Graph records one backward closure per operation; Graph::backward runs
// them in reverse. Tensors are shared_ptr handles so parameters can live
// across many graphs. The scalar type is a template parameter: float is
// used for training, double for finite-difference gradient checks.
//
// Axis conventions (innermost / fastest axis last):
//   2D activations: {channels, symbols, subcarriers}
//   3D activations: {channels, rx antennas, symbols, subcarriers}
//   2D weights:     {out_ch, in_ch, k_t, k_f}, bias {out_ch}
//   3D weights:     {out_ch, in_ch, k_a, k_t, k_f}
// Convolutions are "same" zero-padded and require odd kernel extents.
//
// Accumulation order inside every operation is fixed by the loops, not by
// the thread schedule, so results are bit-identical for any thread count.

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace cebench {

template <typename T>
struct Tensor {
  std::vector<int> shape;
  std::vector<T> data;
  std::vector<T> grad;  // same length as data once gradients are tracked
  bool requires_grad = false;

  Tensor() = default;
  explicit Tensor(std::vector<int> sh, bool rg = false) : shape(std::move(sh)), requires_grad(rg) {
    data.assign(numel(shape), T(0));
    if (rg) grad.assign(data.size(), T(0));
  }

  static std::size_t numel(const std::vector<int>& sh) {
    std::size_t n = 1;
    for (int e : sh) {
      if (e < 1) throw std::invalid_argument("tensor: extents must be >= 1");
      n *= static_cast<std::size_t>(e);
    }
    return n;
  }

  std::size_t size() const { return data.size(); }

  void ensure_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), T(0));
  }
  void zero_grad() {
    if (!grad.empty()) std::fill(grad.begin(), grad.end(), T(0));
  }
};

template <typename T>
using TensorPtr = std::shared_ptr<Tensor<T>>;

template <typename T>
TensorPtr<T> make_tensor(std::vector<int> shape, bool requires_grad = false) {
  return std::make_shared<Tensor<T>>(std::move(shape), requires_grad);
}

namespace detail {

/// Dot product with four independent accumulators combined in a fixed
/// order; vectorizes without floating-point reassociation by the compiler.
template <typename T>
inline T dot(const T* a, const T* b, int n) {
  T acc0 = 0, acc1 = 0, acc2 = 0, acc3 = 0;
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 += a[i] * b[i];
    acc1 += a[i + 1] * b[i + 1];
    acc2 += a[i + 2] * b[i + 2];
    acc3 += a[i + 3] * b[i + 3];
  }
  T acc = (acc0 + acc1) + (acc2 + acc3);
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

template <typename T>
inline void axpy(T* dst, const T* src, T w, int n) {
  for (int i = 0; i < n; ++i) dst[i] += w * src[i];
}

inline int same_pad(int k, const char* what) {
  if (k < 1 || k % 2 == 0)
    throw std::invalid_argument(std::string(what) + ": kernel extents must be odd and >= 1");
  return (k - 1) / 2;
}

}  // namespace detail

template <typename T>
class Graph {
 public:
  /// A non-recording graph runs forward passes only (inference); outputs do
  /// not track gradients even when inputs do.
  explicit Graph(bool recording = true) : recording_(recording) {}

  /// out[o][s][f] = b[o] + sum_{i,dt,df} in[i][s+dt-pt][f+df-pf] * w[o][i][dt][df]
  TensorPtr<T> conv2d(const TensorPtr<T>& in, const TensorPtr<T>& w, const TensorPtr<T>& b) {
    if (in->shape.size() != 3 || w->shape.size() != 4 || b->shape.size() != 1)
      throw std::invalid_argument("conv2d: expected input {C,S,F}, weight {O,I,Kt,Kf}, bias {O}");
    const int C = in->shape[0], S = in->shape[1], F = in->shape[2];
    const int O = w->shape[0], I = w->shape[1], KT = w->shape[2], KF = w->shape[3];
    if (I != C) throw std::invalid_argument("conv2d: input channel mismatch");
    if (b->shape[0] != O) throw std::invalid_argument("conv2d: bias extent mismatch");
    const int pt = detail::same_pad(KT, "conv2d");
    const int pf = detail::same_pad(KF, "conv2d");

    const bool rg =
        recording_ && (in->requires_grad || w->requires_grad || b->requires_grad);
    auto out = make_tensor<T>({O, S, F}, rg);
    const T* ind = in->data.data();
    const T* wd = w->data.data();
    const T* bd = b->data.data();
    T* od = out->data.data();

#pragma omp parallel for schedule(static)
    for (int o = 0; o < O; ++o) {
      std::vector<T> acc(F);
      for (int s = 0; s < S; ++s) {
        std::fill(acc.begin(), acc.end(), bd[o]);
        for (int i = 0; i < I; ++i) {
          const T* plane = ind + (static_cast<std::size_t>(i) * S) * F;
          const T* wrow = wd + ((static_cast<std::size_t>(o) * I + i) * KT) * KF;
          for (int dt = 0; dt < KT; ++dt) {
            const int si = s + dt - pt;
            if (si < 0 || si >= S) continue;
            const T* row = plane + static_cast<std::size_t>(si) * F;
            for (int df = 0; df < KF; ++df) {
              const T wv = wrow[dt * KF + df];
              const int shift = df - pf;
              const int f0 = shift < 0 ? -shift : 0;
              const int f1 = shift > 0 ? F - shift : F;
              detail::axpy(acc.data() + f0, row + f0 + shift, wv, f1 - f0);
            }
          }
        }
        T* orow = od + (static_cast<std::size_t>(o) * S + s) * F;
        for (int f = 0; f < F; ++f) orow[f] = acc[f];
      }
    }

    if (out->requires_grad) record_conv2d_backward(in, w, b, out);
    return out;
  }

  /// 3D variant over {C,A,S,F} with weight {O,I,Ka,Kt,Kf}.
  TensorPtr<T> conv3d(const TensorPtr<T>& in, const TensorPtr<T>& w, const TensorPtr<T>& b) {
    if (in->shape.size() != 4 || w->shape.size() != 5 || b->shape.size() != 1)
      throw std::invalid_argument(
          "conv3d: expected input {C,A,S,F}, weight {O,I,Ka,Kt,Kf}, bias {O}");
    const int C = in->shape[0], A = in->shape[1], S = in->shape[2], F = in->shape[3];
    const int O = w->shape[0], I = w->shape[1];
    const int KA = w->shape[2], KT = w->shape[3], KF = w->shape[4];
    if (I != C) throw std::invalid_argument("conv3d: input channel mismatch");
    if (b->shape[0] != O) throw std::invalid_argument("conv3d: bias extent mismatch");
    const int pa = detail::same_pad(KA, "conv3d");
    const int pt = detail::same_pad(KT, "conv3d");
    const int pf = detail::same_pad(KF, "conv3d");

    const bool rg =
        recording_ && (in->requires_grad || w->requires_grad || b->requires_grad);
    auto out = make_tensor<T>({O, A, S, F}, rg);
    const T* ind = in->data.data();
    const T* wd = w->data.data();
    const T* bd = b->data.data();
    T* od = out->data.data();

#pragma omp parallel for schedule(static)
    for (int o = 0; o < O; ++o) {
      std::vector<T> acc(F);
      for (int a = 0; a < A; ++a) {
        for (int s = 0; s < S; ++s) {
          std::fill(acc.begin(), acc.end(), bd[o]);
          for (int i = 0; i < I; ++i) {
            const T* vol = ind + ((static_cast<std::size_t>(i) * A) * S) * F;
            const T* wvol =
                wd + (((static_cast<std::size_t>(o) * I + i) * KA) * KT) * KF;
            for (int da = 0; da < KA; ++da) {
              const int ai = a + da - pa;
              if (ai < 0 || ai >= A) continue;
              for (int dt = 0; dt < KT; ++dt) {
                const int si = s + dt - pt;
                if (si < 0 || si >= S) continue;
                const T* row = vol + (static_cast<std::size_t>(ai) * S + si) * F;
                const T* wrow = wvol + (static_cast<std::size_t>(da) * KT + dt) * KF;
                for (int df = 0; df < KF; ++df) {
                  const T wv = wrow[df];
                  const int shift = df - pf;
                  const int f0 = shift < 0 ? -shift : 0;
                  const int f1 = shift > 0 ? F - shift : F;
                  detail::axpy(acc.data() + f0, row + f0 + shift, wv, f1 - f0);
                }
              }
            }
          }
          T* orow = od + ((static_cast<std::size_t>(o) * A + a) * S + s) * F;
          for (int f = 0; f < F; ++f) orow[f] = acc[f];
        }
      }
    }

    if (out->requires_grad) record_conv3d_backward(in, w, b, out);
    return out;
  }

  /// Elementwise x * Phi(x) with the exact normal CDF (erf form).
  TensorPtr<T> gelu(const TensorPtr<T>& in) {
    auto out = make_tensor<T>(in->shape, recording_ && in->requires_grad);
    const std::size_t n = in->size();
    for (std::size_t i = 0; i < n; ++i) {
      const double x = static_cast<double>(in->data[i]);
      out->data[i] = static_cast<T>(x * normal_cdf(x));
    }
    if (out->requires_grad) {
      in->ensure_grad();
      steps_.push_back([in, out, n]() {
        for (std::size_t i = 0; i < n; ++i) {
          const double x = static_cast<double>(in->data[i]);
          const double d = normal_cdf(x) + x * normal_pdf(x);
          in->grad[i] += static_cast<T>(static_cast<double>(out->grad[i]) * d);
        }
      });
    }
    return out;
  }

  /// Concatenates along axis 0 (channels); remaining extents must match.
  TensorPtr<T> concat_channels(const TensorPtr<T>& a, const TensorPtr<T>& b) {
    if (a->shape.size() != b->shape.size() || a->shape.size() < 2)
      throw std::invalid_argument("concat_channels: rank mismatch");
    for (std::size_t k = 1; k < a->shape.size(); ++k)
      if (a->shape[k] != b->shape[k])
        throw std::invalid_argument("concat_channels: trailing extents differ");

    std::vector<int> sh = a->shape;
    sh[0] += b->shape[0];
    auto out = make_tensor<T>(sh, recording_ && (a->requires_grad || b->requires_grad));
    std::copy(a->data.begin(), a->data.end(), out->data.begin());
    std::copy(b->data.begin(), b->data.end(), out->data.begin() + a->data.size());

    if (out->requires_grad) {
      if (a->requires_grad) a->ensure_grad();
      if (b->requires_grad) b->ensure_grad();
      steps_.push_back([a, b, out]() {
        const std::size_t na = a->size();
        if (a->requires_grad)
          for (std::size_t i = 0; i < na; ++i) a->grad[i] += out->grad[i];
        if (b->requires_grad)
          for (std::size_t i = 0; i < b->size(); ++i) b->grad[i] += out->grad[na + i];
      });
    }
    return out;
  }

  /// Scalar loss: sum((pred - target)^2) + lambda * sum over params of
  /// sum(p^2). Pass only the tensors that should be regularized (the
  /// trainers pass convolution weights, not biases).
  TensorPtr<T> mse_l2_loss(const TensorPtr<T>& pred, const TensorPtr<T>& target,
                           const std::vector<TensorPtr<T>>& params, T lambda) {
    if (pred->shape != target->shape)
      throw std::invalid_argument("mse_l2_loss: pred/target shape mismatch");

    double acc = 0.0;
    for (std::size_t i = 0; i < pred->size(); ++i) {
      const double d = static_cast<double>(pred->data[i]) - static_cast<double>(target->data[i]);
      acc += d * d;
    }
    if (lambda != T(0)) {
      double reg = 0.0;
      for (const auto& p : params)
        for (const T v : p->data) reg += static_cast<double>(v) * static_cast<double>(v);
      acc += static_cast<double>(lambda) * reg;
    }

    bool rg = pred->requires_grad || target->requires_grad;
    for (const auto& p : params) rg = rg || p->requires_grad;
    rg = rg && recording_;
    auto out = make_tensor<T>({1}, rg);
    out->data[0] = static_cast<T>(acc);

    if (rg) {
      if (pred->requires_grad) pred->ensure_grad();
      if (target->requires_grad) target->ensure_grad();
      for (const auto& p : params)
        if (p->requires_grad) p->ensure_grad();
      steps_.push_back([pred, target, params, lambda, out]() {
        const T gl = out->grad[0];
        for (std::size_t i = 0; i < pred->size(); ++i) {
          const T d = pred->data[i] - target->data[i];
          if (pred->requires_grad) pred->grad[i] += T(2) * d * gl;
          if (target->requires_grad) target->grad[i] -= T(2) * d * gl;
        }
        if (lambda != T(0)) {
          for (const auto& p : params) {
            if (!p->requires_grad) continue;
            for (std::size_t i = 0; i < p->size(); ++i)
              p->grad[i] += T(2) * lambda * p->data[i] * gl;
          }
        }
      });
    }
    return out;
  }

  /// Seeds d(loss)/d(loss) = 1 and runs all recorded closures in reverse.
  void backward(const TensorPtr<T>& loss) {
    if (loss->size() != 1) throw std::invalid_argument("backward: loss must be a scalar");
    if (!loss->requires_grad)
      throw std::invalid_argument("backward: loss does not track gradients");
    if (steps_.empty()) throw std::logic_error("backward: no recorded forward operations");
    loss->ensure_grad();
    loss->grad[0] = T(1);
    for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) (*it)();
  }

  std::size_t recorded_ops() const { return steps_.size(); }

  static double normal_cdf(double x) { return 0.5 * std::erfc(-x * 0.70710678118654752440); }
  static double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) * 0.39894228040143267794;
  }

 private:
  void record_conv2d_backward(const TensorPtr<T>& in, const TensorPtr<T>& w, const TensorPtr<T>& b,
                              const TensorPtr<T>& out) {
    if (in->requires_grad) in->ensure_grad();
    if (w->requires_grad) w->ensure_grad();
    if (b->requires_grad) b->ensure_grad();
    steps_.push_back([in, w, b, out]() {
      const int S = in->shape[1], F = in->shape[2];
      const int O = w->shape[0], I = w->shape[1], KT = w->shape[2], KF = w->shape[3];
      const int pt = (KT - 1) / 2, pf = (KF - 1) / 2;
      const T* gout = out->grad.data();
      const T* ind = in->data.data();
      const T* wd = w->data.data();

      if (b->requires_grad) {
        T* gb = b->grad.data();
        for (int o = 0; o < O; ++o) {
          const T* g = gout + (static_cast<std::size_t>(o) * S) * F;
          T acc = 0;
          for (int k = 0; k < S * F; ++k) acc += g[k];
          gb[o] += acc;
        }
      }
      if (w->requires_grad) {
        T* gw = w->grad.data();
#pragma omp parallel for schedule(static)
        for (int o = 0; o < O; ++o) {
          for (int i = 0; i < I; ++i) {
            const T* plane = ind + (static_cast<std::size_t>(i) * S) * F;
            for (int dt = 0; dt < KT; ++dt) {
              for (int df = 0; df < KF; ++df) {
                const int shift = df - pf;
                const int f0 = shift < 0 ? -shift : 0;
                const int f1 = shift > 0 ? F - shift : F;
                T acc = 0;
                for (int s = 0; s < S; ++s) {
                  const int si = s + dt - pt;
                  if (si < 0 || si >= S) continue;
                  const T* row = plane + static_cast<std::size_t>(si) * F;
                  const T* g = gout + (static_cast<std::size_t>(o) * S + s) * F;
                  acc += detail::dot(g + f0, row + f0 + shift, f1 - f0);
                }
                gw[((static_cast<std::size_t>(o) * I + i) * KT + dt) * KF + df] += acc;
              }
            }
          }
        }
      }
      if (in->requires_grad) {
        T* gin = in->grad.data();
#pragma omp parallel for schedule(static)
        for (int i = 0; i < I; ++i) {
          std::vector<T> acc(F);
          for (int si = 0; si < S; ++si) {
            std::fill(acc.begin(), acc.end(), T(0));
            for (int o = 0; o < O; ++o) {
              const T* gplane = gout + (static_cast<std::size_t>(o) * S) * F;
              const T* wrow = wd + ((static_cast<std::size_t>(o) * I + i) * KT) * KF;
              for (int dt = 0; dt < KT; ++dt) {
                const int s = si - dt + pt;
                if (s < 0 || s >= S) continue;
                const T* grow = gplane + static_cast<std::size_t>(s) * F;
                for (int df = 0; df < KF; ++df) {
                  const T wv = wrow[dt * KF + df];
                  const int shift = pf - df;
                  const int f0 = shift < 0 ? -shift : 0;
                  const int f1 = shift > 0 ? F - shift : F;
                  detail::axpy(acc.data() + f0, grow + f0 + shift, wv, f1 - f0);
                }
              }
            }
            T* grow = gin + (static_cast<std::size_t>(i) * S + si) * F;
            for (int f = 0; f < F; ++f) grow[f] += acc[f];
          }
        }
      }
    });
  }

  void record_conv3d_backward(const TensorPtr<T>& in, const TensorPtr<T>& w, const TensorPtr<T>& b,
                              const TensorPtr<T>& out) {
    if (in->requires_grad) in->ensure_grad();
    if (w->requires_grad) w->ensure_grad();
    if (b->requires_grad) b->ensure_grad();
    steps_.push_back([in, w, b, out]() {
      const int A = in->shape[1], S = in->shape[2], F = in->shape[3];
      const int O = w->shape[0], I = w->shape[1];
      const int KA = w->shape[2], KT = w->shape[3], KF = w->shape[4];
      const int pa = (KA - 1) / 2, pt = (KT - 1) / 2, pf = (KF - 1) / 2;
      const T* gout = out->grad.data();
      const T* ind = in->data.data();
      const T* wd = w->data.data();

      if (b->requires_grad) {
        T* gb = b->grad.data();
        const std::size_t plane = static_cast<std::size_t>(A) * S * F;
        for (int o = 0; o < O; ++o) {
          const T* g = gout + o * plane;
          T acc = 0;
          for (std::size_t k = 0; k < plane; ++k) acc += g[k];
          gb[o] += acc;
        }
      }
      if (w->requires_grad) {
        T* gw = w->grad.data();
#pragma omp parallel for schedule(static)
        for (int o = 0; o < O; ++o) {
          for (int i = 0; i < I; ++i) {
            const T* vol = ind + ((static_cast<std::size_t>(i) * A) * S) * F;
            for (int da = 0; da < KA; ++da) {
              for (int dt = 0; dt < KT; ++dt) {
                for (int df = 0; df < KF; ++df) {
                  const int shift = df - pf;
                  const int f0 = shift < 0 ? -shift : 0;
                  const int f1 = shift > 0 ? F - shift : F;
                  T acc = 0;
                  for (int a = 0; a < A; ++a) {
                    const int ai = a + da - pa;
                    if (ai < 0 || ai >= A) continue;
                    for (int s = 0; s < S; ++s) {
                      const int si = s + dt - pt;
                      if (si < 0 || si >= S) continue;
                      const T* row = vol + (static_cast<std::size_t>(ai) * S + si) * F;
                      const T* g =
                          gout + ((static_cast<std::size_t>(o) * A + a) * S + s) * F;
                      acc += detail::dot(g + f0, row + f0 + shift, f1 - f0);
                    }
                  }
                  gw[(((static_cast<std::size_t>(o) * I + i) * KA + da) * KT + dt) * KF + df] +=
                      acc;
                }
              }
            }
          }
        }
      }
      if (in->requires_grad) {
        T* gin = in->grad.data();
#pragma omp parallel for schedule(static)
        for (int i = 0; i < I; ++i) {
          std::vector<T> acc(F);
          for (int ai = 0; ai < A; ++ai) {
            for (int si = 0; si < S; ++si) {
              std::fill(acc.begin(), acc.end(), T(0));
              for (int o = 0; o < O; ++o) {
                const T* gvol = gout + ((static_cast<std::size_t>(o) * A) * S) * F;
                const T* wvol = wd + (((static_cast<std::size_t>(o) * I + i) * KA) * KT) * KF;
                for (int da = 0; da < KA; ++da) {
                  const int a = ai - da + pa;
                  if (a < 0 || a >= A) continue;
                  for (int dt = 0; dt < KT; ++dt) {
                    const int s = si - dt + pt;
                    if (s < 0 || s >= S) continue;
                    const T* grow = gvol + (static_cast<std::size_t>(a) * S + s) * F;
                    const T* wrow = wvol + (static_cast<std::size_t>(da) * KT + dt) * KF;
                    for (int df = 0; df < KF; ++df) {
                      const T wv = wrow[df];
                      const int shift = pf - df;
                      const int f0 = shift < 0 ? -shift : 0;
                      const int f1 = shift > 0 ? F - shift : F;
                      detail::axpy(acc.data() + f0, grow + f0 + shift, wv, f1 - f0);
                    }
                  }
                }
              }
              T* grow = gin + ((static_cast<std::size_t>(i) * A + ai) * S + si) * F;
              for (int f = 0; f < F; ++f) grow[f] += acc[f];
            }
          }
        }
      }
    });
  }

  bool recording_ = true;
  std::vector<std::function<void()>> steps_;
};

}  // namespace cebench

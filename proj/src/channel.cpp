// SPDX-License-Identifier: Apache-2.0

#include "cebench/channel.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "cebench/rng.hpp"

namespace cebench {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr int kSinusoids = 32;
}  // namespace

const char* to_string(FadingModel m) {
  switch (m) {
    case FadingModel::TdlA: return "tdl-a";
    case FadingModel::TdlB: return "tdl-b";
    case FadingModel::TdlC: return "tdl-c";
    case FadingModel::TdlD: return "tdl-d";
    case FadingModel::TdlE: return "tdl-e";
  }
  return "?";
}

const char* to_string(CorrelationLevel c) {
  switch (c) {
    case CorrelationLevel::Low: return "low";
    case CorrelationLevel::Medium: return "medium";
    case CorrelationLevel::High: return "high";
  }
  return "?";
}

FadingModel fading_model_from_string(const std::string& s) {
  if (s == "tdl-a" || s == "a") return FadingModel::TdlA;
  if (s == "tdl-b" || s == "b") return FadingModel::TdlB;
  if (s == "tdl-c" || s == "c") return FadingModel::TdlC;
  if (s == "tdl-d" || s == "d") return FadingModel::TdlD;
  if (s == "tdl-e" || s == "e") return FadingModel::TdlE;
  throw std::invalid_argument("unknown fading model: " + s);
}

CorrelationLevel correlation_from_string(const std::string& s) {
  if (s == "low") return CorrelationLevel::Low;
  if (s == "medium") return CorrelationLevel::Medium;
  if (s == "high") return CorrelationLevel::High;
  throw std::invalid_argument("unknown correlation level: " + s);
}

namespace {

// Normalized power/delay tables patterned on 3GPP TR 38.901 TDL-A..E,
// stated at a 100 ns rms delay spread. External-standard values.
const TdlProfile kTdlA{"tdl-a",
                       {{0.0000, -13.4}, {38.19, 0.0},    {40.25, -2.2},  {58.68, -4.0},
                        {46.10, -6.0},  {53.75, -8.2},   {67.08, -9.9},  {57.50, -10.5},
                        {76.18, -7.5},  {153.75, -15.9}, {189.78, -6.6}, {222.42, -16.7},
                        {217.18, -12.4}, {249.42, -15.2}, {251.19, -10.8}, {305.82, -11.3},
                        {408.10, -12.7}, {445.79, -16.2}, {456.95, -18.3}, {479.66, -18.9},
                        {500.66, -16.6}, {530.43, -19.9}, {965.86, -29.7}}};

const TdlProfile kTdlB{"tdl-b",
                       {{0.0000, 0.0},   {10.72, -2.2},  {21.55, -4.0},  {20.95, -3.2},
                        {28.70, -9.8},  {29.86, -1.2},  {37.52, -3.4},  {50.55, -5.2},
                        {36.81, -7.6},  {36.97, -3.0},  {57.00, -8.9},  {52.83, -9.0},
                        {110.21, -4.8}, {127.56, -5.7}, {154.74, -7.5}, {178.42, -1.9},
                        {201.69, -7.6}, {282.94, -12.2}, {302.19, -9.8}, {361.87, -11.4},
                        {410.67, -14.9}, {427.90, -9.2}, {478.34, -11.3}}};

const TdlProfile kTdlC{"tdl-c",
                       {{0.0, -4.4},    {20.99, -1.2},  {22.19, -3.5},  {23.29, -5.2},
                        {21.76, -2.5},  {63.66, 0.0},   {64.48, -2.2},  {65.60, -3.9},
                        {65.84, -7.4},  {79.35, -7.1},  {82.13, -10.7}, {93.36, -11.1},
                        {122.85, -5.1}, {130.83, -6.8}, {217.04, -8.7}, {271.05, -13.2},
                        {425.89, -13.9}, {460.03, -13.9}, {549.02, -15.8}, {560.77, -17.1},
                        {630.65, -16.0}, {663.74, -15.7}, {704.27, -21.6}, {865.23, -22.8}}};

const TdlProfile kTdlD{"tdl-d",
                       {{0.0, -0.2},    {3.5, -18.8},   {61.2, -21.0},  {136.3, -22.8},
                        {140.5, -17.9}, {180.4, -20.1}, {259.6, -21.9}, {177.5, -22.9},
                        {404.2, -27.8}, {793.7, -23.6}, {942.4, -24.8}, {970.8, -30.0},
                        {1252.5, -27.7}}};

const TdlProfile kTdlE{"tdl-e",
                       {{0.0, -0.03},   {51.33, -15.8}, {54.40, -18.1}, {56.30, -19.8},
                        {54.40, -22.9}, {71.12, -22.4}, {190.92, -18.6}, {192.93, -20.8},
                        {195.89, -22.6}, {264.26, -22.3}, {371.36, -25.6}, {545.24, -20.2},
                        {1200.34, -29.8}, {2065.19, -29.2}}};

}  // namespace

const TdlProfile& builtin_profile(FadingModel m) {
  switch (m) {
    case FadingModel::TdlA: return kTdlA;
    case FadingModel::TdlB: return kTdlB;
    case FadingModel::TdlC: return kTdlC;
    case FadingModel::TdlD: return kTdlD;
    case FadingModel::TdlE: return kTdlE;
  }
  throw std::invalid_argument("unknown fading model");
}

TdlProfile load_tdl_profile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open TDL profile: " + path);
  TdlProfile p;
  std::string word;
  if (!(in >> word) || word != "profile")
    throw std::runtime_error("TDL profile missing 'profile' header: " + path);
  if (!(in >> p.name)) throw std::runtime_error("TDL profile missing name: " + path);
  int idx;
  double delay_ns, power_db;
  while (in >> word) {
    if (word != "tap") throw std::runtime_error("TDL profile: expected 'tap' line: " + path);
    if (!(in >> idx >> delay_ns >> power_db))
      throw std::runtime_error("TDL profile: malformed tap line: " + path);
    p.taps.push_back({delay_ns, power_db});
  }
  if (p.taps.empty()) throw std::runtime_error("TDL profile has no taps: " + path);
  return p;
}

TxGrid make_tx_grid(const GridDims& dims) {
  validate_dims(dims);
  TxGrid g;
  g.n_sc = dims.n_sc;
  g.n_symb = dims.n_symb;
  g.n_tx = dims.n_tx;
  g.x.assign(static_cast<std::size_t>(dims.n_sc) * dims.n_symb * dims.n_tx, {});
  return g;
}

RxGrid make_rx_grid(const GridDims& dims) {
  validate_dims(dims);
  RxGrid g;
  g.n_sc = dims.n_sc;
  g.n_symb = dims.n_symb;
  g.n_rx = dims.n_rx;
  g.y.assign(static_cast<std::size_t>(dims.n_sc) * dims.n_symb * dims.n_rx, {});
  return g;
}

CorrelationPair correlation_matrices(CorrelationLevel level, int n_rx, int n_tx) {
  if (n_rx < 1 || n_tx < 1) throw std::invalid_argument("correlation_matrices: antennas >= 1");
  double a = 0.0;
  switch (level) {
    case CorrelationLevel::Low: a = 0.0; break;
    case CorrelationLevel::Medium: a = 0.3; break;
    case CorrelationLevel::High: a = 0.9; break;
  }
  CorrelationPair pair{CMat(n_rx, n_rx), CMat::identity(n_tx)};
  for (int i = 0; i < n_rx; ++i)
    for (int j = 0; j < n_rx; ++j) pair.r_rx.at(i, j) = std::pow(a, std::abs(i - j));
  return pair;
}

CMat matrix_sqrt(const CMat& r) {
  std::vector<double> evals;
  CMat v;
  eigh(r, evals, v);  // rejects non-Hermitian input
  const int n = r.rows;
  CMat out(n, n);
  for (int k = 0; k < n; ++k) {
    const double lam = evals[k] > 0.0 ? std::sqrt(evals[k]) : 0.0;
    if (lam == 0.0) continue;
    for (int i = 0; i < n; ++i) {
      const cd vik = v.at(i, k) * lam;
      for (int j = 0; j < n; ++j) out.at(i, j) += vik * std::conj(v.at(j, k));
    }
  }
  // Symmetrize away eigensolver roundoff.
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const cd m = 0.5 * (out.at(i, j) + std::conj(out.at(j, i)));
      out.at(i, j) = m;
      out.at(j, i) = std::conj(m);
    }
  for (int i = 0; i < n; ++i) out.at(i, i) = out.at(i, i).real();
  return out;
}

ChannelTensor gen_channel(const ChannelConfig& cfg, const GridDims& dims) {
  validate_dims(dims);
  if (cfg.doppler_hz < 0.0) throw std::invalid_argument("gen_channel: doppler_hz must be >= 0");
  const TdlProfile& profile =
      cfg.custom_profile ? *cfg.custom_profile : builtin_profile(cfg.fading_model);
  if (profile.taps.empty()) throw std::invalid_argument("gen_channel: profile has no taps");

  const int F = dims.n_sc, S = dims.n_symb, R = dims.n_rx, T = dims.n_tx;
  const int L = static_cast<int>(profile.taps.size());

  // Unit-total-power taps, delays rescaled from the 100 ns reference spread.
  std::vector<double> tap_amp(L), tap_delay_s(L);
  double total = 0.0;
  for (int l = 0; l < L; ++l) total += std::pow(10.0, profile.taps[l].power_db / 10.0);
  for (int l = 0; l < L; ++l) {
    tap_amp[l] = std::sqrt(std::pow(10.0, profile.taps[l].power_db / 10.0) / total);
    tap_delay_s[l] = profile.taps[l].delay_ns * 1e-9 * (cfg.delay_spread_ns / 100.0);
  }

  // Delay-to-frequency phase ramps, shared by all antenna pairs.
  std::vector<std::complex<double>> ramp(static_cast<std::size_t>(L) * F);
  for (int l = 0; l < L; ++l) {
    const double step = -kTwoPi * cfg.subcarrier_spacing_hz * tap_delay_s[l];
    for (int f = 0; f < F; ++f)
      ramp[static_cast<std::size_t>(l) * F + f] = std::polar(tap_amp[l], step * f);
  }

  Rng rng(derive_seed(cfg.seed, seed_tag::kChannel));
  const double omega_d = kTwoPi * cfg.doppler_hz;
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(kSinusoids));

  ChannelTensor out;
  out.dims = dims;
  out.h.assign(static_cast<std::size_t>(F) * S * R * T, {});

  std::vector<std::complex<double>> gains(static_cast<std::size_t>(S) * L);
  for (int r = 0; r < R; ++r) {
    for (int t = 0; t < T; ++t) {
      // Jakes sum-of-sinusoids per tap, advanced by phasor recurrence.
      for (int l = 0; l < L; ++l) {
        for (int s = 0; s < S; ++s) gains[static_cast<std::size_t>(s) * L + l] = {};
        for (int n = 0; n < kSinusoids; ++n) {
          const double alpha = rng.uniform(0.0, kTwoPi);
          const double phi = rng.uniform(0.0, kTwoPi);
          std::complex<double> ph = std::polar(inv_sqrt_n, phi);
          const std::complex<double> step =
              std::polar(1.0, omega_d * std::cos(alpha) * cfg.symbol_duration_s);
          for (int s = 0; s < S; ++s) {
            gains[static_cast<std::size_t>(s) * L + l] += ph;
            ph *= step;
          }
        }
      }
      for (int s = 0; s < S; ++s) {
        const std::complex<double>* g = &gains[static_cast<std::size_t>(s) * L];
        for (int f = 0; f < F; ++f) {
          std::complex<double> acc{};
          const std::complex<double>* w = &ramp[f];
          for (int l = 0; l < L; ++l) acc += g[l] * w[static_cast<std::size_t>(l) * F];
          out.at(f, s, r, t) = acc;
        }
      }
    }
  }

  // Spatial correlation per RE: H <- R_R^{1/2} H R_T^{1/2}; the Tx side is
  // identity so only the left product is applied.
  const CorrelationPair corr = correlation_matrices(cfg.correlation, R, T);
  if (cfg.correlation != CorrelationLevel::Low) {
    const CMat sr = matrix_sqrt(corr.r_rx);
    std::vector<std::complex<double>> tmp(static_cast<std::size_t>(R) * T);
    for (int f = 0; f < F; ++f) {
      for (int s = 0; s < S; ++s) {
        std::complex<double>* block = &out.at(f, s, 0, 0);  // R x T, row-major
        for (int i = 0; i < R; ++i)
          for (int j = 0; j < T; ++j) {
            std::complex<double> acc{};
            for (int k = 0; k < R; ++k) acc += sr.at(i, k) * block[static_cast<std::size_t>(k) * T + j];
            tmp[static_cast<std::size_t>(i) * T + j] = acc;
          }
        for (std::size_t i = 0; i < tmp.size(); ++i) block[i] = tmp[i];
      }
    }
  }
  return out;
}

RxGrid transmit(const ChannelTensor& h, const TxGrid& x, double snr_db, std::uint64_t seed) {
  const GridDims& dims = h.dims;
  if (x.n_sc != dims.n_sc || x.n_symb != dims.n_symb || x.n_tx != dims.n_tx)
    throw std::invalid_argument("transmit: Tx grid shape does not match channel dims");

  RxGrid out = make_rx_grid(dims);
  const int F = dims.n_sc, S = dims.n_symb, R = dims.n_rx, T = dims.n_tx;

  double power_sum = 0.0;
  for (int f = 0; f < F; ++f)
    for (int s = 0; s < S; ++s)
      for (int r = 0; r < R; ++r) {
        std::complex<double> acc{};
        for (int t = 0; t < T; ++t) acc += h.at(f, s, r, t) * x.at(f, s, t);
        out.at(f, s, r) = acc;
        power_sum += std::norm(acc);
      }

  if (!std::isinf(snr_db)) {
    const double mean_power = power_sum / (static_cast<double>(F) * S * R);
    const double noise_var = mean_power * std::pow(10.0, -snr_db / 10.0);
    if (noise_var > 0.0) {
      const double sigma = std::sqrt(noise_var / 2.0);
      Rng rng(derive_seed(seed, seed_tag::kNoise));
      for (int f = 0; f < F; ++f)
        for (int s = 0; s < S; ++s)
          for (int r = 0; r < R; ++r) {
            const double re = rng.gaussian() * sigma;
            const double im = rng.gaussian() * sigma;
            out.at(f, s, r) += std::complex<double>(re, im);
          }
    }
  }
  return out;
}

}  // namespace cebench

/* ubmlp: hybrid unary-binary MLP hardware toolchain
 *
 * Model zoo: float training, fixed-point quantization, the hybrid
 * unary-binary functional model, and power-of-two layer-aware retraining.
 *
 * Scales used throughout:
 *   baseline  inputs: level a = round(x * (2^k - 1)), integer in [0, 2^k-1]
 *   weights:  integer code q in [-2^(w-1), 2^(w-1)-1], value q / 2^(w-1)
 *   baseline  layer-1 bias: integer at scale 1 / ((2^k-1) * 2^(w-1))
 *   baseline  layer-2 bias: integer at scale 1 / ((2^k-1) * 2^(2w-2))
 *   hybrid    layer-1 products are popcounts floor(a*b/N), N = 2^k-1, so
 *             pre-activations live on the 1/N grid; layer-1 bias integer at
 *             scale 1/N, layer-2 bias integer at scale 1 / (N * 2^(w-1))
 * All inference paths are pure integer arithmetic.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "ubmlp/common.hpp"
#include "ubmlp/dataset.hpp"
#include "ubmlp/unary.hpp"

namespace ubmlp {

struct Topology {
  int inputs = 0;
  int hidden = 0;
  int classes = 0;

  long long mac_count() const {
    return 1LL * inputs * hidden + 1LL * hidden * classes;
  }
};

inline Topology infer_topology(int inputs, int classes, long long mac_count) {
  if (inputs < 1 || classes < 1 || mac_count < 1)
    throw topology_error("infer_topology: non-positive argument");
  const long long per_hidden = inputs + classes;
  if (mac_count % per_hidden != 0)
    throw topology_error("infer_topology: " + std::to_string(mac_count) +
                         " MACs not divisible by I+C=" +
                         std::to_string(per_hidden) +
                         "; supply hidden size explicitly");
  return Topology{inputs, static_cast<int>(mac_count / per_hidden), classes};
}

struct FixedPointConfig {
  int input_bits = 3;   // k
  int weight_bits = 5;  // w, two's complement signed

  int input_levels() const { return (1 << input_bits) - 1; }  // N = 2^k - 1
  int weight_scale() const { return 1 << (weight_bits - 1); } // S = 2^(w-1)
  int weight_min() const { return -weight_scale(); }
  int weight_max() const { return weight_scale() - 1; }
};

struct FloatMlp {
  Topology topology;
  // layer 1: hidden x inputs, layer 2: classes x hidden
  std::vector<std::vector<double>> w1, w2;
  std::vector<double> b1, b2;
};

struct QuantizedMlp {
  Topology topology;
  FixedPointConfig config;
  std::vector<std::vector<int>> w1, w2;  // weight codes
  std::vector<long long> b1, b2;         // bias codes at accumulator scales
};

/// First layer as unary routing metadata, later layers binary.
struct HybridModel {
  Topology topology;
  FixedPointConfig config;
  int stream_width = 0;                    // N = 2^k - 1
  std::vector<std::vector<int>> sign;      // hidden x inputs, in {-1,0,+1}
  std::vector<std::vector<int>> count;     // hidden x inputs, b in [0, N]
  std::vector<long long> b1;               // per hidden neuron, units 1/N
  std::vector<std::vector<int>> w2;        // classes x hidden, weight codes
  std::vector<long long> b2;               // units 1/(N * 2^(w-1))

  RatePattern pattern(int hidden_idx, int input_idx) const {
    return encode_rate(count[hidden_idx][input_idx], stream_width);
  }
};

struct Hyperparams {
  double learning_rate = 0.05;
  int epochs = 300;
  int batch_size = 32;
  double validation_fraction = 0.2;  // held out from the train partition
  int patience = 60;                 // early stop on validation plateau
  // projected SGD: weights clamped to [-clip, clip] after every update so
  // the float model stays on the representable fixed-point range (0 = off)
  double weight_clip = 1.0;
  // quantization-aware projection of layer-1 weights onto the L-level
  // magnitude grid {0, 1/L, ..., 1} the unary rewrite targets (0 = off)
  int layer1_levels = 0;
  std::uint64_t seed = 1;
};

struct Pow2Config {
  int retrain_epochs = 2;            // m
  double accuracy_threshold = 0.01;  // T, fraction
  std::string neuron_order = "snap_distance";  // or "declaration"
};

namespace detail {

inline long long round_half_away(double v) { return std::llround(v); }

/// Deterministic split of the train partition into fit/validation slices.
inline void fit_validation_slices(const Split& split, double val_fraction,
                                  std::uint64_t seed,
                                  std::vector<int>& fit,
                                  std::vector<int>& val) {
  std::vector<int> order = split.train_indices;
  Rng rng(sub_seed(seed, "validation-slice"));
  for (int i = static_cast<int>(order.size()) - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.below(i + 1));
    std::swap(order[i], order[j]);
  }
  const int val_count =
      static_cast<int>(std::floor(val_fraction * double(order.size())));
  val.assign(order.begin(), order.begin() + val_count);
  fit.assign(order.begin() + val_count, order.end());
  std::sort(val.begin(), val.end());
  std::sort(fit.begin(), fit.end());
}

}  // namespace detail

inline FloatMlp init_float_mlp(const Topology& t, std::uint64_t seed) {
  FloatMlp m;
  m.topology = t;
  Rng rng(sub_seed(seed, "init"));
  auto init_layer = [&](int rows, int cols) {
    std::vector<std::vector<double>> w(rows, std::vector<double>(cols));
    const double stddev = std::sqrt(2.0 / double(cols));
    for (auto& row : w)
      for (auto& v : row) v = rng.normal() * stddev;
    return w;
  };
  m.w1 = init_layer(t.hidden, t.inputs);
  m.w2 = init_layer(t.classes, t.hidden);
  m.b1.assign(t.hidden, 0.3);
  m.b2.assign(t.classes, 0.0);
  return m;
}

namespace detail {

inline void forward_float(const FloatMlp& m, const std::vector<double>& x,
                          std::vector<double>& hidden,
                          std::vector<double>& out) {
  const auto& t = m.topology;
  hidden.assign(t.hidden, 0.0);
  for (int h = 0; h < t.hidden; ++h) {
    double acc = m.b1[h];
    for (int i = 0; i < t.inputs; ++i) acc += m.w1[h][i] * x[i];
    hidden[h] = acc > 0.0 ? acc : 0.0;
  }
  out.assign(t.classes, 0.0);
  for (int c = 0; c < t.classes; ++c) {
    double acc = m.b2[c];
    for (int h = 0; h < t.hidden; ++h) acc += m.w2[c][h] * hidden[h];
    out[c] = acc;
  }
}

inline void softmax_inplace(std::vector<double>& v) {
  double mx = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (auto& x : v) {
    x = std::exp(x - mx);
    sum += x;
  }
  for (auto& x : v) x /= sum;
}

inline double float_accuracy(const FloatMlp& m, const Dataset& ds,
                             const std::vector<int>& rows) {
  if (rows.empty()) return 0.0;
  std::vector<double> hidden, out;
  int correct = 0;
  for (int r : rows) {
    forward_float(m, ds.features[r], hidden, out);
    const int pred = static_cast<int>(
        std::max_element(out.begin(), out.end()) - out.begin());
    correct += (pred == ds.labels[r]);
  }
  return double(correct) / double(rows.size());
}

/// One SGD pass over `rows` (already shuffled into batches by the caller).
/// `freeze2`, when non-null, marks layer-2 weights excluded from updates.
inline double sgd_epoch(FloatMlp& m, const Dataset& ds,
                        const std::vector<int>& rows, double lr,
                        int batch_size,
                        const std::vector<std::vector<std::uint8_t>>* freeze2,
                        double weight_clip = 0.0, int layer1_levels = 0) {
  auto project = [weight_clip](double v) {
    return weight_clip > 0.0 ? std::clamp(v, -weight_clip, weight_clip) : v;
  };
  // layer-1 weights additionally snap to the unary magnitude grid; the
  // float master copy stays free so sub-step gradients still accumulate
  auto grid1 = [layer1_levels](double v) {
    if (layer1_levels <= 0) return v;
    const double L = layer1_levels;
    return std::copysign(std::round(std::abs(v) * L) / L, v);
  };
  const auto& t = m.topology;
  // straight-through view: forward/backward see snapped layer-1 weights,
  // updates land on the free master copy in `m`
  FloatMlp snapped;
  const bool use_grid = layer1_levels > 0;
  auto refresh_snapped = [&]() {
    if (!use_grid) return;
    snapped = m;
    for (auto& row : snapped.w1)
      for (auto& v : row) v = grid1(v);
  };
  refresh_snapped();
  const FloatMlp& fwd = use_grid ? snapped : m;
  std::vector<double> hidden(t.hidden), out(t.classes);
  std::vector<double> gb1(t.hidden), gb2(t.classes);
  std::vector<std::vector<double>> gw1(t.hidden,
                                       std::vector<double>(t.inputs));
  std::vector<std::vector<double>> gw2(t.classes,
                                       std::vector<double>(t.hidden));
  double total_loss = 0.0;
  int pos = 0;
  const int n = static_cast<int>(rows.size());
  while (pos < n) {
    const int bend = std::min(pos + batch_size, n);
    const double inv = 1.0 / double(bend - pos);
    for (auto& g : gw1) std::fill(g.begin(), g.end(), 0.0);
    for (auto& g : gw2) std::fill(g.begin(), g.end(), 0.0);
    std::fill(gb1.begin(), gb1.end(), 0.0);
    std::fill(gb2.begin(), gb2.end(), 0.0);
    for (int s = pos; s < bend; ++s) {
      const auto& x = ds.features[rows[s]];
      const int y = ds.labels[rows[s]];
      forward_float(fwd, x, hidden, out);
      softmax_inplace(out);
      total_loss += -std::log(std::max(out[y], 1e-30));
      // dL/dlogits = softmax - onehot
      for (int c = 0; c < t.classes; ++c) {
        const double d = (out[c] - (c == y ? 1.0 : 0.0)) * inv;
        gb2[c] += d;
        for (int h = 0; h < t.hidden; ++h) gw2[c][h] += d * hidden[h];
      }
      for (int h = 0; h < t.hidden; ++h) {
        if (hidden[h] <= 0.0) continue;  // ReLU gate
        double dh = 0.0;
        for (int c = 0; c < t.classes; ++c)
          dh += (out[c] - (c == y ? 1.0 : 0.0)) * fwd.w2[c][h];
        dh *= inv;
        gb1[h] += dh;
        for (int i = 0; i < t.inputs; ++i) gw1[h][i] += dh * x[i];
      }
    }
    for (int h = 0; h < t.hidden; ++h) {
      m.b1[h] -= lr * gb1[h];
      for (int i = 0; i < t.inputs; ++i)
        m.w1[h][i] = project(m.w1[h][i] - lr * gw1[h][i]);
    }
    for (int c = 0; c < t.classes; ++c) {
      m.b2[c] -= lr * gb2[c];
      for (int h = 0; h < t.hidden; ++h) {
        if (freeze2 && (*freeze2)[c][h]) continue;
        m.w2[c][h] = project(m.w2[c][h] - lr * gw2[c][h]);
      }
    }
    refresh_snapped();
    pos = bend;
  }
  return total_loss / double(n);
}

/// Snaps layer-1 weights onto the L-level magnitude grid in place.
inline void apply_layer1_grid(FloatMlp& m, int levels) {
  if (levels <= 0) return;
  const double L = levels;
  for (auto& row : m.w1)
    for (auto& v : row)
      v = std::copysign(std::round(std::abs(v) * L) / L, v);
}

}  // namespace detail

/// Mini-batch SGD on softmax cross-entropy; deterministic for a given
/// (seed, hyperparams). Trains on the fit slice of the train partition and
/// early-stops on the validation slice.
inline FloatMlp train_float(const Dataset& ds, const Split& split,
                            const Topology& topology,
                            const Hyperparams& hp) {
  FloatMlp model = init_float_mlp(topology, hp.seed);
  if (hp.epochs == 0) return model;

  std::vector<int> fit, val;
  detail::fit_validation_slices(split, hp.validation_fraction, hp.seed, fit,
                                val);
  if (fit.empty()) throw training_error("train_float: empty fit slice");

  Rng shuffle_rng(sub_seed(hp.seed, "batch-shuffle"));
  std::vector<int> order = fit;
  FloatMlp best = model;
  double best_val = -1.0;
  int since_best = 0;
  for (int epoch = 0; epoch < hp.epochs; ++epoch) {
    for (int i = static_cast<int>(order.size()) - 1; i > 0; --i) {
      const int j = static_cast<int>(shuffle_rng.below(i + 1));
      std::swap(order[i], order[j]);
    }
    const double loss =
        detail::sgd_epoch(model, ds, order, hp.learning_rate, hp.batch_size,
                          nullptr, hp.weight_clip, hp.layer1_levels);
    if (!std::isfinite(loss))
      throw training_error("train_float: loss diverged at epoch " +
                           std::to_string(epoch));
    if (val.empty()) continue;  // no early stopping on tiny datasets
    FloatMlp eval_model = model;
    detail::apply_layer1_grid(eval_model, hp.layer1_levels);
    const double va = detail::float_accuracy(eval_model, ds, val);
    if (va > best_val + 1e-12) {
      best_val = va;
      best = model;
      since_best = 0;
    } else if (++since_best >= hp.patience) {
      break;
    }
  }
  FloatMlp result = val.empty() ? model : best;
  detail::apply_layer1_grid(result, hp.layer1_levels);
  return result;
}

/// Weights clipped to the representable range, rounded to nearest with ties
/// away from zero; biases quantized at the accumulator scales.
inline QuantizedMlp quantize(const FloatMlp& m, const FixedPointConfig& cfg) {
  const auto& t = m.topology;
  const int S = cfg.weight_scale();
  const int N = cfg.input_levels();
  QuantizedMlp q;
  q.topology = t;
  q.config = cfg;
  auto quant_w = [&](double v) {
    return static_cast<int>(std::clamp(
        detail::round_half_away(v * S), static_cast<long long>(cfg.weight_min()),
        static_cast<long long>(cfg.weight_max())));
  };
  q.w1.assign(t.hidden, std::vector<int>(t.inputs));
  for (int h = 0; h < t.hidden; ++h)
    for (int i = 0; i < t.inputs; ++i) q.w1[h][i] = quant_w(m.w1[h][i]);
  q.w2.assign(t.classes, std::vector<int>(t.hidden));
  for (int c = 0; c < t.classes; ++c)
    for (int h = 0; h < t.hidden; ++h) q.w2[c][h] = quant_w(m.w2[c][h]);
  q.b1.resize(t.hidden);
  for (int h = 0; h < t.hidden; ++h)
    q.b1[h] = detail::round_half_away(m.b1[h] * N * S);
  q.b2.resize(t.classes);
  for (int c = 0; c < t.classes; ++c)
    q.b2[c] = detail::round_half_away(m.b2[c] * double(N) * S * S);
  return q;
}

/// Splits each layer-1 weight into sign and rate-pattern count on the
/// N-level grid; layer 2 is copied with biases rescaled to popcount units.
inline HybridModel to_hybrid(const QuantizedMlp& q) {
  const auto& t = q.topology;
  const auto& cfg = q.config;
  const int N = cfg.input_levels();
  const int S = cfg.weight_scale();
  HybridModel h;
  h.topology = t;
  h.config = cfg;
  h.stream_width = N;
  h.sign.assign(t.hidden, std::vector<int>(t.inputs, 0));
  h.count.assign(t.hidden, std::vector<int>(t.inputs, 0));
  for (int hh = 0; hh < t.hidden; ++hh) {
    for (int i = 0; i < t.inputs; ++i) {
      const double v = double(q.w1[hh][i]) / S;
      const int b = static_cast<int>(std::clamp(
          detail::round_half_away(std::abs(v) * N), 0LL,
          static_cast<long long>(N)));
      h.count[hh][i] = b;
      h.sign[hh][i] = b == 0 ? 0 : (v < 0 ? -1 : 1);
    }
  }
  // bias rescale into popcount units: each unary product popcount carries
  // 1/N of full scale, so layer-1 pre-activations live on a 1/N grid and
  // layer-2 pre-activations on a 1/(N*S) grid.  From the binary bias grids
  // 1/(N*S) and 1/(N*S*S) both conversions divide by S.
  h.b1.resize(t.hidden);
  for (int hh = 0; hh < t.hidden; ++hh)
    h.b1[hh] = detail::round_half_away(double(q.b1[hh]) / S);
  h.w2 = q.w2;
  h.b2.resize(t.classes);
  for (int c = 0; c < t.classes; ++c)
    h.b2[c] = detail::round_half_away(double(q.b2[c]) / S);
  return h;
}

inline int quantize_input_level(double x, int levels) {
  return static_cast<int>(
      std::clamp(detail::round_half_away(x * levels), 0LL,
                 static_cast<long long>(levels)));
}

inline int argmax_lowest(const std::vector<long long>& v) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(v.size()); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

/// Exact fixed-point inference of the binary baseline.
inline std::pair<int, std::vector<long long>> forward_baseline(
    const QuantizedMlp& m, const std::vector<double>& sample) {
  const auto& t = m.topology;
  const int N = m.config.input_levels();
  std::vector<long long> hidden(t.hidden);
  for (int h = 0; h < t.hidden; ++h) {
    long long acc = m.b1[h];
    for (int i = 0; i < t.inputs; ++i)
      acc += 1LL * quantize_input_level(sample[i], N) * m.w1[h][i];
    hidden[h] = acc > 0 ? acc : 0;
  }
  std::vector<long long> out(t.classes);
  for (int c = 0; c < t.classes; ++c) {
    long long acc = m.b2[c];
    for (int h = 0; h < t.hidden; ++h) acc += hidden[h] * m.w2[c][h];
    out[c] = acc;
  }
  return {argmax_lowest(out), out};
}

/// Layer-1 product via the rate-pattern prefix popcount (equals the
/// popcount of therm(a) AND rate(b); see unary tests).
inline int unary_product_popcount(int level, int count, int width) {
  return static_cast<int>((1LL * level * count) / width);
}

/// Hybrid inference: unary layer 1 (pos/neg popcount accumulation, signed
/// merge with bias, ReLU), binary layer 2.
inline std::pair<int, std::vector<long long>> forward_hybrid(
    const HybridModel& m, const std::vector<double>& sample) {
  const auto& t = m.topology;
  const int N = m.stream_width;
  std::vector<int> levels(t.inputs);
  for (int i = 0; i < t.inputs; ++i)
    levels[i] = quantize_input_level(sample[i], N);
  std::vector<long long> hidden(t.hidden);
  for (int h = 0; h < t.hidden; ++h) {
    long long pos = 0, neg = 0;
    for (int i = 0; i < t.inputs; ++i) {
      if (m.sign[h][i] == 0) continue;
      const int p = unary_product_popcount(levels[i], m.count[h][i], N);
      (m.sign[h][i] > 0 ? pos : neg) += p;
    }
    const long long pre = pos - neg + m.b1[h];
    hidden[h] = pre > 0 ? pre : 0;
  }
  std::vector<long long> out(t.classes);
  for (int c = 0; c < t.classes; ++c) {
    long long acc = m.b2[c];
    for (int h = 0; h < t.hidden; ++h) acc += hidden[h] * m.w2[c][h];
    out[c] = acc;
  }
  return {argmax_lowest(out), out};
}

inline double evaluate_accuracy(const QuantizedMlp& m, const Dataset& ds,
                                const std::vector<int>& rows) {
  if (rows.empty()) return 0.0;
  int correct = 0;
  for (int r : rows)
    correct += (forward_baseline(m, ds.features[r]).first == ds.labels[r]);
  return double(correct) / double(rows.size());
}

inline double evaluate_accuracy(const HybridModel& m, const Dataset& ds,
                                const std::vector<int>& rows) {
  if (rows.empty()) return 0.0;
  int correct = 0;
  for (int r : rows)
    correct += (forward_hybrid(m, ds.features[r]).first == ds.labels[r]);
  return double(correct) / double(rows.size());
}

/// Power-of-two candidate codes representable at the w-bit scale,
/// including 0. Snap ties round toward zero.
inline std::vector<int> pow2_candidates(const FixedPointConfig& cfg) {
  std::vector<int> cands{0};
  for (int mag = 1; mag <= cfg.weight_scale(); mag <<= 1) {
    if (mag <= cfg.weight_max()) cands.push_back(mag);
    if (-mag >= cfg.weight_min()) cands.push_back(-mag);
  }
  std::sort(cands.begin(), cands.end());
  return cands;
}

inline int snap_pow2(int code, const FixedPointConfig& cfg) {
  int best = 0;
  long long best_dist = std::abs(code);
  for (int c : pow2_candidates(cfg)) {
    const long long d = std::abs(code - c);
    if (d < best_dist || (d == best_dist && std::abs(c) < std::abs(best))) {
      best_dist = d;
      best = c;
    }
  }
  return best;
}

inline bool is_pow2_code(int code) {
  const int mag = std::abs(code);
  return mag == 0 || (mag & (mag - 1)) == 0;
}

struct ConversionStats {
  double converted_fraction = 0.0;  // layer-2 weights now pow2-or-zero
  std::vector<bool> neuron_converted;
  double initial_val_accuracy = 0.0;
  double final_val_accuracy = 0.0;
};

/// Layer-aware power-of-two retraining of the binary (second) layer.
/// Per output neuron: snap its weights to the nearest pow2 code, freeze
/// them, retrain the free weights for m epochs, and revert the neuron if
/// validation accuracy drops more than T below the starting accuracy.
inline std::pair<FloatMlp, ConversionStats> pow2_retrain(
    const FloatMlp& input_model, const FixedPointConfig& cfg,
    const Dataset& ds, const Split& split, const Pow2Config& pcfg,
    const Hyperparams& hp) {
  const auto& t = input_model.topology;
  const int S = cfg.weight_scale();

  std::vector<int> fit, val;
  detail::fit_validation_slices(split, hp.validation_fraction, hp.seed, fit,
                                val);
  if (val.empty()) val = fit;  // tiny datasets: fall back to fit slice

  auto val_accuracy = [&](const FloatMlp& m) {
    FloatMlp g = m;
    detail::apply_layer1_grid(g, hp.layer1_levels);
    return evaluate_accuracy(quantize(g, cfg), ds, val);
  };

  FloatMlp model = input_model;
  ConversionStats stats;
  stats.neuron_converted.assign(t.classes, false);
  stats.initial_val_accuracy = val_accuracy(model);
  const double floor_acc =
      stats.initial_val_accuracy - pcfg.accuracy_threshold;

  // neuron order: least total snap distance first, or declaration order
  QuantizedMlp q0 = quantize(model, cfg);
  std::vector<int> order(t.classes);
  for (int c = 0; c < t.classes; ++c) order[c] = c;
  if (pcfg.neuron_order == "snap_distance") {
    std::vector<long long> dist(t.classes, 0);
    for (int c = 0; c < t.classes; ++c)
      for (int h = 0; h < t.hidden; ++h)
        dist[c] += std::abs(q0.w2[c][h] - snap_pow2(q0.w2[c][h], cfg));
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return dist[a] < dist[b]; });
  } else if (pcfg.neuron_order != "declaration") {
    throw validation_error("pow2_retrain: unknown neuron order '" +
                           pcfg.neuron_order + "'");
  }

  std::vector<std::vector<std::uint8_t>> frozen(
      t.classes, std::vector<std::uint8_t>(t.hidden, 0));
  Rng shuffle_rng(sub_seed(hp.seed, "pow2-shuffle"));
  std::vector<int> batch_order = fit;

  for (int c : order) {
    const FloatMlp snapshot = model;
    const auto frozen_snapshot = frozen;
    // snap this neuron's weights onto the pow2 grid (exact float values)
    QuantizedMlp q = quantize(model, cfg);
    for (int h = 0; h < t.hidden; ++h) {
      model.w2[c][h] = double(snap_pow2(q.w2[c][h], cfg)) / S;
      frozen[c][h] = 1;
    }
    for (int e = 0; e < pcfg.retrain_epochs; ++e) {
      for (int i = static_cast<int>(batch_order.size()) - 1; i > 0; --i) {
        const int j = static_cast<int>(shuffle_rng.below(i + 1));
        std::swap(batch_order[i], batch_order[j]);
      }
      detail::sgd_epoch(model, ds, batch_order, hp.learning_rate,
                        hp.batch_size, &frozen, hp.weight_clip,
                        hp.layer1_levels);
    }
    if (val_accuracy(model) < floor_acc) {
      model = snapshot;  // revert rule
      frozen = frozen_snapshot;
    } else {
      stats.neuron_converted[c] = true;
    }
  }

  detail::apply_layer1_grid(model, hp.layer1_levels);
  QuantizedMlp qf = quantize(model, cfg);
  int pow2_weights = 0;
  for (int c = 0; c < t.classes; ++c)
    for (int h = 0; h < t.hidden; ++h)
      pow2_weights += is_pow2_code(qf.w2[c][h]);
  stats.converted_fraction =
      double(pow2_weights) / double(t.classes * t.hidden);
  stats.final_val_accuracy = val_accuracy(model);
  return {model, stats};
}

}  // namespace ubmlp

#include "logicdec/transformer.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>
#include <string>

#include "logicdec/error.hpp"

namespace logicdec {

namespace {

// splitmix64; fixed so seeded models are identical on every platform.
class SeedStream {
 public:
  explicit SeedStream(std::uint64_t seed) : state_(seed) {}

  double uniform(double scale) {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    const double unit = static_cast<double>(z >> 11) * 0x1.0p-53;
    return (2.0 * unit - 1.0) * scale;
  }

  void fill(Matrix& m, double scale) {
    for (double& v : m.data) v = uniform(scale);
  }
  void fill(std::vector<double>& v, double scale) {
    for (double& x : v) x = uniform(scale);
  }

 private:
  std::uint64_t state_;
};

class TransformerSession final : public ScorerSession {
 public:
  std::unique_ptr<ScorerSession> clone() const override { return std::make_unique<TransformerSession>(*this); }
  std::span<const TokenId> prefix() const override { return fed; }

  TargetKV targets;
  // keys[l] / values[l]: one d_model row per fed position.
  std::vector<std::vector<double>> keys;
  std::vector<std::vector<double>> values;
  std::vector<TokenId> fed;
};

// out = x * W for a row vector x.
void vec_mat(std::span<const double> x, const Matrix& w, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < w.rows; ++i) {
    const double xi = x[i];
    const double* row = w.row(i);
    for (std::size_t j = 0; j < w.cols; ++j) out[j] += xi * row[j];
  }
}

double gelu(double x) {
  constexpr double k = 0.7978845608028654;  // sqrt(2 / pi)
  return 0.5 * x * (1.0 + std::tanh(k * (x + 0.044715 * x * x * x)));
}

void positional_encoding(std::size_t pos, std::span<double> out) {
  const std::size_t d = out.size();
  for (std::size_t i = 0; i < d; i += 2) {
    const double freq = std::pow(10000.0, -static_cast<double>(i) / static_cast<double>(d));
    out[i] += std::sin(static_cast<double>(pos) * freq);
    if (i + 1 < d) out[i + 1] += std::cos(static_cast<double>(pos) * freq);
  }
}

}  // namespace

AttentionHookBundle logic_attention_hooks(TruthVector prefix_truth, double alpha_prefix, TruthVector target_truth,
                                          double alpha_target) {
  AttentionHookBundle hooks;
  hooks.prefix_shift = [truth = std::move(prefix_truth), alpha_prefix](int, int, std::span<const double> seg) {
    return boost_weights(seg, truth, alpha_prefix);
  };
  hooks.target_shift = [truth = std::move(target_truth), alpha_target](int, int, std::span<const double> seg) {
    return boost_weights(seg, truth, alpha_target);
  };
  return hooks;
}

TinyTransformer TinyTransformer::random(const TransformerConfig& config, std::uint64_t seed) {
  if (config.vocab_size == 0 || config.layers < 1 || config.heads < 1 || config.d_model < 2 || config.d_ff < 1 ||
      config.d_model % config.heads != 0 || config.max_positions < 1) {
    throw Error("invalid transformer dimensions");
  }
  TinyTransformer m;
  m.config_ = config;
  const auto d = static_cast<std::size_t>(config.d_model);
  const auto ff = static_cast<std::size_t>(config.d_ff);
  SeedStream rng(seed);
  m.embedding_ = Matrix(config.vocab_size, d);
  rng.fill(m.embedding_, 1.0);
  const double proj = std::sqrt(3.0 / static_cast<double>(d));
  for (int l = 0; l < config.layers; ++l) {
    Layer layer;
    layer.ln1_gain.assign(d, 1.0);
    layer.ln1_bias.assign(d, 0.0);
    layer.ln2_gain.assign(d, 1.0);
    layer.ln2_bias.assign(d, 0.0);
    for (Matrix* w : {&layer.wq, &layer.wk, &layer.wv, &layer.wo}) {
      *w = Matrix(d, d);
      rng.fill(*w, proj);
    }
    layer.w1 = Matrix(d, ff);
    rng.fill(layer.w1, proj);
    layer.b1.assign(ff, 0.0);
    layer.w2 = Matrix(ff, d);
    rng.fill(layer.w2, std::sqrt(3.0 / static_cast<double>(ff)));
    layer.b2.assign(d, 0.0);
    m.layers_.push_back(std::move(layer));
  }
  m.final_gain_.assign(d, 1.0);
  m.final_bias_.assign(d, 0.0);
  m.output_ = Matrix(config.vocab_size, d);
  rng.fill(m.output_, 2.0 * proj);
  return m;
}

void TinyTransformer::layer_norm(std::span<const double> x, const std::vector<double>& gain,
                                 const std::vector<double>& bias, std::span<double> out) const {
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= n;
  const double inv = 1.0 / std::sqrt(var + 1e-5);
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mean) * inv * gain[i] + bias[i];
}

TargetKV TinyTransformer::precompute_target_kv(std::span<const TokenId> targets) const {
  if (targets.empty()) throw Error("target word list is empty");
  const auto d = static_cast<std::size_t>(config_.d_model);
  const auto ff = static_cast<std::size_t>(config_.d_ff);
  TargetKV kv;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    kv.key.emplace_back(targets.size(), d);
    kv.value.emplace_back(targets.size(), d);
  }
  std::vector<double> x(d), a(d), o(d), hidden(ff), f(d);
  for (std::size_t c = 0; c < targets.size(); ++c) {
    if (targets[c] >= config_.vocab_size) throw DimensionError("target token outside the vocabulary");
    const double* e = embedding_.row(targets[c]);
    std::copy(e, e + d, x.begin());
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      const Layer& L = layers_[l];
      layer_norm(x, L.ln1_gain, L.ln1_bias, a);
      std::span<double> k(kv.key[l].row(c), d);
      std::span<double> v(kv.value[l].row(c), d);
      vec_mat(a, L.wk, k);
      vec_mat(a, L.wv, v);
      // A lone token attends only to itself, so the mixture is its value.
      vec_mat(v, L.wo, o);
      for (std::size_t i = 0; i < d; ++i) x[i] += o[i];
      layer_norm(x, L.ln2_gain, L.ln2_bias, a);
      vec_mat(a, L.w1, hidden);
      for (std::size_t i = 0; i < ff; ++i) hidden[i] = gelu(hidden[i] + L.b1[i]);
      vec_mat(hidden, L.w2, f);
      for (std::size_t i = 0; i < d; ++i) x[i] += f[i] + L.b2[i];
    }
  }
  return kv;
}

std::unique_ptr<ScorerSession> TinyTransformer::begin_session(std::span<const TokenId> targets) const {
  auto s = std::make_unique<TransformerSession>();
  if (!targets.empty()) s->targets = precompute_target_kv(targets);
  s->keys.resize(layers_.size());
  s->values.resize(layers_.size());
  return s;
}

std::vector<double> TinyTransformer::step_logits(ScorerSession& session, TokenId token,
                                                 const AttentionHookBundle* hooks) const {
  auto& s = dynamic_cast<TransformerSession&>(session);
  if (token >= config_.vocab_size) throw DimensionError("token outside the vocabulary");
  const std::size_t pos = s.fed.size();
  if (pos >= static_cast<std::size_t>(config_.max_positions)) throw Error("sequence exceeds max_positions");
  s.fed.push_back(token);

  const auto d = static_cast<std::size_t>(config_.d_model);
  const auto ff = static_cast<std::size_t>(config_.d_ff);
  const auto heads = static_cast<std::size_t>(config_.heads);
  const std::size_t hd = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(hd));
  const std::size_t n_targets = s.targets.count();

  std::vector<double> x(d), a(d), q(d), k(d), v(d), mix(d), o(d), hidden(ff), f(d);
  const double* e = embedding_.row(token);
  std::copy(e, e + d, x.begin());
  positional_encoding(pos, x);

  const std::size_t n_prefix = pos + 1;
  std::vector<double> row(n_targets + n_prefix);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Layer& L = layers_[l];
    layer_norm(x, L.ln1_gain, L.ln1_bias, a);
    vec_mat(a, L.wq, q);
    vec_mat(a, L.wk, k);
    vec_mat(a, L.wv, v);
    s.keys[l].insert(s.keys[l].end(), k.begin(), k.end());
    s.values[l].insert(s.values[l].end(), v.begin(), v.end());
    const double* keys = s.keys[l].data();
    const double* vals = s.values[l].data();

    std::fill(mix.begin(), mix.end(), 0.0);
    for (std::size_t h = 0; h < heads; ++h) {
      const std::size_t off = h * hd;
      auto dot = [&](const double* key_row) {
        double acc = 0.0;
        for (std::size_t i = 0; i < hd; ++i) acc += q[off + i] * key_row[off + i];
        return acc * scale;
      };
      for (std::size_t j = 0; j < n_targets; ++j) row[j] = dot(s.targets.key[l].row(j));
      for (std::size_t j = 0; j < n_prefix; ++j) row[n_targets + j] = dot(keys + j * d);
      row = softmax(row);

      if (hooks != nullptr) {
        const int li = static_cast<int>(l);
        const int hi = static_cast<int>(h);
        auto apply = [&](const AttentionHookBundle::Shift& shift, std::size_t from, std::size_t len) {
          if (!shift || len == 0) return;
          std::vector<double> shifted = shift(li, hi, std::span<const double>(row.data() + from, len));
          if (shifted.size() != len) throw DimensionError("attention hook changed the segment length");
          std::copy(shifted.begin(), shifted.end(), row.begin() + static_cast<std::ptrdiff_t>(from));
        };
        apply(hooks->target_shift, 0, n_targets);
        apply(hooks->prefix_shift, n_targets, n_prefix);
        double sum = 0.0;
        for (double w : row) {
          if (!std::isfinite(w) || w < 0.0) throw DimensionError("attention hook returned a negative or non-finite weight");
          sum += w;
        }
        if (!(sum > 0.0)) throw DimensionError("attention hook returned an all-zero row");
        for (double& w : row) w /= sum;
        if (hooks->observer) {
          hooks->observer(li, hi, std::span<const double>(row.data(), n_targets),
                          std::span<const double>(row.data() + n_targets, n_prefix));
        }
      }

      for (std::size_t j = 0; j < n_targets; ++j) {
        const double* vr = s.targets.value[l].row(j);
        for (std::size_t i = 0; i < hd; ++i) mix[off + i] += row[j] * vr[off + i];
      }
      for (std::size_t j = 0; j < n_prefix; ++j) {
        const double* vr = vals + j * d;
        const double w = row[n_targets + j];
        for (std::size_t i = 0; i < hd; ++i) mix[off + i] += w * vr[off + i];
      }
    }
    vec_mat(mix, L.wo, o);
    for (std::size_t i = 0; i < d; ++i) x[i] += o[i];
    layer_norm(x, L.ln2_gain, L.ln2_bias, a);
    vec_mat(a, L.w1, hidden);
    for (std::size_t i = 0; i < ff; ++i) hidden[i] = gelu(hidden[i] + L.b1[i]);
    vec_mat(hidden, L.w2, f);
    for (std::size_t i = 0; i < d; ++i) x[i] += f[i] + L.b2[i];
  }

  layer_norm(x, final_gain_, final_bias_, a);
  std::vector<double> logits(config_.vocab_size);
  for (std::size_t w = 0; w < config_.vocab_size; ++w) {
    const double* r = output_.row(w);
    double acc = 0.0;
    for (std::size_t i = 0; i < d; ++i) acc += r[i] * a[i];
    logits[w] = acc;
  }
  return logits;
}

Distribution TinyTransformer::step(ScorerSession& session, TokenId token, const AttentionHookBundle* hooks) const {
  return Distribution(softmax(step_logits(session, token, hooks)), DomainKind::Vocabulary);
}

namespace {

constexpr char kWeightMagic[4] = {'L', 'D', 'T', 'W'};
constexpr std::uint32_t kWeightVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (in.gcount() != 4) throw FormatError("truncated weight file");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_tensor(std::ostream& out, const std::vector<double>& v) {
  for (double x : v) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(x)));
}

void get_tensor(std::istream& in, std::vector<double>& v, std::size_t n) {
  v.resize(n);
  for (double& x : v) {
    const float f = std::bit_cast<float>(get_u32(in));
    if (!std::isfinite(f)) throw FormatError("non-finite weight");
    x = f;
  }
}

void get_matrix(std::istream& in, Matrix& m, std::size_t r, std::size_t c) {
  m.rows = r;
  m.cols = c;
  get_tensor(in, m.data, r * c);
}

}  // namespace

void TinyTransformer::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write weight file " + path.string());
  out.write(kWeightMagic, 4);
  put_u32(out, kWeightVersion);
  put_u32(out, static_cast<std::uint32_t>(config_.vocab_size));
  put_u32(out, static_cast<std::uint32_t>(config_.layers));
  put_u32(out, static_cast<std::uint32_t>(config_.heads));
  put_u32(out, static_cast<std::uint32_t>(config_.d_model));
  put_u32(out, static_cast<std::uint32_t>(config_.d_ff));
  put_u32(out, static_cast<std::uint32_t>(config_.max_positions));
  put_tensor(out, embedding_.data);
  for (const Layer& L : layers_) {
    put_tensor(out, L.ln1_gain);
    put_tensor(out, L.ln1_bias);
    put_tensor(out, L.wq.data);
    put_tensor(out, L.wk.data);
    put_tensor(out, L.wv.data);
    put_tensor(out, L.wo.data);
    put_tensor(out, L.ln2_gain);
    put_tensor(out, L.ln2_bias);
    put_tensor(out, L.w1.data);
    put_tensor(out, L.b1);
    put_tensor(out, L.w2.data);
    put_tensor(out, L.b2);
  }
  put_tensor(out, final_gain_);
  put_tensor(out, final_bias_);
  put_tensor(out, output_.data);
  if (!out) throw Error("failed writing weight file " + path.string());
}

TinyTransformer TinyTransformer::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open weight file " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (in.gcount() != 4 || !std::equal(magic, magic + 4, kWeightMagic)) throw FormatError("not a weight file (bad magic)");
  if (get_u32(in) != kWeightVersion) throw FormatError("unsupported weight file version");
  TransformerConfig c;
  c.vocab_size = get_u32(in);
  c.layers = static_cast<int>(get_u32(in));
  c.heads = static_cast<int>(get_u32(in));
  c.d_model = static_cast<int>(get_u32(in));
  c.d_ff = static_cast<int>(get_u32(in));
  c.max_positions = static_cast<int>(get_u32(in));
  if (c.vocab_size == 0 || c.vocab_size > (1u << 24) || c.layers < 1 || c.layers > 64 || c.heads < 1 ||
      c.d_model < 2 || c.d_model > 4096 || c.d_model % c.heads != 0 || c.d_ff < 1 || c.d_ff > 16384 ||
      c.max_positions < 1) {
    throw FormatError("weight file has invalid dimensions");
  }
  const auto d = static_cast<std::size_t>(c.d_model);
  const auto ff = static_cast<std::size_t>(c.d_ff);
  TinyTransformer m;
  m.config_ = c;
  get_matrix(in, m.embedding_, c.vocab_size, d);
  for (int l = 0; l < c.layers; ++l) {
    Layer L;
    get_tensor(in, L.ln1_gain, d);
    get_tensor(in, L.ln1_bias, d);
    get_matrix(in, L.wq, d, d);
    get_matrix(in, L.wk, d, d);
    get_matrix(in, L.wv, d, d);
    get_matrix(in, L.wo, d, d);
    get_tensor(in, L.ln2_gain, d);
    get_tensor(in, L.ln2_bias, d);
    get_matrix(in, L.w1, d, ff);
    get_tensor(in, L.b1, ff);
    get_matrix(in, L.w2, ff, d);
    get_tensor(in, L.b2, d);
    m.layers_.push_back(std::move(L));
  }
  get_tensor(in, m.final_gain_, d);
  get_tensor(in, m.final_bias_, d);
  get_matrix(in, m.output_, c.vocab_size, d);
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes after weight tensors");
  return m;
}

}  // namespace logicdec

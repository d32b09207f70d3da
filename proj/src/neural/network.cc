#include "replay/neural/network.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "replay/errors.h"
#include "replay/neural/kernels.h"

namespace replay::neural {
namespace {

using kernels::ConstMatrixView;
using kernels::MatrixView;
using kernels::Op;

double UniformSigned(std::mt19937_64& rng) {
  return 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0;
}

MatrixView Mat(Tensor& t) { return kernels::View(t.data(), t.dim(0), t.dim(1)); }
ConstMatrixView Mat(const Tensor& t) {
  return kernels::View(t.data(), t.dim(0), t.dim(1));
}
MatrixView Mat(Parameter& p, std::vector<double>& buf) {
  return kernels::View(buf.data(), p.shape[0], p.shape[1]);
}
ConstMatrixView Mat(const Parameter& p) {
  return kernels::View(p.value.data(), p.shape[0], p.shape[1]);
}

// y = x * w + b with w stored (in x out).
Tensor DenseForward(const Tensor& x, const Parameter& w, const Parameter& b) {
  Tensor y({x.dim(0), w.shape[1]});
  kernels::Gemm(Mat(x), Op::kNone, Mat(w), Mat(y), false);
  kernels::AddBias(Mat(y), b.value);
  return y;
}

// Overwrites the gradients of w and b; fills dx when requested.
void DenseBackward(const Tensor& x, const Tensor& dy, Parameter& w,
                   Parameter& b, Tensor* dx) {
  kernels::Gemm(Mat(x), Op::kTranspose, Mat(dy), Mat(w, w.grad), false);
  kernels::ColumnSums(Mat(dy), b.grad);
  if (dx == nullptr) return;
  std::vector<double> wt(w.value.size());
  kernels::Transpose(Mat(w), kernels::View(wt.data(), w.shape[1], w.shape[0]));
  *dx = Tensor({dy.dim(0), w.shape[0]});
  kernels::Gemm(Mat(dy), Op::kNone,
                kernels::View(wt.data(), w.shape[1], w.shape[0]), Mat(*dx),
                false);
}

Tensor DropoutMask(const std::vector<int>& shape, double rate,
                   std::uint64_t seed, int layer) {
  Tensor mask(shape);
  std::mt19937_64 rng(seed + 0x9E3779B97F4A7C15ULL * (layer + 1));
  const double keep_scale = 1.0 / (1.0 - rate);
  for (double& m : mask.values()) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    m = u < rate ? 0.0 : keep_scale;
  }
  return mask;
}

void Multiply(Tensor& x, const Tensor& mask) {
  for (std::size_t i = 0; i < x.size(); ++i) x[i] *= mask[i];
}

Tensor Softmax2(const Tensor& logits) {
  Tensor probs({logits.dim(0), 2});
  for (int r = 0; r < logits.dim(0); ++r) {
    const double z0 = logits[2 * r];
    const double z1 = logits[2 * r + 1];
    const double m = std::max(z0, z1);
    const double e0 = std::exp(z0 - m);
    const double e1 = std::exp(z1 - m);
    probs[2 * r] = e0 / (e0 + e1);
    probs[2 * r + 1] = e1 / (e0 + e1);
  }
  return probs;
}

// Mean over rows of -sum_j target_j * log softmax_j, evaluated stably.
double CrossEntropyFromLogits(const Tensor& logits, const Tensor& targets) {
  double total = 0.0;
  for (int r = 0; r < logits.dim(0); ++r) {
    const double z0 = logits[2 * r];
    const double z1 = logits[2 * r + 1];
    const double m = std::max(z0, z1);
    const double lse = m + std::log(std::exp(z0 - m) + std::exp(z1 - m));
    total += targets[2 * r] * (lse - z0) + targets[2 * r + 1] * (lse - z1);
  }
  return total / logits.dim(0);
}

std::string JoinInts(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(v[i]);
  }
  return s;
}

}  // namespace

const char* ArchitectureName(Architecture a) {
  return a == Architecture::kMlp ? "mlp" : "cnn";
}

NetworkSpec NetworkSpec::Mlp(FeatureLayout input) {
  NetworkSpec spec;
  spec.arch = Architecture::kMlp;
  spec.input = input;
  return spec;
}

NetworkSpec NetworkSpec::Cnn(FeatureLayout input) {
  NetworkSpec spec;
  spec.arch = Architecture::kCnn;
  spec.input = input;
  return spec;
}

int NetworkSpec::MinHistory() const {
  return arch == Architecture::kCnn ? conv_layers * (conv_extent - 1) + 1 : 1;
}

int NetworkSpec::ConvOutputLength() const {
  return input.history - conv_layers * (conv_extent - 1);
}

void NetworkSpec::Validate() const {
  if (input.history < 1) throw ConfigError("history length must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    throw ConfigError("dropout rate must be in [0, 1)");
  }
  if (arch == Architecture::kMlp) {
    if (hidden.empty()) throw ConfigError("mlp needs at least one layer");
    for (int h : hidden) {
      if (h < 1) throw ConfigError("mlp layer widths must be positive");
    }
    return;
  }
  if (conv_layers < 1 || conv_filters < 1 || conv_extent < 1 ||
      fc_units < 1) {
    throw ConfigError("cnn sizes must be positive");
  }
  if (input.history < MinHistory()) {
    throw ConfigError("cnn needs a history of at least " +
                      std::to_string(MinHistory()) + " steps, got " +
                      std::to_string(input.history));
  }
}

std::string NetworkSpec::Describe() const {
  std::ostringstream out;
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), dropout);
  out << "arch=" << ArchitectureName(arch)
      << " encoding=" << EncodingName(input.encoding)
      << " history=" << input.history << " hidden=" << JoinInts(hidden)
      << " conv_layers=" << conv_layers << " conv_filters=" << conv_filters
      << " conv_extent=" << conv_extent << " fc_units=" << fc_units
      << " dropout=" << std::string(buf, res.ptr);
  return out.str();
}

NetworkSpec NetworkSpec::Parse(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  for (std::string item; in >> item;) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("network spec: expected key=value, got " + item);
    }
    kv[item.substr(0, eq)] = item.substr(eq + 1);
  }
  auto get = [&kv](const char* key) {
    auto it = kv.find(key);
    if (it == kv.end()) {
      throw ConfigError(std::string("network spec: missing ") + key);
    }
    return it->second;
  };
  auto to_int = [](const std::string& s) {
    int v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) {
      throw ConfigError("network spec: bad integer " + s);
    }
    return v;
  };
  NetworkSpec spec;
  const std::string arch = get("arch");
  if (arch == "mlp") {
    spec.arch = Architecture::kMlp;
  } else if (arch == "cnn") {
    spec.arch = Architecture::kCnn;
  } else {
    throw ConfigError("network spec: unknown arch " + arch);
  }
  spec.input.encoding = ParseEncoding(get("encoding"));
  spec.input.history = to_int(get("history"));
  spec.hidden.clear();
  std::istringstream widths(get("hidden"));
  for (std::string w; std::getline(widths, w, ',');) {
    if (!w.empty()) spec.hidden.push_back(to_int(w));
  }
  spec.conv_layers = to_int(get("conv_layers"));
  spec.conv_filters = to_int(get("conv_filters"));
  spec.conv_extent = to_int(get("conv_extent"));
  spec.fc_units = to_int(get("fc_units"));
  const std::string d = get("dropout");
  auto [p, ec] = std::from_chars(d.data(), d.data() + d.size(), spec.dropout);
  if (ec != std::errc() || p != d.data() + d.size()) {
    throw ConfigError("network spec: bad dropout " + d);
  }
  spec.Validate();
  return spec;
}

Network::Network(const NetworkSpec& spec, std::uint64_t seed) : spec_(spec) {
  spec_.Validate();
  auto add = [this](std::string name, std::vector<int> shape) {
    Parameter p;
    p.name = std::move(name);
    p.shape = std::move(shape);
    std::size_t n = 1;
    for (int d : p.shape) n *= d;
    p.value.assign(n, 0.0);
    p.grad.assign(n, 0.0);
    params_.push_back(std::move(p));
  };
  int width = spec_.input.size();
  if (spec_.arch == Architecture::kMlp) {
    for (std::size_t l = 0; l < spec_.hidden.size(); ++l) {
      add("dense" + std::to_string(l) + ".w", {width, spec_.hidden[l]});
      add("dense" + std::to_string(l) + ".b", {spec_.hidden[l]});
      width = spec_.hidden[l];
    }
  } else {
    int channels = spec_.input.channels();
    for (int l = 0; l < spec_.conv_layers; ++l) {
      add("conv" + std::to_string(l) + ".w",
          {spec_.conv_extent * channels, spec_.conv_filters});
      add("conv" + std::to_string(l) + ".b", {spec_.conv_filters});
      channels = spec_.conv_filters;
    }
    width = spec_.ConvOutputLength() * spec_.conv_filters +
            spec_.input.appendix();
    add("fc.w", {width, spec_.fc_units});
    add("fc.b", {spec_.fc_units});
    width = spec_.fc_units;
  }
  add("out.w", {width, 2});
  add("out.b", {2});

  std::mt19937_64 rng(seed);
  for (Parameter& p : params_) {
    if (p.shape.size() != 2) continue;
    const bool output = p.name == "out.w";
    const double fan_in = p.shape[0];
    const double limit = std::sqrt((output ? 3.0 : 6.0) / fan_in);
    for (double& v : p.value) v = limit * UniformSigned(rng);
  }
}

std::size_t Network::ParameterCount() const {
  std::size_t n = 0;
  for (const Parameter& p : params_) n += p.value.size();
  return n;
}

struct Network::Trace {
  int batch = 0;
  // Inputs of each fully connected layer, in order, after dropout.
  std::vector<Tensor> dense_in;
  // Post-ReLU outputs of each hidden fully connected layer.
  std::vector<Tensor> dense_relu;
  // Dropout masks; masks[i] scales dense_in[i] (CNN) or dense_relu[i] (MLP).
  std::vector<Tensor> masks;
  std::vector<Tensor> patches;
  std::vector<Tensor> conv_out;
  Tensor logits;
  Tensor probs;
};

void Network::CheckInputs(const Tensor& inputs) const {
  if (inputs.rank() != 2 || inputs.dim(1) != spec_.input.size()) {
    throw ContractError("network input must be (batch x " +
                        std::to_string(spec_.input.size()) + ")");
  }
  if (inputs.dim(0) < 1) throw ContractError("empty batch");
}

Network::Trace Network::Run(const Tensor& inputs,
                            const ForwardOptions& opts) const {
  CheckInputs(inputs);
  Trace tr;
  tr.batch = inputs.dim(0);
  const bool dropout = opts.train && spec_.dropout > 0.0;
  int layer = 0;
  std::size_t pi = 0;

  if (spec_.arch == Architecture::kMlp) {
    tr.dense_in.push_back(inputs);
    for (std::size_t l = 0; l < spec_.hidden.size(); ++l) {
      Tensor z = DenseForward(tr.dense_in.back(), params_[pi], params_[pi + 1]);
      pi += 2;
      kernels::ReluForward(z.values());
      tr.dense_relu.push_back(z);
      if (dropout) {
        tr.masks.push_back(
            DropoutMask(z.shape(), spec_.dropout, opts.dropout_seed, layer++));
        Multiply(z, tr.masks.back());
      }
      tr.dense_in.push_back(std::move(z));
    }
  } else {
    const int batch = tr.batch;
    const int history = spec_.input.history;
    int channels = spec_.input.channels();
    int length = history;
    // Channel-major input rows to time-major sequences.
    Tensor x({batch * history, channels});
    for (int b = 0; b < batch; ++b) {
      for (int c = 0; c < channels; ++c) {
        for (int t = 0; t < history; ++t) {
          x[(b * history + t) * channels + c] =
              inputs[b * inputs.dim(1) + spec_.input.SequenceIndex(c, t)];
        }
      }
    }
    for (int l = 0; l < spec_.conv_layers; ++l) {
      const int out_len = length - spec_.conv_extent + 1;
      Tensor patches({batch * out_len, spec_.conv_extent * channels});
      kernels::Im2Col(x.values(), batch, length, channels, spec_.conv_extent,
                      patches.values());
      Tensor z = DenseForward(patches, params_[pi], params_[pi + 1]);
      pi += 2;
      kernels::ReluForward(z.values());
      tr.patches.push_back(std::move(patches));
      tr.conv_out.push_back(z);
      x = std::move(z);
      length = out_len;
      channels = spec_.conv_filters;
    }
    const int flat = length * channels;
    const int appendix = spec_.input.appendix();
    Tensor h({batch, flat + appendix});
    for (int b = 0; b < batch; ++b) {
      std::copy_n(x.data() + static_cast<std::size_t>(b) * flat, flat,
                  h.data() + static_cast<std::size_t>(b) * (flat + appendix));
      std::copy_n(inputs.data() + static_cast<std::size_t>(b) * inputs.dim(1) +
                      spec_.input.sequence_size(),
                  appendix,
                  h.data() + static_cast<std::size_t>(b) * (flat + appendix) +
                      flat);
    }
    if (dropout) {
      tr.masks.push_back(
          DropoutMask(h.shape(), spec_.dropout, opts.dropout_seed, layer++));
      Multiply(h, tr.masks.back());
    }
    tr.dense_in.push_back(std::move(h));
    Tensor z = DenseForward(tr.dense_in.back(), params_[pi], params_[pi + 1]);
    pi += 2;
    kernels::ReluForward(z.values());
    tr.dense_relu.push_back(z);
    if (dropout) {
      tr.masks.push_back(
          DropoutMask(z.shape(), spec_.dropout, opts.dropout_seed, layer++));
      Multiply(z, tr.masks.back());
    }
    tr.dense_in.push_back(std::move(z));
  }
  tr.logits = DenseForward(tr.dense_in.back(), params_[pi], params_[pi + 1]);
  tr.probs = Softmax2(tr.logits);
  return tr;
}

Tensor Network::Forward(const Tensor& inputs,
                        const ForwardOptions& opts) const {
  return Run(inputs, opts).probs;
}

MixedStrategy Network::Predict(const Tensor& input) const {
  if (input.rank() != 1) throw ContractError("Predict expects a rank-1 input");
  Tensor batch({1, static_cast<int>(input.size())},
               std::vector<double>(input.values().begin(),
                                   input.values().end()));
  return MixedStrategy(Forward(batch)[0]);
}

double Network::Loss(const Tensor& inputs, const Tensor& targets,
                     const ForwardOptions& opts) const {
  const Trace tr = Run(inputs, opts);
  if (targets.shape() != tr.logits.shape()) {
    throw ContractError("targets must be (batch x 2)");
  }
  return CrossEntropyFromLogits(tr.logits, targets);
}

double Network::LossAndGradient(const Tensor& inputs,
                                std::span<const Action> targets,
                                const ForwardOptions& opts) {
  return LossAndGradient(inputs, OneHot(targets), opts);
}

double Network::LossAndGradient(const Tensor& inputs, const Tensor& targets,
                                const ForwardOptions& opts) {
  Trace tr = Run(inputs, opts);
  if (targets.shape() != tr.logits.shape()) {
    throw ContractError("targets must be (batch x 2)");
  }
  const double loss = CrossEntropyFromLogits(tr.logits, targets);
  Tensor grad = SoftmaxCrossEntropyGrad(tr.probs, targets);

  std::size_t pi = params_.size() - 2;
  const int dense_layers = static_cast<int>(tr.dense_relu.size());
  const bool dropout = !tr.masks.empty();
  const bool cnn = spec_.arch == Architecture::kCnn;
  // Walk the fully connected stack backwards.
  for (int l = dense_layers; l >= 0; --l) {
    Tensor dx;
    const bool need_dx = l > 0 || cnn;
    DenseBackward(tr.dense_in[l], grad, params_[pi], params_[pi + 1],
                  need_dx ? &dx : nullptr);
    if (!need_dx) break;
    pi -= 2;
    grad = std::move(dx);
    if (l == 0) break;  // CNN: gradient of the flattened conv features
    if (dropout) Multiply(grad, tr.masks[cnn ? l : l - 1]);
    kernels::ReluBackward(tr.dense_relu[l - 1].values(), grad.values());
  }
  if (!cnn) return loss;

  if (dropout) Multiply(grad, tr.masks[0]);
  const int batch = tr.batch;
  int length = spec_.ConvOutputLength();
  const int flat = length * spec_.conv_filters;
  Tensor dz({batch * length, spec_.conv_filters});
  for (int b = 0; b < batch; ++b) {
    std::copy_n(grad.data() + static_cast<std::size_t>(b) * grad.dim(1), flat,
                dz.data() + static_cast<std::size_t>(b) * flat);
  }
  pi = 2 * (spec_.conv_layers - 1);
  for (int l = spec_.conv_layers - 1; l >= 0; --l) {
    kernels::ReluBackward(tr.conv_out[l].values(), dz.values());
    Tensor dpatches;
    DenseBackward(tr.patches[l], dz, params_[pi], params_[pi + 1],
                  l > 0 ? &dpatches : nullptr);
    if (l == 0) break;
    const int channels = spec_.conv_filters;
    const int in_len = length + spec_.conv_extent - 1;
    Tensor dx({batch * in_len, channels});
    kernels::Col2Im(dpatches.values(), batch, in_len, channels,
                    spec_.conv_extent, dx.values());
    dz = std::move(dx);
    length = in_len;
    pi -= 2;
  }
  return loss;
}

std::vector<std::uint8_t> Network::ActivationPattern(
    const Tensor& inputs, const ForwardOptions& opts) const {
  const Trace tr = Run(inputs, opts);
  std::vector<std::uint8_t> pattern;
  for (const auto* group : {&tr.conv_out, &tr.dense_relu}) {
    for (const Tensor& t : *group) {
      for (double v : t.values()) pattern.push_back(v > 0.0 ? 1 : 0);
    }
  }
  return pattern;
}

std::vector<double> Network::Snapshot() const {
  std::vector<double> out;
  out.reserve(ParameterCount());
  for (const Parameter& p : params_) {
    out.insert(out.end(), p.value.begin(), p.value.end());
  }
  return out;
}

void Network::Restore(std::span<const double> values) {
  if (values.size() != ParameterCount()) {
    throw ContractError("snapshot size does not match the network");
  }
  std::size_t offset = 0;
  for (Parameter& p : params_) {
    std::copy_n(values.begin() + offset, p.value.size(), p.value.begin());
    offset += p.value.size();
  }
}

Tensor OneHot(std::span<const Action> targets) {
  Tensor t({static_cast<int>(targets.size()), 2});
  for (std::size_t i = 0; i < targets.size(); ++i) {
    t[2 * i + Index(targets[i])] = 1.0;
  }
  return t;
}

Tensor SoftmaxCrossEntropyGrad(const Tensor& probs, const Tensor& targets) {
  if (probs.shape() != targets.shape()) {
    throw ContractError("probabilities and targets differ in shape");
  }
  Tensor grad(probs.shape());
  const double inv = 1.0 / probs.dim(0);
  for (std::size_t i = 0; i < probs.size(); ++i) {
    grad[i] = (probs[i] - targets[i]) * inv;
  }
  return grad;
}

Tensor EncodeFor(const NetworkSpec& spec, const PredictionSample& sample,
                 const Game2x2& game) {
  spec.Validate();
  if (static_cast<int>(sample.history.size()) != spec.input.history) {
    throw ConfigError("sample history length " +
                      std::to_string(sample.history.size()) +
                      " does not match the network's " +
                      std::to_string(spec.input.history));
  }
  return Encode(sample, game, spec.input.encoding);
}

}  // namespace replay::neural

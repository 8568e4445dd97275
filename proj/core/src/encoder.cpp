#include "sentdoc/encoder.hpp"

#include <cmath>
#include <stdexcept>

namespace sentdoc {

namespace {

constexpr std::size_t kConvWidth = 2;
constexpr std::size_t kConv1Out = 128;
constexpr std::size_t kConv2Out = 256;
constexpr std::size_t kConv3Out = 256;
constexpr std::size_t kConv4Out = 256;
constexpr std::size_t kFc1Out = 1024;

void fill_uniform(NumArray& a, double lo, double hi, Rng& rng) {
  for (double& v : a.data) v = rng.uniform(lo, hi);
}

void fill_glorot(NumArray& a, std::size_t fan_in, std::size_t fan_out,
                 Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  fill_uniform(a, -bound, bound, rng);
}

/// He-uniform init for layers feeding a ReLU: variance 2/fan_in compensates
/// the half of the activation distribution the rectifier discards, keeping
/// activation scale roughly constant through the stack.
void fill_he(NumArray& a, std::size_t fan_in, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
  fill_uniform(a, -bound, bound, rng);
}

EncoderParams init_encoder(Rng& rng) {
  EncoderParams p;
  p.conv1_w = NumArray::zeros({kConv1Out, kConvWidth, kEmbedDim});
  p.conv1_b = NumArray::zeros({kConv1Out});
  p.conv2_w = NumArray::zeros({kConv2Out, kConvWidth, kConv1Out});
  p.conv2_b = NumArray::zeros({kConv2Out});
  p.conv3_w = NumArray::zeros({kConv3Out, kConvWidth, kConv2Out});
  p.conv3_b = NumArray::zeros({kConv3Out});
  p.conv4_w = NumArray::zeros({kConv4Out, kConvWidth, kConv3Out});
  p.conv4_b = NumArray::zeros({kConv4Out});
  p.fc1_w = NumArray::zeros({kFc1Out, kConv4Out});
  p.fc1_b = NumArray::zeros({kFc1Out});
  p.fc2_w = NumArray::zeros({kOutputDim, kFc1Out});
  p.fc2_b = NumArray::zeros({kOutputDim});

  // Conv fan_in counts the receptive field: w*C_in taps per output.
  // Every layer except the linear output feeds a ReLU, so He scaling keeps
  // the activation magnitude stable through the stack and the initial
  // similarity logits at order one; an under-scaled start leaves the
  // sentence-independent bias path dominant and training collapses the
  // candidate encoder toward a constant.
  fill_he(p.conv1_w, kConvWidth * kEmbedDim, rng);
  fill_he(p.conv2_w, kConvWidth * kConv1Out, rng);
  fill_he(p.conv3_w, kConvWidth * kConv2Out, rng);
  fill_he(p.conv4_w, kConvWidth * kConv3Out, rng);
  fill_he(p.fc1_w, kConv4Out, rng);
  fill_glorot(p.fc2_w, kFc1Out, kOutputDim, rng);
  return p;
}

ModelLeaves::EncoderLeaves register_encoder(Tape& tape,
                                            const EncoderParams& p) {
  ModelLeaves::EncoderLeaves l;
  l.conv1_w = tape.leaf(p.conv1_w);
  l.conv1_b = tape.leaf(p.conv1_b);
  l.conv2_w = tape.leaf(p.conv2_w);
  l.conv2_b = tape.leaf(p.conv2_b);
  l.conv3_w = tape.leaf(p.conv3_w);
  l.conv3_b = tape.leaf(p.conv3_b);
  l.conv4_w = tape.leaf(p.conv4_w);
  l.conv4_b = tape.leaf(p.conv4_b);
  l.fc1_w = tape.leaf(p.fc1_w);
  l.fc1_b = tape.leaf(p.fc1_b);
  l.fc2_w = tape.leaf(p.fc2_w);
  l.fc2_b = tape.leaf(p.fc2_b);
  return l;
}

void append_encoder_blocks(
    const std::string& prefix, EncoderParams& p,
    std::vector<std::pair<std::string, NumArray*>>& out) {
  out.emplace_back(prefix + ".conv1.w", &p.conv1_w);
  out.emplace_back(prefix + ".conv1.b", &p.conv1_b);
  out.emplace_back(prefix + ".conv2.w", &p.conv2_w);
  out.emplace_back(prefix + ".conv2.b", &p.conv2_b);
  out.emplace_back(prefix + ".conv3.w", &p.conv3_w);
  out.emplace_back(prefix + ".conv3.b", &p.conv3_b);
  out.emplace_back(prefix + ".conv4.w", &p.conv4_w);
  out.emplace_back(prefix + ".conv4.b", &p.conv4_b);
  out.emplace_back(prefix + ".fc1.w", &p.fc1_w);
  out.emplace_back(prefix + ".fc1.b", &p.fc1_b);
  out.emplace_back(prefix + ".fc2.w", &p.fc2_w);
  out.emplace_back(prefix + ".fc2.b", &p.fc2_b);
}

}  // namespace

ModelParams init_model(std::size_t vocab_size, Rng& rng) {
  if (vocab_size < 3)
    throw std::invalid_argument(
        "init_model: vocab_size must be >= 3 (PAD, UNK and one token)");
  ModelParams m;
  // Unit-scale word vectors; the He-scaled stack then propagates this
  // magnitude through to the sentence vectors.
  m.embedding = NumArray::zeros({vocab_size, kEmbedDim});
  fill_uniform(m.embedding, -0.5, 0.5, rng);
  m.cntx = init_encoder(rng);
  m.cdd = init_encoder(rng);
  return m;
}

ModelParams zero_model(std::size_t vocab_size) {
  if (vocab_size < 3)
    throw std::invalid_argument(
        "zero_model: vocab_size must be >= 3 (PAD, UNK and one token)");
  Rng rng(0);
  ModelParams m = init_model(vocab_size, rng);
  for (NumArray* block : param_blocks(m))
    for (double& v : block->data) v = 0.0;
  return m;
}

ModelLeaves register_model(Tape& tape, const ModelParams& model) {
  ModelLeaves l;
  l.embedding = tape.leaf(model.embedding);
  l.cntx = register_encoder(tape, model.cntx);
  l.cdd = register_encoder(tape, model.cdd);
  return l;
}

Tape::Var encode_on_tape(Tape& tape, const ModelLeaves& leaves, Which which,
                         const Sentence& sentence, RunMode mode, Rng& rng,
                         const EncoderOptions& options) {
  if (sentence.empty())
    throw std::invalid_argument("encode: sentence must be non-empty");
  Sentence padded = sentence;
  while (padded.size() < kMinEncoderInput) padded.push_back(kPadId);

  const ModelLeaves::EncoderLeaves& e =
      which == Which::cntx ? leaves.cntx : leaves.cdd;

  Tape::Var x = embedding_lookup(tape, leaves.embedding, padded);
  x = conv1d_valid(tape, x, e.conv1_w, e.conv1_b);
  if (!options.linear_convs) x = relu(tape, x);
  x = conv1d_valid(tape, x, e.conv2_w, e.conv2_b);
  if (!options.linear_convs) x = relu(tape, x);
  x = maxpool1d(tape, x);
  x = conv1d_valid(tape, x, e.conv3_w, e.conv3_b);
  if (!options.linear_convs) x = relu(tape, x);
  x = conv1d_valid(tape, x, e.conv4_w, e.conv4_b);
  if (!options.linear_convs) x = relu(tape, x);
  x = maxpool1d(tape, x);
  x = global_avg_pool(tape, x);
  x = dense(tape, x, e.fc1_w, e.fc1_b, Activation::relu);
  x = dense(tape, x, e.fc2_w, e.fc2_b, Activation::none);
  x = dropout(tape, x, options.dropout_rate, mode, rng);
  return x;
}

NumArray encode(const ModelParams& model, Which which, const Sentence& sentence,
                RunMode mode, Rng& rng, const EncoderOptions& options) {
  Tape tape;
  const ModelLeaves leaves = register_model(tape, model);
  const Tape::Var v =
      encode_on_tape(tape, leaves, which, sentence, mode, rng, options);
  return tape.value(v);
}

std::vector<NumArray> encode_batch(const ModelParams& model, Which which,
                                   const std::vector<Sentence>& sentences,
                                   RunMode mode, Rng& rng,
                                   const EncoderOptions& options) {
  std::vector<NumArray> out;
  out.reserve(sentences.size());
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    try {
      out.push_back(encode(model, which, sentences[i], mode, rng, options));
    } catch (const std::exception& e) {
      throw std::invalid_argument("encode_batch: sentence " +
                                  std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

std::vector<std::pair<std::string, NumArray*>> named_param_blocks(
    ModelParams& model) {
  std::vector<std::pair<std::string, NumArray*>> out;
  out.emplace_back("embedding", &model.embedding);
  append_encoder_blocks("cntx", model.cntx, out);
  append_encoder_blocks("cdd", model.cdd, out);
  return out;
}

std::vector<std::pair<std::string, const NumArray*>> named_param_blocks(
    const ModelParams& model) {
  std::vector<std::pair<std::string, const NumArray*>> out;
  for (auto& [name, block] :
       named_param_blocks(const_cast<ModelParams&>(model)))
    out.emplace_back(name, block);
  return out;
}

std::vector<NumArray*> param_blocks(ModelParams& model) {
  std::vector<NumArray*> out;
  for (auto& [name, block] : named_param_blocks(model)) out.push_back(block);
  return out;
}

std::vector<Tape::Var> leaf_list(const ModelLeaves& leaves) {
  auto enc = [](const ModelLeaves::EncoderLeaves& e,
                std::vector<Tape::Var>& out) {
    out.insert(out.end(),
               {e.conv1_w, e.conv1_b, e.conv2_w, e.conv2_b, e.conv3_w,
                e.conv3_b, e.conv4_w, e.conv4_b, e.fc1_w, e.fc1_b, e.fc2_w,
                e.fc2_b});
  };
  std::vector<Tape::Var> out;
  out.push_back(leaves.embedding);
  enc(leaves.cntx, out);
  enc(leaves.cdd, out);
  return out;
}

ModelLeaves model_leaves_from(const std::vector<Tape::Var>& vars) {
  if (vars.size() != 25)
    throw std::invalid_argument("model_leaves_from: expected 25 vars, got " +
                                std::to_string(vars.size()));
  auto enc = [&](std::size_t base) {
    ModelLeaves::EncoderLeaves e;
    e.conv1_w = vars[base + 0];
    e.conv1_b = vars[base + 1];
    e.conv2_w = vars[base + 2];
    e.conv2_b = vars[base + 3];
    e.conv3_w = vars[base + 4];
    e.conv3_b = vars[base + 5];
    e.conv4_w = vars[base + 6];
    e.conv4_b = vars[base + 7];
    e.fc1_w = vars[base + 8];
    e.fc1_b = vars[base + 9];
    e.fc2_w = vars[base + 10];
    e.fc2_b = vars[base + 11];
    return e;
  };
  ModelLeaves l;
  l.embedding = vars[0];
  l.cntx = enc(1);
  l.cdd = enc(13);
  return l;
}

}  // namespace sentdoc

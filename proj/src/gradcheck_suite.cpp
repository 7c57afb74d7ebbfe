#include "caranet/ara.hpp"
#include "caranet/gradcheck.hpp"
#include "caranet/loss.hpp"
#include "caranet/model.hpp"
#include "caranet/ops.hpp"
#include "caranet/rng.hpp"

namespace caranet {

namespace {

// A fixed positive weighting makes scalar reductions sensitive to every
// coordinate of the op output.
Tensor probe(const Tensor& y, std::uint64_t seed) {
  Rng rng(seed);
  Tensor w = rng.uniform_tensor(y.shape(), 0.5, 1.5);
  return sum(mul(y, w));
}

}  // namespace

std::vector<GradCheckResult> run_gradcheck_suite(std::uint64_t seed) {
  std::vector<GradCheckResult> results;
  Rng rng(seed);

  {
    Tensor x = rng.normal_tensor({2, 3, 8, 8}, 0.0, 1.0, true);
    Tensor w = rng.normal_tensor({4, 3, 3, 3}, 0.0, 0.4, true);
    Tensor b = rng.normal_tensor({4}, 0.0, 0.2, true);
    ConvSpec spec = ConvSpec::same(3, 3, 3, 4, 2);
    results.push_back(check_gradients(
        "conv2d", [&] { return probe(conv2d(x, w, b, spec), 1); }, {x, w, b}));
  }
  {
    Tensor x = rng.normal_tensor({1, 2, 6, 6}, 0.0, 1.0, true);
    Tensor wr = rng.normal_tensor({2, 2, 1, 3}, 0.0, 0.5, true);
    Tensor wc = rng.normal_tensor({2, 2, 3, 1}, 0.0, 0.5, true);
    ConvSpec spec = ConvSpec::same(1, 3, 2, 2);
    results.push_back(check_gradients(
        "asymmetric_conv", [&] { return probe(asymmetric_conv(x, wr, wc, spec), 2); },
        {x, wr, wc}));
  }
  {
    Tensor a = rng.normal_tensor({4, 5}, 0.0, 1.0, true);
    Tensor b = rng.normal_tensor({5, 3}, 0.0, 1.0, true);
    results.push_back(
        check_gradients("matmul", [&] { return probe(matmul(a, b), 3); }, {a, b}));
  }
  {
    Tensor x = rng.normal_tensor({2, 4, 5}, 0.0, 1.5, true);
    results.push_back(
        check_gradients("sigmoid", [&] { return probe(sigmoid(x), 4); }, {x}));
    results.push_back(
        check_gradients("softmax", [&] { return probe(softmax(x, 1), 5); }, {x}));
    results.push_back(check_gradients("relu", [&] { return probe(relu(x), 6); }, {x}));
  }
  {
    Tensor x = rng.normal_tensor({1, 2, 5, 4}, 0.0, 1.0, true);
    results.push_back(check_gradients(
        "bilinear_resize", [&] { return probe(bilinear_resize(x, 9, 7), 7); }, {x}));
  }
  {
    Tensor x = rng.normal_tensor({2, 2, 6, 6}, 0.0, 1.0, true);
    results.push_back(
        check_gradients("avg_pool", [&] { return probe(avg_pool(x, 3, 2, 1), 8); }, {x}));
  }
  {
    Tensor a = rng.normal_tensor({2, 5}, 0.0, 1.0, true);
    Tensor b = rng.normal_tensor({2, 5}, 0.0, 1.0, true);
    results.push_back(check_gradients(
        "elementwise_mul", [&] { return probe(mul(a, b), 9); }, {a, b}));
  }
  {
    Tensor q = rng.normal_tensor({1, 3, 6, 5}, 0.0, 0.7, true);
    Tensor k = rng.normal_tensor({1, 3, 6, 5}, 0.0, 0.7, true);
    Tensor v = rng.normal_tensor({1, 3, 6, 5}, 0.0, 0.7, true);
    results.push_back(check_gradients(
        "axial_attention_height",
        [&] { return probe(attention_1d(q, k, v, Axis1d::height), 10); }, {q, k, v}));
    results.push_back(check_gradients(
        "axial_attention_width",
        [&] { return probe(attention_1d(q, k, v, Axis1d::width), 11); }, {q, k, v}));
  }
  {
    Tensor side = rng.normal_tensor({1, 1, 5, 5}, 0.0, 1.0, true);
    Tensor feats = rng.normal_tensor({1, 3, 5, 5}, 0.0, 1.0, true);
    results.push_back(check_gradients(
        "reverse_and_combine",
        [&] { return probe(ara_combine(feats, reverse_gate(side)), 12); }, {side, feats}));
  }
  {
    Tensor logits = rng.normal_tensor({1, 1, 7, 7}, 0.0, 1.5, true);
    std::vector<double> mask(49, 0.0);
    for (int i = 0; i < 49; ++i) mask[static_cast<size_t>(i)] = rng.uniform() < 0.4 ? 1.0 : 0.0;
    Tensor target = Tensor::from_values({1, 1, 7, 7}, mask);
    Tensor weights = pixel_weights(target, 5, 5.0);
    results.push_back(check_gradients(
        "weighted_bce", [&] { return weighted_bce(logits, target, weights); }, {logits}));
    results.push_back(check_gradients(
        "weighted_iou", [&] { return weighted_iou(logits, target, weights); }, {logits}));
  }
  {
    // Full network on a 3x32x32 input against the deep-supervision loss.
    CaraNet model(ModelConfig::tiny(seed));
    // Zero-initialised biases park dead blocks exactly on the ReLU kink,
    // where central differences are undefined. Check at a generic point.
    Rng bias_rng(seed + 9);
    for (ParamStore::Entry& e : model.params().entries()) {
      if (e.name.ends_with(".b")) {
        for (double& v : e.tensor.leaf_values()) v = bias_rng.normal(0.0, 0.05);
      }
    }
    Rng data_rng(seed + 100);
    Tensor image = data_rng.uniform_tensor({1, 3, 32, 32});
    std::vector<double> mask(32 * 32, 0.0);
    for (int y = 10; y < 22; ++y) {
      for (int x = 8; x < 26; ++x) mask[static_cast<size_t>(y) * 32 + x] = 1.0;
    }
    Tensor target = Tensor::from_values({1, 1, 32, 32}, mask);
    auto forward = [&] {
      ModelOutputs out = model.forward(image);
      return total_loss(target, out.global_map, out.s5, out.s4, out.s3).total;
    };
    std::vector<Tensor> leaves;
    for (const ParamStore::Entry& e : model.params().entries()) leaves.push_back(e.tensor);
    GradCheckResult full =
        check_gradients("full_model", forward, leaves, 1e-3, /*samples_per_leaf=*/3);
    results.push_back(full);
  }

  return results;
}

}  // namespace caranet

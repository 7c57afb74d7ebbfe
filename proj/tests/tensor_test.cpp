#include <cmath>
#include <vector>

#include "caranet/gradcheck.hpp"
#include "caranet/ops.hpp"
#include "caranet/rng.hpp"
#include "caranet/tensor.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace caranet;

TEST_CASE("conv2d with a unit 1x1 kernel is the identity") {
  Rng rng(11);
  Tensor x = rng.uniform_tensor({2, 1, 5, 7}, -1.0, 1.0);
  ConvSpec spec = ConvSpec::same(1, 1, 1, 1);
  Tensor w = Tensor::from_values({1, 1, 1, 1}, {1.0});
  Tensor y = conv2d(x, w, spec);
  CHECK(testutil::bitwise_equal(x, y));
}

TEST_CASE("conv2d dilation 2 spreads an impulse over a 5x5 neighborhood") {
  Tensor x = Tensor::zeros({1, 1, 11, 11});
  {
    Tensor tmp = Tensor::zeros({1, 1, 11, 11});
    tmp.leaf_values()[5 * 11 + 5] = 1.0;
    x = tmp;
  }
  ConvSpec spec = ConvSpec::same(3, 3, 1, 1, /*dilation=*/2);
  Tensor w = Tensor::full({1, 1, 3, 3}, 1.0);
  Tensor y = conv2d(x, w, spec);
  // Effective extent (3 - 1) * 2 + 1 = 5 per axis.
  for (int iy = 0; iy < 11; ++iy) {
    for (int ix = 0; ix < 11; ++ix) {
      bool inside = std::abs(iy - 5) <= 2 && std::abs(ix - 5) <= 2;
      if (!inside) CHECK(y[iy * 11 + ix] == 0.0);
    }
  }
  // All nine taps land inside the 5x5 box around the impulse.
  double mass = 0.0;
  for (int iy = 3; iy <= 7; ++iy) {
    for (int ix = 3; ix <= 7; ++ix) mass += y[iy * 11 + ix];
  }
  CHECK(mass == doctest::Approx(9.0));
}

TEST_CASE("conv2d gradients match finite differences") {
  Rng rng(42);
  Tensor x = rng.normal_tensor({2, 3, 8, 8}, 0.0, 1.0, /*requires_grad=*/true);
  Tensor w = rng.normal_tensor({4, 3, 3, 3}, 0.0, 0.4, /*requires_grad=*/true);
  Tensor b = rng.normal_tensor({4}, 0.0, 0.2, /*requires_grad=*/true);
  ConvSpec spec = ConvSpec::same(3, 3, 3, 4);
  auto forward = [&] { return sum(conv2d(x, w, b, spec)); };
  CHECK(max_relative_grad_error(forward, {x, w, b}, 12) < 1e-4);

  SUBCASE("strided variant") {
    ConvSpec strided = ConvSpec::same(3, 3, 3, 4, 1, /*stride=*/2);
    auto fwd = [&] { return sum(conv2d(x, w, strided)); };
    CHECK(max_relative_grad_error(fwd, {x, w}, 12) < 1e-4);
  }
  SUBCASE("dilated variant") {
    ConvSpec dilated = ConvSpec::same(3, 3, 3, 4, /*dilation=*/2);
    auto fwd = [&] { return sum(conv2d(x, w, dilated)); };
    CHECK(max_relative_grad_error(fwd, {x, w}, 12) < 1e-4);
  }
}

TEST_CASE("conv2d rejects mismatched shapes with an axis message") {
  Tensor x = Tensor::zeros({1, 2, 4, 4});
  Tensor w = Tensor::zeros({1, 3, 1, 1});
  ConvSpec spec = ConvSpec::same(1, 1, 3, 1);
  CHECK_THROWS_WITH_AS(conv2d(x, w, spec), doctest::Contains("channel"), ShapeError);
}

TEST_CASE("asymmetric_conv with unit 1x1 kernels is the identity") {
  Rng rng(3);
  Tensor x = rng.uniform_tensor({1, 1, 4, 6}, -2.0, 2.0);
  Tensor w_row = Tensor::from_values({1, 1, 1, 1}, {1.0});
  Tensor w_col = Tensor::from_values({1, 1, 1, 1}, {1.0});
  ConvSpec spec = ConvSpec::same(1, 1, 1, 1);
  Tensor y = asymmetric_conv(x, w_row, w_col, spec);
  CHECK(testutil::bitwise_equal(x, y));
}

TEST_CASE("asymmetric pair equals a full conv with the separable kernel") {
  // Kernel w = u v^T applied per channel pair: the row stage carries the
  // channel mixing, the column stage is diagonal.
  Rng rng(17);
  const int ci = 3, co = 2, k = 3;
  std::vector<double> u(k), v(k);
  for (int i = 0; i < k; ++i) {
    u[i] = rng.normal();
    v[i] = rng.normal();
  }
  std::vector<double> mix(static_cast<size_t>(co) * ci);
  for (double& m : mix) m = rng.normal();

  std::vector<double> w_full(static_cast<size_t>(co) * ci * k * k);
  std::vector<double> w_row(static_cast<size_t>(co) * ci * k);
  std::vector<double> w_col(static_cast<size_t>(co) * co * k, 0.0);
  for (int o = 0; o < co; ++o) {
    for (int i = 0; i < ci; ++i) {
      for (int a = 0; a < k; ++a) {
        w_row[(static_cast<size_t>(o) * ci + i) * k + a] = mix[static_cast<size_t>(o) * ci + i] * v[a];
        for (int b = 0; b < k; ++b) {
          w_full[((static_cast<size_t>(o) * ci + i) * k + a) * k + b] =
              mix[static_cast<size_t>(o) * ci + i] * u[a] * v[b];
        }
      }
    }
    for (int a = 0; a < k; ++a) w_col[(static_cast<size_t>(o) * co + o) * k + a] = u[a];
  }

  Tensor x = rng.normal_tensor({2, ci, 7, 7});
  Tensor full = conv2d(x, Tensor::from_values({co, ci, k, k}, w_full), ConvSpec::same(k, k, ci, co));
  Tensor split = asymmetric_conv(x, Tensor::from_values({co, ci, 1, k}, w_row),
                                 Tensor::from_values({co, co, k, 1}, w_col),
                                 ConvSpec::same(1, k, ci, co));
  CHECK(testutil::max_abs_diff(full, split) < 1e-12);
}

TEST_CASE("asymmetric_conv gradients match finite differences") {
  Rng rng(5);
  Tensor x = rng.normal_tensor({1, 2, 6, 6}, 0.0, 1.0, true);
  Tensor w_row = rng.normal_tensor({2, 2, 1, 3}, 0.0, 0.5, true);
  Tensor w_col = rng.normal_tensor({2, 2, 3, 1}, 0.0, 0.5, true);
  ConvSpec spec = ConvSpec::same(1, 3, 2, 2);
  auto forward = [&] { return sum(asymmetric_conv(x, w_row, w_col, spec)); };
  CHECK(max_relative_grad_error(forward, {x, w_row, w_col}, 10) < 1e-4);
}

TEST_CASE("matmul basics") {
  Rng rng(9);
  Tensor a = rng.normal_tensor({3, 3});
  std::vector<double> eye(9, 0.0);
  eye[0] = eye[4] = eye[8] = 1.0;
  Tensor identity = Tensor::from_values({3, 3}, eye);
  CHECK(testutil::max_abs_diff(matmul(a, identity), a) == 0.0);

  Tensor ones = Tensor::full({2, 2}, 1.0);
  Tensor twos = matmul(ones, ones);
  for (int i = 0; i < 4; ++i) CHECK(twos[i] == 2.0);

  Tensor p = rng.normal_tensor({4, 5}, 0.0, 1.0, true);
  Tensor q = rng.normal_tensor({5, 3}, 0.0, 1.0, true);
  auto forward = [&] { return sum(matmul(p, q)); };
  CHECK(max_relative_grad_error(forward, {p, q}, 10) < 1e-4);

  Tensor bad = rng.normal_tensor({4, 4});
  CHECK_THROWS_AS((void)matmul(p, bad), ShapeError);
}

TEST_CASE("activation values and gradients") {
  CHECK(sigmoid(Tensor::scalar(0.0))[0] == 0.5);

  Tensor flat = Tensor::full({5}, 3.25);
  Tensor sm = softmax(flat, 0);
  for (int i = 0; i < 5; ++i) CHECK(sm[i] == doctest::Approx(0.2).epsilon(1e-12));

  Rng rng(23);
  Tensor x = rng.normal_tensor({2, 3, 4}, 0.0, 1.5, true);
  auto weighted = [&](const Tensor& y) {
    // A fixed random weighting makes the scalar sensitive to every entry.
    Rng wrng(77);
    Tensor w = wrng.uniform_tensor(y.shape(), 0.5, 1.5);
    return sum(mul(y, w));
  };
  CHECK(max_relative_grad_error([&] { return weighted(sigmoid(x)); }, {x}, 16) < 1e-4);
  CHECK(max_relative_grad_error([&] { return weighted(softmax(x, 1)); }, {x}, 16) < 1e-4);
  CHECK(max_relative_grad_error([&] { return weighted(relu(x)); }, {x}, 16) < 1e-4);

  CHECK_THROWS_AS((void)softmax(x, 3), ShapeError);
}

TEST_CASE("sigmoid stays inside (0, 1) over the representable range") {
  for (double v = -36.0; v <= 36.0; v += 0.75) {
    double s = sigmoid(Tensor::scalar(v))[0];
    CHECK(s > 0.0);
    CHECK(s < 1.0);
  }
}

TEST_CASE("softmax slices sum to one") {
  Rng rng(31);
  Tensor x = rng.normal_tensor({4, 6, 3}, 0.0, 4.0);
  Tensor sm = softmax(x, 1);
  for (int outer = 0; outer < 4; ++outer) {
    for (int inner = 0; inner < 3; ++inner) {
      double total = 0.0;
      for (int k = 0; k < 6; ++k) total += sm[(outer * 6 + k) * 3 + inner];
      CHECK(std::abs(total - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("bilinear_resize identity and constant expansion") {
  Rng rng(13);
  Tensor x = rng.uniform_tensor({1, 2, 3, 5});
  CHECK(testutil::bitwise_equal(bilinear_resize(x, 3, 5), x));

  Tensor point = Tensor::full({1, 1, 1, 1}, 2.5);
  Tensor expanded = bilinear_resize(point, 4, 4);
  for (int i = 0; i < 16; ++i) CHECK(expanded[i] == 2.5);

  CHECK_THROWS_AS((void)bilinear_resize(x, 0, 4), ShapeError);
}

namespace {

// Independent half-pixel interpolation, written directly from the sampling
// formula rather than through the library's tap tables.
double oracle_bilinear_at(const std::vector<double>& img, int h, int w, int out_h, int out_w,
                          int oy, int ox) {
  auto sample = [&](int y, int x) {
    y = std::max(0, std::min(h - 1, y));
    x = std::max(0, std::min(w - 1, x));
    return img[static_cast<size_t>(y) * w + x];
  };
  double sy = (oy + 0.5) * (static_cast<double>(h) / out_h) - 0.5;
  double sx = (ox + 0.5) * (static_cast<double>(w) / out_w) - 0.5;
  int y0 = static_cast<int>(std::floor(sy));
  int x0 = static_cast<int>(std::floor(sx));
  double ty = sy - y0;
  double tx = sx - x0;
  double top = (1 - tx) * sample(y0, x0) + tx * sample(y0, x0 + 1);
  double bot = (1 - tx) * sample(y0 + 1, x0) + tx * sample(y0 + 1, x0 + 1);
  return (1 - ty) * top + ty * bot;
}

}  // namespace

TEST_CASE("bilinear_resize matches the direct interpolation formula") {
  std::vector<double> img{0.0, 1.0, 2.0, 3.0};
  Tensor x = Tensor::from_values({1, 1, 2, 2}, img);
  Tensor y = bilinear_resize(x, 4, 4);
  for (int oy = 0; oy < 4; ++oy) {
    for (int ox = 0; ox < 4; ++ox) {
      double want = oracle_bilinear_at(img, 2, 2, 4, 4, oy, ox);
      CHECK(std::abs(y[oy * 4 + ox] - want) < 1e-12);
    }
  }

  Rng rng(19);
  std::vector<double> big = rng.normal_vector(5 * 7, 0.0, 1.0);
  Tensor bx = Tensor::from_values({1, 1, 5, 7}, big);
  Tensor by = bilinear_resize(bx, 11, 4);
  for (int oy = 0; oy < 11; ++oy) {
    for (int ox = 0; ox < 4; ++ox) {
      CHECK(std::abs(by[oy * 4 + ox] - oracle_bilinear_at(big, 5, 7, 11, 4, oy, ox)) < 1e-12);
    }
  }
}

TEST_CASE("bilinear_resize gradients match finite differences") {
  Rng rng(29);
  Tensor x = rng.normal_tensor({1, 2, 5, 4}, 0.0, 1.0, true);
  auto up = [&] { return sum(bilinear_resize(x, 9, 7)); };
  auto down = [&] { return sum(bilinear_resize(x, 3, 2)); };
  CHECK(max_relative_grad_error(up, {x}, 12) < 1e-4);
  CHECK(max_relative_grad_error(down, {x}, 12) < 1e-4);
}

TEST_CASE("pooling basics") {
  Tensor c = Tensor::full({1, 1, 6, 6}, 4.0);
  Tensor avg = avg_pool(c, 2, 2, 0);
  CHECK(avg.shape() == Shape{1, 1, 3, 3});
  for (std::int64_t i = 0; i < avg.size(); ++i) CHECK(avg[i] == 4.0);

  Tensor imp = Tensor::zeros({1, 1, 4, 4});
  imp.leaf_values()[5] = 3.0;  // row 1, col 1
  Tensor mx = max_pool(imp, 2, 2, 0);
  CHECK(mx[0] == 3.0);
  CHECK(mx[1] == 0.0);
  CHECK(mx[2] == 0.0);
  CHECK(mx[3] == 0.0);

  CHECK_THROWS_AS((void)avg_pool(imp, 9, 1, 0), ShapeError);
}

TEST_CASE("avg_pool gradients match finite differences") {
  Rng rng(37);
  Tensor x = rng.normal_tensor({2, 2, 6, 6}, 0.0, 1.0, true);
  auto fwd = [&] { return sum(avg_pool(x, 3, 2, 1)); };
  CHECK(max_relative_grad_error(fwd, {x}, 12) < 1e-4);
  // Same-size boundary-weight pooling used by the loss weighting.
  auto same = [&] { return sum(avg_pool(x, 5, 1, 2)); };
  CHECK(max_relative_grad_error(same, {x}, 12) < 1e-4);
}

TEST_CASE("elementwise ops") {
  Rng rng(41);
  Tensor x = rng.normal_tensor({3, 4});
  CHECK(testutil::max_abs_diff(mul(x, Tensor::full({3, 4}, 1.0)), x) == 0.0);
  Tensor zeroed = mul(x, Tensor::zeros({3, 4}));
  for (std::int64_t i = 0; i < zeroed.size(); ++i) CHECK(zeroed[i] == 0.0);

  CHECK_THROWS_AS((void)add(x, Tensor::zeros({4, 3})), ShapeError);
  CHECK(testutil::bitwise_equal(elementwise(x, Tensor::full({3, 4}, 1.0), ElemOp::mul), x));

  Tensor a = rng.normal_tensor({2, 5}, 0.0, 1.0, true);
  Tensor b = rng.normal_tensor({2, 5}, 0.0, 1.0, true);
  auto fwd = [&] { return sum(mul(a, b)); };
  CHECK(max_relative_grad_error(fwd, {a, b}, 10) < 1e-4);
}

TEST_CASE("backward on simple graphs") {
  Rng rng(43);
  Tensor x = rng.normal_tensor({6}, 0.0, 1.0, true);

  sum(x).backward();
  for (double g : x.grad()) CHECK(g == 1.0);
  x.zero_grad();

  sum(mul(x, x)).backward();
  for (int i = 0; i < 6; ++i) CHECK(x.grad()[static_cast<size_t>(i)] == doctest::Approx(2.0 * x[i]).epsilon(1e-12));

  SUBCASE("gradients accumulate until zeroed") {
    std::vector<double> once = x.grad();
    sum(mul(x, x)).backward();
    for (int i = 0; i < 6; ++i) {
      CHECK(x.grad()[static_cast<size_t>(i)] == doctest::Approx(2.0 * once[static_cast<size_t>(i)]));
    }
    x.zero_grad();
    for (double g : x.grad()) CHECK(g == 0.0);
  }

  SUBCASE("non-scalar and detached losses are rejected") {
    CHECK_THROWS_AS(mul(x, x).backward(), ShapeError);
    Tensor free = rng.normal_tensor({3});
    CHECK_THROWS_AS(sum(free).backward(), std::logic_error);
  }
}

TEST_CASE("same seed reproduces bitwise-identical tensors") {
  Rng a(123456), b(123456);
  Tensor ta = a.normal_tensor({4, 4, 3, 3});
  Tensor tb = b.normal_tensor({4, 4, 3, 3});
  CHECK(testutil::bitwise_equal(ta, tb));
  Tensor ua = a.uniform_tensor({17});
  Tensor ub = b.uniform_tensor({17});
  CHECK(testutil::bitwise_equal(ua, ub));
}

TEST_CASE("channel plumbing ops") {
  Rng rng(53);
  Tensor a = rng.normal_tensor({2, 2, 3, 3}, 0.0, 1.0, true);
  Tensor b = rng.normal_tensor({2, 3, 3, 3}, 0.0, 1.0, true);
  Tensor cat = concat_channels({a, b});
  CHECK(cat.shape() == Shape{2, 5, 3, 3});
  CHECK(testutil::max_abs_diff(slice_channels(cat, 0, 2), a) == 0.0);
  CHECK(testutil::max_abs_diff(slice_channels(cat, 2, 5), b) == 0.0);

  auto fwd = [&] { return sum(mul(concat_channels({a, b}), concat_channels({a, b}))); };
  CHECK(max_relative_grad_error(fwd, {a, b}, 10) < 1e-4);

  Tensor r = rng.normal_tensor({1, 1, 2, 2}, 0.0, 1.0, true);
  Tensor rep = repeat_channels(r, 3);
  CHECK(rep.shape() == Shape{1, 3, 2, 2});
  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < 4; ++i) CHECK(rep[c * 4 + i] == r[i]);
  }
  auto rfwd = [&] {
    Rng wrng(99);
    Tensor w = wrng.uniform_tensor({1, 3, 2, 2}, 0.5, 1.5);
    return sum(mul(repeat_channels(r, 3), w));
  };
  CHECK(max_relative_grad_error(rfwd, {r}, 4) < 1e-4);
}

#include "caranet/partial_decoder.hpp"

namespace caranet {

PartialDecoder::PartialDecoder(ParamStore& store, const std::string& name, int c3, int c4,
                               int c5, int width)
    : width_(width),
      reduce3_(ConvLayer::make(store, name + ".r3", c3, width, 1)),
      reduce4_(ConvLayer::make(store, name + ".r4", c4, width, 1)),
      reduce5_(ConvLayer::make(store, name + ".r5", c5, width, 1)),
      fuse1_(ConvLayer::make(store, name + ".f1", 3 * width, width, 3)),
      fuse2_(ConvLayer::make(store, name + ".f2", width, width, 3)),
      head_(ConvLayer::make(store, name + ".head", width, 1, 1, 1, 1, /*relu_after=*/false)) {}

Tensor PartialDecoder::decode(const Tensor& f3, const Tensor& f4, const Tensor& f5) const {
  int h3 = f3.height(), w3 = f3.width();
  if (f4.height() * 2 != h3 || f4.width() * 2 != w3) {
    throw ShapeError("partial decoder: f4 " + shape_string(f4.shape()) +
                     " is not at half of f3 " + shape_string(f3.shape()));
  }
  if (f5.height() * 4 != h3 || f5.width() * 4 != w3) {
    throw ShapeError("partial decoder: f5 " + shape_string(f5.shape()) +
                     " is not at a quarter of f3 " + shape_string(f3.shape()));
  }

  Tensor r3 = reduce3_(f3);
  Tensor r4 = reduce4_(f4);
  Tensor r5 = reduce5_(f5);

  // Coarse evidence gates the finer branches multiplicatively.
  Tensor b5 = r5;
  Tensor b4 = mul(r4, bilinear_resize(r5, f4.height(), f4.width()));
  Tensor b3 = mul(mul(r3, bilinear_resize(r4, h3, w3)), bilinear_resize(r5, h3, w3));

  Tensor merged = concat_channels(
      {b3, bilinear_resize(b4, h3, w3), bilinear_resize(b5, h3, w3)});
  return head_(fuse2_(fuse1_(merged)));
}

}  // namespace caranet

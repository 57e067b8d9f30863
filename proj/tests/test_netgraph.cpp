#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "test_util.hpp"
#include "ufcnn/checkpoint.hpp"
#include "ufcnn/network.hpp"

using namespace ufcnn;
using testutil::random_tensor;

namespace {

NetworkConfig make_config(Variant variant, int levels, int filters, int kernel,
                          int in_ch = 1, int out_ch = 2) {
  NetworkConfig cfg;
  cfg.variant = variant;
  cfg.levels = levels;
  cfg.filters = filters;
  cfg.kernel_len = kernel;
  cfg.in_channels = in_ch;
  cfg.out_channels = out_ch;
  return cfg;
}

}  // namespace

TEST_CASE("ufcnn dilations double per level; output layer is 1x1") {
  Network net = build_network(make_config(Variant::Ufcnn, 3, 4, 5), 1);
  CHECK(net.encoder_layer(1).dilation == 1);
  CHECK(net.encoder_layer(2).dilation == 2);
  CHECK(net.encoder_layer(3).dilation == 4);
  CHECK(net.decoder_layer(3).dilation == 4);
  CHECK(net.decoder_layer(2).dilation == 2);
  CHECK(net.decoder_layer(1).dilation == 1);
  CHECK(net.output_layer().dilation == 1);
  CHECK(net.output_layer().kernel_len == 1);
  // channel wiring: skip levels consume 2F channels
  CHECK(net.decoder_layer(3).in_channels == 4);
  CHECK(net.decoder_layer(2).in_channels == 8);
  CHECK(net.decoder_layer(1).in_channels == 8);

  Network fcn = build_network(make_config(Variant::Fcn, 3, 4, 5), 1);
  for (int l = 1; l <= 3; ++l) {
    CHECK(fcn.encoder_layer(l).dilation == 1);
    CHECK(fcn.decoder_layer(l).dilation == 1);
  }
}

TEST_CASE("build is deterministic for a fixed seed and biases start at zero") {
  NetworkConfig cfg = make_config(Variant::Ufcnn, 2, 3, 2);
  Network a = build_network(cfg, 99);
  Network b = build_network(cfg, 99);
  auto ra = a.layers();
  auto rb = b.layers();
  REQUIRE(ra.size() == rb.size());
  for (size_t i = 0; i < ra.size(); ++i) {
    CHECK(ra[i].layer->weights == rb[i].layer->weights);
    for (double v : ra[i].layer->bias) CHECK(v == 0.0);
  }
  Network c = build_network(cfg, 100);
  CHECK(c.encoder_layer(1).weights != a.encoder_layer(1).weights);
}

TEST_CASE("initializer variance is about 2/(fan_in * K)") {
  Network net = build_network(make_config(Variant::Ufcnn, 2, 100, 5, 100), 5);
  const ConvLayer& layer = net.encoder_layer(2);  // 100 -> 100, K=5
  double sum = 0, sumsq = 0;
  for (double w : layer.weights) {
    sum += w;
    sumsq += w * w;
  }
  const double n = double(layer.weights.size());
  const double var = sumsq / n - (sum / n) * (sum / n);
  const double expected = 2.0 / (100.0 * 5.0);
  CHECK(std::fabs(var - expected) / expected < 0.10);
}

TEST_CASE("all-zero parameters produce all-zero output") {
  for (Variant variant : {Variant::Ufcnn, Variant::Fcn}) {
    Network net = build_network(make_config(variant, 2, 3, 3), 1);
    for (auto& ref : net.layers())
      std::fill(ref.layer->weights.begin(), ref.layer->weights.end(), 0.0);
    Rng rng(2);
    SeqTensor y = net.forward(random_tensor(1, 20, rng));
    for (double v : y.data) CHECK(v == 0.0);
  }
}

TEST_CASE("output length equals input length for both variants") {
  Rng rng(5);
  for (Variant variant : {Variant::Ufcnn, Variant::Fcn}) {
    for (int levels : {1, 2, 3}) {
      for (int length : {7, 64, 5000}) {
        Network net = build_network(make_config(variant, levels, 3, 5), 7);
        SeqTensor x = random_tensor(1, length, rng);
        SeqTensor y = net.forward(x);
        CHECK(y.length == length);
        CHECK(y.channels == 2);
        for (double v : y.data) CHECK(std::isfinite(v));
      }
    }
  }
}

TEST_CASE("level-1 network with 1x1 kernels reduces to a hand-computable chain") {
  NetworkConfig cfg = make_config(Variant::Ufcnn, 1, 1, 1, 1, 1);
  Network net = build_network(cfg, 1);
  net.encoder_layer(1).w(0, 0, 0) = 2.0;
  net.decoder_layer(1).w(0, 0, 0) = 3.0;
  net.output_layer().w(0, 0, 0) = 4.0;
  for (auto& ref : net.layers()) std::fill(ref.layer->bias.begin(), ref.layer->bias.end(), 0.0);
  SeqTensor x = SeqTensor::from_rows({{1, -1, 0.5}});
  SeqTensor y = net.forward(x);
  // relu(3 * relu(2x)) * 4: negative inputs are clipped at the first stage
  CHECK(y.at(0, 0) == 24.0);
  CHECK(y.at(0, 1) == 0.0);
  CHECK(y.at(0, 2) == 12.0);
}

TEST_CASE("forward validates input shape, pooling depth, and dilation schedule") {
  Network net = build_network(make_config(Variant::Ufcnn, 1, 2, 2, 2), 1);
  SeqTensor wrong(1, 10);
  CHECK_THROWS_AS(net.forward(wrong), ConfigError);

  Network fcn = build_network(make_config(Variant::Fcn, 4, 2, 2), 1);
  SeqTensor shorty(1, 7);  // needs at least 2^(L-1) = 8
  CHECK_THROWS_AS(fcn.forward(shorty), ConfigError);

  // a hand-mangled dilation (not the power-of-two schedule) is rejected
  Network mangled = build_network(make_config(Variant::Ufcnn, 2, 2, 2), 1);
  mangled.encoder_layer(2).dilation = 3;
  SeqTensor x(1, 16);
  CHECK_THROWS_AS(mangled.forward(x), ConfigError);
}

TEST_CASE("backward requires a forward pass and accumulates") {
  Network net = build_network(make_config(Variant::Ufcnn, 2, 3, 2), 3);
  SeqTensor dy(2, 10);
  CHECK_THROWS_AS(net.backward(dy), StateError);

  Rng rng(4);
  SeqTensor x = random_tensor(1, 10, rng);
  net.forward(x);

  SeqTensor zero(2, 10);
  net.zero_grad();
  net.backward(zero);
  for (auto& ref : net.layers()) {
    for (double g : ref.layer->grad_weights) CHECK(g == 0.0);
    for (double g : ref.layer->grad_bias) CHECK(g == 0.0);
  }

  // a second backward adds exactly the same terms, so grads double exactly
  SeqTensor up = random_tensor(2, 10, rng);
  net.zero_grad();
  net.backward(up);
  std::vector<std::vector<double>> grads_once;
  for (auto& ref : net.layers()) {
    grads_once.push_back(ref.layer->grad_weights);
    grads_once.push_back(ref.layer->grad_bias);
  }
  net.backward(up);
  size_t idx = 0;
  for (auto& ref : net.layers()) {
    for (size_t i = 0; i < ref.layer->grad_weights.size(); ++i)
      CHECK(ref.layer->grad_weights[i] == 2.0 * grads_once[idx][i]);
    ++idx;
    for (size_t i = 0; i < ref.layer->grad_bias.size(); ++i)
      CHECK(ref.layer->grad_bias[i] == 2.0 * grads_once[idx][i]);
    ++idx;
  }
}

TEST_CASE("causality: a perturbation never affects earlier outputs") {
  Rng rng(17);
  for (Variant variant : {Variant::Ufcnn, Variant::Fcn}) {
    for (int levels : {1, 2, 3}) {
      Network net = build_network(make_config(variant, levels, 3, 3), 23 + levels);
      const int length = 40;
      SeqTensor x = random_tensor(1, length, rng);
      SeqTensor base = net.forward(x);
      const int t0 = 9 + levels;
      SeqTensor x2 = x;
      x2.at(0, t0) += 1.0;
      SeqTensor bumped = net.forward(x2);
      bool any_later_change = false;
      for (int t = 0; t < length; ++t) {
        for (int c = 0; c < base.channels; ++c) {
          if (t < t0) {
            CHECK(bumped.at(c, t) == base.at(c, t));
          } else if (bumped.at(c, t) != base.at(c, t)) {
            any_later_change = true;
          }
        }
      }
      CHECK(any_later_change);
    }
  }
}

TEST_CASE("shift equivariance holds exactly for ufcnn and fails for fcn") {
  const int levels = 2;
  const int kernel = 5;
  NetworkConfig cfg = make_config(Variant::Ufcnn, levels, 3, kernel);
  const long long rf = receptive_field(cfg);
  const int length = 90;

  for (uint64_t seed : {21ull, 22ull}) {
    Network net = build_network(cfg, seed);
    Rng rng(seed);
    SeqTensor x = random_tensor(1, length, rng);
    SeqTensor y = net.forward(x);
    for (int shift : {1, 2, 7}) {
      SeqTensor xs(1, length);
      for (int t = shift; t < length; ++t) xs.at(0, t) = x.at(0, t - shift);
      SeqTensor ys = net.forward(xs);
      for (int t = int(shift + rf); t < length; ++t)
        for (int c = 0; c < y.channels; ++c)
          CHECK(ys.at(c, t) == y.at(c, t - shift));
    }
  }

  // decimation makes the fcn translation variant: some (seed, shift) breaks it
  bool fcn_fails = false;
  NetworkConfig fcfg = make_config(Variant::Fcn, levels, 3, kernel);
  for (uint64_t seed = 1; seed <= 4 && !fcn_fails; ++seed) {
    Network net = build_network(fcfg, seed);
    Rng rng(seed + 100);
    SeqTensor x = random_tensor(1, length, rng);
    SeqTensor y = net.forward(x);
    for (int shift : {1, 3}) {
      SeqTensor xs(1, length);
      for (int t = shift; t < length; ++t) xs.at(0, t) = x.at(0, t - shift);
      SeqTensor ys = net.forward(xs);
      for (int t = int(shift + rf); t < length && !fcn_fails; ++t)
        for (int c = 0; c < y.channels; ++c)
          if (ys.at(c, t) != y.at(c, t - shift)) fcn_fails = true;
    }
  }
  CHECK(fcn_fails);
}

TEST_CASE("level-1 fcn and ufcnn are the same network bit for bit") {
  NetworkConfig ucfg = make_config(Variant::Ufcnn, 1, 4, 5);
  NetworkConfig fcfg = make_config(Variant::Fcn, 1, 4, 5);
  Network a = build_network(ucfg, 31);
  Network b = build_network(fcfg, 31);
  Rng rng(32);
  SeqTensor x = random_tensor(1, 50, rng);
  SeqTensor ya = a.forward(x);
  SeqTensor yb = b.forward(x);
  CHECK(ya.data == yb.data);
}

TEST_CASE("receptive field law") {
  CHECK(receptive_field(make_config(Variant::Ufcnn, 1, 8, 5)) == 9);
  CHECK(receptive_field(make_config(Variant::Ufcnn, 2, 8, 5)) == 25);
  CHECK(receptive_field(make_config(Variant::Ufcnn, 3, 8, 5)) == 57);
  CHECK(receptive_field(make_config(Variant::Ufcnn, 4, 8, 5)) == 121);
  for (int levels : {1, 2, 5}) {
    CHECK(receptive_field(make_config(Variant::Ufcnn, levels, 8, 1)) == 1);
  }
  CHECK_THROWS_AS(receptive_field(make_config(Variant::Fcn, 2, 8, 5)), ConfigError);

  // independent route: sum the spans of the built network's own layers
  for (int levels : {1, 2, 3, 4}) {
    NetworkConfig cfg = make_config(Variant::Ufcnn, levels, 3, 5);
    Network net = build_network(cfg, 1);
    long long span = 0;
    for (const auto& ref : net.layers())
      span += (long long)(ref.layer->kernel_len - 1) * ref.layer->dilation;
    CHECK(receptive_field(cfg) == 1 + span);
  }
}

TEST_CASE("parameters grow affinely in levels while memory doubles") {
  long long counts[7] = {0};
  long long rf[7] = {0};
  for (int levels = 1; levels <= 6; ++levels) {
    NetworkConfig cfg = make_config(Variant::Ufcnn, levels, 16, 5);
    counts[levels] = parameter_count(cfg);
    rf[levels] = receptive_field(cfg);
    Network net = build_network(cfg, 1);
    CHECK(net.parameter_count() == counts[levels]);
  }
  const long long slope = counts[2] - counts[1];
  for (int levels = 2; levels <= 6; ++levels)
    CHECK(counts[levels] - counts[levels - 1] == slope);
  // memory grows geometrically: each added level doubles the increment
  for (int levels = 3; levels <= 6; ++levels)
    CHECK(rf[levels] - rf[levels - 1] == 2 * (rf[levels - 1] - rf[levels - 2]));
  CHECK(rf[6] > (1 << 6));
}

TEST_CASE("checkpoint round-trip preserves config and parameters exactly") {
  const std::string path = (std::filesystem::temp_directory_path() / "ufcnn_ckpt_test.json").string();
  NetworkConfig cfg = make_config(Variant::Ufcnn, 2, 3, 5);
  cfg.loss = LossKind::SquaredError;
  Network net = build_network(cfg, 77);
  Rng rng(78);
  // give biases nonzero values so the round-trip is non-trivial
  for (auto& ref : net.layers())
    for (double& b : ref.layer->bias) b = rng.normal();
  save_checkpoint(net, path);
  Network loaded = load_checkpoint(path);
  CHECK(loaded.config().variant == cfg.variant);
  CHECK(loaded.config().levels == cfg.levels);
  CHECK(loaded.config().filters == cfg.filters);
  CHECK(loaded.config().loss == cfg.loss);
  auto ra = net.layers();
  auto rb = loaded.layers();
  REQUIRE(ra.size() == rb.size());
  for (size_t i = 0; i < ra.size(); ++i) {
    CHECK(ra[i].name == rb[i].name);
    CHECK(ra[i].layer->weights == rb[i].layer->weights);
    CHECK(ra[i].layer->bias == rb[i].layer->bias);
  }
  SeqTensor x = random_tensor(1, 30, rng);
  CHECK(net.forward(x).data == loaded.forward(x).data);
  std::filesystem::remove(path);

  CHECK_THROWS_AS(load_checkpoint("/nonexistent/ckpt.json"), DataError);
}

TEST_CASE("checkpoint rejects a wrong format tag") {
  const std::string path = (std::filesystem::temp_directory_path() / "ufcnn_ckpt_bad.json").string();
  {
    FILE* f = fopen(path.c_str(), "w");
    REQUIRE(f);
    fputs("{\"format\":\"something-else\",\"config\":{},\"params\":{}}", f);
    fclose(f);
  }
  CHECK_THROWS_AS(load_checkpoint(path), DataError);
  std::filesystem::remove(path);
}

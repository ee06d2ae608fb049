// Copyright 2026 The s2lc Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end. Talks to the codec only through the C API.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "s2lc/s2lc.h"

namespace {

constexpr int kUsage = 1;
constexpr int kData = 2;

// Thrown for data errors; carries the library message.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(s2lc_status status) {
  if (status != S2LC_OK) {
    const std::string detail = s2lc_last_error();
    throw DataError(detail.empty() ? s2lc_status_name(status) : detail);
  }
}

struct WeightsDeleter {
  void operator()(s2lc_weights* w) const { s2lc_weights_free(w); }
};
struct ImageDeleter {
  void operator()(s2lc_image* i) const { s2lc_image_free(i); }
};
using WeightsPtr = std::unique_ptr<s2lc_weights, WeightsDeleter>;
using ImagePtr = std::unique_ptr<s2lc_image, ImageDeleter>;

class Buffer {
 public:
  Buffer() = default;
  Buffer(const Buffer&) = delete;
  Buffer& operator=(const Buffer&) = delete;
  ~Buffer() { s2lc_buffer_free(&raw_); }
  s2lc_buffer* get() { return &raw_; }
  const uint8_t* data() const { return raw_.data; }
  size_t size() const { return raw_.size; }

 private:
  s2lc_buffer raw_{nullptr, 0};
};

std::vector<uint8_t> read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::string& path, const uint8_t* data, size_t size) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(size));
  if (!out) throw DataError("cannot write " + path);
}

WeightsPtr load_weights(const std::string& path, int profile) {
  s2lc_weights* w = nullptr;
  check(s2lc_weights_load_file(path.c_str(), profile, &w));
  return WeightsPtr(w);
}

ImagePtr load_image(const std::string& path) {
  s2lc_image* img = nullptr;
  check(s2lc_image_read_ppm(path.c_str(), &img));
  return ImagePtr(img);
}

int parse_profile(const std::string& name) {
  int id = 0;
  check(s2lc_profile_parse(name.c_str(), &id));
  return id;
}

std::vector<s2lc_rd_point> read_curve(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("bpp,psnr", 0) != 0) {
    throw DataError(path + ": expected header 'bpp,psnr'");
  }
  std::vector<s2lc_rd_point> points;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    s2lc_rd_point p{};
    char comma = 0;
    if (!(fields >> p.bpp >> comma >> p.psnr) || comma != ',') {
      throw DataError(path + ":" + std::to_string(row) + ": malformed row");
    }
    points.push_back(p);
  }
  return points;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"s2lc learned image codec"};
  app.require_subcommand(1);

  std::string in, out, weights, profile_name, ref, test, anchor_csv, test_csv;
  double lambda = 0;
  double bits = 0;
  uint64_t seed = 0;

  auto* encode = app.add_subcommand("encode", "Compress a PPM image");
  encode->add_option("-i,--input", in, "input PPM")->required();
  encode->add_option("-w,--weights", weights, "weight archive")->required();
  encode->add_option("-o,--output", out, "output stream")->required();
  encode->add_option("--profile", profile_name, "desk or full")
      ->check(CLI::IsMember({"desk", "full"}));
  auto* lambda_opt = encode->add_option("--lambda", lambda, "rate-distortion preset to report");

  auto* decode = app.add_subcommand("decode", "Reconstruct a PPM image");
  decode->add_option("-i,--input", in, "input stream")->required();
  decode->add_option("-w,--weights", weights, "weight archive")->required();
  decode->add_option("-o,--output", out, "output PPM")->required();

  auto* inspect = app.add_subcommand("inspect", "Write the mean |latent| map as PGM");
  inspect->add_option("-i,--input", in, "input stream")->required();
  inspect->add_option("-w,--weights", weights, "weight archive")->required();
  inspect->add_option("-o,--output", out, "output PGM")->required();

  auto* metrics = app.add_subcommand("metrics", "PSNR, bpp and RD loss per preset");
  metrics->add_option("--ref", ref, "reference PPM")->required();
  metrics->add_option("--test", test, "test PPM")->required();
  metrics->add_option("--bits", bits, "coded size in bits")->required()->check(CLI::NonNegativeNumber);

  auto* bdrate = app.add_subcommand("bdrate", "BD-Rate of two bpp,psnr curves");
  bdrate->add_option("--anchor", anchor_csv, "anchor CSV")->required();
  bdrate->add_option("--test", test_csv, "test CSV")->required();

  auto* gen = app.add_subcommand("genweights", "Write a deterministic pseudo-random archive");
  gen->add_option("--profile", profile_name, "desk or full")
      ->required()
      ->check(CLI::IsMember({"desk", "full"}));
  gen->add_option("-o,--output", out, "output archive")->required();
  gen->add_option("--seed", seed, "generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return kUsage;
  }

  try {
    if (*encode) {
      const int profile = profile_name.empty() ? S2LC_PROFILE_ANY : parse_profile(profile_name);
      if (*lambda_opt) {
        const double* presets = nullptr;
        const size_t n = s2lc_lambda_presets(&presets);
        bool known = false;
        for (size_t i = 0; i < n; ++i) known = known || presets[i] == lambda;
        if (!known) {
          std::cerr << "--lambda must be one of 0.0018 0.0035 0.0075 0.013 0.025 0.048\n";
          return kUsage;
        }
      }
      const auto w = load_weights(weights, profile);
      const auto img = load_image(in);
      Buffer stream;
      s2lc_encode_stats stats{};
      check(s2lc_encode(w.get(), img.get(), profile, stream.get(), &stats));
      write_bytes(out, stream.data(), stream.size());
      std::printf("bytes %llu\nbpp %.6f\npsnr %.4f\n",
                  static_cast<unsigned long long>(stats.stream_bytes), stats.bpp, stats.psnr);
      if (*lambda_opt) {
        double bpp = 0, loss = 0;
        const uint64_t pixels = uint64_t{s2lc_image_width(img.get())} * s2lc_image_height(img.get());
        check(s2lc_rd_loss(8.0 * static_cast<double>(stats.stream_bytes), pixels, stats.mse, lambda,
                           &bpp, &loss));
        std::printf("rd_loss %.6f (lambda %g)\n", loss, lambda);
      }
    } else if (*decode) {
      const auto bytes = read_bytes(in);
      int profile = 0;
      check(s2lc_stream_profile(bytes.data(), bytes.size(), &profile));
      const auto w = load_weights(weights, profile);
      s2lc_image* raw = nullptr;
      check(s2lc_decode(w.get(), bytes.data(), bytes.size(), &raw));
      const ImagePtr img(raw);
      check(s2lc_image_write_ppm(img.get(), out.c_str()));
    } else if (*inspect) {
      const auto bytes = read_bytes(in);
      int profile = 0;
      check(s2lc_stream_profile(bytes.data(), bytes.size(), &profile));
      const auto w = load_weights(weights, profile);
      Buffer pgm;
      check(s2lc_inspect(w.get(), bytes.data(), bytes.size(), pgm.get()));
      write_bytes(out, pgm.data(), pgm.size());
    } else if (*metrics) {
      const auto a = load_image(ref);
      const auto b = load_image(test);
      double mse = 0, psnr = 0;
      check(s2lc_mse(a.get(), b.get(), &mse));
      check(s2lc_psnr(a.get(), b.get(), &psnr));
      const uint64_t pixels = uint64_t{s2lc_image_width(a.get())} * s2lc_image_height(a.get());
      std::printf("psnr %.4f\nmse %.6f\n", psnr, mse);
      const double* presets = nullptr;
      const size_t n = s2lc_lambda_presets(&presets);
      double bpp = 0, loss = 0;
      for (size_t i = 0; i < n; ++i) {
        check(s2lc_rd_loss(bits, pixels, mse, presets[i], &bpp, &loss));
        if (i == 0) std::printf("bpp %.6f\n", bpp);
        std::printf("rd_loss lambda=%g %.6f\n", presets[i], loss);
      }
    } else if (*bdrate) {
      const auto a = read_curve(anchor_csv);
      const auto b = read_curve(test_csv);
      double percent = 0;
      check(s2lc_bd_rate(a.data(), a.size(), b.data(), b.size(), &percent));
      std::printf("bd_rate %.6f%%\n", percent);
    } else if (*gen) {
      s2lc_weights* raw = nullptr;
      check(s2lc_weights_generate(parse_profile(profile_name), seed, &raw));
      const WeightsPtr w(raw);
      Buffer archive;
      check(s2lc_weights_serialize(w.get(), archive.get()));
      write_bytes(out, archive.data(), archive.size());
    }
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  }
  return 0;
}

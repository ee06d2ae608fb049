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

#ifndef S2LC_S2LC_H_
#define S2LC_S2LC_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(S2LC_BUILDING_LIBRARY)
#define S2LC_API __declspec(dllexport)
#else
#define S2LC_API __declspec(dllimport)
#endif
#else
#define S2LC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum s2lc_status {
  S2LC_OK = 0,
  S2LC_ERR_ARGUMENT = 1,   /* null pointer or out-of-range argument */
  S2LC_ERR_SHAPE = 2,
  S2LC_ERR_CONFIG = 3,     /* profile / weight mismatch */
  S2LC_ERR_FORMAT = 4,     /* malformed stream, archive or image */
  S2LC_ERR_TRUNCATED = 5,
  S2LC_ERR_CHECKSUM = 6,
  S2LC_ERR_CONTRACT = 7,
  S2LC_ERR_DOMAIN = 8,
  S2LC_ERR_IO = 9,
  S2LC_ERR_MEMORY = 10,
  S2LC_ERR_INTERNAL = 11
} s2lc_status;

typedef enum s2lc_profile { S2LC_PROFILE_DESK = 0, S2LC_PROFILE_FULL = 1 } s2lc_profile;

/* Pass where a profile is optional. */
#define S2LC_PROFILE_ANY (-1)

typedef struct s2lc_weights s2lc_weights;
typedef struct s2lc_image s2lc_image;

/* Library-owned bytes; release with s2lc_buffer_free. */
typedef struct s2lc_buffer {
  uint8_t* data;
  size_t size;
} s2lc_buffer;

typedef struct s2lc_encode_stats {
  uint64_t stream_bytes;
  double bpp;   /* 8 * stream_bytes / (width * height) */
  double mse;   /* against the reconstruction, [0, 255] scale */
  double psnr;
} s2lc_encode_stats;

typedef struct s2lc_rd_point {
  double bpp;
  double psnr;
} s2lc_rd_point;

/* Message for the last failing call on this thread; never NULL. */
S2LC_API const char* s2lc_last_error(void);
S2LC_API const char* s2lc_status_name(s2lc_status status);
S2LC_API void s2lc_buffer_free(s2lc_buffer* buffer);

/* "desk" or "full". */
S2LC_API s2lc_status s2lc_profile_parse(const char* name, int* profile);

S2LC_API s2lc_status s2lc_weights_generate(int profile, uint64_t seed, s2lc_weights** out);
/* profile may be S2LC_PROFILE_ANY to infer it from the archive. */
S2LC_API s2lc_status s2lc_weights_load(const uint8_t* data, size_t size, int profile,
                                       s2lc_weights** out);
S2LC_API s2lc_status s2lc_weights_load_file(const char* path, int profile, s2lc_weights** out);
S2LC_API s2lc_status s2lc_weights_serialize(const s2lc_weights* weights, s2lc_buffer* out);
S2LC_API s2lc_status s2lc_weights_profile(const s2lc_weights* weights, int* profile);
S2LC_API uint64_t s2lc_weights_checksum(const s2lc_weights* weights);
S2LC_API void s2lc_weights_free(s2lc_weights* weights);

/* rgb holds width * height interleaved 8-bit triples. */
S2LC_API s2lc_status s2lc_image_create(uint32_t width, uint32_t height, const uint8_t* rgb,
                                       s2lc_image** out);
S2LC_API s2lc_status s2lc_image_parse_ppm(const uint8_t* data, size_t size, s2lc_image** out);
S2LC_API s2lc_status s2lc_image_read_ppm(const char* path, s2lc_image** out);
S2LC_API s2lc_status s2lc_image_write_ppm(const s2lc_image* image, const char* path);
S2LC_API uint32_t s2lc_image_width(const s2lc_image* image);
S2LC_API uint32_t s2lc_image_height(const s2lc_image* image);
S2LC_API const uint8_t* s2lc_image_pixels(const s2lc_image* image);
S2LC_API void s2lc_image_free(s2lc_image* image);

/* profile may be S2LC_PROFILE_ANY; otherwise it must match the weights.
   stats may be NULL, which also skips the reconstruction pass. */
S2LC_API s2lc_status s2lc_encode(const s2lc_weights* weights, const s2lc_image* image, int profile,
                                 s2lc_buffer* stream, s2lc_encode_stats* stats);
S2LC_API s2lc_status s2lc_decode(const s2lc_weights* weights, const uint8_t* stream, size_t size,
                                 s2lc_image** out);
S2LC_API s2lc_status s2lc_stream_profile(const uint8_t* stream, size_t size, int* profile);
/* Binary PGM of the mean |y_hat| map. */
S2LC_API s2lc_status s2lc_inspect(const s2lc_weights* weights, const uint8_t* stream, size_t size,
                                  s2lc_buffer* pgm);

S2LC_API s2lc_status s2lc_mse(const s2lc_image* a, const s2lc_image* b, double* out);
S2LC_API s2lc_status s2lc_psnr(const s2lc_image* a, const s2lc_image* b, double* out);
S2LC_API s2lc_status s2lc_rd_loss(double rate_bits, uint64_t pixels, double mse, double lambda,
                                  double* bpp, double* loss);
/* Number of presets; *out points at static storage. */
S2LC_API size_t s2lc_lambda_presets(const double** out);
S2LC_API s2lc_status s2lc_bd_rate(const s2lc_rd_point* anchor, size_t anchor_count,
                                  const s2lc_rd_point* test, size_t test_count, double* percent);

#ifdef __cplusplus
}
#endif

#endif  // S2LC_S2LC_H_

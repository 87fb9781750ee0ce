// Copyright 2026 The Relay Authors.
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

#include "relay/rate_limiter.h"

#include <cfloat>
#include <cmath>

#include "absl/strings/str_cat.h"

namespace relay {

absl::StatusOr<RateLimiterConfig> RateLimiterConfig::SampleToInsertRatio(
    int64_t min_size_to_sample, double samples_per_insert,
    double error_buffer) {
  if (!(error_buffer > 0) || !std::isfinite(error_buffer)) {
    return absl::InvalidArgumentError(
        absl::StrCat("error_buffer must be > 0, got ", error_buffer));
  }
  RateLimiterConfig config{min_size_to_sample, samples_per_insert,
                           -error_buffer, error_buffer};
  if (auto status = config.Validate(); !status.ok()) return status;
  return config;
}

absl::StatusOr<RateLimiterConfig> RateLimiterConfig::MinSize(int64_t min_size) {
  RateLimiterConfig config{min_size, 1.0, -DBL_MAX, DBL_MAX};
  if (auto status = config.Validate(); !status.ok()) return status;
  return config;
}

absl::StatusOr<RateLimiterConfig> RateLimiterConfig::Queue(int64_t queue_size) {
  if (queue_size < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("queue_size must be >= 1, got ", queue_size));
  }
  return RateLimiterConfig{0, 1.0, 0.0, static_cast<double>(queue_size)};
}

absl::Status RateLimiterConfig::Validate() const {
  if (min_size_to_sample < 0) {
    return absl::InvalidArgumentError(absl::StrCat(
        "min_size_to_sample must be >= 0, got ", min_size_to_sample));
  }
  if (!(samples_per_insert > 0) || !std::isfinite(samples_per_insert)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "samples_per_insert must be > 0, got ", samples_per_insert));
  }
  if (std::isnan(min_diff) || std::isnan(max_diff) || min_diff > max_diff) {
    return absl::InvalidArgumentError(absl::StrCat(
        "need min_diff <= max_diff, got ", min_diff, " and ", max_diff));
  }
  return absl::OkStatus();
}

std::string RateLimiterConfig::DebugString() const {
  return absl::StrCat("RateLimiter(min_size_to_sample=", min_size_to_sample,
                      ", samples_per_insert=", samples_per_insert,
                      ", min_diff=", min_diff, ", max_diff=", max_diff, ")");
}

bool RateLimiter::CanInsert(int64_t) const {
  return diff() + config_.samples_per_insert <= config_.max_diff;
}

bool RateLimiter::CanSample(int64_t table_size) const {
  return table_size >= config_.min_size_to_sample &&
         diff() - 1.0 >= config_.min_diff;
}

}  // namespace relay

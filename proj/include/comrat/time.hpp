// Copyright 2026 The CoMRAT Authors
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

#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace comrat {

using Timestamp = std::chrono::sys_seconds;

/// Parses an ISO 8601 instant such as "2019-03-04T12:00:00Z" or
/// "2019-03-04T14:00:00+02:00". Fractional seconds are truncated.
std::optional<Timestamp> parse_iso8601(std::string_view text);

/// Formats as "YYYY-MM-DDTHH:MM:SSZ".
std::string format_iso8601(Timestamp ts);

int utc_year(Timestamp ts);

/// Source of "now" and of blocking waits. Ingest and the rate limiter only
/// touch time through this interface.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual Timestamp now() const = 0;
  virtual void sleep_until(Timestamp when) = 0;
  virtual void sleep_for(std::chrono::seconds d) { sleep_until(now() + d); }
};

class SystemClock final : public Clock {
 public:
  Timestamp now() const override;
  void sleep_until(Timestamp when) override;
};

}  // namespace comrat

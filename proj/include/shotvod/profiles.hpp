#pragma once

#include <cstdint>
#include <span>

#include "shotvod/types.hpp"

namespace shotvod {

/// One shot of the reference timing table: its recorded size and the storage
/// times reported for the per-file system ("old") and the segmented one ("new").
struct ReferenceProfile {
  ShotId shot_no = 0;
  double length_s = 0.0;
  double size_mb = 0.0;
  std::uint64_t frames = 0;
  double old_time_s = 0.0;
  double new_time_s = 0.0;

  /// Payload size in bytes (decimal megabytes).
  std::uint64_t size_bytes() const noexcept {
    return static_cast<std::uint64_t>(size_mb * 1e6 + 0.5);
  }
  double reference_ratio() const noexcept { return old_time_s / new_time_s; }
};

/// The six reference shots, in table order.
std::span<const ReferenceProfile> reference_profiles() noexcept;

/// Throws Errc::unknown_profile.
const ReferenceProfile& find_profile(ShotId shot_no);

}  // namespace shotvod

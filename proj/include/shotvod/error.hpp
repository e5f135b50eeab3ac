#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace shotvod {

/// Failure categories shared by every module. Each value names the condition
/// the caller can act on; the message carries the detail.
enum class Errc {
  usage_error,
  path_unwritable,
  catalog_corrupt,
  store_locked,
  duplicate_shot,
  time_order_violation,
  dimension_mismatch,
  io_failure,
  empty_shot,
  unknown_shot,
  index_out_of_range,
  invalid_stride,
  malformed_message,
  connect_failure,
  timeout,
  malformed_ack,
  unknown_profile,
  bind_failure,
  missing_times_file,
  frame_count_mismatch,
  corrupt_frame,
  empty_input,
  sink_failure,
  not_avi,
  truncated_file,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace shotvod

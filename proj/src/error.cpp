#include "shotvod/error.hpp"

namespace shotvod {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::usage_error: return "UsageError";
    case Errc::path_unwritable: return "PathUnwritable";
    case Errc::catalog_corrupt: return "CatalogCorrupt";
    case Errc::store_locked: return "StoreLocked";
    case Errc::duplicate_shot: return "DuplicateShot";
    case Errc::time_order_violation: return "TimeOrderViolation";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::io_failure: return "IoFailure";
    case Errc::empty_shot: return "EmptyShot";
    case Errc::unknown_shot: return "UnknownShot";
    case Errc::index_out_of_range: return "IndexOutOfRange";
    case Errc::invalid_stride: return "InvalidStride";
    case Errc::malformed_message: return "MalformedMessage";
    case Errc::connect_failure: return "ConnectFailure";
    case Errc::timeout: return "Timeout";
    case Errc::malformed_ack: return "MalformedAck";
    case Errc::unknown_profile: return "UnknownProfile";
    case Errc::bind_failure: return "BindFailure";
    case Errc::missing_times_file: return "MissingTimesFile";
    case Errc::frame_count_mismatch: return "FrameCountMismatch";
    case Errc::corrupt_frame: return "CorruptFrame";
    case Errc::empty_input: return "EmptyInput";
    case Errc::sink_failure: return "SinkFailure";
    case Errc::not_avi: return "NotAvi";
    case Errc::truncated_file: return "TruncatedFile";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

}  // namespace shotvod

#include "fz/error.hpp"

namespace fz {

const char* errc_name(errc code) {
  switch (code) {
    case errc::shape_mismatch: return "ShapeMismatch";
    case errc::range_violation: return "RangeViolation";
    case errc::non_finite: return "NonFinite";
    case errc::empty_input: return "EmptyInput";
    case errc::unknown_symbol: return "UnknownSymbol";
    case errc::truncated_stream: return "TruncatedStream";
    case errc::prior_mismatch: return "PriorMismatch";
    case errc::bad_magic: return "BadMagic";
    case errc::version_mismatch: return "VersionMismatch";
    case errc::prior_hash_mismatch: return "PriorHashMismatch";
    case errc::channel_closed: return "ChannelClosed";
    case errc::checksum_failure: return "ChecksumFailure";
    case errc::degenerate_geometry: return "DegenerateGeometry";
    case errc::no_valid_sample: return "NoValidSample";
    case errc::degenerate_box: return "DegenerateBox";
    case errc::parse_error: return "ParseError";
    case errc::io_error: return "IoError";
  }
  return "Error";
}

}  // namespace fz

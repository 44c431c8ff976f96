#pragma once

#include <iosfwd>
#include <string>

#include "fz/types.hpp"

namespace fz {

// FZTRACK v1: line-oriented text, one frame per line after the header.
//
//   #FZTRACK v1 n_sup=33 n_unsup=10 jac=1 M=16
//   frame_index yaw eyes_open x1 y1 ... j1 ... jK e1 ... eM
//
// Coordinates are absolute normalized positions; the loader decomposes
// them into mean + offsets. Values are space-separated decimal reals
// printed with enough digits to round-trip.

PoseTrack read_track(std::istream& in, ClampStats* stats = nullptr);
PoseTrack read_track_file(const std::string& path, ClampStats* stats = nullptr);

void write_track(std::ostream& out, const PoseTrack& track);
void write_track_file(const std::string& path, const PoseTrack& track);

}  // namespace fz

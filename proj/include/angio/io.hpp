#pragma once

#include <string>
#include <vector>

#include "angio/image.hpp"

namespace angio {

/// Load an 8-bit grayscale frame. The container is detected from the file
/// signature: binary PGM (P5, maxval 255) or 8-bit grayscale PNG.
/// Intensities are mapped v/255 into [0,1].
Image load_frame(const std::string& path);

/// Save a frame as 8-bit PGM or PNG depending on the path extension
/// (".png" -> PNG, anything else -> PGM). Values are quantized with
/// round-half-away-from-zero and clamped to [0,255].
void save_frame(const Image& img, const std::string& path);

/// Middlebury .flo: float magic 202021.25, int32 width, int32 height,
/// then row-major interleaved float (u,v). All values little-endian.
FlowField read_flow(const std::string& path);
void write_flow(const FlowField& flow, const std::string& path);

/// Depth maps travel in the same .flo container with the v channel zeroed;
/// reading validates that every depth is strictly positive.
DepthMap read_depth(const std::string& path);
void write_depth(const DepthMap& depth, const std::string& path);

/// Sorted list of frame files (*.pgm, *.png) in a directory.
std::vector<std::string> list_frame_files(const std::string& dir);

/// Load every frame in a directory in filename order.
std::vector<Image> load_frame_dir(const std::string& dir);

} // namespace angio

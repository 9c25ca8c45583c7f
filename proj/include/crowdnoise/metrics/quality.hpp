#pragma once

#include "crowdnoise/labelcraft/types.hpp"

#include <span>
#include <vector>

namespace crowdnoise::metrics {

using labelcraft::DensityMap;

inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;

/// Mean local SSIM over every 11x11 window position lying fully inside the
/// maps (Gaussian weights, sigma 1.5). Maps smaller than the window are
/// zero-padded. Data range is the larger of the two maxima.
double ssim(const DensityMap& pred, const DensityMap& gt);

/// PSNR in dB after scaling both maps so the ground-truth peak maps to 255.
/// Identical maps give +infinity.
double psnr(const DensityMap& pred, const DensityMap& gt);

/// Normalized 1D Gaussian taps of the SSIM window.
std::vector<double> ssim_taps();

/// Zero-pads on the bottom/right to at least the given size.
DensityMap pad_to(const DensityMap& map, std::size_t height, std::size_t width);

}  // namespace crowdnoise::metrics
